"""Command-line front end.

Every command writes one JSON document ``{command, scenario, report,
numeric_policy, seed}`` to stdout (``sweep`` writes CSV by default). Exit
status: 0 when all verdicts are acceptable, 1 when a distillation verdict is
FAILED or an instrument is INVALID, 2 for bad arguments.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from sepdistill.analysis import BoundKind, bipartitions, bound_check, cut_ranks, pencil_min_rank
from sepdistill.channel import Completeness, Verdict, completeness_report, distillation_report
from sepdistill.instruments import make_instrument, make_protocol
from sepdistill.locc import ProtocolProgram, branch_survival_check, simulate_protocol
from sepdistill.policy import get_policy, policy_override
from sepdistill.search import SearchConfig, pad_instrument, sep_feasibility_search
from sepdistill.states import Family, InvalidSpecError, ghz, make_state_pair, mix_pair, spec_for

INSTRUMENT_FAMILIES = (Family.THM1_SEP, Family.THM1_LOCC, Family.EX_2x4,
                       Family.THM2_I, Family.THM2_II, Family.THM2_III)
PROTOCOL_FAMILIES = (Family.THREE_QUBIT, Family.THM1_LOCC, Family.EX_2x4, Family.THM2_III)
W_GRID = tuple(round(0.1 * j, 1) for j in range(1, 10))


class UsageError(Exception):
    pass


# -- serialization --------------------------------------------------------------

def format_float(x: float) -> str:
    """17 significant digits; integral values keep a trailing ``.0``."""
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def _encode(obj: Any) -> str:
    """JSON text with floats at 17 significant digits."""
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format_float(x) if math.isfinite(x) else json.dumps(None)
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return _encode(obj) + "\n"


# -- scenario helpers -------------------------------------------------------------

def _spec(args):
    if args.family is None:
        raise UsageError("--family is required for this command")
    family = Family(args.family)
    return family, spec_for(family, args.d, args.k1, args.k2, args.k3)


def _scenario(args, family=None, spec=None) -> dict:
    out = {"family": family.value if family else None}
    if spec is not None:
        out.update(spec.to_dict())
    out["w"] = args.w
    return out


def _pair_and_rho(family, spec, w):
    psi1, psi2 = make_state_pair(family, spec)
    return psi1, psi2, mix_pair(psi1, psi2, w)


def _default_levels(prog: ProtocolProgram, d: int) -> list[int]:
    # traced-out parties hold none of the target's entanglement
    return [1 if k in prog.trace_out else d for k in range(len(prog.dims))]


# -- commands ---------------------------------------------------------------------

def cmd_construct(args) -> tuple[dict, dict, int]:
    family, spec = _spec(args)
    psi1, psi2, rho = _pair_and_rho(family, spec, args.w)
    report = {"psi1": psi1.to_dict(), "psi2": psi2.to_dict(),
              "rho_eigenvalues": [float(x) for x in rho.eigenvalues[:2]],
              "schmidt_ranks": {"psi1": list(cut_ranks(psi1)), "psi2": list(cut_ranks(psi2))}}
    if family in INSTRUMENT_FAMILIES:
        report["instrument"] = make_instrument(family, spec).to_dict()
    if family in PROTOCOL_FAMILIES:
        report["protocol"] = make_protocol(family, spec).to_dict()
    return _scenario(args, family, spec), report, 0


def _verdict_exit(*reports) -> int:
    for r in reports:
        if r.verdict is Verdict.FAILED:
            return 1
        if r.completeness is not None and r.completeness.verdict is Completeness.INVALID:
            return 1
    return 0


def cmd_verify(args) -> tuple[dict, dict, int]:
    family, spec = _spec(args)
    psi1, psi2, rho = _pair_and_rho(family, spec, args.w)
    if family in INSTRUMENT_FAMILIES:
        dist = distillation_report(rho, make_instrument(family, spec), psi1)
    elif family is Family.THREE_QUBIT:
        prog = make_protocol(family, spec)
        dist = distillation_report(rho, prog, prog.target)
    else:
        raise UsageError(f"{family.value} has no constructed instrument; try `search` or `pencil`")
    return _scenario(args, family, spec), dist.to_dict(), _verdict_exit(dist)


def cmd_protocol(args) -> tuple[dict, dict, int]:
    family, spec = _spec(args)
    if args.program:
        with open(args.program) as fh:
            prog = ProtocolProgram.from_dict(json.load(fh))
    elif family in PROTOCOL_FAMILIES:
        prog = make_protocol(family, spec)
    else:
        raise UsageError(f"{family.value} has no LOCC program")
    psi1, psi2, rho = _pair_and_rho(family, spec, args.w)
    leaves = simulate_protocol(rho, prog)
    dist = distillation_report(rho, prog, prog.target)
    levels = args.levels if args.levels else _default_levels(prog, spec.d)
    survival = branch_survival_check(prog, psi1, psi2, levels)
    report = {"rounds": prog.n_rounds,
              "leaves": [{"label": list(leaf.label), "probability": leaf.probability} for leaf in leaves],
              "distillation": dist.to_dict(),
              "survival": {"levels": list(levels), **survival.to_dict()}}
    return _scenario(args, family, spec), report, _verdict_exit(dist)


def cmd_pencil(args) -> tuple[dict, dict, int]:
    family, spec = _spec(args)
    psi1, psi2 = make_state_pair(family, spec)
    rows = []
    for cut in bipartitions(len(spec.dims)):
        res = pencil_min_rank(psi1, psi2, cut, samples=args.samples, seed=args.seed)
        rows.append({"cut": list(cut), "min_rank": res.min_rank,
                     "witness": [list((z.real, z.imag)) for z in res.witness],
                     "evaluated": res.n_evaluated, "at_least_d": res.min_rank >= spec.d})
    return _scenario(args, family, spec), {"d": spec.d, "cuts": rows}, 0


def cmd_bounds(args) -> tuple[dict, dict, int]:
    if args.kind is None or args.dims is None or args.d is None:
        raise UsageError("bounds needs --kind, --dims and --d")
    ok = bound_check(args.kind, args.dims, args.d)
    scenario = {"kind": BoundKind(args.kind).value, "dims": list(args.dims), "d": args.d}
    return scenario, {"satisfied": ok}, 0


def cmd_search(args) -> tuple[dict, dict, int]:
    family, spec = _spec(args)
    psi1, psi2 = make_state_pair(family, spec)
    cfg = SearchConfig(n_kraus=args.n_kraus, restarts=args.restarts, max_iter=args.max_iter,
                       seed=args.seed, tol=args.tol, workers=args.workers)
    warm = None
    if args.warm_start == "printed":
        if family not in INSTRUMENT_FAMILIES:
            raise UsageError(f"{family.value} has no printed instrument to warm-start from")
        warm = make_instrument(family, spec)
        if len(warm) < cfg.n_kraus:
            warm = pad_instrument(warm, cfg.n_kraus, np.random.default_rng([args.seed, 10**6]))
    result = sep_feasibility_search(psi1, psi2, psi1, cfg, warm_start=warm)
    return _scenario(args, family, spec), result.to_dict(), 0


SWEEP_COLUMNS = ["family", "d", "k1", "k2", "k3", "w", "verdict", "transferred", "min_fidelity",
                 "completeness", "complete_or_subnormalized", "schmidt_rank_d", "filters_to_psi1"]


def _splits(family: Family, d: int):
    if family is Family.THM1_SEP:
        return [(k1, d - k1, None) for k1 in range(1, d)]
    if family is Family.THM2_I:
        return [(0, k2, d - k2) for k2 in range(1, d)]
    if family is Family.THM2_II:
        return [(k1, k2, d - k1 - k2) for k1 in range(1, d) for k2 in range(1, d - k1)]
    return [(None, None, None)]


def sweep_rows(families: Sequence[Family], d_max: int, w_grid: Sequence[float]) -> list[dict]:
    rows = []
    for family in families:
        d_values = [2] if family in (Family.EX_2x4, Family.THREE_QUBIT) else range(2, d_max + 1)
        for d in d_values:
            for k1, k2, k3 in _splits(family, d):
                spec = spec_for(family, d, k1, k2, k3)
                psi1, psi2 = make_state_pair(family, spec)
                ranks_ok = all(r == d for r in cut_ranks(psi1) + cut_ranks(psi2))
                if family is Family.THREE_QUBIT:
                    op, target, comp = make_protocol(family, spec), ghz(2, 2), None
                else:
                    op, target = make_instrument(family, spec), psi1
                    comp = completeness_report(op).verdict
                for w in w_grid:
                    rep = distillation_report(mix_pair(psi1, psi2, w), op, target)
                    rows.append({"family": family.value, "d": d, "k1": spec.k[0], "k2": spec.k[1],
                                 "k3": spec.k[2] if len(spec.k) > 2 else "",
                                 "w": w, "verdict": rep.verdict.value, "transferred": rep.transferred,
                                 "min_fidelity": rep.min_fidelity,
                                 "completeness": comp.value if comp else "PROTOCOL",
                                 "complete_or_subnormalized": comp is not Completeness.INVALID,
                                 "schmidt_rank_d": ranks_ok,
                                 "filters_to_psi1": rep.verdict is not Verdict.FAILED})
    return rows


def cmd_sweep(args) -> tuple[dict, Any, int]:
    families = [Family(f) for f in args.families] if args.families else \
        list(INSTRUMENT_FAMILIES) + [Family.THREE_QUBIT]
    rows = sweep_rows(families, args.d_max, args.w_grid or W_GRID)
    bad = any(not (r["complete_or_subnormalized"] and r["filters_to_psi1"]) for r in rows)
    scenario = {"families": [f.value for f in families], "d_max": args.d_max,
                "w_grid": list(args.w_grid or W_GRID)}
    return scenario, rows, int(bad)


def _rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in (r[c] for c in SWEEP_COLUMNS)])
    return buf.getvalue()


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "protocol": cmd_protocol,
            "pencil": cmd_pencil, "bounds": cmd_bounds, "search": cmd_search, "sweep": cmd_sweep}


# -- argument parsing ---------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults (keys are option names)")
    common.add_argument("--family", choices=[f.value for f in Family])
    common.add_argument("--d", type=int)
    common.add_argument("--k1", type=int)
    common.add_argument("--k2", type=int)
    common.add_argument("--k3", type=int)
    common.add_argument("--w", type=float, default=0.5, help="mixing weight of psi1")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--rank-tol", type=float, help="relative rank / completeness tolerance")
    common.add_argument("--prob-floor", type=float, help="smallest probability given a post-state")

    parser = argparse.ArgumentParser(prog="sepdistill", allow_abbrev=False,
                                     description="Verify single-copy distillation scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("construct", "verify"):
        sub.add_parser(name, parents=[common], allow_abbrev=False)
    p = sub.add_parser("protocol", parents=[common], allow_abbrev=False)
    p.add_argument("--program", help="JSON protocol program to run instead of the family's")
    p.add_argument("--levels", type=_int_list, help="required local ranks per party for the survival check")
    p = sub.add_parser("pencil", parents=[common], allow_abbrev=False)
    p.add_argument("--samples", type=int, default=1000)
    p = sub.add_parser("bounds", parents=[common], allow_abbrev=False)
    p.add_argument("--kind", choices=[k.value for k in BoundKind])
    p.add_argument("--dims", type=_int_list)
    p = sub.add_parser("search", parents=[common], allow_abbrev=False)
    p.add_argument("--n-kraus", type=int, default=2)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--warm-start", choices=["none", "printed"], default="none")
    p = sub.add_parser("sweep", parents=[common], allow_abbrev=False)
    p.add_argument("--families", type=lambda s: s.split(","))
    p.add_argument("--d-max", type=int, default=4)
    p.add_argument("--w-grid", type=_float_list)
    return parser


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(k.replace("-", "_") for k in config) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
        args = parser.parse_args(argv)
    return args


def execute_command(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        with contextlib.redirect_stderr(stderr):
            args = parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {}
    if args.rank_tol is not None:
        overrides["rel_tol"] = args.rank_tol
    if args.prob_floor is not None:
        overrides["prob_floor"] = args.prob_floor
    try:
        with policy_override(**overrides):
            scenario, report, code = COMMANDS[args.command](args)
            policy = get_policy().to_dict()
    except (UsageError, InvalidSpecError, ValueError) as exc:
        print(f"sepdistill {args.command}: error: {exc}", file=stderr)
        return 2
    fmt = args.format or ("csv" if args.command == "sweep" else "json")
    if fmt == "csv":
        if args.command != "sweep":
            print("sepdistill: --format csv is only available for sweep", file=stderr)
            return 2
        stdout.write(_rows_to_csv(report))
    else:
        stdout.write(dumps({"command": args.command, "scenario": scenario, "report": report,
                            "numeric_policy": policy, "seed": args.seed}))
    return code


def main() -> None:
    sys.exit(execute_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
