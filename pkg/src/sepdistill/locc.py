"""Finite LOCC protocol trees.

A :class:`Round` is one party's local measurement. Each outcome may apply
local unitary corrections (possibly by another party, after the outcome is
broadcast) and may continue with a further round. Leaves carry the
accumulated branch operator as a :class:`ProductKraus`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from sepdistill import numlin
from sepdistill.instruments import ProductKraus, _matrix_from_json, _matrix_to_json
from sepdistill.policy import get_policy
from sepdistill.states import DensityMatrix, PureState


class LOCCViolation(ValueError):
    """A round's local instrument is not trace preserving, or a correction is not unitary."""


@dataclass(frozen=True)
class Outcome:
    corrections: tuple[tuple[int, np.ndarray], ...] = ()
    next: "Round | None" = None


@dataclass(frozen=True)
class Round:
    party: int
    operators: tuple[np.ndarray, ...]
    outcomes: tuple[Outcome, ...] = field(default=())

    def __post_init__(self):
        ops = tuple(numlin.as_matrix(op) for op in self.operators)
        object.__setattr__(self, "operators", ops)
        outs = tuple(self.outcomes) or tuple(Outcome() for _ in ops)
        if len(outs) != len(ops):
            raise ValueError("need exactly one outcome entry per measurement operator")
        object.__setattr__(self, "outcomes", outs)


@dataclass(frozen=True)
class ProtocolProgram:
    dims: tuple[int, ...]
    root: Round
    target: PureState
    trace_out: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "trace_out", tuple(sorted(self.trace_out)))
        self.validate()

    @property
    def kept(self) -> tuple[int, ...]:
        return tuple(k for k in range(len(self.dims)) if k not in self.trace_out)

    def validate(self) -> None:
        tol = get_policy().rel_tol
        for rnd in self.iter_rounds():
            n = self.dims[rnd.party]
            effects = sum(op.conj().T @ op for op in rnd.operators)
            if numlin.max_abs(effects - np.eye(n)) > tol:
                raise LOCCViolation(f"round on party {rnd.party} is not a complete local measurement")
            for out in rnd.outcomes:
                for party, u in out.corrections:
                    u = numlin.as_matrix(u)
                    if u.shape != (self.dims[party],) * 2 or numlin.max_abs(u.conj().T @ u - np.eye(u.shape[0])) > tol:
                        raise LOCCViolation(f"correction on party {party} is not unitary")
        if self.target.dims != tuple(self.dims[k] for k in self.kept):
            raise numlin.DimensionError("target dims do not match the kept parties")

    def iter_rounds(self) -> Iterator[Round]:
        stack = [self.root]
        while stack:
            rnd = stack.pop()
            yield rnd
            stack.extend(o.next for o in reversed(rnd.outcomes) if o.next is not None)

    @property
    def n_rounds(self) -> int:
        """Communication rounds on the longest branch; a correction made by a
        party other than the one that measured counts as a round."""
        def depth(rnd: Round) -> int:
            best = 0
            for out in rnd.outcomes:
                extra = 1 if any(p != rnd.party for p, _ in out.corrections) else 0
                best = max(best, extra + (depth(out.next) if out.next else 0))
            return 1 + best
        return depth(self.root)

    def to_dict(self) -> dict:
        def enc(rnd: Round) -> dict:
            return {"party": rnd.party,
                    "operators": [_matrix_to_json(op) for op in rnd.operators],
                    "outcomes": [{"corrections": [{"party": p, "unitary": _matrix_to_json(numlin.as_matrix(u))}
                                                  for p, u in o.corrections],
                                  "next": enc(o.next) if o.next else None} for o in rnd.outcomes]}
        return {"dims": list(self.dims), "trace_out": list(self.trace_out),
                "target": self.target.to_dict(), "rounds": enc(self.root)}

    @classmethod
    def from_dict(cls, data: dict) -> "ProtocolProgram":
        def dec(node: dict) -> Round:
            outs = tuple(Outcome(tuple((c["party"], _matrix_from_json(c["unitary"])) for c in o["corrections"]),
                                 dec(o["next"]) if o.get("next") else None)
                         for o in node["outcomes"])
            return Round(node["party"], tuple(_matrix_from_json(m) for m in node["operators"]), outs)
        return cls(tuple(data["dims"]), dec(data["rounds"]), PureState.from_dict(data["target"]),
                   tuple(data.get("trace_out", ())))


@dataclass(frozen=True)
class BranchLeaf:
    label: tuple[int, ...]
    operator: ProductKraus
    probability: float
    state: DensityMatrix | None


def _branches(prog: ProtocolProgram) -> Iterator[tuple[tuple[int, ...], ProductKraus, bool, int]]:
    """Depth-first (label, accumulated operator, is_leaf, acting party) for every branch prefix."""
    def walk(rnd: Round, label, acc: ProductKraus):
        for k, (op, out) in enumerate(zip(rnd.operators, rnd.outcomes)):
            step = acc.then(ProductKraus.local(op, rnd.party, prog.dims))
            for party, u in out.corrections:
                step = step.then(ProductKraus.local(u, party, prog.dims))
            lab = label + (k,)
            yield lab, step, out.next is None, rnd.party
            if out.next is not None:
                yield from walk(out.next, lab, step)
    yield from walk(prog.root, (), ProductKraus.identity(prog.dims))


def simulate_protocol(rho: DensityMatrix, prog: ProtocolProgram) -> list[BranchLeaf]:
    if rho.dims != prog.dims:
        raise numlin.DimensionError(f"state dims {rho.dims} do not match program dims {prog.dims}")
    floor = get_policy().prob_floor
    leaves = []
    for label, op, is_leaf, _ in _branches(prog):
        if not is_leaf:
            continue
        full = op.full()
        sigma = full @ rho.matrix @ full.conj().T
        prob = float(np.real(np.trace(sigma)))
        state = None
        if prob >= floor:
            sigma = sigma / prob
            if prog.trace_out:
                sigma = numlin.partial_trace(sigma, prog.dims, prog.kept)
            sigma = (sigma + sigma.conj().T) / 2
            state = DensityMatrix(sigma, tuple(prog.dims[k] for k in prog.kept), check=False)
        leaves.append(BranchLeaf(label, op, max(prob, 0.0), state))
    return leaves


class Survival(str, enum.Enum):
    HOLDS = "HOLDS"
    FLAGGED = "FLAGGED"
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class BranchSurvival:
    label: tuple[int, ...]
    party: int
    norm1: float
    norm2: float
    holds: bool
    note: str = ""


@dataclass(frozen=True)
class SurvivalReport:
    verdict: Survival
    branches: tuple[BranchSurvival, ...]
    premise_failures: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value,
                "premise_failures": list(self.premise_failures),
                "branches": [{"label": list(b.label), "party": b.party, "norm1": b.norm1,
                              "norm2": b.norm2, "holds": b.holds, "note": b.note} for b in self.branches]}


def branch_survival_check(prog: ProtocolProgram, psi1: PureState, psi2: PureState,
                          d: int | Sequence[int]) -> SurvivalReport:
    """Check, on every branch prefix, that the branch operator kills psi1 iff it kills psi2.

    ``d`` is the required local operator rank, either one level for all
    parties or one per party. If some measurement operator has lower rank the
    premise fails and the verdict is NOT_APPLICABLE. Branches where a
    premise-satisfying operator still annihilates one eigenstate (its local
    support sits inside the operator's kernel) are reported as FLAGGED.
    """
    levels = [d] * len(prog.dims) if isinstance(d, (int, np.integer)) else list(d)
    if len(levels) != len(prog.dims):
        raise ValueError("need one level per party")
    failures = []
    for rnd in prog.iter_rounds():
        for k, op in enumerate(rnd.operators):
            r = numlin.numerical_rank(op)
            if r < levels[rnd.party]:
                failures.append(f"party {rnd.party} operator {k} has rank {r} < {levels[rnd.party]}")
    tol = get_policy().annihilation_tol
    results = []
    for label, op, _, party in _branches(prog):
        full = op.full()
        n1 = float(np.linalg.norm(full @ psi1.amplitudes))
        n2 = float(np.linalg.norm(full @ psi2.amplitudes))
        alive1, alive2 = n1 > tol * psi1.norm, n2 > tol * psi2.norm
        holds = alive1 == alive2
        note = ""
        if not holds:
            dead = 2 if alive1 else 1
            note = f"operator on party {party} annihilates psi{dead}: its local support lies in the kernel"
        results.append(BranchSurvival(label, party, n1, n2, holds, note))
    if failures:
        verdict = Survival.NOT_APPLICABLE
    else:
        verdict = Survival.HOLDS if all(b.holds for b in results) else Survival.FLAGGED
    return SurvivalReport(verdict, tuple(results), tuple(failures))
