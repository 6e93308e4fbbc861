"""Numerical evidence run: SEP search on the two-qubit Bell mixture for a
range of Kraus counts. A residual bounded away from zero is evidence only.

    python3 scripts/bell_mix_search.py --n-kraus 2 3 4 --restarts 32 --seed 7
"""

import argparse
import time

from sepdistill.cli import dumps
from sepdistill.search import SearchConfig, sep_feasibility_search
from sepdistill.states import Family, make_state_pair, spec_for


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-kraus", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--restarts", type=int, default=32)
    ap.add_argument("--max-iter", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--json", help="write full results here")
    args = ap.parse_args()

    psi1, psi2 = make_state_pair(Family.BELL_MIX, spec_for(Family.BELL_MIX))
    results = {}
    print(f"{'T':>3} {'verdict':>13} {'best residual':>22} {'restart':>8} {'seconds':>8}")
    for t in args.n_kraus:
        cfg = SearchConfig(n_kraus=t, restarts=args.restarts, max_iter=args.max_iter,
                           seed=args.seed, workers=args.workers)
        start = time.perf_counter()
        res = sep_feasibility_search(psi1, psi2, psi1, cfg)
        took = time.perf_counter() - start
        print(f"{t:>3} {res.verdict.value:>13} {res.best_residual:>22.15e} {res.best_restart:>8} {took:>8.1f}")
        results[str(t)] = res.to_dict()
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(dumps(results))


if __name__ == "__main__":
    main()
