"""Factorization error and timing of the Iwasawa splitting against random oracles.

    python scripts/iwasawa_oracle.py --sizes 64 128 256 --pairs 20
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dcmc.errors import ConvergenceError
from dcmc.iwasawa import iwasawa
from dcmc.loops import multiply, unitarity_defect
from dcmc.oracles import factorization_pair


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scale", type=float, default=0.8, help="size of the random generators")
    args = ap.parse_args()
    print(f"{'N':>5} {'max |F err|':>12} {'max |p err|':>12} {'max unit.':>10} {'ms/call':>8}")
    for N in args.sizes:
        rng = np.random.default_rng(args.seed)
        eF = ep = eu = 0.0
        t = 0.0
        for _ in range(args.pairs):
            F, p = factorization_pair(rng, N, scale=args.scale)
            g = multiply(F, p)
            t0 = time.perf_counter()
            try:
                res = iwasawa(g)
            except ConvergenceError as exc:
                # exp of the generators does not fit in 2N+1 modes
                print(f"{N:5d} {exc}")
                break
            t += time.perf_counter() - t0
            eF = max(eF, res.unitary_part.distance(F))
            ep = max(ep, res.plus_part.distance(p))
            eu = max(eu, unitarity_defect(res.unitary_part))
        else:
            print(f"{N:5d} {eF:12.2e} {ep:12.2e} {eu:10.1e} {1e3 * t / args.pairs:8.2f}")


if __name__ == "__main__":
    main()
