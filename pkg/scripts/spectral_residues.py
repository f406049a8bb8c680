"""Residues of d log(alpha + beta) for several shifts, and the a-cycle of a genus-one curve.

    python scripts/spectral_residues.py --r1 0.5 --r2 0.5
"""

from __future__ import annotations

import argparse

from dcmc.cylinder import LatticeConstants
from dcmc.spectral import (
    RationalFunction,
    SpectralData,
    a_cycle_integrals,
    check_necessary,
    curve_from_a2,
    omega_residues,
    residue_sum,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r1", type=float, default=0.5)
    ap.add_argument("--r2", type=float, default=0.5)
    args = ap.parse_args()
    c = LatticeConstants(args.r1, args.r2)
    for shift in [(2, 0), (0, 2), (2, 2), (4, -2)]:
        res = omega_residues(SpectralData.cylinder(shift, c))
        vals = "  ".join(f"{r.value.real:+.6f}" for r in res)
        print(f"shift {shift!s:8s} {vals}   max err {max(r.error for r in res):.1e}, sum {abs(residue_sum(res)):.1e}")
    print("order:", ", ".join(r.label for r in res))

    a2 = RationalFunction([-0.2, 0.5, -0.2], [0, 1], "nu")
    one = RationalFunction.constant(1.0)
    cur = curve_from_a2(a2)
    print(f"\na^2 = -(nu - 1/2)(nu - 2)/(5 nu): genus {cur.genus}, pairs {cur.pairs}")
    rep = check_necessary(a2, one, one)
    for cond in rep.conditions.values():
        print(f"  {cond.name:22s} {'PASS' if cond.passed else 'FAIL'}  {cond.detail}")
    data = SpectralData(a2, one, one, (2, 2), c)
    for ci in a_cycle_integrals(data, cur):
        print(f"  a-cycle around {ci.pair}: {ci.value:.2e} ({ci.nodes} nodes, mu closed: {ci.mu_closed})")


if __name__ == "__main__":
    main()
