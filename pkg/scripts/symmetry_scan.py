"""Scan lattice shifts for Euclidean symmetries on the vacuum and on a dressed lattice.

    python scripts/symmetry_scan.py --reach 3 --size 16
"""

from __future__ import annotations

import argparse
import itertools

import numpy as np

from dcmc.cylinder import LatticeConstants, make_cylinder
from dcmc.lattice import Window, build_lattice, extract_lax, random_seed, vacuum_lattice
from dcmc.symmetry import detect_symmetry, euclidean_motion, is_period


def scan(title, L, reach):
    lax = extract_lax(L)
    print(f"== {title} ==")
    for s in itertools.product(range(-reach, reach + 1), repeat=2):
        if s == (0, 0) or s < (0, 0):
            continue
        c = detect_symmetry(L, lax, s)
        if not c.accepted:
            print(f"  {s!s:9s} rejected at {c.stage} stage ({c.reason})")
            continue
        mot = euclidean_motion(c)
        angle = np.degrees(np.arccos(np.clip((np.trace(mot.rotation_matrix()) - 1) / 2, -1, 1)))
        kind = "period" if is_period(c) else "motion"
        t = ", ".join(f"{x:+.4f}" for x in mot.translation)
        print(f"  {s!s:9s} {kind}: rotation {angle:7.3f} deg, translation ({t}), residual {c.max_residual:.1e}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r1", type=float, default=0.5)
    ap.add_argument("--r2", type=float, default=0.5)
    ap.add_argument("--size", type=int, default=16)
    ap.add_argument("--reach", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    cyl = make_cylinder(LatticeConstants(args.r1, args.r2))
    w = Window.centred(args.size)
    scan("vacuum", vacuum_lattice(cyl, w), args.reach)
    scan(f"dressed (seed {args.seed})", build_lattice(random_seed(cyl.N, args.seed), cyl, w), min(args.reach, 2))


if __name__ == "__main__":
    main()
