"""Dress the cylinder with a random seed, print the residual table and write an OBJ mesh.

    python scripts/dress_surface.py --r1 0.5 --r2 0.3 --size 24 --seed 3 --out dressed.obj
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from dcmc.cylinder import LatticeConstants, make_cylinder
from dcmc.geometry import build_surface, edge_vectors, export_obj, metric
from dcmc.lattice import Window, build_lattice, extract_lax, random_seed, verify_integrability


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r1", type=float, default=0.5)
    ap.add_argument("--r2", type=float, default=0.3)
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--size", type=int, default=24)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--order", choices=("row", "column", "scratch"), default="row")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="dressed.obj")
    args = ap.parse_args()

    cyl = make_cylinder(LatticeConstants(args.r1, args.r2), args.N)
    t0 = time.perf_counter()
    L = build_lattice(random_seed(args.N, args.seed, scale=args.scale), cyl, Window.centred(args.size), args.order, args.workers)
    print(f"built {args.size}x{args.size} lattice in {time.perf_counter() - t0:.1f} s")
    lax = extract_lax(L)
    for name, val in verify_integrability(L, lax).maxima().items():
        print(f"  {name:15s} {val:.2e}")
    S = build_surface(L)
    ev = edge_vectors(L, lax, S)
    lu, lv = metric(S)
    print(f"edge formula vs difference {ev.residual:.2e}")
    print(f"|u edge| in [{lu[:-1].min():.4f}, {lu[:-1].max():.4f}], |v edge| in [{lv[:, :-1].min():.4f}, {lv[:, :-1].max():.4f}]")
    print(f"p in [{np.nanmin(lax.p):.4f}, {np.nanmax(lax.p):.4f}]")
    export_obj(S, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
