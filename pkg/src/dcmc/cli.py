"""Command-line driver.

    dcmc cylinder --config run.cfg --out outdir
    dcmc dress    --config run.cfg --seed 42
    dcmc verify   --config run.cfg --lattice outdir/dcmc_lattice.json --shift 1:0 --shift 2:3
    dcmc spectral --config spectral.cfg
    dcmc export   --lattice outdir/dcmc_lattice.json --out meshes

Exit codes: 0 success, 1 validation or usage error, 2 numerical failure,
3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig, load_config, parse_config
from .cylinder import LatticeConstants, lambda_minus, lambda_plus, make_cylinder, r_min
from .errors import DcmcError, NumericalError, SingularLoopError, ValidationError
from .geometry import build_surface, edge_vectors, metric, metric_csv, obj_text
from .io import DcmcIOError, Report, _write_text, load_lattice, load_seed, save_lattice
from .lattice import DressingSeed, LatticeFrame, Window, build_lattice, extract_lax, random_seed, vacuum_lattice, verify_integrability
from .spectral import (
    RationalFunction,
    SpectralData,
    a_cycle_integrals,
    b_cycle_conditions,
    check_necessary,
    check_sufficient,
    contour_selftest,
    curve_from_a2,
    make_phat,
    omega_residues,
    residue_sum,
    verify_a_on_curve,
)
from .symmetry import certificate_dict, detect_symmetry

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
INTEGRABILITY_LIMIT = 1e-7


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _shift(text: str) -> tuple[int, int]:
    try:
        k, l = text.split(":")
        return int(k), int(l)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shift {text!r} is not of the form k:l") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dcmc", description="Discrete CMC surfaces by dressing the discrete cylinder.")
    p.add_argument("--version", action="version", version=f"dcmc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--out", help="output directory (overrides out.dir)")
        sp.add_argument("--seed", type=_u64, help="RNG seed; implies seed.kind = rng")
        sp.add_argument("--quiet", action="store_true", help="no summary on stdout")
        return sp

    common(sub.add_parser("cylinder", help="vacuum lattice: surface, metric, report"))
    common(sub.add_parser("dress", help="dressed lattice: surface, metric, full report"))
    v = common(sub.add_parser("verify", help="symmetry and period certificates for a lattice file"))
    v.add_argument("--lattice", help="dcmc-lattice file (overrides verify.lattice)")
    v.add_argument("--shift", type=_shift, action="append", help="shift k:l, repeatable (overrides verify.shifts)")
    common(sub.add_parser("spectral", help="spectral conditions, curve, residues, a-cycles"))
    e = common(sub.add_parser("export", help="OBJ, metric CSV and Lax CSV from a lattice file"))
    e.add_argument("--lattice", help="dcmc-lattice file (overrides verify.lattice)")
    return p


# -- helpers -------------------------------------------------------------------


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else parse_config("")
    if args.out is not None:
        cfg.override("out.dir", args.out)
    if args.seed is not None:
        cfg.override("seed.kind", "rng")
        cfg.override("seed.rng", args.seed)
    return cfg.validate()


def _outpath(cfg: RunConfig, suffix: str) -> str:
    d = cfg["out.dir"]
    try:
        os.makedirs(d, exist_ok=True)
    except OSError as exc:
        raise DcmcIOError(f"cannot create output directory {d}: {exc.strerror or exc}") from exc
    return os.path.join(d, f"{cfg['out.prefix']}{suffix}")


def _window(cfg: RunConfig) -> Window:
    return Window(cfg["window.m0"], cfg["window.m1"], cfg["window.n0"], cfg["window.n1"])


def _constants(cfg: RunConfig) -> LatticeConstants:
    return LatticeConstants(cfg["r1"], cfg["r2"])


def _seed(cfg: RunConfig) -> DressingSeed | None:
    kind = cfg["seed.kind"]
    if kind == "identity":
        return None
    if kind == "rng":
        return random_seed(cfg["N"], cfg["seed.rng"], cfg["seed.decay"], cfg["seed.scale"])
    seed = load_seed(cfg["seed.file"])
    if seed.h_plus.N > cfg["N"]:
        raise cfg.error("seed.file", f"seed truncation {seed.h_plus.N} exceeds N = {cfg['N']}")
    return seed


def _analyse(L: LatticeFrame, cfg: RunConfig, rep: Report) -> bool:
    """Surface, Lax data and verification; writes mesh, metric and lattice files."""
    lax = extract_lax(L, strict=False)
    ok_template = lax.max_residual <= cfg["tol.template"]
    ints = verify_integrability(L, lax)
    S = build_surface(L)
    edges = edge_vectors(L, lax, S, tol=cfg["tol.edge"])
    lu, lv = metric(S)

    files = {
        "obj": _outpath(cfg, ".obj"),
        "metric": _outpath(cfg, "_metric.csv"),
        "lattice": _outpath(cfg, "_lattice.json"),
    }
    _write_text(files["obj"], obj_text(S))
    _write_text(files["metric"], metric_csv(S))
    save_lattice(L, files["lattice"])

    w = L.window
    rep.section(
        "lattice",
        [
            ("r1", L.constants.r1),
            ("r2", L.constants.r2),
            ("N", L.N),
            ("window", f"m {w.m0}..{w.m1}, n {w.n0}..{w.n1} ({w.shape[0] * w.shape[1]} sites)"),
            ("build order", L.order),
            ("frame curvature", L.max_curvature_residual),
        ],
    )
    maxima = ints.maxima()
    ok_int = max(v for k, v in maxima.items() if k != "template") <= INTEGRABILITY_LIMIT
    rows = [(k, v) for k, v in maxima.items()]
    rows += [("template below tol.template", ok_template), (f"all residuals below {INTEGRABILITY_LIMIT:.0e}", ok_int)]
    rep.section("integrable structure", rows)

    # |Psi_{m+1,n} - Psi_mn| = 2 sqrt(det L) = 4 r1 p
    with np.errstate(invalid="ignore"):
        rel_u = np.abs(lu - 2 * np.sqrt(edges.det_L().real)) / lu
        rel_p = np.abs(edges.det_L().real - 4 * L.constants.r1**2 * lax.p**2) / (4 * L.constants.r1**2 * lax.p**2)
    geo = {
        "formula_vs_difference": edges.residual,
        "edge_length_vs_det": float(np.nanmax(rel_u)),
        "det_vs_p": float(np.nanmax(rel_p)),
        "len_u_range": [float(np.nanmin(lu)), float(np.nanmax(lu))],
        "len_v_range": [float(np.nanmin(lv)), float(np.nanmax(lv))],
    }
    rep.section(
        "geometry",
        [
            ("formula vs difference edges", geo["formula_vs_difference"]),
            ("edge length vs 2 sqrt(det L)", geo["edge_length_vs_det"]),
            ("det L vs 4 r1^2 p^2", geo["det_vs_p"]),
            ("len_u range", f"[{geo['len_u_range'][0]:.12g}, {geo['len_u_range'][1]:.12g}]"),
            ("len_v range", f"[{geo['len_v_range'][0]:.12g}, {geo['len_v_range'][1]:.12g}]"),
        ],
    )
    rep.section("files", [(k, os.path.basename(v)) for k, v in files.items()])
    rep.put("integrability", maxima)
    rep.put("geometry", geo)
    rep.put("files", {k: os.path.basename(v) for k, v in files.items()})
    rep.put("passed", bool(ok_template and ok_int))
    return bool(ok_template and ok_int)


def _finish(rep: Report, cfg: RunConfig, args, passed: bool) -> int:
    path = _outpath(cfg, f"_{rep.command}_report.txt")
    rep.write(path)
    if not args.quiet:
        print(rep.text(), end="")
        print(f"report written to {path}")
    return EXIT_OK if passed else EXIT_NUMERIC


# -- commands --------------------------------------------------------------------


def cmd_cylinder(cfg: RunConfig, args) -> int:
    rep = Report("cylinder", cfg.sha256())
    cyl = make_cylinder(_constants(cfg), cfg["N"])
    L = vacuum_lattice(cyl, _window(cfg))
    passed = _analyse(L, cfg, rep)
    S = build_surface(L)
    w = L.window
    if w.shape[0] > 1:
        du = S.points[1:, :] - S.points[:-1, :]
        dev = float(np.max(np.abs(du - du[0, 0])))
        rep.section("vacuum", [("U edge vector", np.array2string(du[0, 0], precision=12)), ("U edge deviation", dev)])
        rep.put("vacuum", {"u_edge": du[0, 0], "u_edge_deviation": dev})
    return _finish(rep, cfg, args, passed)


def cmd_dress(cfg: RunConfig, args) -> int:
    rep = Report("dress", cfg.sha256())
    cyl = make_cylinder(_constants(cfg), cfg["N"])
    seed = _seed(cfg)
    if seed is None:
        # the identity seed does not dress: F_mn = F0_mn
        L = vacuum_lattice(cyl, _window(cfg))
        desc = "identity"
    else:
        L = build_lattice(seed, cyl, _window(cfg), order=cfg["build.order"], workers=cfg["build.workers"])
        desc = seed.description
    rep.section("provenance", [("seed", desc), ("seed.kind", cfg["seed.kind"])])
    rep.put("seed", desc)
    passed = _analyse(L, cfg, rep)
    return _finish(rep, cfg, args, passed)


def _lattice_path(cfg: RunConfig, args) -> str:
    path = getattr(args, "lattice", None) or cfg.get("verify.lattice")
    if not path:
        raise ValidationError("no lattice file given (use --lattice or verify.lattice)")
    return path


def cmd_verify(cfg: RunConfig, args) -> int:
    shifts = args.shift or cfg.get("verify.shifts")
    if not shifts:
        raise ValidationError("no shifts given (use --shift k:l or verify.shifts)")
    if any(s == (0, 0) for s in shifts):
        raise ValidationError("shift (0, 0) is not a candidate symmetry")
    path = _lattice_path(cfg, args)
    L = load_lattice(path)
    lax = extract_lax(L, strict=False)
    rep = Report("verify", cfg.sha256())
    rep.section("lattice", [("file", os.path.basename(path)), ("window", L.window.as_tuple()), ("N", L.N)])
    certs = []
    for s in shifts:
        res = detect_symmetry(L, lax, s, tol=cfg["tol.symmetry"])
        d = certificate_dict(res)
        certs.append(d)
        if res.accepted:
            rows = [
                ("accepted", True),
                ("phase", d["phase"]),
                ("residual", d["max_residual"]),
                ("sites tested", d["sites_tested"]),
                ("period", d["is_period"]),
                ("translation", np.array2string(np.array(d["translation"]), precision=12)),
            ]
        else:
            rows = [("accepted", False), ("stage", d["stage"]), ("reason", d["reason"]), ("residual", d["residual"])]
        rep.section(f"shift ({s[0]}, {s[1]})", rows)
    rep.put("lattice", os.path.basename(path))
    rep.put("certificates", certs)
    return _finish(rep, cfg, args, True)


def _rational(cfg: RunConfig, name: str, default: float) -> RationalFunction:
    num = cfg.get(f"spectral.{name}.num")
    den = cfg.get(f"spectral.{name}.den", [1.0])
    var = cfg.get(f"spectral.{name}.var", "lambda")
    if num is None:
        return RationalFunction.constant(default, var)
    try:
        return RationalFunction(np.array(num), np.array(den), var)
    except ValidationError as exc:
        raise cfg.error(f"spectral.{name}.den", str(exc)) from exc


def _condition_rows(report) -> list:
    return [(f"{key}) {c.name}", f"{'PASS' if c.passed else 'FAIL'}  margin {c.margin:.6e}  {c.detail}".rstrip()) for key, c in report.conditions.items()]


def cmd_spectral(cfg: RunConfig, args) -> int:
    k, l = cfg.get("spectral.k", 2), cfg.get("spectral.l", 0)
    if k % 2 or l % 2:
        raise cfg.error("spectral.k" if k % 2 else "spectral.l", f"shift components must be even, got ({k}, {l})")
    a2, b2, c2 = _rational(cfg, "a2", 0.0), _rational(cfg, "b2", 1.0), _rational(cfg, "c2", 1.0)
    try:
        data = SpectralData(a2, b2, c2, (k, l), _constants(cfg), cfg.get("spectral.f_plus"))
    except ValidationError as exc:
        raise cfg.error("spectral.f_plus", str(exc)) from exc
    rep = Report("spectral", cfg.sha256())
    c = data.constants
    rep.section(
        "data",
        [
            ("shift", (k, l)),
            ("r1", c.r1),
            ("r2", c.r2),
            ("lambda_+", lambda_plus(c.r1)),
            ("lambda_-", lambda_minus(c.r2)),
            ("r_min", r_min(c)),
        ],
    )
    nec = check_necessary(data.a2, data.b2, data.c2)
    rep.section("necessary conditions", _condition_rows(nec))
    ph = make_phat((k, l), c, data.f_plus, N=cfg["N"])
    rep.section("p_hat", [("alpha^2 - beta^2 identity", ph.identity_residual), ("parity", ph.parity_residual)])
    suf = check_sufficient(data)
    rep.section("sufficient conditions", _condition_rows(suf))

    curve_info: dict = {"status": "a^2 = 0: no branch points"}
    cycles = []
    if not data.a2.is_zero():
        try:
            curve = curve_from_a2(data.a2)
        except ValidationError as exc:
            curve_info = {"status": "failed", "reason": str(exc)}
            rep.section("curve", [("status", "FAIL"), ("reason", str(exc))])
        else:
            curve_info = curve.to_dict()
            rows = [("genus", curve.genus), ("pairing residual", curve.pairing_residual())]
            rows += [(f"branch pair {i + 1}", f"({p:.12g}, {q:.12g})") for i, (p, q) in enumerate(curve.pairs)]
            try:
                chk = verify_a_on_curve(data.a2, curve)
                rows += [("a meromorphic on the curve", True), ("f finite at nu = 0", chk.finite_at_zero)]
                curve_info["a_on_curve"] = chk.to_dict()
            except ValidationError as exc:
                rows += [("a meromorphic on the curve", False), ("reason", str(exc))]
                curve_info["a_on_curve"] = {"all_even": False, "reason": str(exc)}
            rep.section("curve", rows)
            cycles = a_cycle_integrals(data, curve)
    else:
        rep.section("curve", [("status", curve_info["status"])])

    res = omega_residues(data)
    rows = [(f"res at {r.label}", f"{r.value.real:+.12f}{r.value.imag:+.3e}i  expected {r.expected:+.6f}  error {r.error:.3e}") for r in res]
    total = residue_sum(res)
    rows += [("sum of residues", abs(total)), ("contour self-test", abs(contour_selftest()))]
    rep.section("residues of omega", rows)
    rep.section(
        "a-cycles",
        [(f"pair {i + 1}", f"|integral| {abs(ci.value):.3e}  nodes {ci.nodes}  mu closed {ci.mu_closed}") for i, ci in enumerate(cycles)]
        or ["none (genus 0)"],
    )
    bc = b_cycle_conditions(data)
    rep.section("b-cycles", [("status", bc["status"]), ("reason", bc["reason"])])

    rep.put("necessary", nec.to_dict())
    rep.put("sufficient", suf.to_dict())
    rep.put("phat", {"identity_residual": ph.identity_residual, "parity_residual": ph.parity_residual})
    rep.put("curve", curve_info)
    rep.put("residues", [r.to_dict() for r in res])
    rep.put("residue_sum", total)
    rep.put("a_cycles", [ci.to_dict() for ci in cycles])
    rep.put("b_cycles", bc)
    return _finish(rep, cfg, args, True)


def cmd_export(cfg: RunConfig, args) -> int:
    L = load_lattice(_lattice_path(cfg, args))
    S = build_surface(L)
    lax = extract_lax(L, strict=False)
    _write_text(_outpath(cfg, ".obj"), obj_text(S))
    _write_text(_outpath(cfg, "_metric.csv"), metric_csv(S))
    _write_text(_outpath(cfg, "_lax.csv"), lax_csv(lax))
    if not args.quiet:
        print(f"wrote {cfg['out.prefix']}.obj, {cfg['out.prefix']}_metric.csv, {cfg['out.prefix']}_lax.csv to {cfg['out.dir']}")
    return EXIT_OK


def lax_csv(lax) -> str:
    """Columns m,n,p,q,alpha_re,alpha_im,beta_re,beta_im; blank where undefined."""
    f = lambda x: "" if not np.isfinite(x) else f"{x:.17g}"  # noqa: E731
    rows = ["m,n,p,q,alpha_re,alpha_im,beta_re,beta_im"]
    w = lax.window
    for m, n in w.sites():
        i = w.index(m, n)
        a, b = lax.alpha[i], lax.beta[i]
        rows.append(",".join([str(m), str(n), f(lax.p[i]), f(lax.q[i]), f(a.real), f(a.imag), f(b.real), f(b.imag)]))
    return "\n".join(rows) + "\n"


COMMANDS = {
    "cylinder": cmd_cylinder,
    "dress": cmd_dress,
    "verify": cmd_verify,
    "spectral": cmd_spectral,
    "export": cmd_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except DcmcIOError as exc:
        print(f"dcmc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"dcmc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"dcmc: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, SingularLoopError) as exc:
        print(f"dcmc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DcmcError as exc:
        print(f"dcmc: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
