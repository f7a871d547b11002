"""Command-line entry point: ``sarfourier <command> [options]``.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio, forward, imaging, kernels, phasestats, solver
from ._backend import NAME as BACKEND, set_num_threads
from .geometry import AcquisitionGeometry, SceneSpec, check_scene_limits, reference_geometry
from .scene import (ComplexImage, apply_random_phases, point_scatterers,
                    shepp_logan_magnitude, step_signal)

SCENES_2D = ("delta", "points", "shepp-logan")
SCENES_1D = ("ramp", "step")


class ValidationError(Exception):
    """Bad user input; maps to exit code 1."""


@dataclass
class RunConfig:
    """Validated options for one command."""

    command: str
    out: Path
    seed: int = 0
    threads: int = 1
    input: Path | None = None
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        if args.out is None:
            raise ValidationError("--out is required")
        out = Path(args.out)
        if not out.parent.exists():
            raise ValidationError(f"output directory {out.parent} does not exist")
        inp = getattr(args, "input", None)
        if inp is not None:
            inp = Path(inp)
            if not inp.exists():
                raise ValidationError(f"input file {inp} does not exist")
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise ValidationError("--seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        skip = {"out", "seed", "threads", "input", "command", "func"}
        opts = {k: v for k, v in vars(args).items() if k not in skip}
        return cls(args.command, out, args.seed, args.threads, inp, opts)


def _stem(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _geometry(opts) -> AcquisitionGeometry:
    if opts.get("geometry"):
        p = Path(opts["geometry"])
        if not p.exists():
            raise ValidationError(f"geometry file {p} does not exist")
        return AcquisitionGeometry.load(p)
    return AcquisitionGeometry.uniform(
        opts["center_ghz"] * 1e9, opts["bandwidth_mhz"] * 1e6, opts["n_freqs"],
        math.radians(opts["elevation_deg"]), math.radians(opts["azimuth_deg"]),
        math.radians(opts["span_deg"]), opts["n_az"])


def _parse_points(text: str):
    pts = []
    for item in text.split(";"):
        if not item.strip():
            continue
        vals = [v.strip() for v in item.split(",")]
        if len(vals) != 3:
            raise ValidationError(f"point {item!r} must be 'x,y,amplitude'")
        pts.append((float(vals[0]), float(vals[1]), complex(vals[2].replace(" ", ""))))
    if not pts:
        raise ValidationError("--points is empty")
    return pts


def _step_coefficient(k: int) -> complex:
    # step 0 on [-pi, 0), 1 on [0, pi), coefficients (1/2pi) int f exp(-ikx)
    if k == 0:
        return 0.5
    return (1.0 - (-1.0) ** k) / (2j * math.pi * k)


def cmd_simulate(cfg: RunConfig) -> int:
    o = cfg.options
    kind = o["scene"]
    if kind in SCENES_1D:
        kmax = o["kmax"]
        ks = range(-kmax, kmax + 1)
        if kind == "ramp":
            coeffs = {k: (forward.RAMP_MEAN if k == 0 else forward.analytic_ramp_coefficients(k))
                      for k in ks}
            fileio.save_coefficients(cfg.out, coeffs, -0.5, 1.0)
        else:
            fileio.save_coefficients(cfg.out, {k: _step_coefficient(k) for k in ks},
                                     -math.pi, 2 * math.pi)
        print(f"wrote {len(ks)} coefficients to {cfg.out}")
        return 0
    geom = _geometry(o)
    scene = SceneSpec(o["radius"], o["n_pixels"])
    lim = check_scene_limits(geom, scene)
    for name, val in lim.items():
        print(f"alias-free {name}: {val:.4g} m")
    print(f"scene radius: {scene.radius_m:.4g} m")
    if kind == "delta":
        img = point_scatterers(scene, [(0.0, 0.0, 1.0)])
    elif kind == "points":
        if not o.get("points"):
            raise ValidationError("--scene points needs --points")
        img = point_scatterers(scene, _parse_points(o["points"]))
    else:
        img = ComplexImage(shepp_logan_magnitude(scene.n_pixels).samples, scene.pixel_m)
    if o["random_phase"]:
        img = apply_random_phases(img, cfg.seed)
    ph = forward.simulate_phase_history(img, geom, scene)
    if o["noise"]:
        ph = forward.add_noise(ph, o["noise"], cfg.seed)
    fileio.save_phase_history(cfg.out, ph)
    print(f"wrote {ph.samples.size} samples ({ph.n_freqs} x {ph.n_azimuths}) to {cfg.out}")
    return 0


def _form(ph, method, o):
    if method == "mf":
        return imaging.matched_filter(ph)
    if method == "bp":
        if o["upsample"] < 1:
            raise ValidationError("--upsample must be >= 1")
        return imaging.backprojection(ph, upsample=o["upsample"])
    if o["oversampling"] < 1:
        raise ValidationError("--oversampling must be >= 1")
    return imaging.grid_and_fft(ph, config=imaging.GriddingConfig(o["oversampling"], o["half_width"]))


def _rel_err(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def cmd_form(cfg: RunConfig) -> int:
    o = cfg.options
    ph = fileio.load_phase_history(cfg.input)
    if o["method"] == "bp":
        dk = np.diff(ph.k_radpm)
        if dk.size == 0 or np.ptp(dk) > 1e-9 * dk.mean():
            raise ValidationError("bp needs at least two equally spaced wavenumbers")
    if o["window"] != "rectangular":
        ph = imaging.apply_window(ph, o["window"])
    t0 = time.perf_counter()
    img = _form(ph, o["method"], o)
    elapsed = time.perf_counter() - t0
    fileio.save_image(cfg.out, img, {"method": o["method"], "window": o["window"]})
    print(f"{o['method']} image {img.n}x{img.n} in {elapsed:.3f} s "
          f"(backend {BACKEND}); peak |f| = {np.abs(img.samples).max():.6g}")
    if o["compare"] and o["method"] != "mf":
        ref = imaging.matched_filter(ph)
        print(f"relative error vs mf: {_rel_err(img.samples, ref.samples):.3e}")
    if o["pgm"]:
        fileio.write_pgm(o["pgm"], img.samples, db=o["db"], floor_db=o["db_floor"])
    return 0


def _problem(cfg: RunConfig):
    """Return (A, b, n, kind, extra) for the input file."""
    head = fileio.read_complex(cfg.input)[1]
    if head["role"] == "coefficients":
        coeffs, start, length = fileio.load_coefficients(cfg.input)
        n = cfg.options["n_samples"]
        a, b, _, _ = solver.fourier_series_problem(coeffs, n, start, length)
        return a, b, n, "signal", {"start": start, "length": length}
    if head["role"] != "phase_history":
        raise ValidationError(f"cannot solve from a {head['role']!r} file")
    ph = fileio.load_phase_history(cfg.input)
    k1, k2 = ph.digital_coords()
    n = ph.scene.n_pixels
    return solver.nudft_operator(k1, k2, n), ph.flat(), n, "image", {"ph": ph}


def cmd_solve(cfg: RunConfig) -> int:
    o = cfg.options
    if o["lam"] is None:
        raise ValidationError("--lam is required")
    if o["lam"] < 0:
        raise ValidationError("--lam must be non-negative")
    a, b, n, kind, extra = _problem(cfg)
    dim = a.in_dim

    def tv_op():
        if kind == "signal":
            return solver.difference_operator(n, o["order"], "truncated")
        return solver.gradient_operator_2d(n)

    hist_path = Path(o["history"]) if o["history"] else _stem(cfg.out, "_history.csv")
    reg = o["reg"]
    residuals = None
    if reg == "tikhonov":
        d = solver.LinearOperatorSpec.identity(dim) if o["tikhonov_identity"] else tv_op()
        f = solver.tikhonov_solve(a, b, o["lam"], d, cg_tol=o["cg_tol"], cg_maxit=o["cg_maxit"])
        obj = solver.objective(a, tv_op(), b, f, 0.0)
        fileio.write_csv(hist_path, ["iteration", "objective"], [(0, obj)])
    else:
        if reg == "l1":
            t = solver.LinearOperatorSpec.identity(dim)
        elif reg == "tv":
            t = tv_op()
        else:
            if kind == "signal":
                f0 = a.apply_adjoint(b)
            else:
                f0 = imaging.grid_and_fft(extra["ph"]).samples.ravel()
            t = tv_op().compose(solver.phase_diag(f0))
        sc = solver.SolverConfig(o["lam"], o["beta"], o["iters"], o["tol"], o["step"])
        st = solver.admm_l1(a, t, b, sc)
        f = st.f
        residuals = solver.optimality_residuals(a, t, b, st, o["lam"], o["beta"])
        fileio.write_csv(hist_path, ["iteration", "objective"], enumerate(st.objective_history))
        print(f"{reg}: {st.iterations} iterations, objective {st.objective_history[-1]:.6g}")
        print("residuals r_f={:.3e} r_g={:.3e} r_c={:.3e}".format(*residuals))
    meta = {"reg": reg, "lam": o["lam"]}
    if residuals is not None:
        meta["residuals"] = list(residuals)
    if kind == "signal":
        meta.update(extra)
        fileio.write_complex(cfg.out, f, "signal", meta)
    else:
        ph = extra["ph"]
        fileio.save_image(cfg.out, ComplexImage(f.reshape(n, n), ph.scene.pixel_m), meta)
    if o["pgm"] and kind == "image":
        fileio.write_pgm(o["pgm"], f.reshape(n, n), db=o["db"], floor_db=o["db_floor"])
    return 0


def cmd_kernel(cfg: RunConfig) -> int:
    o = cfg.options
    geom = _geometry(o)
    scene = SceneSpec(o["radius"], o["n_pixels"])
    field_ = kernels.kernel2d_for(geom, scene)
    fileio.write_complex(cfg.out, field_.values, "kernel",
                         {"scene": scene.to_dict(), "geometry": geom.to_dict()})
    print(f"kernel {scene.n_pixels}x{scene.n_pixels}, peak |K| = {field_.peak:.6g}")
    if o["pgm"]:
        fileio.write_pgm(o["pgm"], field_.values, db=o["db"], floor_db=o["db_floor"])
    return 0


def cmd_stats(cfg: RunConfig) -> int:
    o = cfg.options
    n, b, kc = o["n"], o["bandwidth"], o["kc"]
    if b % 2 or not 0 <= b < n:
        raise ValidationError("--bandwidth must be even and in [0, N)")
    if o["signal"] == "step":
        mag = np.abs(step_signal(n).samples)
    else:
        mag = np.ones(n)
    if o["delta"] > 1:
        emp, ana = phasestats.correlated_phase_power(mag, o["delta"], kc, b, o["trials"], cfg.seed)
    else:
        emp = phasestats.monte_carlo_partial_sum_power(mag, kc - b // 2, kc + b // 2,
                                                       o["trials"], cfg.seed)
        ana = phasestats.expected_partial_sum_power(mag, b)
    phasestats.write_power_csv(cfg.out, emp, ana)
    rel = _rel_err(emp, ana)
    print(f"relative l2 difference empirical vs analytic: {rel:.3e}")
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    o = cfg.options
    inst = solver.partial_fourier_instance(o["n"], snr=o["snr"], lam=o["lam"], seed=cfg.seed)
    sc = solver.SolverConfig(inst.lam, o["beta"], o["iters"])
    st = solver.admm_l1(inst.a, inst.t, inst.b, sc, record_residuals=True)
    rows = [(i, obj, *res) for i, (obj, res) in
            enumerate(zip(st.objective_history, st.residual_history))]
    fileio.write_csv(cfg.out, ["iteration", "objective", "r_f", "r_g", "r_c"], rows)
    r0, r1 = st.residual_history[0], st.residual_history[-1]
    print("initial residuals r_f={:.3e} r_g={:.3e} r_c={:.3e}".format(*r0))
    print("final   residuals r_f={:.3e} r_g={:.3e} r_c={:.3e}".format(*r1))
    cert = solver.subgradient_certificate(inst.a, inst.t, inst.b, st.f, inst.lam,
                                          o["support_tol"])
    print(f"subgradient certificate {cert:.4f}")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_geometry(p):
    p.add_argument("--geometry", help="geometry JSON (overrides the flags below)")
    p.add_argument("--center-ghz", type=float, default=10.0)
    p.add_argument("--bandwidth-mhz", type=float, default=600.0)
    p.add_argument("--n-freqs", type=int, default=512)
    p.add_argument("--elevation-deg", type=float, default=30.0)
    p.add_argument("--azimuth-deg", type=float, default=50.0)
    p.add_argument("--span-deg", type=float, default=3.0)
    p.add_argument("--n-az", type=int, default=128)


def _add_scene(p, radius=5.0, n=500):
    p.add_argument("--radius", type=float, default=radius, help="scene half-width (m)")
    p.add_argument("--n-pixels", type=int, default=n)


def _add_display(p):
    p.add_argument("--pgm", help="also write a 16-bit PGM of |image|")
    p.add_argument("--db", action="store_true", help="dB-scale the PGM")
    p.add_argument("--db-floor", type=float, default=fileio.DB_FLOOR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sarfourier", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out")
    parser.add_argument("--threads", type=int, default=1)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate phase-history or Fourier-series data")
    p.add_argument("--scene", choices=SCENES_2D + SCENES_1D, default="delta")
    p.add_argument("--points", help="'x,y,amp;x,y,amp;...' in metres")
    p.add_argument("--random-phase", action="store_true")
    p.add_argument("--noise", type=float, default=0.0, help="per-component noise std")
    p.add_argument("--kmax", type=int, default=75, help="1D scenes: |k| <= kmax")
    _add_geometry(p)
    _add_scene(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("form", help="form an image from phase-history data")
    p.add_argument("input")
    p.add_argument("--method", choices=("mf", "bp", "grid"), default="grid")
    p.add_argument("--window", choices=kernels.WINDOW_KINDS, default="rectangular")
    p.add_argument("--upsample", type=int, default=8)
    p.add_argument("--oversampling", type=float, default=2.0)
    p.add_argument("--half-width", type=int, default=3)
    p.add_argument("--compare", action="store_true", help="report error vs mf")
    _add_display(p)
    p.set_defaults(func=cmd_form)

    p = sub.add_parser("solve", help="regularized reconstruction")
    p.add_argument("input")
    p.add_argument("--reg", choices=("tikhonov", "tv", "l1", "ptv"), default="tv")
    p.add_argument("--lam", type=float)
    p.add_argument("--beta", type=float, default=solver.DEFAULT_BETA)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--step", choices=("fixed", "spectral"), default="fixed")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--n-samples", type=int, default=512, help="1D grid size")
    p.add_argument("--cg-tol", type=float, default=1e-10)
    p.add_argument("--cg-maxit", type=int, default=1000)
    p.add_argument("--tikhonov-identity", action="store_true",
                   help="penalize ||f||^2 instead of the differences")
    p.add_argument("--history", help="objective history CSV")
    _add_display(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("kernel", help="matched-filter point-spread function")
    _add_geometry(p)
    _add_scene(p)
    _add_display(p)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("stats", help="random-phase partial-sum power, Monte Carlo vs analytic")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--bandwidth", type=int, default=50)
    p.add_argument("--kc", type=int, default=0)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--delta", type=int, default=1, help="phase block width (samples)")
    p.add_argument("--signal", choices=("step", "ones"), default="step")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("diagnose", help="optimality diagnostics on a partial-Fourier test problem")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--snr", type=float, default=5.0)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=solver.DEFAULT_BETA)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--support-tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help (0) and on bad usage (1)
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_args(args)
        set_num_threads(cfg.threads)
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return args.func(cfg)
    except (ValidationError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (solver.SolverError, FloatingPointError, np.linalg.LinAlgError) as exc:
        it = getattr(exc, "iteration", None)
        where = f" (iteration {it})" if it is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return 2


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
