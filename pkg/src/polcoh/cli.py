"""Command-line front end.

Subcommands
-----------
density   |psi|^2 on a cartesian lattice, threshold contours and the classical orbit
evolve    closed-form and quadrature packet moments over a time sweep
check     invariant suite with pass/fail and residuals, as JSON

Exit codes: 0 success, 1 invariant failure, 2 invalid arguments, 3 resource limit.
Floats are written with 17 significant digits in scientific notation so that
identical runs give byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage import measure

from . import dynamics, fock_oracle, polar_ops, quadrature_grid, state_core
from .errors import (InvalidParameterError, ResourceLimitError, TruncationError,
                     UnsupportedParameterError)
from .state_core import LEFT, RIGHT, CoherentParams

log = logging.getLogger("polcoh")

EXIT_OK, EXIT_FAIL, EXIT_ARGS, EXIT_RESOURCE = 0, 1, 2, 3
PAD_WIDTHS = 4.0
CORRUPTION = 1.01


@dataclass(frozen=True)
class RunConfig:
    alpha: complex = 0.3
    beta: complex = 2.0
    chirality: int = RIGHT
    t0: float = 0.0
    t1: float = 2 * math.pi
    steps: int = 16
    accuracy: float = 1e-10
    fmt: str = "csv"
    out: Path | None = None

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidParameterError("steps must be >= 1")
        if self.t1 < self.t0:
            raise InvalidParameterError("t1 must be >= t0")
        if not self.accuracy > 0:
            raise InvalidParameterError("accuracy must be positive")
        if self.fmt not in ("csv", "json"):
            raise InvalidParameterError("format must be csv or json")
        self.params  # validates alpha

    @property
    def params(self) -> CoherentParams:
        return CoherentParams(self.alpha, self.beta, self.chirality)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.steps + 1)


# ------------------------------------------------------------------ output

def fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.16e}"


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def dumps_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with fixed float formatting (non-finite -> null)."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


@dataclass
class Table:
    name: str
    columns: list
    rows: list

    def records(self):
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()


def write_tables(tables, config: RunConfig, stream=None):
    """Write tables to ``config.out`` (one file each) or to ``stream``."""
    stream = stream or sys.stdout
    if config.out is not None:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        for t in tables:
            if config.fmt == "csv":
                (out / f"{t.name}.csv").write_text(t.to_csv())
            else:
                (out / f"{t.name}.json").write_text(dumps_json(t.records()) + "\n")
        return
    if config.fmt == "csv":
        for t in tables:
            stream.write(f"# {t.name}\n")
            stream.write(t.to_csv())
    else:
        stream.write(dumps_json({t.name: t.records() for t in tables}) + "\n")


# ----------------------------------------------------------------- density

def _state_at(params: CoherentParams, t: float, amplitude_fn=state_core.amplitude):
    """Wavefunction at time t as a function of cartesian points (global phase dropped)."""
    pt = dynamics.evolve_params(params, t)

    def f(x, y):
        return amplitude_fn(pt, np.hypot(x, y), np.arctan2(y, x))
    return f


def export_window(params: CoherentParams):
    """Bounding box of the classical orbit padded by ``PAD_WIDTHS`` packet widths."""
    poly = dynamics.ellipse_polyline(params, 512)
    a = abs(params.alpha)
    width = math.sqrt((1 + a) / (1 - a))   # largest 1/e radius of the density
    pad = PAD_WIDTHS * width
    lo = poly.min(axis=0) - pad
    hi = poly.max(axis=0) + pad
    return lo, hi


def density_tables(config: RunConfig, threshold: float, spacing: float = 0.1):
    """Density lattice, contour polylines and the orbit polyline.

    Returns
    -------
    tables : list of Table
    contours : dict mapping time index to a list of ``(k, 2)`` vertex arrays
    """
    if not threshold > 0:
        raise InvalidParameterError("threshold must be positive")
    if not spacing > 0:
        raise InvalidParameterError("spacing must be positive")
    params = config.params
    lo, hi = export_window(params)
    xs = lo[0] + spacing * np.arange(int(math.ceil((hi[0] - lo[0]) / spacing)) + 1)
    ys = lo[1] + spacing * np.arange(int(math.ceil((hi[1] - lo[1]) / spacing)) + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    dens_rows, cont_rows = [], []
    contours = {}
    pid = 0
    for it, t in enumerate(config.times):
        rho = np.abs(_state_at(params, t)(X, Y)) ** 2
        for i in range(xs.size):
            for j in range(ys.size):
                dens_rows.append((xs[i], ys[j], t, rho[i, j]))
        lines = measure.find_contours(rho, threshold)
        if not lines:
            log.warning("empty contour at t=%g: threshold %g exceeds peak density %g",
                        t, threshold, rho.max())
        contours[it] = []
        for line in lines:
            pts = np.column_stack([np.interp(line[:, 0], np.arange(xs.size), xs),
                                   np.interp(line[:, 1], np.arange(ys.size), ys)])
            contours[it].append(pts)
            for k, (x, y) in enumerate(pts):
                cont_rows.append((t, pid, k, x, y))
            pid += 1
    orbit = dynamics.ellipse_polyline(params, 256)
    ell_rows = [(k, x, y) for k, (x, y) in enumerate(orbit)]
    return [Table("density", ["x", "y", "t", "density"], dens_rows),
            Table("contour", ["t", "polyline", "vertex", "x", "y"], cont_rows),
            Table("ellipse", ["vertex", "x", "y"], ell_rows)], contours


def cmd_density(config: RunConfig, threshold: float, spacing: float = 0.1, stream=None) -> int:
    tables, _ = density_tables(config, threshold, spacing)
    write_tables(tables, config, stream)
    return EXIT_OK


# ------------------------------------------------------------------ evolve

_EVOLVE_FIELDS = ["qx", "qy", "px", "py", "dx2", "dy2", "dpx2", "dpy2", "dxpx", "dypy", "rs_x", "rs_y"]


def _closed_form_record(params: CoherentParams, t: float):
    g = dynamics.real_gauge(params)
    m = dynamics.packet_moments_general(params, t)
    d = dynamics.dispersions(g.real, t + g.time_offset)
    rs = dynamics.rs_determinant(d)
    return [m.q[0], m.q[1], m.p[0], m.p[1], d.dx2, d.dy2, d.dpx2, d.dpy2, d.dxpx, d.dypy, rs[0], rs[1]]


def _quadrature_record(params: CoherentParams, t: float, grid, amplitude_fn=state_core.amplitude):
    f = quadrature_grid.sample_state(dynamics.evolve_params(params, t), grid, amplitude_fn)
    c = quadrature_grid.cartesian_moments(f)
    return [c.mean_x, c.mean_y, c.mean_px, c.mean_py, c.var_x, c.var_y, c.var_px, c.var_py,
            c.cov_xpx, c.cov_ypy, c.var_x * c.var_px - c.cov_xpx ** 2,
            c.var_y * c.var_py - c.cov_ypy ** 2]


def sweep_grid(params: CoherentParams, accuracy: float):
    """One grid resolving the state over a full breathing period."""
    samples = [dynamics.evolve_params(params, t) for t in (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)]
    return quadrature_grid.build_grid(samples, accuracy)


def evolve_table(config: RunConfig) -> Table:
    params = config.params
    grid = sweep_grid(params, config.accuracy)
    cols = ["t"]
    for name in _EVOLVE_FIELDS:
        cols += [f"{name}_cf", f"{name}_quad", f"{name}_absdiff"]
    rows = []
    for t in config.times:
        cf = _closed_form_record(params, t)
        qd = _quadrature_record(params, t, grid)
        row = [t]
        for a, b in zip(cf, qd):
            row += [a, b, abs(a - b)]
        rows.append(row)
    return Table("evolve", cols, rows)


def cmd_evolve(config: RunConfig, stream=None) -> int:
    write_tables([evolve_table(config)], config, stream)
    return EXIT_OK


# ------------------------------------------------------------------- check

def _gaussian_field(grid, cx, cy, w, kx, ky):
    x, y = grid.xy
    v = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * w * w) + 1j * (kx * x + ky * y))
    f = quadrature_grid.WaveField(v, grid)
    return f * (1 / f.norm())


def run_checks(config: RunConfig, amplitude_fn=state_core.amplitude):
    """Invariant suite; each entry is ``{name, residual, tolerance, passed}``."""
    params = config.params
    out = []

    def record(name, residual, tol):
        out.append({"name": name, "residual": float(residual), "tolerance": tol,
                    "passed": bool(residual <= tol)})

    # Fock series against the closed form
    policy = fock_oracle.adaptive_policy(params)
    worst = 0.0
    for r, phi in ((0.5, 0.3), (1.5, 2.0), (3.0, 4.5)):
        series, _ = fock_oracle.series_amplitude(params, r, phi, policy)
        worst = max(worst, abs(series - amplitude_fn(params, r, phi)))
    record("series_vs_closed_form", worst, 1e-10)

    other_same = dynamics.evolve_params(params, 0.7).replace(beta=params.beta * 0.8 + 0.3j)
    other_cross = other_same.replace(chirality=-params.chirality)
    grid = quadrature_grid.build_grid([params, other_same, other_cross], config.accuracy)
    psi = quadrature_grid.sample_state(params, grid, amplitude_fn)
    record("normalization", abs(quadrature_grid.inner_product(psi, psi).real - 1), 1e-8)
    for tag, other in (("overlap_same", other_same), ("overlap_cross", other_cross)):
        phi_o = quadrature_grid.sample_state(other, grid)
        quad = quadrature_grid.inner_product(phi_o, psi)
        record(tag, abs(quad - state_core.overlap(params, other)), 1e-8)

    sgrid = sweep_grid(params, config.accuracy)
    worst_m = worst_rs = 0.0
    for t in np.linspace(0, 2 * math.pi, 9):
        cf = _closed_form_record(params, t)
        qd = _quadrature_record(params, t, sgrid, amplitude_fn)
        worst_m = max(worst_m, max(abs(a - b) for a, b in zip(cf[:10], qd[:10])))
        worst_rs = max(worst_rs, abs(cf[10] - 0.25), abs(qd[10] - 0.25), abs(qd[11] - 0.25))
    record("moments_closed_vs_quadrature", worst_m, 1e-6)
    record("rs_determinant", worst_rs, 1e-6)

    for which in ("first", "second"):
        record(f"eigenrelation_{which}", polar_ops.eigenrelation_residual(params, which), 5e-6)

    tgrid = quadrature_grid.PolarGrid(10.0, 160, 128)
    f = _gaussian_field(tgrid, 0.8, -0.5, 1.1, 0.4, 0.2)
    K = polar_ops.OperatorKind
    worst_c = max(polar_ops.commutator_residual(x, y, f, e, stencil=None)
                  for x, y, e in ((K.A, K.A_dag, 1), (K.B, K.B_dag, 1), (K.A, K.B, 0), (K.A, K.B_dag, 0)))
    record("commutators", worst_c, 1e-6)

    worst_d = 0.0
    for mode in ("A", "B"):
        cf = polar_ops.quadrature_dispersions(params, mode, "closed_form")
        qd = polar_ops.quadrature_dispersions(params, mode, "quadrature")
        worst_d = max(worst_d, *(abs(a - b) for a, b in zip(cf, qd)))
    record("quadrature_dispersions", worst_d, 1e-5)
    return out


def cmd_check(config: RunConfig, amplitude_fn=state_core.amplitude, stream=None) -> int:
    stream = stream or sys.stdout
    checks = run_checks(config, amplitude_fn)
    ok = all(c["passed"] for c in checks)
    report = {"alpha": [config.alpha.real, config.alpha.imag],
              "beta": [config.beta.real, config.beta.imag],
              "chirality": config.chirality, "passed": ok, "checks": checks}
    text = dumps_json(report) + "\n"
    if config.out is not None:
        Path(config.out).mkdir(parents=True, exist_ok=True)
        (Path(config.out) / "check.json").write_text(text)
    else:
        stream.write(text)
    return EXIT_OK if ok else EXIT_FAIL


# ----------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha-re", type=float, default=0.3)
    common.add_argument("--alpha-im", type=float, default=0.0)
    common.add_argument("--beta-re", type=float, default=2.0)
    common.add_argument("--beta-im", type=float, default=0.0)
    common.add_argument("--chirality", choices=("left", "right"), default="right",
                        help="right = angular factor exp(+i l phi)")
    common.add_argument("--t0", type=float, default=0.0)
    common.add_argument("--t1", type=float, default=2 * math.pi)
    common.add_argument("--steps", type=int, default=16, help="number of time intervals")
    common.add_argument("--accuracy", type=float, default=1e-10, help="quadrature grid target")
    common.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt")
    common.add_argument("--out", type=Path, default=None, help="output directory (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="polcoh", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    d = sub.add_parser("density", parents=[common], help="density lattice and contours")
    d.add_argument("--threshold", type=float, default=0.05)
    d.add_argument("--spacing", type=float, default=0.25, help="export lattice spacing")
    sub.add_parser("evolve", parents=[common], help="moment time series")
    c = sub.add_parser("check", parents=[common], help="invariant suite")
    c.add_argument("--corrupt-amplitude", action="store_true", help=argparse.SUPPRESS)
    return p


def config_from_args(args) -> RunConfig:
    return RunConfig(alpha=complex(args.alpha_re, args.alpha_im),
                     beta=complex(args.beta_re, args.beta_im),
                     chirality=RIGHT if args.chirality == "right" else LEFT,
                     t0=args.t0, t1=args.t1, steps=args.steps, accuracy=args.accuracy,
                     fmt=args.fmt, out=args.out)


def _corrupted(params, r, phi):
    return CORRUPTION * state_core.amplitude(params, r, phi)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        config = config_from_args(args)
        if args.command == "density":
            return cmd_density(config, args.threshold, args.spacing)
        if args.command == "evolve":
            return cmd_evolve(config)
        amp = _corrupted if args.corrupt_amplitude else state_core.amplitude
        return cmd_check(config, amp)
    except (InvalidParameterError, UnsupportedParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (ResourceLimitError, TruncationError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
