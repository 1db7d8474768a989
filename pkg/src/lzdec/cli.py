"""Command-line front end: simulate / sweep / limits / fit / check.

Configuration is a flat UTF-8 ``key = value`` file with ``#`` comments;
the key set is closed and unknown keys are rejected by name with their
line number.  All file outputs are written atomically (temp file plus
rename) with fixed ``\\n`` newlines and 17-significant-digit floats so a
repeated run is byte-identical; stdout summaries use 6 significant
digits.

Exit codes: 0 success, 1 input error, 2 non-convergence, 3 partial sweep
failure, 4 unidentifiable fit, 5 failed self-check.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .analysis import FitProblem, SweepGrid, fit_gamma_d, sweep
from .errors import (
    ConfigError,
    InstabilityError,
    InvalidInputError,
    LzdecError,
    NonConvergenceError,
    UnidentifiableFitError,
)
from .integrator import SimConfig, auto_window, integrate, integrate_full
from .limits import (
    incoherent_trajectory,
    incoherent_xinf,
    kayanuma_paper_xinf,
    landau_zener_xinf,
    third_order_defect,
)
from .model import (
    LinearBias,
    ModelParams,
    PiecewiseLinearBias,
    SinusoidalBias,
    TabulatedBias,
)

__all__ = ["main", "parse_config", "RunConfig"]

# Largest scaled midpoint defect of the quintic trajectory reconstruction
# tolerated by the self-check.  Measured headroom at default tolerances is
# ~25x across the supported configurations, while an integration at
# rtol=1e-2 overshoots by ~30x.
_DEFECT_LIMIT = 3e-2

_EXIT_OK = 0
_EXIT_INPUT = 1
_EXIT_NONCONV = 2
_EXIT_PARTIAL = 3
_EXIT_UNIDENTIFIABLE = 4
_EXIT_CHECK = 5


def _fmt6(value) -> str:
    return f"{float(value):#.6g}"


def _fmt17(value) -> str:
    return f"{float(value):.17g}"


def _emit(key: str, value) -> None:
    if isinstance(value, (int, np.integer)):
        print(f"{key}={int(value)}")
    elif isinstance(value, str):
        print(f"{key}={value}")
    else:
        print(f"{key}={_fmt6(value)}")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lzdec-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# ---------------------------------------------------------------------------
# Config file
# ---------------------------------------------------------------------------

_BIAS_KINDS = ("linear", "piecewise", "sinusoid", "tabulated")

_FLOAT_KEYS = {
    "delta1",
    "delta1_imag",
    "gamma_d",
    "gamma_e",
    "bias.v",
    "bias.amplitude",
    "bias.omega",
    "bias.phase",
    "rtol",
    "atol",
    "window_factor",
}
_KNOWN_KEYS = _FLOAT_KEYS | {"bias.kind", "bias.nodes", "seed"}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Parsed configuration document."""

    delta1: float = 1.0
    delta1_imag: float = 0.0
    gamma_d: float = 0.1
    gamma_e: float = 0.0
    bias_kind: str = "linear"
    bias_v: float = 1.0
    bias_nodes: tuple = ()
    bias_amplitude: float = 0.0
    bias_omega: float = 0.0
    bias_phase: float = 0.0
    rtol: float = 1e-9
    atol: float = 1e-12
    window_factor: float = 40.0
    seed: int | None = None

    def model_params(self) -> ModelParams:
        return ModelParams(
            delta1_r=self.delta1,
            delta1_i=self.delta1_imag,
            gamma_d=self.gamma_d,
            gamma_e=self.gamma_e,
        )

    def bias(self):
        if self.bias_kind == "linear":
            return LinearBias(self.bias_v)
        if self.bias_kind == "piecewise":
            return PiecewiseLinearBias(self.bias_nodes)
        if self.bias_kind == "tabulated":
            return TabulatedBias(self.bias_nodes)
        return SinusoidalBias(self.bias_amplitude, self.bias_omega, self.bias_phase)

    def sim_config(self, **overrides) -> SimConfig:
        return SimConfig(
            rtol=self.rtol,
            atol=self.atol,
            window_factor=self.window_factor,
            **overrides,
        )


def _parse_nodes(text: str, lineno: int):
    nodes = []
    for piece in text.split(";"):
        piece = piece.strip()
        if not piece:
            continue
        parts = piece.split(",")
        if len(parts) != 2:
            raise ConfigError(
                f"line {lineno}: bias.nodes entries must be 't,w' pairs "
                f"separated by ';', got {piece!r}"
            )
        try:
            t, w = float(parts[0]), float(parts[1])
        except ValueError:
            raise ConfigError(
                f"line {lineno}: bias.nodes entry {piece!r} is not numeric"
            ) from None
        nodes.append((t, w))
    if len(nodes) < 2:
        raise ConfigError(f"line {lineno}: bias.nodes needs at least two 't,w' pairs")
    return tuple(nodes)


def parse_config(path: str) -> RunConfig:
    """Parse a ``key = value`` config file into a :class:`RunConfig`.

    Unknown or duplicate keys, non-numeric values, and keys inconsistent
    with the selected bias kind are reported with their line number.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc

    seen: dict = {}
    values: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} (first set on line {seen[key]})"
            )
        seen[key] = lineno
        if key == "bias.kind":
            if text not in _BIAS_KINDS:
                raise ConfigError(
                    f"line {lineno}: bias.kind must be one of {', '.join(_BIAS_KINDS)}; "
                    f"got {text!r}"
                )
            values[key] = text
        elif key == "bias.nodes":
            values[key] = _parse_nodes(text, lineno)
        elif key == "seed":
            try:
                values[key] = int(text)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: seed must be an integer, got {text!r}"
                ) from None
        else:
            try:
                number = float(text)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: value for {key!r} is not numeric: {text!r}"
                ) from None
            if not math.isfinite(number):
                raise ConfigError(f"line {lineno}: value for {key!r} must be finite")
            values[key] = number

    kind = values.get("bias.kind", "linear")
    allowed_by_kind = {
        "linear": {"bias.v"},
        "piecewise": {"bias.nodes"},
        "tabulated": {"bias.nodes"},
        "sinusoid": {"bias.amplitude", "bias.omega", "bias.phase"},
    }
    bias_keys = {k for k in values if k.startswith("bias.") and k != "bias.kind"}
    stray = bias_keys - allowed_by_kind[kind]
    if stray:
        key = sorted(stray)[0]
        raise ConfigError(
            f"key {key!r} (line {seen[key]}) does not apply to bias.kind={kind!r}"
        )
    if kind in ("piecewise", "tabulated") and "bias.nodes" not in values:
        raise ConfigError(f"bias.kind={kind!r} requires bias.nodes")
    if kind == "sinusoid":
        for required in ("bias.amplitude", "bias.omega"):
            if required not in values:
                raise ConfigError(f"bias.kind='sinusoid' requires {required}")

    kwargs = {
        "delta1": values.get("delta1", 1.0),
        "delta1_imag": values.get("delta1_imag", 0.0),
        "gamma_d": values.get("gamma_d", 0.1),
        "gamma_e": values.get("gamma_e", 0.0),
        "bias_kind": kind,
        "bias_v": values.get("bias.v", 1.0),
        "bias_nodes": values.get("bias.nodes", ()),
        "bias_amplitude": values.get("bias.amplitude", 0.0),
        "bias_omega": values.get("bias.omega", 0.0),
        "bias_phase": values.get("bias.phase", 0.0),
        "rtol": values.get("rtol", 1e-9),
        "atol": values.get("atol", 1e-12),
        "window_factor": values.get("window_factor", 40.0),
        "seed": values.get("seed"),
    }
    return RunConfig(**kwargs)


def _require_linear(config: RunConfig, command: str) -> None:
    if config.bias_kind != "linear":
        raise ConfigError(f"{command} requires bias.kind=linear, got {config.bias_kind!r}")


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _write_trajectory(path: str, rows: np.ndarray, full: bool) -> None:
    header = "t,X1,rho_r,rho_i" if full else "t,x,p_r,p_i"
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(_fmt17(c) for c in row) + "\n")
    _atomic_write(path, buf.getvalue())


def cmd_simulate(args) -> int:
    config = parse_config(args.config)
    emit = args.trajectory is not None
    sim = config.sim_config(emit_trajectory=emit)
    run = integrate_full if args.full else integrate
    result = run(config.model_params(), config.bias(), config=sim)
    _emit("x_inf", result.x_inf)
    _emit("x_inf_uncertainty", result.x_inf_uncertainty)
    _emit("n_steps", result.n_steps)
    _emit("final_norm", result.final_norm)
    if emit:
        _write_trajectory(args.trajectory, result.trajectory, args.full)
    return _EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _parse_grid(spec: str, name: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 4:
        raise InvalidInputError(
            f"{name} must look like lo:hi:n:lin or lo:hi:n:log, got {spec!r}"
        )
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InvalidInputError(f"{name}: non-numeric grid bounds in {spec!r}") from None
    scale = parts[3]
    if scale not in ("lin", "log"):
        raise InvalidInputError(f"{name}: scale must be 'lin' or 'log', got {scale!r}")
    if n < 1:
        raise InvalidInputError(f"{name}: need n >= 1, got {n}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidInputError(f"{name}: need finite lo <= hi in {spec!r}")
    if n == 1:
        if lo != hi:
            raise InvalidInputError(f"{name}: a 1-point grid needs lo == hi")
        return np.array([lo])
    if scale == "log":
        if lo <= 0.0:
            raise InvalidInputError(f"{name}: log grids need lo > 0, got {lo}")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def cmd_sweep(args) -> int:
    config = parse_config(args.config)
    _require_linear(config, "sweep")
    v_grid = _parse_grid(args.v_grid, "--v-grid")
    g_grid = _parse_grid(args.gamma_grid, "--gamma-grid")
    delta_abs = math.hypot(config.delta1, config.delta1_imag)
    grid = SweepGrid(
        v_values=v_grid,
        gamma_d_values=g_grid,
        delta1=delta_abs,
        gamma_e=config.gamma_e,
    )
    table = sweep(grid, config.sim_config())

    buf = io.StringIO()
    buf.write("v,gamma_d,x_inf,x_inf_unc,lz_xinf,incoherent_xinf,n_steps\n")
    for r in table.rows:
        buf.write(
            ",".join(
                [
                    _fmt17(r.v),
                    _fmt17(r.gamma_d),
                    _fmt17(r.x_inf),
                    _fmt17(r.x_inf_uncertainty),
                    _fmt17(r.lz_xinf),
                    _fmt17(r.incoherent_xinf),
                    str(int(r.n_steps)),
                ]
            )
            + "\n"
        )
    _atomic_write(args.out, buf.getvalue())
    _emit("rows", len(table))
    _emit("failed", table.n_failed)
    return _EXIT_PARTIAL if table.n_failed else _EXIT_OK


# ---------------------------------------------------------------------------
# limits
# ---------------------------------------------------------------------------


def cmd_limits(args) -> int:
    _emit("landau_zener", landau_zener_xinf(args.delta1, args.v))
    _emit("kayanuma_paper", kayanuma_paper_xinf(args.delta1, args.v))
    _emit("incoherent_derived", incoherent_xinf(args.delta1, args.v))
    if args.t is not None:
        if args.gamma_d is None:
            raise InvalidInputError("--t requires --gamma-d for the trajectory value")
        _emit(
            "incoherent_trajectory",
            incoherent_trajectory(args.delta1, args.v, args.gamma_d, args.t),
        )
    return _EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _read_fit_data(path: str):
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            rows = [row for row in reader if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise InvalidInputError(f"cannot read data {path!r}: {exc}") from exc
    if not rows:
        raise InvalidInputError(f"data file {path!r} is empty")
    header = [c.strip() for c in rows[0]]
    if "v" not in header or "x_inf" not in header:
        raise InvalidInputError(
            f"data file {path!r} needs a header row with 'v' and 'x_inf' columns, "
            f"got {header!r}"
        )
    i_v, i_x = header.index("v"), header.index("x_inf")
    i_w = header.index("weight") if "weight" in header else None
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            v, x = float(row[i_v]), float(row[i_x])
            if i_w is not None:
                samples.append((v, x, float(row[i_w])))
            else:
                samples.append((v, x))
        except (ValueError, IndexError):
            raise InvalidInputError(
                f"data file {path!r} line {lineno}: cannot parse row {row!r}"
            ) from None
    return samples


def _parse_bounds(spec: str):
    parts = spec.split(":")
    if len(parts) != 2:
        raise InvalidInputError(f"--bounds must look like lo:hi, got {spec!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise InvalidInputError(f"--bounds values are not numeric: {spec!r}") from None


def cmd_fit(args) -> int:
    config = parse_config(args.config)
    _require_linear(config, "fit")
    samples = _read_fit_data(args.data)
    problem = FitProblem(
        samples=samples,
        delta1=math.hypot(config.delta1, config.delta1_imag),
        gamma_e=config.gamma_e,
        gamma_d_bounds=_parse_bounds(args.bounds),
        weight_exponent=args.alpha,
    )
    result = fit_gamma_d(problem, config.sim_config())
    _emit("gamma_d_hat", result.gamma_d_hat)
    _emit("weighted_rss", result.weighted_rss)
    _emit("curvature_stderr", result.curvature_stderr)
    _emit("n_model_evals", result.n_model_evals)
    if args.report is not None:
        weights = problem.weights()
        report = {
            "gamma_d_hat": result.gamma_d_hat,
            "weighted_rss": result.weighted_rss,
            "curvature_stderr": result.curvature_stderr,
            "n_model_evals": result.n_model_evals,
            "gamma_d_bounds": list(problem.gamma_d_bounds),
            "weight_exponent": problem.weight_exponent,
            "samples": [
                {
                    "v": s[0],
                    "x_inf": s[1],
                    "weight": float(weights[i]),
                    "residual": result.per_sample_residuals[i],
                }
                for i, s in enumerate(problem.samples)
            ],
        }
        _atomic_write(args.report, json.dumps(report, indent=2) + "\n")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    config = parse_config(args.config)
    _require_linear(config, "check")
    params = config.model_params()
    bias = config.bias()
    checks: list = []

    # Norm contraction, with the integrator's per-step audit armed.
    audit = config.sim_config(
        emit_trajectory=True,
        trajectory_stride=1,
        debug_norm_check=True,
        window_doubling=False,
    )
    trajectory = None
    try:
        audited = integrate(params, bias, config=audit)
        trajectory = audited.trajectory
        checks.append(("norm_contraction", True, audited.max_norm_increase))
    except (InstabilityError, NonConvergenceError):
        checks.append(("norm_contraction", False, math.nan))

    # Exact norm conservation, engaged only in the conservative case; run
    # at tight tolerances since this targets the continuum invariant.
    if params.gamma_d == 0.0 and params.gamma_e == 0.0:
        tight = dataclasses.replace(
            config.sim_config(window_doubling=False),
            rtol=min(config.rtol, 1e-12),
            atol=min(config.atol, 1e-14),
        )
        conserved = integrate(params, bias, config=tight)
        drift = abs(conserved.final_norm - 0.25)
        checks.append(("norm_conservation", drift < 1e-8, drift))

    # Scale invariance: (delta, v, rates) -> (s*delta, s^2*v, s*rates)
    # must leave x(+inf) unchanged.
    s = 2.0
    base = integrate(params, bias, config=config.sim_config())
    scaled_params = ModelParams(
        delta1_r=s * params.delta1_r,
        delta1_i=s * params.delta1_i,
        gamma_d=s * params.gamma_d,
        gamma_e=s * params.gamma_e,
    )
    scaled = integrate(scaled_params, LinearBias(s * s * config.bias_v), config=config.sim_config())
    scale_diff = abs(base.x_inf - scaled.x_inf)
    checks.append(("scale_invariance", scale_diff < 1e-6, scale_diff))

    # Phase invariance of the full system: x(t) must not depend on the
    # complex phase of the gap.
    delta_abs = params.delta1_abs
    _, t_half = auto_window(params, bias, config.sim_config())
    span = np.linspace(-0.9 * t_half, 0.9 * t_half, 33)
    curves = []
    for phase in (0.0, math.pi / 4.0, math.pi / 2.0):
        rotated = ModelParams(
            delta1_r=delta_abs * math.cos(phase),
            delta1_i=delta_abs * math.sin(phase),
            gamma_d=params.gamma_d,
            gamma_e=params.gamma_e,
        )
        full = integrate_full(rotated, bias, config=config.sim_config(), t_eval=span)
        curves.append(full.evaluations[:, 1])
    phase_spread = float(
        max(np.max(np.abs(a - b)) for a in curves for b in curves)
    )
    phase_bound = 10.0 * config.rtol + 100.0 * config.atol
    checks.append(("phase_invariance", phase_spread <= phase_bound, phase_spread))

    # Third-order defect of the audited trajectory.
    if trajectory is not None:
        defect = third_order_defect(trajectory, params, config.bias_v)
        defect_max = float(np.max(np.abs(defect[:, 1]))) if defect.size else 0.0
        checks.append(("third_order_defect", defect_max < _DEFECT_LIMIT, defect_max))
    else:
        checks.append(("third_order_defect", False, math.nan))

    all_ok = True
    for name, ok, value in checks:
        print(f"check_{name}={'pass' if ok else 'fail'}")
        _emit(f"{name}_value", value)
        all_ok = all_ok and ok
    return _EXIT_OK if all_ok else _EXIT_CHECK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped onto exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lzdec",
        description="Dissipative sweep-through-resonance simulator and fitter.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one configuration")
    p.add_argument("config", help="path to key=value config file")
    p.add_argument("--trajectory", metavar="PATH", help="write trajectory CSV here")
    p.add_argument("--full", action="store_true", help="run the unrotated three-component system")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="grid sweep over (v, gamma_d)")
    p.add_argument("config")
    p.add_argument("--v-grid", required=True, metavar="lo:hi:n:lin|log")
    p.add_argument("--gamma-grid", required=True, metavar="lo:hi:n:lin|log")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limits", help="closed-form endpoint values")
    p.add_argument("--delta1", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--gamma-d", type=float, default=None)
    p.add_argument("--t", type=float, default=None)
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("fit", help="recover gamma_d from (v, x_inf) data")
    p.add_argument("data", help="CSV with header columns v,x_inf[,weight]")
    p.add_argument("config")
    p.add_argument("--alpha", type=float, default=1.0, help="weight exponent (w ~ v**-alpha)")
    p.add_argument("--bounds", default="1e-3:1e3", metavar="lo:hi")
    p.add_argument("--report", metavar="PATH", help="write JSON fit report here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("check", help="self-check the configured point")
    p.add_argument("config")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UnidentifiableFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.details:
            print(json.dumps(exc.details, indent=2), file=sys.stderr)
        return _EXIT_UNIDENTIFIABLE
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NONCONV
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_NONCONV
    except (InvalidInputError, LzdecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
