"""Parameter sweeps over (v, gamma_d) and recovery of gamma_d from data.

The sweep half is plumbing: one :func:`lzdec.integrator.integrate` call
per grid point, collected into a deterministic v-major table alongside
the two closed-form reference columns.

The fit half inverts the forward model.  The objective is a weighted sum
of squared endpoint residuals, minimized over ``log(gamma_d)`` because
the sensitivity of x(+inf) to gamma_d spans decades.  Low sweep
velocities carry most of the information, hence the default ``v**-alpha``
weighting.  When the data cannot pin gamma_d down (all samples fast, or
an objective that is flat across the bounds) the fitter raises
:class:`~lzdec.errors.UnidentifiableFitError` instead of returning an
arbitrary interior point; convergence onto a bound is reported normally,
since "at or below the lower bound" is itself an informative outcome.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidInputError, NonConvergenceError, UnidentifiableFitError
from .integrator import SimConfig, integrate, integrate_full
from .limits import incoherent_xinf, landau_zener_xinf
from .model import LinearBias, ModelParams

__all__ = [
    "SweepGrid",
    "SweepRow",
    "SweepTable",
    "sweep",
    "find_xinf_minimum",
    "FitProblem",
    "FitResult",
    "fit_gamma_d",
]

# Half of the "about three orders of magnitude" of usable gamma_d
# resolution: a fit whose one-sigma spread in log10(gamma_d) exceeds this
# cannot be trusted to localize the rate.
_UNIDENTIFIABLE_DECADES = 1.5


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian (v, gamma_d) grid at fixed gap and relaxation rate."""

    v_values: Sequence[float]
    gamma_d_values: Sequence[float]
    delta1: float = 1.0
    gamma_e: float = 0.0

    def __post_init__(self):
        vs = tuple(float(v) for v in self.v_values)
        gs = tuple(float(g) for g in self.gamma_d_values)
        if not vs or not gs:
            raise InvalidInputError("sweep grid axes must be non-empty")
        for v in vs:
            if not math.isfinite(v) or v <= 0.0:
                raise InvalidInputError(f"sweep velocities must be positive, got {v!r}")
        for g in gs:
            if not math.isfinite(g) or g < 0.0:
                raise InvalidInputError(
                    f"decoherence rates must be non-negative, got {g!r}"
                )
        _finite("delta1", self.delta1)
        gamma_e = _finite("gamma_e", self.gamma_e)
        if gamma_e < 0.0:
            raise InvalidInputError(f"gamma_e must be non-negative, got {gamma_e!r}")
        object.__setattr__(self, "v_values", vs)
        object.__setattr__(self, "gamma_d_values", gs)


class SweepRow(NamedTuple):
    v: float
    gamma_d: float
    x_inf: float
    x_inf_uncertainty: float
    n_steps: int
    lz_xinf: float
    incoherent_xinf: float


@dataclass(frozen=True)
class SweepTable:
    """Sweep results in v-major order plus reference-limit columns."""

    rows: tuple
    delta1: float
    gamma_e: float

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.rows if not math.isfinite(r.x_inf))

    def slice_at_gamma(self, gamma_d: float):
        """Rows at one gamma_d as ``[(v, x_inf), ...]`` sorted by v."""
        picked = [
            (r.v, r.x_inf)
            for r in self.rows
            if math.isclose(r.gamma_d, gamma_d, rel_tol=1e-12, abs_tol=1e-300)
        ]
        if not picked:
            raise InvalidInputError(f"no sweep rows at gamma_d={gamma_d!r}")
        return sorted(picked)


def _xinf_once(delta1, gamma_d, gamma_e, v, config):
    """One forward-model endpoint; mirrors what the sweep and fit both use."""
    if gamma_e > 0.0:
        params = ModelParams(delta1_r=delta1, gamma_d=gamma_d, gamma_e=gamma_e)
        result = integrate_full(params, LinearBias(v), config=config)
    else:
        params = ModelParams(delta1_r=delta1, gamma_d=gamma_d)
        result = integrate(params, LinearBias(v), config=config)
    return result


def sweep(grid: SweepGrid, config: Optional[SimConfig] = None) -> SweepTable:
    """Evaluate x(+inf) on every grid point.

    Rows come out v-major (all gamma_d for the first v, then the second
    v, ...) regardless of evaluation order.  A point that fails to
    converge is recorded as a NaN row rather than aborting the sweep.
    """
    if config is None:
        config = SimConfig()
    rows = []
    for v in grid.v_values:
        lz = landau_zener_xinf(grid.delta1, v)
        inc = incoherent_xinf(grid.delta1, v)
        for g in grid.gamma_d_values:
            try:
                res = _xinf_once(grid.delta1, g, grid.gamma_e, v, config)
                x, unc, n = res.x_inf, res.x_inf_uncertainty, res.n_steps
            except NonConvergenceError as exc:
                partial = exc.partial_result
                x, unc = math.nan, math.nan
                n = partial.n_steps if partial is not None else 0
            rows.append(SweepRow(v, g, x, unc, n, lz, inc))
    return SweepTable(rows=tuple(rows), delta1=grid.delta1, gamma_e=grid.gamma_e)


def find_xinf_minimum(points) -> Optional[tuple]:
    """Locate a strict interior minimum of x(+inf) over v.

    ``points`` is a sequence of ``(v, x_inf)`` sorted by increasing v with
    at least five entries.  Returns ``(v_min, x_min)`` for the deepest
    sample that is strictly below both neighbors and both endpoints, or
    ``None`` when no sample qualifies (monotone slices).
    """
    pts = [(float(v), float(x)) for v, x in points]
    if len(pts) < 5:
        raise InvalidInputError(f"need at least 5 points, got {len(pts)}")
    vs = [p[0] for p in pts]
    xs = [p[1] for p in pts]
    if any(b <= a for a, b in zip(vs, vs[1:])):
        raise InvalidInputError("points must be sorted by strictly increasing v")
    if not all(map(math.isfinite, xs)):
        raise InvalidInputError("x_inf values must be finite")
    best = None
    for k in range(1, len(pts) - 1):
        if (
            xs[k] < xs[k - 1]
            and xs[k] < xs[k + 1]
            and xs[k] < xs[0]
            and xs[k] < xs[-1]
        ):
            if best is None or xs[k] < best[1]:
                best = (vs[k], xs[k])
    return best


@dataclass(frozen=True)
class FitProblem:
    """Measured ``(v, x_inf)`` samples plus the knowns of the forward model.

    ``samples`` rows are ``(v, x_inf)`` or ``(v, x_inf, weight)``; either
    every row carries an explicit weight or none does, in which case
    weights default to ``v**-weight_exponent``.  Weights are normalized
    to sum to one, so any common rescaling leaves the fit unchanged.

    ``noise_floor`` is the measurement resolution assumed when judging
    identifiability (it never enters the objective itself).
    """

    samples: Sequence[tuple]
    delta1: float = 1.0
    gamma_e: float = 0.0
    gamma_d_bounds: tuple = (1e-3, 1e3)
    weight_exponent: float = 1.0
    noise_floor: float = 0.01

    def __post_init__(self):
        rows = [tuple(float(c) for c in row) for row in self.samples]
        if len(rows) < 3:
            raise InvalidInputError(f"need at least 3 samples, got {len(rows)}")
        widths = {len(r) for r in rows}
        if not widths <= {2, 3} or len(widths) != 1:
            raise InvalidInputError(
                "samples must be uniformly (v, x_inf) or (v, x_inf, weight)"
            )
        for r in rows:
            if not all(map(math.isfinite, r)):
                raise InvalidInputError(f"sample contains non-finite value: {r!r}")
            if r[0] <= 0.0:
                raise InvalidInputError(f"sample velocity must be positive: {r!r}")
            if len(r) == 3 and r[2] <= 0.0:
                raise InvalidInputError(f"sample weight must be positive: {r!r}")
        lo, hi = (float(b) for b in self.gamma_d_bounds)
        if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 < lo < hi):
            raise InvalidInputError(
                f"gamma_d_bounds must satisfy 0 < lo < hi, got {(lo, hi)!r}"
            )
        _finite("delta1", self.delta1)
        if _finite("gamma_e", self.gamma_e) < 0.0:
            raise InvalidInputError("gamma_e must be non-negative")
        _finite("weight_exponent", self.weight_exponent)
        if _finite("noise_floor", self.noise_floor) <= 0.0:
            raise InvalidInputError("noise_floor must be positive")
        object.__setattr__(self, "samples", tuple(rows))
        object.__setattr__(self, "gamma_d_bounds", (lo, hi))

    def velocities(self) -> np.ndarray:
        return np.array([r[0] for r in self.samples])

    def measured(self) -> np.ndarray:
        return np.array([r[1] for r in self.samples])

    def weights(self) -> np.ndarray:
        if len(self.samples[0]) == 3:
            w = np.array([r[2] for r in self.samples])
        else:
            w = self.velocities() ** (-self.weight_exponent)
        return w / w.sum()


@dataclass(frozen=True)
class FitResult:
    gamma_d_hat: float
    weighted_rss: float
    per_sample_residuals: list
    curvature_stderr: float  # one-sigma spread of log10(gamma_d)
    n_model_evals: int


def fit_gamma_d(problem: FitProblem, config: Optional[SimConfig] = None) -> FitResult:
    """Weighted least-squares estimate of gamma_d on log scale.

    Minimizes ``sum_i w_i (x_model(v_i; gamma_d) - x_meas_i)**2`` over
    ``log(gamma_d)`` within ``problem.gamma_d_bounds`` using bounded
    Brent descent seeded from five log-spaced starting points.  Model
    endpoints are evaluated with window doubling disabled: the fit only
    needs endpoint accuracy well below ``noise_floor``, and the halved
    cost dominates the error budget here.

    Raises
    ------
    UnidentifiableFitError
        When the objective is flat to machine precision across the
        bounds, or when the minimum is interior but so shallow that the
        implied one-sigma spread of log10(gamma_d) exceeds 1.5 decades.
    """
    if config is None:
        config = SimConfig()
    fit_config = dataclasses.replace(
        config,
        window_doubling=False,
        emit_trajectory=False,
        trajectory_stride=0,
        debug_norm_check=False,
        t_span=None,
    )

    vs = problem.velocities()
    meas = problem.measured()
    weights = problem.weights()
    lo, hi = problem.gamma_d_bounds
    u_lo, u_hi = math.log(lo), math.log(hi)

    n_evals = [0]
    memo: dict = {}

    def objective(u: float) -> float:
        u = float(u)
        if u in memo:
            return memo[u]
        gamma = math.exp(min(max(u, u_lo), u_hi))
        model = np.array(
            [
                _xinf_once(problem.delta1, gamma, problem.gamma_e, v, fit_config).x_inf
                for v in vs
            ]
        )
        n_evals[0] += len(vs)
        value = float(np.sum(weights * (model - meas) ** 2))
        memo[u] = value
        return value

    seeds = np.log(np.geomspace(lo, hi, 5))
    seed_vals = np.array([objective(u) for u in seeds])
    flat_span = float(seed_vals.max() - seed_vals.min())
    if flat_span <= 64.0 * np.finfo(float).eps * max(1.0, float(seed_vals.max())):
        raise UnidentifiableFitError(
            "objective is flat to machine precision across the gamma_d bounds",
            details={
                "seed_gamma_d": [float(math.exp(u)) for u in seeds],
                "seed_objectives": [float(j) for j in seed_vals],
            },
        )

    minimize_scalar(
        objective,
        bounds=(u_lo, u_hi),
        method="bounded",
        options={"xatol": 1e-4, "maxiter": 500},
    )
    # If a seed undercuts everything Brent visited, descend again between
    # that seed's neighbors: guards against a flat shoulder capturing the
    # full-range search.
    best_seed = int(np.argmin(seed_vals))
    if seed_vals[best_seed] < min(memo.values()) * (1.0 + 1e-12):
        sub_lo = seeds[max(best_seed - 1, 0)]
        sub_hi = seeds[min(best_seed + 1, len(seeds) - 1)]
        if sub_lo < sub_hi:
            minimize_scalar(
                objective,
                bounds=(sub_lo, sub_hi),
                method="bounded",
                options={"xatol": 1e-4, "maxiter": 500},
            )

    u_hat = min(memo, key=memo.get)
    j_hat = memo[u_hat]
    on_boundary = (u_hat - u_lo) <= 1e-3 or (u_hi - u_hat) <= 1e-3

    # Quadratic probe of the objective around the minimum: J ~ J0 + a*du^2
    # with a = sum_i w_i (dx/du)^2, so sigma_u = sigma_eff/sqrt(a).
    du = 0.05
    if u_hat - u_lo < 2 * du:
        offsets = du * np.arange(5.0)
    elif u_hi - u_hat < 2 * du:
        offsets = -du * np.arange(5.0)
    else:
        offsets = du * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    probe_u = np.clip(u_hat + offsets, u_lo, u_hi)
    probe_j = np.array([objective(u) for u in probe_u])
    curvature = float(np.polyfit(probe_u - u_hat, probe_j, 2)[0])
    sigma_eff = max(math.sqrt(max(j_hat, 0.0)), problem.noise_floor)
    if curvature > 0.0:
        stderr_decades = sigma_eff / math.sqrt(curvature) / math.log(10.0)
    else:
        stderr_decades = math.inf

    if not on_boundary and stderr_decades >= _UNIDENTIFIABLE_DECADES:
        raise UnidentifiableFitError(
            "gamma_d is unidentifiable from these samples: the objective "
            f"minimum is too shallow (one-sigma spread {stderr_decades:.2g} "
            "decades of gamma_d)",
            details={
                "gamma_d_at_min": float(math.exp(u_hat)),
                "weighted_rss": float(j_hat),
                "curvature_stderr": float(stderr_decades),
                "noise_floor": problem.noise_floor,
            },
        )

    gamma_hat = math.exp(u_hat)
    model = np.array(
        [
            _xinf_once(problem.delta1, gamma_hat, problem.gamma_e, v, fit_config).x_inf
            for v in vs
        ]
    )
    n_evals[0] += len(vs)
    residuals = [float(r) for r in (model - meas)]
    return FitResult(
        gamma_d_hat=float(gamma_hat),
        weighted_rss=float(j_hat),
        per_sample_residuals=residuals,
        curvature_stderr=float(stderr_decades),
        n_model_evals=int(n_evals[0]),
    )
