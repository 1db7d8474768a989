"""Core model types and equations of motion for a driven two-level doublet.

The physical system is a tunneling doublet with gap Delta_1 (possibly
complex), swept through resonance by a time-dependent energy bias W1(t),
subject to decoherence at rate gamma_d and population relaxation at rate
gamma_e.  Two equivalent formulations are implemented:

* the *full* system in the population difference X1 and the raw coherence
  components (rho11p_r, rho11p_i), valid for complex gap and gamma_e > 0;

* the *reduced* system in (x, p_r, p_i), obtained by rotating the
  coherences into the frame aligned with the gap phase and factoring out
  the relaxation envelope exp(-gamma_e * (t - t0)).  It depends only on
  the gap magnitude:

      dx/dt   =  2*Delta1*p_i
      dp_r/dt = -gamma_d*p_r - W1(t)*p_i
      dp_i/dt = -gamma_d*p_i + W1(t)*p_r - (Delta1/2)*x

The reduced system contracts the norm N = (x/2)^2 + p_r^2 + p_i^2 at the
exact rate dN/dt = -2*gamma_d*(p_r^2 + p_i^2), which the integrator and
the test-suite use as a correctness monitor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidProfileError, UndefinedRotationError

__all__ = [
    "ModelParams",
    "LinearBias",
    "PiecewiseLinearBias",
    "SinusoidalBias",
    "TabulatedBias",
    "ReducedState",
    "FullState",
    "InitialCondition",
    "derivative_reduced",
    "derivative_full",
    "rotate_to_reduced",
    "rotate_from_reduced",
    "apply_relaxation_envelope",
    "reduced_norm",
]

# Bias kind codes shared with the compiled integrator kernels.
BIAS_LINEAR = 0
BIAS_PIECEWISE = 1
BIAS_SINUSOID = 2
BIAS_TABULATED = 3

_EMPTY = np.empty(0, dtype=np.float64)


def _require_finite(name: str, *values: float) -> None:
    for val in values:
        if not math.isfinite(val):
            raise InvalidInputError(f"{name} must be finite, got {val!r}")


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in natural units (hbar = 1).

    Attributes:
        delta1_r: real part of the tunneling gap Delta_1 (energy).
        delta1_i: imaginary part of the tunneling gap (energy).
        gamma_d: decoherence (pure dephasing) rate, >= 0.
        gamma_e: population relaxation rate out of the doublet, >= 0.
    """

    delta1_r: float
    delta1_i: float = 0.0
    gamma_d: float = 0.0
    gamma_e: float = 0.0

    def __post_init__(self):
        _require_finite(
            "ModelParams fields", self.delta1_r, self.delta1_i, self.gamma_d, self.gamma_e
        )
        if self.gamma_d < 0:
            raise InvalidInputError(f"gamma_d must be >= 0, got {self.gamma_d}")
        if self.gamma_e < 0:
            raise InvalidInputError(f"gamma_e must be >= 0, got {self.gamma_e}")

    @property
    def delta1_abs(self) -> float:
        """Gap magnitude |Delta_1|."""
        return math.hypot(self.delta1_r, self.delta1_i)

    @property
    def gamma_11(self) -> float:
        """Total coherence decay rate gamma_d + gamma_e."""
        return self.gamma_d + self.gamma_e


def _as_nodes(nodes) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(nodes, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise InvalidProfileError("nodes must be a sequence of at least two (t, W1) pairs")
    if not np.all(np.isfinite(arr)):
        raise InvalidProfileError("node times and values must be finite")
    times = np.ascontiguousarray(arr[:, 0])
    values = np.ascontiguousarray(arr[:, 1])
    if not np.all(np.diff(times) > 0):
        raise InvalidProfileError("node times must be strictly increasing")
    return times, values


@dataclass(frozen=True)
class LinearBias:
    """Linear sweep W1(t) = v * t with velocity v > 0."""

    v: float

    def __post_init__(self):
        _require_finite("LinearBias.v", self.v)
        if self.v <= 0:
            raise InvalidProfileError(f"sweep velocity must be > 0, got {self.v}")

    def w(self, t):
        return self.v * t

    def _kernel_spec(self):
        return BIAS_LINEAR, self.v, 0.0, 0.0, _EMPTY, _EMPTY


@dataclass(frozen=True)
class PiecewiseLinearBias:
    """Piecewise-linear bias through (t, W1) nodes, held constant outside."""

    nodes: tuple

    def __post_init__(self):
        times, values = _as_nodes(self.nodes)
        object.__setattr__(self, "_times", times)
        object.__setattr__(self, "_values", values)
        object.__setattr__(self, "nodes", tuple((float(t), float(v)) for t, v in zip(times, values)))

    @property
    def t_first(self) -> float:
        return float(self._times[0])

    @property
    def t_last(self) -> float:
        return float(self._times[-1])

    def w(self, t):
        return np.interp(t, self._times, self._values)

    def _kernel_spec(self):
        return BIAS_PIECEWISE, 0.0, 0.0, 0.0, self._times, self._values


@dataclass(frozen=True)
class SinusoidalBias:
    """Oscillating bias W1(t) = amplitude * sin(angular_frequency * t + phase)."""

    amplitude: float
    angular_frequency: float
    phase: float = 0.0

    def __post_init__(self):
        _require_finite(
            "SinusoidalBias fields", self.amplitude, self.angular_frequency, self.phase
        )

    def w(self, t):
        return self.amplitude * np.sin(self.angular_frequency * t + self.phase)

    def _kernel_spec(self):
        return BIAS_SINUSOID, self.amplitude, self.angular_frequency, self.phase, _EMPTY, _EMPTY


@dataclass(frozen=True)
class TabulatedBias:
    """Bias interpolated linearly through samples; undefined outside their span."""

    samples: tuple

    def __post_init__(self):
        times, values = _as_nodes(self.samples)
        object.__setattr__(self, "_times", times)
        object.__setattr__(self, "_values", values)
        object.__setattr__(
            self, "samples", tuple((float(t), float(v)) for t, v in zip(times, values))
        )

    @property
    def t_first(self) -> float:
        return float(self._times[0])

    @property
    def t_last(self) -> float:
        return float(self._times[-1])

    def w(self, t):
        t_arr = np.asarray(t, dtype=np.float64)
        if np.any(t_arr < self._times[0]) or np.any(t_arr > self._times[-1]):
            raise InvalidProfileError(
                f"tabulated bias queried at t outside [{self._times[0]}, {self._times[-1]}]"
            )
        return np.interp(t, self._times, self._values)

    def _kernel_spec(self):
        # Range is validated against the integration window before the kernel
        # runs, so in-kernel evaluation may clamp like the piecewise variant.
        return BIAS_TABULATED, 0.0, 0.0, 0.0, self._times, self._values


BiasProfile = LinearBias | PiecewiseLinearBias | SinusoidalBias | TabulatedBias


@dataclass(frozen=True)
class ReducedState:
    """State (x, p_r, p_i) of the reduced, gap-aligned system."""

    x: float
    p_r: float = 0.0
    p_i: float = 0.0

    def __post_init__(self):
        _require_finite("ReducedState fields", self.x, self.p_r, self.p_i)


@dataclass(frozen=True)
class FullState:
    """State (X1, rho_r, rho_i) with raw (unrotated) coherence components."""

    X1: float
    rho_r: float = 0.0
    rho_i: float = 0.0

    def __post_init__(self):
        _require_finite("FullState fields", self.X1, self.rho_r, self.rho_i)


@dataclass(frozen=True)
class InitialCondition:
    """A state pinned at a finite start time t0.

    The standard initial condition of the sweep problem is x = 1 with no
    coherence, applied at the left edge of the integration window.
    """

    state: ReducedState | FullState
    t0: float

    def __post_init__(self):
        _require_finite("InitialCondition.t0", self.t0)

    @staticmethod
    def standard(t0: float) -> "InitialCondition":
        return InitialCondition(state=ReducedState(x=1.0), t0=t0)


def reduced_norm(x: float, p_r: float, p_i: float) -> float:
    """Contracting norm N = (x/2)^2 + p_r^2 + p_i^2 of the reduced system."""
    return 0.25 * x * x + p_r * p_r + p_i * p_i


def derivative_reduced(
    state: ReducedState, t: float, params: ModelParams, bias: BiasProfile
) -> tuple[float, float, float]:
    """Right-hand side (dx/dt, dp_r/dt, dp_i/dt) of the reduced system."""
    x, p_r, p_i = state.x, state.p_r, state.p_i
    _require_finite("reduced state", x, p_r, p_i)
    _require_finite("time", t)
    delta = params.delta1_abs
    gamma = params.gamma_d
    w1 = float(bias.w(t))
    dx = 2.0 * delta * p_i
    dpr = -gamma * p_r - w1 * p_i
    dpi = -gamma * p_i + w1 * p_r - 0.5 * delta * x
    return dx, dpr, dpi


def derivative_full(
    state: FullState, t: float, params: ModelParams, bias: BiasProfile
) -> tuple[float, float, float]:
    """Right-hand side (dX1/dt, drho_r/dt, drho_i/dt) of the full system.

    Uses the raw coherence components and the complex gap; the coherence
    decay rate is gamma_11 = gamma_d + gamma_e.
    """
    x1, rr, ri = state.X1, state.rho_r, state.rho_i
    _require_finite("full state", x1, rr, ri)
    _require_finite("time", t)
    d_r, d_i = params.delta1_r, params.delta1_i
    g11 = params.gamma_11
    w1 = float(bias.w(t))
    dX1 = -params.gamma_e * x1 - 2.0 * (d_r * ri - d_i * rr)
    drr = -g11 * rr + w1 * ri - 0.5 * d_i * x1
    dri = -w1 * rr - g11 * ri + 0.5 * d_r * x1
    return dX1, drr, dri


def rotate_to_reduced(raw: tuple[float, float], params: ModelParams) -> tuple[float, float]:
    """Rotate raw coherences (rho11p_r, rho11p_i) into the gap-aligned frame.

    Returns (rho_r, rho_i) with rho_r = (d_i*ri + d_r*rr)/|Delta1| and
    rho_i = (d_i*rr - d_r*ri)/|Delta1|.  The transform is orthogonal and
    involutive (it is its own inverse).
    """
    rr, ri = raw
    _require_finite("raw coherences", rr, ri)
    delta = params.delta1_abs
    if delta == 0.0:
        raise UndefinedRotationError("gap-aligned rotation is undefined for Delta1 = 0")
    d_r, d_i = params.delta1_r, params.delta1_i
    rho_r = (d_i * ri + d_r * rr) / delta
    rho_i = (d_i * rr - d_r * ri) / delta
    return rho_r, rho_i


def rotate_from_reduced(
    rotated: tuple[float, float], params: ModelParams
) -> tuple[float, float]:
    """Inverse of :func:`rotate_to_reduced` (the same involutive map)."""
    return rotate_to_reduced(rotated, params)


def apply_relaxation_envelope(trajectory, gamma_e: float, t0: float):
    """Multiply x(t) samples by the relaxation envelope exp(-gamma_e*(t - t0)).

    Args:
        trajectory: sequence of (t, x) pairs (or an (n, 2) array).
        gamma_e: relaxation rate, >= 0.
        t0: envelope anchor; the envelope equals 1 at t = t0 so that
            X1(t0) = x(t0).

    Returns:
        numpy array of shape (n, 2) with rows (t, X1).
    """
    if gamma_e < 0:
        raise InvalidInputError(f"gamma_e must be >= 0, got {gamma_e}")
    _require_finite("t0", t0)
    arr = np.asarray(trajectory, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError("trajectory must be a sequence of (t, x) pairs")
    out = arr.copy()
    out[:, 1] = arr[:, 1] * np.exp(-gamma_e * (arr[:, 0] - t0))
    return out
