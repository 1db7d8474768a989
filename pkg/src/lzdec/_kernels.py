"""Compiled adaptive Runge-Kutta cores for the reduced and full systems.

The integrator is the classic Dormand-Prince 5(4) embedded pair with a PI
step controller, hand-specialized to the three-component states of this
model so the hot loop runs on scalars.  Two refinements matter here:

* Error scaling is rotation-invariant: both coherence components share a
  single scale built from their Euclidean magnitude.  This makes the
  accepted-step sequence (and hence the result) independent of the gap
  phase up to roundoff, which the full-system phase-invariance contract
  requires.

* A stability-aware step cap.  The pair's fifth-order stability function
  satisfies |R(i y)|^2 = 1 + y^8/2880 + O(y^10): it is weakly unstable on
  the whole imaginary axis, so in the far wings (|W1| large, coherences
  tiny) a spurious parasitic mode grows until the error estimator notices
  and triggers rejection bursts.  Damping at rate gamma kills the parasite
  at e^{-gamma h} per step, so the largest parasite-neutral step satisfies
  y^7 = gamma / (y8_coef * omega) with y = h * omega.  The cap clamps the
  controller to that step (within [Y_MIN, Y_MAX]), which keeps acceptance
  near 100% and makes step counts, and so runtimes, predictable.

All functions are compiled with numba when available and fall back to
pure Python otherwise (same semantics, much slower).
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_HALF_PI = math.pi / 2.0

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_PI_ALPHA = 0.17  # error exponent of the PI controller
_PI_BETA = 0.04  # memory exponent of the PI controller

# Stability-cap constants (see module docstring).
_Y8_COEF = 1.0 / 2880.0  # per-step parasite growth is ~ (y^8) * _Y8_COEF / 2
_Y_MIN = 0.25
_Y_MAX = 2.6
_REAL_AXIS_Y = 2.9  # DP5 real-axis stability interval is about (-3.3, 0)

# Kernel exit codes.
OK = 0
MAX_STEPS = 1
NORM_GROWTH = 2
NOT_FINITE = 3
STEP_UNDERFLOW = 4
DEBUG_NORM_VIOLATION = 5

# Bias kind codes (mirrors model.py).
_KIND_LINEAR = 0
_KIND_PIECEWISE = 1
_KIND_SINUSOID = 2
_KIND_TABULATED = 3


@njit(cache=True, inline="always")
def _bias_w(kind, ba, bb, bc, bts, bws, t):
    if kind == _KIND_LINEAR:
        return ba * t
    if kind == _KIND_SINUSOID:
        return ba * math.sin(bb * t + bc)
    # Piecewise-linear and tabulated: clamped linear interpolation.  The
    # tabulated variant's domain is validated before the kernel runs.
    n = bts.shape[0]
    if t <= bts[0]:
        return bws[0]
    if t >= bts[n - 1]:
        return bws[n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if bts[mid] <= t:
            lo = mid
        else:
            hi = mid
    frac = (t - bts[lo]) / (bts[lo + 1] - bts[lo])
    return bws[lo] + frac * (bws[lo + 1] - bws[lo])


@njit(cache=True, inline="always")
def _h_stab(delta_sq, gamma, kind, ba, bb, bc, bts, bws, t):
    """Largest parasite-safe step near time t (stability cap)."""
    w1 = _bias_w(kind, ba, bb, bc, bts, bws, t)
    omega_sq = delta_sq + w1 * w1
    omega = math.sqrt(omega_sq)
    if gamma >= omega:
        lam = math.sqrt(omega_sq + gamma * gamma)
        if lam <= 0.0:
            return math.inf
        return _REAL_AXIS_Y / lam
    y = (gamma / (_Y8_COEF * omega)) ** (1.0 / 7.0) if gamma > 0.0 else 0.0
    if y < _Y_MIN:
        y = _Y_MIN
    elif y > _Y_MAX:
        y = _Y_MAX
    return y / omega


def _make_dopri5(full_system: bool):
    """Build the reduced- or full-system kernel from one template.

    The two systems share every control-flow detail and differ only in the
    right-hand side and the damping rate used by the stability cap, so the
    kernel body is written once and specialized by this closure before JIT
    compilation.
    """

    if full_system:

        @njit(cache=True, inline="always")
        def _rhs(p1, p2, p3, p4, w1, y1, y2, y3):
            # p1=delta1_r, p2=delta1_i, p3=gamma_11, p4=gamma_e
            d1 = -p4 * y1 - 2.0 * (p1 * y3 - p2 * y2)
            d2 = -p3 * y2 + w1 * y3 - 0.5 * p2 * y1
            d3 = -w1 * y2 - p3 * y3 + 0.5 * p1 * y1
            return d1, d2, d3

    else:

        @njit(cache=True, inline="always")
        def _rhs(p1, p2, p3, p4, w1, y1, y2, y3):
            # p1=delta1, p3=gamma_d; p2, p4 unused
            d1 = 2.0 * p1 * y3
            d2 = -p3 * y2 - w1 * y3
            d3 = -p3 * y3 + w1 * y2 - 0.5 * p1 * y1
            return d1, d2, d3

    @njit(cache=True)
    def _kernel(
        p1,
        p2,
        p3,
        p4,
        kind,
        ba,
        bb,
        bc,
        bts,
        bws,
        t0,
        t_end,
        y1,
        y2,
        y3,
        rtol,
        atol,
        max_steps,
        chk_t,
        chk_out,
        avg_start,
        avg_c1,
        avg_c2,
        avg_winv,
        rec_stride,
        rec_buf,
        debug_norm,
    ):
        delta_sq = p1 * p1 + p2 * p2
        gamma_damp = p3  # coherence damping rate (gamma_d or gamma_11)

        t = t0
        n_acc = 0
        n_rej = 0
        status = OK

        norm0 = 0.25 * y1 * y1 + y2 * y2 + y3 * y3
        norm_prev = norm0
        norm_budget = norm0 + 1000.0 * rtol
        max_inc = 0.0

        acc_num = 0.0
        acc_den = 0.0
        averaging = not math.isnan(avg_start)

        n_chk = chk_t.shape[0]
        chk_i = 0
        rec_cap = rec_buf.shape[0]
        rec_n = 0
        rec_dropped = 0
        if rec_stride > 0:
            if rec_n < rec_cap:
                rec_buf[rec_n, 0] = t
                rec_buf[rec_n, 1] = y1
                rec_buf[rec_n, 2] = y2
                rec_buf[rec_n, 3] = y3
                rec_n += 1
            else:
                rec_dropped += 1

        w1 = _bias_w(kind, ba, bb, bc, bts, bws, t)
        k11, k12, k13 = _rhs(p1, p2, p3, p4, w1, y1, y2, y3)

        # Starting step (Hairer's heuristic), clamped by the stability cap.
        sc1 = atol + rtol * abs(y1)
        scp = atol + rtol * math.hypot(y2, y3)
        d0 = math.sqrt(((y1 / sc1) ** 2 + (y2 / scp) ** 2 + (y3 / scp) ** 2) / 3.0)
        d1 = math.sqrt(((k11 / sc1) ** 2 + (k12 / scp) ** 2 + (k13 / scp) ** 2) / 3.0)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        span = t_end - t0
        if h0 > span:
            h0 = span
        u1 = y1 + h0 * k11
        u2 = y2 + h0 * k12
        u3 = y3 + h0 * k13
        w1p = _bias_w(kind, ba, bb, bc, bts, bws, t + h0)
        g1, g2, g3 = _rhs(p1, p2, p3, p4, w1p, u1, u2, u3)
        d2 = (
            math.sqrt(
                (((g1 - k11) / sc1) ** 2 + ((g2 - k12) / scp) ** 2 + ((g3 - k13) / scp) ** 2) / 3.0
            )
            / h0
        )
        dm = max(d1, d2)
        if dm <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / dm) ** 0.2
        h = min(100.0 * h0, h1)
        h_cap = _h_stab(delta_sq, gamma_damp, kind, ba, bb, bc, bts, bws, t)
        if h > h_cap:
            h = h_cap
        if h > span:
            h = span

        facold = 1e-4
        tiny = 2.3e-16

        while t < t_end:
            if n_acc + n_rej >= max_steps:
                status = MAX_STEPS
                break

            target = t_end
            if chk_i < n_chk:
                ct = chk_t[chk_i]
                if ct < t_end:
                    target = ct
            landing = False
            h_use = h
            if t + h >= target:
                h_use = target - t
                landing = True
            if h_use < tiny * max(abs(t), abs(target)):
                if landing:
                    # Degenerate gap between checkpoints: snap to the target.
                    t = target
                    if chk_i < n_chk and target == chk_t[chk_i]:
                        chk_out[chk_i, 0] = y1
                        chk_out[chk_i, 1] = y2
                        chk_out[chk_i, 2] = y3
                        chk_i += 1
                    continue
                status = STEP_UNDERFLOW
                break

            hh = h_use

            # Stage 2
            u1 = y1 + hh * (_A21 * k11)
            u2 = y2 + hh * (_A21 * k12)
            u3 = y3 + hh * (_A21 * k13)
            w = _bias_w(kind, ba, bb, bc, bts, bws, t + _C2 * hh)
            k21, k22, k23 = _rhs(p1, p2, p3, p4, w, u1, u2, u3)
            # Stage 3
            u1 = y1 + hh * (_A31 * k11 + _A32 * k21)
            u2 = y2 + hh * (_A31 * k12 + _A32 * k22)
            u3 = y3 + hh * (_A31 * k13 + _A32 * k23)
            w = _bias_w(kind, ba, bb, bc, bts, bws, t + _C3 * hh)
            k31, k32, k33 = _rhs(p1, p2, p3, p4, w, u1, u2, u3)
            # Stage 4
            u1 = y1 + hh * (_A41 * k11 + _A42 * k21 + _A43 * k31)
            u2 = y2 + hh * (_A41 * k12 + _A42 * k22 + _A43 * k32)
            u3 = y3 + hh * (_A41 * k13 + _A42 * k23 + _A43 * k33)
            w = _bias_w(kind, ba, bb, bc, bts, bws, t + _C4 * hh)
            k41, k42, k43 = _rhs(p1, p2, p3, p4, w, u1, u2, u3)
            # Stage 5
            u1 = y1 + hh * (_A51 * k11 + _A52 * k21 + _A53 * k31 + _A54 * k41)
            u2 = y2 + hh * (_A51 * k12 + _A52 * k22 + _A53 * k32 + _A54 * k42)
            u3 = y3 + hh * (_A51 * k13 + _A52 * k23 + _A53 * k33 + _A54 * k43)
            w = _bias_w(kind, ba, bb, bc, bts, bws, t + _C5 * hh)
            k51, k52, k53 = _rhs(p1, p2, p3, p4, w, u1, u2, u3)
            # Stage 6
            u1 = y1 + hh * (_A61 * k11 + _A62 * k21 + _A63 * k31 + _A64 * k41 + _A65 * k51)
            u2 = y2 + hh * (_A61 * k12 + _A62 * k22 + _A63 * k32 + _A64 * k42 + _A65 * k52)
            u3 = y3 + hh * (_A61 * k13 + _A62 * k23 + _A63 * k33 + _A64 * k43 + _A65 * k53)
            t_new = target if landing else t + hh
            w_new = _bias_w(kind, ba, bb, bc, bts, bws, t_new)
            k61, k62, k63 = _rhs(p1, p2, p3, p4, w_new, u1, u2, u3)
            # Stage 7 = 5th-order solution (FSAL)
            v1 = y1 + hh * (_B1 * k11 + _B3 * k31 + _B4 * k41 + _B5 * k51 + _B6 * k61)
            v2 = y2 + hh * (_B1 * k12 + _B3 * k32 + _B4 * k42 + _B5 * k52 + _B6 * k62)
            v3 = y3 + hh * (_B1 * k13 + _B3 * k33 + _B4 * k43 + _B5 * k53 + _B6 * k63)
            k71, k72, k73 = _rhs(p1, p2, p3, p4, w_new, v1, v2, v3)

            er1 = hh * (_E1 * k11 + _E3 * k31 + _E4 * k41 + _E5 * k51 + _E6 * k61 + _E7 * k71)
            er2 = hh * (_E1 * k12 + _E3 * k32 + _E4 * k42 + _E5 * k52 + _E6 * k62 + _E7 * k72)
            er3 = hh * (_E1 * k13 + _E3 * k33 + _E4 * k43 + _E5 * k53 + _E6 * k63 + _E7 * k73)

            # Rotation-invariant error scales.
            sc1 = atol + rtol * max(abs(y1), abs(v1))
            scp = atol + rtol * max(math.hypot(y2, y3), math.hypot(v2, v3))
            err = math.sqrt(((er1 / sc1) ** 2 + (er2 / scp) ** 2 + (er3 / scp) ** 2) / 3.0)

            if not math.isfinite(err):
                status = NOT_FINITE
                break

            if err <= 1.0:
                # Accept.
                n_acc += 1
                norm_new = 0.25 * v1 * v1 + v2 * v2 + v3 * v3
                inc = norm_new - norm_prev
                if inc > max_inc:
                    max_inc = inc
                if debug_norm and inc > 50.0 * (atol + rtol * norm_prev):
                    t = t_new
                    y1, y2, y3 = v1, v2, v3
                    status = DEBUG_NORM_VIOLATION
                    break
                if norm_new > norm_budget:
                    t = t_new
                    y1, y2, y3 = v1, v2, v3
                    status = NORM_GROWTH
                    break
                if averaging and t >= avg_start:
                    # Weighted average of the tail-corrected integrand
                    # x(t) * exp(-rem(t)).  The Hann weight vanishes with
                    # its derivative at both ends of the averaging zone, so
                    # the residual sweep-frequency ringing integrates away
                    # to high order instead of leaving boundary terms.
                    dt_seg = t_new - t
                    ssa = math.sin(math.pi * (t - avg_start) * avg_winv)
                    ssb = math.sin(math.pi * (t_new - avg_start) * avg_winv)
                    wa = ssa * ssa
                    wb = ssb * ssb
                    if avg_c1 > 0.0:
                        sa = math.exp(-avg_c1 * (_HALF_PI - math.atan(avg_c2 * t)))
                        sb = math.exp(-avg_c1 * (_HALF_PI - math.atan(avg_c2 * t_new)))
                    else:
                        sa = 1.0
                        sb = 1.0
                    acc_num += 0.5 * (wa * y1 * sa + wb * v1 * sb) * dt_seg
                    acc_den += 0.5 * (wa + wb) * dt_seg

                y1, y2, y3 = v1, v2, v3
                t = t_new
                k11, k12, k13 = k71, k72, k73
                norm_prev = norm_new

                recorded = False
                if landing and chk_i < n_chk and t_new == chk_t[chk_i]:
                    chk_out[chk_i, 0] = y1
                    chk_out[chk_i, 1] = y2
                    chk_out[chk_i, 2] = y3
                    chk_i += 1
                    if rec_stride > 0:
                        if rec_n < rec_cap:
                            rec_buf[rec_n, 0] = t
                            rec_buf[rec_n, 1] = y1
                            rec_buf[rec_n, 2] = y2
                            rec_buf[rec_n, 3] = y3
                            rec_n += 1
                            recorded = True
                        else:
                            rec_dropped += 1
                if rec_stride > 0 and not recorded:
                    if t >= t_end or n_acc % rec_stride == 0:
                        if rec_n < rec_cap:
                            rec_buf[rec_n, 0] = t
                            rec_buf[rec_n, 1] = y1
                            rec_buf[rec_n, 2] = y2
                            rec_buf[rec_n, 3] = y3
                            rec_n += 1
                        else:
                            rec_dropped += 1

                # PI controller.
                err_b = max(err, 1e-10)
                fac = (err_b**_PI_ALPHA) / (facold**_PI_BETA) / _SAFETY
                if fac < 1.0 / _MAX_FACTOR:
                    fac = 1.0 / _MAX_FACTOR
                elif fac > 1.0 / _MIN_FACTOR:
                    fac = 1.0 / _MIN_FACTOR
                h_next = h_use / fac
                facold = err_b
                h_cap = _h_stab(delta_sq, gamma_damp, kind, ba, bb, bc, bts, bws, t)
                if h_next > h_cap:
                    # Re-evaluate at the step's far end: in growing-|W1|
                    # wings the cap at t underestimates the constraint.
                    h_cap2 = _h_stab(delta_sq, gamma_damp, kind, ba, bb, bc, bts, bws, t + h_cap)
                    h_next = min(h_cap, h_cap2)
                h = h_next
            else:
                n_rej += 1
                fac = _SAFETY * err ** (-0.2)
                if fac < _MIN_FACTOR:
                    fac = _MIN_FACTOR
                h = h_use * fac

        norm_end = 0.25 * y1 * y1 + y2 * y2 + y3 * y3
        return (
            status,
            t,
            y1,
            y2,
            y3,
            n_acc,
            n_rej,
            norm_end,
            max_inc,
            acc_num,
            acc_den,
            rec_n,
            rec_dropped,
        )

    return _kernel


dopri5_reduced = _make_dopri5(full_system=False)
dopri5_full = _make_dopri5(full_system=True)
