"""Equations of motion, integrals of motion and numerical integration.

The non-relativistic motion follows from

    L = 1/2 g(z)^2 (Vr^2 + S(r)^2 Vphi^2) + 1/2 Vz^2 - A_phi(r) Vphi

with ``g = cosh z, cos z, 1`` and ``S = sinh r, sin r, r``. Its three
integrals are

    I   = g^2 S^2 Vphi - A_phi(r)
    eps = g^2 (Vr^2 + S^2 Vphi^2) + Vz^2
    A   = g^4 (Vr^2 + S^2 Vphi^2)

The integrator advances the equivalent first-order system in
``(r, phi, z, p_r, p_phi, Vz)`` with ``p_r = g^2 Vr`` and
``p_phi = g^2 S^2 Vphi``. On the hyperboloid ``z`` typically runs off to
infinity and the coordinate velocities decay like ``1/cosh^2 z``; the
momenta stay of order one, so absolute tolerances remain meaningful.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    AxisSingularityError,
    InvalidLambdaError,
    SingularityAbortError,
    StepUnderflowError,
)
from .geometry import R_MIN, CylPoint, SpaceModel, check_chart, transverse_scale, warp_factor

#: Integration stops once r gets this close to the axis (or to r = pi).
AXIS_GUARD = 1e-8
#: Integration stops this close to the spherical poles |z| = pi/2.
POLE_GUARD = 1e-8
#: Largest |z| integrated on the hyperboloid before cosh z overflows.
Z_OVERFLOW = 300.0


@dataclass(frozen=True)
class CylState:
    point: CylPoint
    vr: float
    vphi: float
    vz: float

    @classmethod
    def of(cls, r, phi, z, vr, vphi, vz) -> "CylState":
        return cls(CylPoint(float(r), float(phi), float(z)), float(vr), float(vphi), float(vz))

    def as_array(self) -> np.ndarray:
        p = self.point
        return np.array([p.r, p.phi, p.z, self.vr, self.vphi, self.vz])


@dataclass(frozen=True)
class MotionConstants:
    epsilon: float
    i_phi: float
    a_transverse: float


@dataclass(frozen=True)
class FixedStep:
    h: float

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValueError("step size must be positive")


@dataclass(frozen=True)
class Adaptive:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_min: float = 1e-12
    h_max: float = 0.1
    h_init: float = 1e-2

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.h_min > 0):
            raise ValueError("tolerances and h_min must be positive")
        if not self.h_min <= self.h_max:
            raise ValueError("h_min must not exceed h_max")


StepControl = Union[FixedStep, Adaptive]

COLUMNS = ("r", "phi", "z", "vr", "vphi", "vz")
INVARIANT_NAMES = ("epsilon", "i_phi", "a_transverse")


@dataclass(frozen=True)
class Trajectory:
    """Accepted integration steps of one run.

    ``states`` has one row ``(r, phi, z, vr, vphi, vz)`` per sample time in
    ``t``; ``phi`` is accumulated, not reduced. ``drift`` holds the largest
    absolute deviation of each integral from its initial value over all
    accepted steps (also those not recorded).
    """

    model: SpaceModel
    B: float
    t: np.ndarray
    states: np.ndarray
    drift: dict = field(default_factory=dict)
    reason: str = "completed"

    def __post_init__(self):
        self.t.setflags(write=False)
        self.states.setflags(write=False)

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> CylState:
        return CylState.of(*self.states[i])

    @property
    def final_state(self) -> CylState:
        return self.state(-1)

    @property
    def samples(self):
        return [(float(t), self.state(i)) for i, t in enumerate(self.t)]

    def invariants(self) -> np.ndarray:
        """Array of shape (n, 3) with columns ``eps, I, A``."""
        eps, i_phi, a = invariants_array(self.model, self.B, self.states.T)
        return np.column_stack([eps, i_phi, a])


# ---------------------------------------------------------------------------
# closed-form right-hand sides and integrals

def _validate_state(model: SpaceModel, s: CylState) -> None:
    check_chart(model, s.point)
    if not all(math.isfinite(v) for v in (s.vr, s.vphi, s.vz)):
        raise ValueError(f"non-finite velocity in {s}")


def eom_rhs(model: SpaceModel, B: float, s: CylState):
    """Coordinate accelerations ``(dVr/dt, dVphi/dt, dVz/dt)``.

    Raises
    ------
    AxisSingularityError
        If ``r <= R_MIN`` (or within ``R_MIN`` of ``pi`` on the sphere)
        while the 1/sinh r type terms carry a nonzero velocity.
    """
    _validate_state(model, s)
    r, z = s.point.r, s.point.z
    vr, vp, vz = s.vr, s.vphi, s.vz
    near_axis = r <= R_MIN or (model is SpaceModel.SPHERICAL and math.pi - r <= R_MIN)
    if near_axis:
        if vr != 0.0 or vp != 0.0:
            raise AxisSingularityError(f"transverse velocity on the axis r={r}")
        # at rest in the transverse plane only the axial equation survives,
        # and its right-hand side is proportional to the transverse speed
        return 0.0, 0.0, 0.0
    if model is SpaceModel.HYPERBOLIC:
        sr, cr, sz, cz = math.sinh(r), math.cosh(r), math.sinh(z), math.cosh(z)
        tz = sz / cz
        ar = -2.0 * tz * vr * vz + sr * cr * vp * vp + B * sr * vp / (cz * cz)
        ap = -2.0 * (cr / sr) * vp * vr - 2.0 * tz * vp * vz - B * vr / (cz * cz * sr)
        az = sz * cz * (vr * vr + sr * sr * vp * vp)
    elif model is SpaceModel.SPHERICAL:
        sr, cr, sz, cz = math.sin(r), math.cos(r), math.sin(z), math.cos(z)
        tz = sz / cz
        ar = 2.0 * tz * vr * vz + sr * cr * vp * vp + B * sr * vp / (cz * cz)
        ap = -2.0 * (cr / sr) * vp * vr + 2.0 * tz * vp * vz - B * vr / (cz * cz * sr)
        az = -sz * cz * (vr * vr + sr * sr * vp * vp)
    else:
        ar = r * vp * vp + B * r * vp
        ap = -2.0 * vr * vp / r - B * vr / r
        az = 0.0
    return ar, ap, az


def invariants_array(model: SpaceModel, B, states: np.ndarray):
    """Vectorized integrals; ``states`` has rows ``r, phi, z, vr, vphi, vz``."""
    r, _, z, vr, vp, vz = states
    S, _ = transverse_scale(model, r)
    g, _ = warp_factor(model, z)
    g2 = g * g
    trans = vr * vr + S * S * vp * vp
    if model is SpaceModel.HYPERBOLIC:
        a_phi = -2.0 * B * np.sinh(0.5 * r) ** 2
    elif model is SpaceModel.SPHERICAL:
        a_phi = -2.0 * B * np.sin(0.5 * r) ** 2
    else:
        a_phi = -0.5 * B * r * r
    i_phi = g2 * S * S * vp - a_phi
    eps = g2 * trans + vz * vz
    a = g2 * g2 * trans
    return eps, i_phi, a


def invariants_of(model: SpaceModel, B: float, s: CylState) -> MotionConstants:
    """Integrals ``(eps, I, A)`` of a state."""
    _validate_state(model, s)
    eps, i_phi, a = invariants_array(model, B, s.as_array())
    return MotionConstants(float(eps), float(i_phi), float(a))


def effective_relativistic_B(B: float, lam: float) -> float:
    """Field amplitude entering the relativistic equations, ``lam * B``.

    ``lam = m c^2 / E`` must lie in the open interval (0, 1); runs that use
    it must also keep the squared speed ``eps`` below 1.
    """
    if not (0.0 < lam < 1.0):
        raise InvalidLambdaError(f"lambda={lam} outside (0, 1)")
    return lam * B


# ---------------------------------------------------------------------------
# first-order system in momentum variables

def to_internal(model: SpaceModel, states: np.ndarray) -> np.ndarray:
    """Velocity rows ``(r, phi, z, vr, vphi, vz)`` to ``(.., p_r, p_phi, vz)``."""
    y = np.array(states, dtype=float, copy=True)
    S, _ = transverse_scale(model, y[0])
    g, _ = warp_factor(model, y[2])
    g2 = g * g
    y[3] = g2 * y[3]
    y[4] = g2 * S * S * y[4]
    return y


def from_internal(model: SpaceModel, y: np.ndarray) -> np.ndarray:
    out = np.array(y, dtype=float, copy=True)
    S, _ = transverse_scale(model, out[0])
    g, _ = warp_factor(model, out[2])
    g2 = g * g
    out[3] = out[3] / g2
    with np.errstate(divide="ignore", invalid="ignore"):
        vphi = out[4] / (g2 * S * S)
    out[4] = np.where(out[4] == 0.0, 0.0, vphi)
    return out


def momentum_rhs(model: SpaceModel, B, y: np.ndarray) -> np.ndarray:
    """Time derivative of the internal state; ``y`` has shape (6, n)."""
    r, _, z, pr, pp, vz = y
    S, dS = transverse_scale(model, r)
    g, dg = warp_factor(model, z)
    g2 = g * g
    moving = pp != 0.0
    ang = np.divide(pp, S, out=np.zeros_like(pp), where=moving)
    w = np.divide(ang, S, out=np.zeros_like(pp), where=moving)     # g^2 dphi/dt
    out = np.empty_like(y)
    out[0] = pr / g2
    out[1] = w / g2
    out[2] = vz
    out[3] = (dS * w * w * S + B * ang) / g2
    out[4] = -B * S * pr / g2
    out[5] = dg * (pr * pr + pp * w) / (g2 * g)
    return out


def _internal_invariants(model: SpaceModel, B, y: np.ndarray) -> np.ndarray:
    r, _, z, pr, pp, vz = y
    S, _ = transverse_scale(model, r)
    g, _ = warp_factor(model, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        trans = pr * pr + np.where(pp == 0.0, 0.0, pp * pp / (S * S))
    if model is SpaceModel.HYPERBOLIC:
        a_phi = -2.0 * B * np.sinh(0.5 * r) ** 2
    elif model is SpaceModel.SPHERICAL:
        a_phi = -2.0 * B * np.sin(0.5 * r) ** 2
    else:
        a_phi = -0.5 * B * r * r
    return np.array([trans / (g * g) + vz * vz, pp - a_phi, trans])


def _guard(model: SpaceModel, y: np.ndarray) -> np.ndarray:
    """Per-lane termination reason code (0 = keep going)."""
    r, z, pr = y[0], y[2], y[3]
    code = np.zeros(y.shape[1], dtype=int)
    toward_axis = (r <= AXIS_GUARD) & ((pr <= 0.0) | (r < 0.0))
    code[toward_axis] = 1
    if model is SpaceModel.SPHERICAL:
        code[(math.pi - r <= AXIS_GUARD)] = 1
        code[np.abs(z) >= 0.5 * math.pi - POLE_GUARD] = 2
    elif model is SpaceModel.HYPERBOLIC:
        code[np.abs(z) > Z_OVERFLOW] = 3
    code[~np.all(np.isfinite(y), axis=0)] = 4
    return code


_REASONS = {0: "completed", 1: "axis", 2: "chart-boundary", 3: "overflow", 4: "non-finite",
            5: "step-underflow"}

# Dormand-Prince 5(4) tableau; the 5th-order solution is propagated.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_A_ROWS = [np.array(row) for row in _DP_A]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                   187 / 2100, 1 / 40])
_DP_E = _DP_B - _DP_B4


class _Recorder:
    """Accepted samples, stored per step and split into lanes at the end."""

    def __init__(self, n, record):
        self.n = n
        self.record = record
        self.lanes, self.t, self.y = [], [], []

    def add(self, lanes, t, y):
        if self.record:
            self.lanes.append(np.asarray(lanes, dtype=int))
            self.t.append(np.array(t, dtype=float))
            self.y.append(np.array(y, dtype=float))

    def lane_samples(self):
        """List of ``(t, y)`` per lane in time order."""
        lanes = np.concatenate(self.lanes)
        t = np.concatenate(self.t)
        y = np.concatenate(self.y, axis=1)
        order = np.argsort(lanes, kind="stable")
        bounds = np.searchsorted(lanes[order], np.arange(self.n + 1))
        out = []
        for lane in range(self.n):
            sel = order[bounds[lane]:bounds[lane + 1]]
            out.append((t[sel], y[:, sel]))
        return out


def _run_adaptive(model, B, y0, t_end, ctl: Adaptive, record):
    n = y0.shape[1]
    y = y0.copy()
    t = np.zeros(n)
    h = np.full(n, min(ctl.h_init, ctl.h_max))
    status = np.zeros(n, dtype=int)       # 0 running, -1 finished, >0 reason code
    k1 = momentum_rhs(model, B, y)
    inv0 = _internal_invariants(model, B, y)
    drift = np.zeros((3, n))
    rec = _Recorder(n, record)
    rec.add(np.arange(n), t, y)
    Bv = np.broadcast_to(np.asarray(B, dtype=float), (n,))
    while True:
        idx = np.flatnonzero(status == 0)
        if idx.size == 0:
            break
        yi, ti, Bi = y[:, idx], t[idx], Bv[idx]
        remaining = t_end[idx] - ti
        last = h[idx] >= remaining
        hi = np.where(last, remaining, h[idx])
        m = idx.size
        K = np.empty((7, 6 * m))
        K[0] = k1[:, idx].ravel()
        # an oversized trial step may overflow; the error test rejects it
        with np.errstate(over="ignore", invalid="ignore"):
            for stage in range(1, 6):
                incr = (_DP_A_ROWS[stage] @ K[:stage]).reshape(6, m)
                K[stage] = momentum_rhs(model, Bi, yi + hi * incr).ravel()
            y_new = yi + hi * (_DP_B[:6] @ K[:6]).reshape(6, m)
            k7 = momentum_rhs(model, Bi, y_new)
        K[6] = k7.ravel()
        err = hi * (_DP_E @ K).reshape(6, m)
        scale = ctl.abs_tol + ctl.rel_tol * np.maximum(np.abs(yi), np.abs(y_new))
        with np.errstate(invalid="ignore"):
            en = np.max(np.abs(err) / scale, axis=0)
        en = np.where(np.isfinite(en), en, np.inf)
        ok = en <= 1.0
        with np.errstate(divide="ignore"):
            factor = np.clip(0.9 * en ** -0.2, 0.2, 5.0)
        factor = np.where(ok, factor, np.minimum(factor, 0.5))
        h_next = np.minimum(hi * factor, ctl.h_max)
        # keep the unclipped step for lanes that only shortened to hit t_end
        h_next = np.where(ok & last, np.maximum(h_next, h[idx]), h_next)
        h[idx] = np.minimum(h_next, ctl.h_max)

        acc = idx[ok]
        if acc.size:
            ya = y_new[:, ok]
            y[:, acc] = ya
            t[acc] = np.where(last[ok], t_end[acc], ti[ok] + hi[ok])
            k1[:, acc] = k7[:, ok]
            dev = np.abs(_internal_invariants(model, Bv[acc], ya) - inv0[:, acc])
            drift[:, acc] = np.maximum(drift[:, acc], np.nan_to_num(dev, nan=np.inf))
            code = _guard(model, ya)
            bad = code > 0
            good_lanes = acc[~bad]
            rec.add(good_lanes, t[good_lanes], ya[:, ~bad])
            if bad.any():
                status[acc[bad]] = code[bad]
            done = acc[~bad & last[ok]]
            status[done] = -1
        rej = idx[~ok]
        if rej.size:
            status[rej[hi[~ok] * 0.2 < ctl.h_min]] = 5
    return y, t, status, drift, rec


def _run_fixed(model, B, y0, t_end, ctl: FixedStep, record):
    n = y0.shape[1]
    y = y0.copy()
    steps = max(1, int(math.ceil(t_end / ctl.h - 1e-9)))
    status = np.zeros(n, dtype=int)
    inv0 = _internal_invariants(model, B, y)
    drift = np.zeros((3, n))
    rec = _Recorder(n, record)
    t = np.zeros(n)
    rec.add(np.arange(n), t, y)
    Bv = np.broadcast_to(np.asarray(B, dtype=float), (n,))
    for k in range(steps):
        idx = np.flatnonzero(status == 0)
        if idx.size == 0:
            break
        t0 = k * ctl.h
        h = min(ctl.h, t_end - t0) if k == steps - 1 else ctl.h
        yi, Bi = y[:, idx], Bv[idx]
        k1 = momentum_rhs(model, Bi, yi)
        k2 = momentum_rhs(model, Bi, yi + 0.5 * h * k1)
        k3 = momentum_rhs(model, Bi, yi + 0.5 * h * k2)
        k4 = momentum_rhs(model, Bi, yi + h * k3)
        yn = yi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        tn = t_end if k == steps - 1 else (k + 1) * ctl.h
        dev = np.abs(_internal_invariants(model, Bi, yn) - inv0[:, idx])
        drift[:, idx] = np.maximum(drift[:, idx], np.nan_to_num(dev, nan=np.inf))
        code = _guard(model, yn)
        bad = code > 0
        keep = idx[~bad]
        y[:, keep] = yn[:, ~bad]
        t[keep] = tn
        rec.add(keep, t[keep], yn[:, ~bad])
        status[idx[bad]] = code[bad]
    status[status == 0] = -1
    return y, t, status, drift, rec


def _check_start(model: SpaceModel, s: CylState) -> None:
    _validate_state(model, s)
    r = s.point.r
    if r <= R_MIN and s.vphi != 0.0:
        raise AxisSingularityError("azimuthal velocity on the axis")
    if model is SpaceModel.SPHERICAL and math.pi - r <= R_MIN:
        raise AxisSingularityError("start on the antipodal axis r = pi")


def integrate_many(model: SpaceModel, B, states: Sequence[CylState], t_end,
                   ctl: StepControl = Adaptive(), record: bool = True):
    """Integrate several initial states side by side.

    Every lane keeps its own step size. ``B`` may be a scalar or one value
    per state; with adaptive stepping so may ``t_end``. Lanes that hit the axis, the chart boundary or a step
    underflow are returned truncated with ``reason`` set; nothing is raised.
    With ``record=False`` only the first and last samples are kept (the
    drift still covers every step).

    Returns
    -------
    list of Trajectory
    """
    n = len(states)
    t_arr = np.broadcast_to(np.asarray(t_end, dtype=float), (n,)).copy()
    if not np.all(t_arr > 0.0):
        raise ValueError("t_end must be positive")
    if isinstance(ctl, Adaptive):
        t_end = t_arr
    elif np.ndim(t_end):
        raise ValueError("fixed-step integration needs a common t_end")
    for s in states:
        _check_start(model, s)
    Bv = np.broadcast_to(np.asarray(B, dtype=float), (n,)).copy()
    y0 = to_internal(model, np.array([s.as_array() for s in states]).T)
    runner = _run_adaptive if isinstance(ctl, Adaptive) else _run_fixed
    y, t, status, drift, rec = runner(model, Bv, y0, t_end, ctl, record)
    samples = rec.lane_samples() if record else None
    out = []
    for lane in range(n):
        if record:
            ts, ys = samples[lane]
        else:
            last_ok = status[lane] <= 0
            ts = np.array([0.0, t[lane]]) if last_ok else np.array([0.0])
            ys = np.column_stack([y0[:, lane], y[:, lane]]) if last_ok else y0[:, [lane]]
        vel = from_internal(model, ys).T
        d = {name: float(drift[i, lane]) for i, name in enumerate(INVARIANT_NAMES)}
        reason = _REASONS[max(int(status[lane]), 0)]
        out.append(Trajectory(model, float(Bv[lane]), ts, np.ascontiguousarray(vel), d, reason))
    return out


def integrate(model: SpaceModel, B: float, s0: CylState, t_end: float,
              ctl: StepControl = Adaptive()) -> Trajectory:
    """Integrate one initial state up to ``t_end``.

    Raises
    ------
    SingularityAbortError
        When the axis or the chart boundary is approached; the samples up to
        the last good step are attached as ``exc.trajectory``.
    StepUnderflowError
        When the adaptive step drops below ``h_min``.
    """
    (traj,) = integrate_many(model, B, [s0], t_end, ctl, record=True)
    if traj.reason == "step-underflow":
        raise StepUnderflowError(f"step size fell below h_min at t={traj.t[-1]}")
    if traj.reason != "completed":
        raise SingularityAbortError(
            f"integration stopped at t={traj.t[-1]} ({traj.reason})", traj, traj.reason)
    return traj
