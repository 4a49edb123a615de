"""Closed-form solutions and classification of the curved-space motions.

Substituting the integrals ``(eps, I, A)`` into the equations of motion
reduces the problem to quadratures. With ``x = cosh r`` (hyperbolic) or
``x = cos r`` (spherical) the radial motion is governed by the quadratic
``q(x) = a x^2 + b x + c``:

* hyperbolic:  a = A - B^2,   b = 2B(I + B),   c = -A - (I + B)^2
* spherical:   a = -A - B^2,  b = -2B(I - B),  c = A - (I - B)^2

In both cases ``q(1) = a + b + c = -I^2`` (the axis ``r = 0`` is only
reached when ``I = 0``) and the discriminant factorizes as
``b^2 - 4ac = 4 A C^2`` with the square-root parameter ``C`` of
:func:`canonical_parameters`.

The time dependence enters only through the transverse clock

    tau(t) = integral_0^t dt' / g(z(t'))^2,     g = cosh z or cos z,

which is elementary for every axial regime (:func:`transverse_time`). The
azimuth of a fixed-radius orbit is ``alpha * tau`` and the radial phase of a
general orbit is linear in ``tau``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .dynamics import CylState, invariants_of
from .errors import (
    DomainError,
    InvalidParamsError,
    InvalidRadiusError,
    RegimeMismatchError,
    UnsupportedError,
)
from .geometry import CylPoint, Plane, SpaceModel, TransversalShift

#: Relative tolerance used to detect the degenerate cases disc = 0, a = 0, eps = A.
DEGENERACY_TOL = 1e-12


class RadialClass(enum.Enum):
    FIXED_RADIUS = "FixedRadius"
    FINITE_TWO_TURNING = "FiniteTwoTurning"
    INFINITE_CRITICAL = "InfiniteCritical"
    INFINITE_ONE_TURNING = "InfiniteOneTurning"
    SPHERICAL_FINITE = "SphericalFinite"
    NON_PHYSICAL = "NonPhysical"


class AxialClass(enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    CRITICAL_PLANE = "CriticalPlane"
    CRITICAL_EXP = "CriticalExp"


@dataclass(frozen=True)
class TrajectoryClass:
    radial: RadialClass
    axial: Optional[AxialClass]

    @property
    def physical(self) -> bool:
        return self.radial is not RadialClass.NON_PHYSICAL and self.axial is not None


@dataclass(frozen=True)
class RadialQuadratic:
    a: float
    b: float
    c: float
    disc: float
    roots: Optional[Tuple[float, float]]

    def __call__(self, x):
        return (self.a * x + self.b) * x + self.c

    @property
    def vertex(self) -> float:
        return -self.b / (2.0 * self.a)


@dataclass(frozen=True)
class CanonicalParams:
    j: float
    c_par: float
    invariant_value: float


def _curved_only(model: SpaceModel) -> None:
    if not model.curved:
        raise UnsupportedError("closed forms are provided for the curved models only")


def _is_zero(value: float, scale: float) -> bool:
    return abs(value) <= DEGENERACY_TOL * scale


# ---------------------------------------------------------------------------
# radial quadratic and classification

def radial_quadratic(model: SpaceModel, B: float, I: float, A: float) -> RadialQuadratic:
    """Coefficients, discriminant and ordered roots of the radial quadratic.

    The discriminant is evaluated in its factorized form ``4 A C^2`` and set
    to exactly zero when ``|disc| < 1e-12 max(b^2, |4ac|)``. For ``a = 0``
    the finite root is returned together with an infinite one.
    """
    _curved_only(model)
    if A < 0.0:
        raise ValueError("transverse integral A must be nonnegative")
    if model is SpaceModel.HYPERBOLIC:
        J = I + B
        a, b, c = A - B * B, 2.0 * B * J, -A - J * J
        c2 = J * J + (A - B * B)
    else:
        K = I - B
        a, b, c = -A - B * B, -2.0 * B * K, A - K * K
        c2 = A + B * B - K * K
    disc = 4.0 * A * c2
    if _is_zero(disc, max(b * b, abs(4.0 * a * c))):
        disc = 0.0
    roots = None
    if disc >= 0.0:
        if a == 0.0:
            if b != 0.0:
                x = -c / b
                roots = (x, math.inf) if b > 0.0 else (-math.inf, x)
        elif disc == 0.0:
            x = -b / (2.0 * a)
            roots = (x, x)
        else:
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            x1 = q / a
            x2 = c / q if q != 0.0 else -x1
            roots = (min(x1, x2), max(x1, x2))
    return RadialQuadratic(a, b, c, disc, roots)


def _axial_class(model: SpaceModel, epsilon: float, A: float, z0: float) -> Optional[AxialClass]:
    if _is_zero(epsilon - A, max(epsilon, A)):
        if model is SpaceModel.SPHERICAL or z0 == 0.0:
            return AxialClass.CRITICAL_PLANE
        return AxialClass.CRITICAL_EXP
    if epsilon > A:
        return AxialClass.TYPE_I
    return AxialClass.TYPE_II if model is SpaceModel.HYPERBOLIC else None


def _radial_class(model: SpaceModel, B: float, I: float, A: float) -> RadialClass:
    rq = radial_quadratic(model, B, I, A)
    a, b = rq.a, rq.b
    if model is SpaceModel.HYPERBOLIC:
        lo, hi = 1.0, math.inf
    else:
        lo, hi = -1.0, 1.0
    if A == 0.0 and B * B == 0.0:
        # free particle at transverse rest (B^2 may underflow): any radius, provided I = 0
        return RadialClass.FIXED_RADIUS if I == 0.0 else RadialClass.NON_PHYSICAL
    if model is SpaceModel.HYPERBOLIC and _is_zero(a, max(A, B * B)):
        return RadialClass.INFINITE_CRITICAL if b > 0.0 else RadialClass.NON_PHYSICAL
    if rq.disc < 0.0:
        return RadialClass.NON_PHYSICAL
    if rq.disc == 0.0:
        x0 = rq.vertex
        return RadialClass.FIXED_RADIUS if lo <= x0 <= hi else RadialClass.NON_PHYSICAL
    x1, x2 = rq.roots
    if model is SpaceModel.SPHERICAL:
        # q(+-1) <= 0, so [x1, x2] lies inside or outside [-1, 1] as a whole
        return RadialClass.SPHERICAL_FINITE if -1.0 < rq.vertex < 1.0 else RadialClass.NON_PHYSICAL
    if a < 0.0:
        # q(1) = -I^2 <= 0: both roots lie on the same side of x = 1
        return RadialClass.FINITE_TWO_TURNING if x2 > 1.0 else RadialClass.NON_PHYSICAL
    return RadialClass.INFINITE_ONE_TURNING


def classify(model: SpaceModel, B: float, I: float, A: float, epsilon: float,
             z0: float = 0.0) -> TrajectoryClass:
    """Radial and axial type of the motion with integrals ``(eps, I, A)``.

    ``z0`` is only consulted when ``eps = A`` on the hyperboloid, to tell
    the planar orbit ``z = 0`` from the exponential ones. A spherical
    parameter set with ``eps < A`` cannot occur and is reported as
    non-physical with ``axial = None``.
    """
    _curved_only(model)
    for v in (B, I, A, epsilon, z0):
        if not math.isfinite(v):
            raise ValueError("parameters must be finite")
    if A < 0.0 or epsilon < 0.0:
        raise ValueError("A and epsilon must be nonnegative")
    axial = _axial_class(model, epsilon, A, z0)
    radial = _radial_class(model, B, I, A)
    if axial is None:
        radial = RadialClass.NON_PHYSICAL
    return TrajectoryClass(radial, axial)


def fixed_radius_orbit(model: SpaceModel, B: float, r0: float):
    """Integrals ``(I, alpha, A)`` of the circular orbit at radius ``r0``.

    ``alpha = g(z)^2 dphi/dt`` is the constant azimuthal rate in the
    transverse clock.
    """
    _curved_only(model)
    if model is SpaceModel.HYPERBOLIC:
        if not (r0 > 0.0 and B != 0.0 and math.isfinite(r0)):
            raise InvalidRadiusError("fixed radius needs r0 > 0 and B != 0")
        ch = math.cosh(r0)
        return (-2.0 * B * math.sinh(0.5 * r0) ** 2 / ch, -B / ch, (B * math.tanh(r0)) ** 2)
    if not (0.0 < r0 < math.pi):
        raise InvalidRadiusError("spherical fixed radius needs 0 < r0 < pi")
    cs = math.cos(r0)
    if abs(cs) < 1e-15:
        raise InvalidRadiusError("no fixed-radius orbit on the equator r0 = pi/2")
    return (-2.0 * B * math.sin(0.5 * r0) ** 2 / cs, -B / cs, (B * math.tan(r0)) ** 2)


# ---------------------------------------------------------------------------
# axial motion and transverse clock

def _check_branch(branch: int) -> None:
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")


def _regime(model: SpaceModel, epsilon: float, A: float) -> str:
    if not epsilon > 0.0:
        raise RegimeMismatchError("closed forms need eps > 0")
    if A < 0.0:
        raise RegimeMismatchError("A must be nonnegative")
    if _is_zero(epsilon - A, max(epsilon, A)):
        return "critical"
    if epsilon > A:
        return "I"
    if model is SpaceModel.SPHERICAL:
        raise RegimeMismatchError("eps < A is impossible on the sphere")
    return "II"


def axial_solution(model: SpaceModel, epsilon: float, A: float, t, branch: int = 1,
                   z0: float = 0.0):
    """``sinh z(t)`` (hyperbolic) or ``sin z(t)`` (spherical).

    Time is counted from the symmetric point of the regime: the crossing of
    ``z = 0`` for ``eps > A`` and the turning point for ``eps < A``. For
    ``eps = A`` the motion starts at ``z0`` and ``branch`` selects growth
    (+1) or decay (-1) of ``sinh z``.
    """
    _curved_only(model)
    _check_branch(branch)
    regime = _regime(model, epsilon, A)
    t = np.asarray(t, dtype=float)
    s = math.sqrt(epsilon) * t
    if model is SpaceModel.SPHERICAL:
        if regime == "critical":
            out = np.zeros_like(s)
        else:
            out = branch * math.sqrt((epsilon - A) / epsilon) * np.sin(s)
    elif regime == "I":
        out = branch * math.sqrt((epsilon - A) / epsilon) * np.sinh(s)
    elif regime == "II":
        out = branch * math.sqrt((A - epsilon) / epsilon) * np.cosh(s)
    else:
        out = math.sinh(z0) * np.exp(branch * s)
    return out if out.ndim else float(out)


def _artanh_ratio(k: float, u, scale: float):
    """``artanh(k u) / (k scale)``, continuous at ``k = 0``."""
    if k < 1e-8:
        return u * (1.0 + (k * u) ** 2 / 3.0) / scale
    return np.arctanh(k * u) / (k * scale)


def _unwrapped_atan(k: float, s):
    """Continuous branch of ``arctan(k tan s)`` through the poles of tan."""
    s = np.asarray(s, dtype=float)
    red = np.remainder(s + math.pi, 2.0 * math.pi) - math.pi
    return np.arctan2(k * np.sin(red), np.cos(red)) + (s - red)


def transverse_time(model: SpaceModel, epsilon: float, A: float, t, branch: int = 1,
                    z0: float = 0.0):
    """``integral_0^t dt'/g(z)^2`` along :func:`axial_solution`."""
    _curved_only(model)
    _check_branch(branch)
    regime = _regime(model, epsilon, A)
    t = np.asarray(t, dtype=float)
    se = math.sqrt(epsilon)
    s = se * t
    if regime == "critical" and (model is SpaceModel.SPHERICAL or z0 == 0.0):
        out = t.copy()
    elif model is SpaceModel.SPHERICAL:
        if A <= 0.0:
            raise RegimeMismatchError("A = 0 on the sphere reaches the pole |z| = pi/2")
        out = _unwrapped_atan(math.sqrt(A / epsilon), s) / math.sqrt(A)
    elif regime == "I":
        out = _artanh_ratio(math.sqrt(A / epsilon), np.tanh(s), se)
    elif regime == "II":
        out = np.arctanh(math.sqrt(epsilon / A) * np.tanh(s)) / math.sqrt(A)
    else:
        S = math.sinh(z0) ** 2
        if branch > 0:
            out = (math.log1p(S) - np.log(S + np.exp(-2.0 * s))) / (2.0 * se)
        else:
            out = (2.0 * s + np.log1p(S * np.exp(-2.0 * s)) - math.log1p(S)) / (2.0 * se)
    return out if out.ndim else float(out)


def azimuth_solution(model: SpaceModel, epsilon: float, A: float, alpha: float, t,
                     branch: int = 1, z0: float = 0.0):
    """Azimuth advance ``phi(t) - phi0`` of a fixed-radius orbit.

    On a circle ``r = r0`` the azimuth obeys ``dphi/dt = alpha / g(z)^2``, so
    it equals ``alpha`` times :func:`transverse_time`. On the sphere the
    arctan branches are glued across the poles of ``tan sqrt(eps) t``.
    """
    return alpha * transverse_time(model, epsilon, A, t, branch, z0)


def azimuth_limit(model: SpaceModel, epsilon: float, A: float, alpha: float,
                  branch: int = 1, z0: float = 0.0) -> float:
    """Total rotation angle ``phi(inf) - phi0`` on the hyperboloid."""
    _curved_only(model)
    regime = _regime(model, epsilon, A)
    if model is SpaceModel.SPHERICAL:
        raise RegimeMismatchError("the spherical azimuth grows without bound")
    if regime == "I":
        return float(alpha * _artanh_ratio(math.sqrt(A / epsilon), 1.0, math.sqrt(epsilon)))
    if regime == "II":
        return alpha * math.atanh(math.sqrt(epsilon / A)) / math.sqrt(A)
    if z0 == 0.0 or branch < 0:
        raise RegimeMismatchError("planar and decaying critical orbits rotate without bound")
    S = math.sinh(z0) ** 2
    return alpha * (math.log1p(S) - math.log(S)) / (2.0 * math.sqrt(epsilon))


# ---------------------------------------------------------------------------
# radial motion

def _radial_setup(model, B, I, A):
    rq = radial_quadratic(model, B, I, A)
    cls = _radial_class(model, B, I, A)
    if cls is RadialClass.NON_PHYSICAL:
        raise RegimeMismatchError("no physical motion for these parameters")
    return rq, cls


def _phase_rate(rq: RadialQuadratic, cls: RadialClass) -> float:
    if cls is RadialClass.INFINITE_CRITICAL:
        return 1.0
    return math.sqrt(abs(rq.a))


def _x_of_theta(model, rq: RadialQuadratic, cls: RadialClass, theta):
    a, b, c = rq.a, rq.b, rq.c
    sd = math.sqrt(max(rq.disc, 0.0))
    if cls is RadialClass.FIXED_RADIUS:
        return np.full_like(theta, rq.vertex if a != 0.0 else 1.0)
    if cls is RadialClass.INFINITE_CRITICAL:
        return ((0.5 * b * theta) ** 2 - c) / b
    if cls is RadialClass.INFINITE_ONE_TURNING:
        return (sd * np.cosh(theta) - b) / (2.0 * a)
    if model is SpaceModel.HYPERBOLIC:
        return (b + sd * np.sin(theta)) / (-2.0 * a)
    return (sd * np.sin(theta) - b) / (2.0 * a)


def _radial_w(model, rq: RadialQuadratic, cls: RadialClass, x):
    """Radial variable ``W(x)`` with ``W = sin, cosh or square of the phase``."""
    a, b, c = rq.a, rq.b, rq.c
    if cls is RadialClass.INFINITE_CRITICAL:
        return b * x + c
    sd = math.sqrt(rq.disc)
    if cls is RadialClass.INFINITE_ONE_TURNING or model is SpaceModel.SPHERICAL:
        return (2.0 * a * x + b) / sd
    return (-2.0 * a * x - b) / sd


def _w_of_theta(rq: RadialQuadratic, cls: RadialClass, theta):
    if cls is RadialClass.INFINITE_CRITICAL:
        return (0.5 * rq.b * theta) ** 2
    if cls is RadialClass.INFINITE_ONE_TURNING:
        return np.cosh(theta)
    return np.sin(theta)


def radial_phase(model: SpaceModel, B: float, I: float, A: float, x0: float,
                 vr0: float) -> float:
    """Phase ``theta0`` placing :func:`radial_solution` at ``x0`` at ``t = 0``.

    ``vr0`` fixes the direction of motion (outward for ``vr0 > 0``); the
    returned phase is to be used with ``branch = +1``.
    """
    rq, cls = _radial_setup(model, B, I, A)
    if cls is RadialClass.FIXED_RADIUS:
        return 0.0
    w0 = float(_radial_w(model, rq, cls, x0))
    if cls is RadialClass.INFINITE_CRITICAL:
        return math.copysign(2.0 * math.sqrt(max(w0, 0.0)) / rq.b, vr0)
    if cls is RadialClass.INFINITE_ONE_TURNING:
        return math.copysign(math.acosh(max(w0, 1.0)), vr0)
    base = math.asin(min(1.0, max(-1.0, w0)))
    return base if vr0 >= 0.0 else math.pi - base


def radial_solution(model: SpaceModel, B: float, I: float, A: float, epsilon: float, t,
                    branch: int = 1, phase: float = 0.0):
    """Radial variable ``x(t) = cosh r`` (hyperbolic) or ``cos r`` (spherical).

    The orbit crosses ``z = 0`` at ``t = 0`` (``eps > A``). With
    ``theta = phase + branch * k * tau(t)`` (``k = sqrt|a|``; ``k = 1`` for
    ``a = 0``) the radial variable is

    * finite hyperbolic:  (-2a x - b) / sqrt(disc) = sin theta
    * spherical:          ( 2a x + b) / sqrt(disc) = sin theta
    * infinite (a > 0):   ( 2a x + b) / sqrt(disc) = cosh theta
    * a = 0:              b x + c = (b theta / 2)^2

    which holds for all ``t``, through the turning points.

    Raises
    ------
    RegimeMismatchError
        For non-physical parameter sets.
    UnsupportedError
        For ``eps <= A``, where only the integrator is available.
    """
    _curved_only(model)
    _check_branch(branch)
    rq, cls = _radial_setup(model, B, I, A)
    if not epsilon > A or _is_zero(epsilon - A, max(epsilon, A)):
        raise UnsupportedError("radial time course is provided for eps > A only")
    tau = np.asarray(transverse_time(model, epsilon, A, t), dtype=float)
    theta = phase + branch * _phase_rate(rq, cls) * tau
    out = _x_of_theta(model, rq, cls, theta)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# trajectory surfaces

def _c_squared(model: SpaceModel, B: float, I: float, A: float) -> float:
    if model is SpaceModel.HYPERBOLIC:
        return (I + B) ** 2 + (A - B * B)
    return A + B * B - (I - B) ** 2


def _c_par(model: SpaceModel, B: float, I: float, A: float) -> float:
    c2 = _c_squared(model, B, I, A)
    if c2 < 0.0:
        if c2 > -DEGENERACY_TOL * max(1.0, A + B * B + I * I):
            return 0.0
        raise InvalidParamsError(f"negative radicand {c2}")
    return math.sqrt(c2)


def trajectory_surface_rphi(model: SpaceModel, B: float, I: float, A: float, p: CylPoint,
                            phi0: float = 0.0) -> float:
    """Residual of the projected orbit equation in the ``(r, phi)`` plane.

    * hyperbolic:  (I + B) cosh r - C sinh r cos(phi - phi0) - B
    * spherical:   (B - I) cos r + C sin r cos(phi - phi0) - B

    ``phi0`` is the azimuth of the orbit's symmetry line (see
    :func:`rphi_orientation`); the default matches orbits symmetric about
    ``phi = 0``.
    """
    _curved_only(model)
    C = _c_par(model, B, I, A)
    cp = math.cos(p.phi - phi0)
    if model is SpaceModel.HYPERBOLIC:
        return (I + B) * math.cosh(p.r) - C * math.sinh(p.r) * cp - B
    return (B - I) * math.cos(p.r) + C * math.sin(p.r) * cp - B


def rphi_orientation(model: SpaceModel, B: float, state: CylState) -> float:
    """Azimuth ``phi0`` of the orbit through ``state`` for the (r, phi) surface.

    The orbit lies on ``J x0 -+ (Cx x1 + Cy x2) = B`` with
    ``(x0, x1, x2) = (C(r), S(r) cos phi, S(r) sin phi)``; the value and the
    time derivative of this relation at ``state`` fix ``(Cx, Cy)`` and
    ``phi0 = atan2(Cy, Cx)``.
    """
    _curved_only(model)
    inv = invariants_of(model, B, state)
    I, A = inv.i_phi, inv.a_transverse
    r, phi = state.point.r, state.point.phi
    if model is SpaceModel.HYPERBOLIC:
        J, sign = I + B, -1.0
        x0, dx0 = math.cosh(r), math.sinh(r) * state.vr
        S, dS = math.sinh(r), math.cosh(r)
    else:
        J, sign = B - I, 1.0
        x0, dx0 = math.cos(r), -math.sin(r) * state.vr
        S, dS = math.sin(r), math.cos(r)
    if _c_par(model, B, I, A) == 0.0:
        return 0.0
    cph, sph = math.cos(phi), math.sin(phi)
    m = np.array([[S * cph, S * sph],
                  [dS * state.vr * cph - S * sph * state.vphi,
                   dS * state.vr * sph + S * cph * state.vphi]])
    rhs = np.array([B - J * x0, -J * dx0]) * sign
    det = np.linalg.det(m)
    if abs(det) < 1e-14 * max(1.0, np.abs(m).max() ** 2):
        raise InvalidParamsError("orientation undetermined: no azimuthal motion at this state")
    cx, cy = np.linalg.solve(m, rhs)
    return math.atan2(cy, cx)


def axial_clock(model: SpaceModel, epsilon: float, A: float, z: float, axial_sign: int = 1,
                winding: int = 0, vz: Optional[float] = None) -> float:
    """Transverse clock ``tau`` reconstructed from the axial position.

    ``axial_sign`` is the sign of ``dz/dt``; ``winding`` counts completed
    axial oscillations on the sphere. When ``vz`` is given it replaces
    ``axial_sign`` and the clock is recovered through atan2/arcsinh of
    ``(z, vz)``, which stays well-conditioned at the axial turning points
    where arcsin/arccosh of ``z`` alone lose half the digits.
    """
    regime = _regime(model, epsilon, A)
    if regime == "critical":
        raise RegimeMismatchError("the (r, z) surface is defined for eps != A")
    if A <= 0.0:
        raise RegimeMismatchError("the (r, z) surface needs A > 0")
    if vz is not None:
        axial_sign = 1 if vz >= 0.0 else -1
    sA = math.sqrt(A)
    if model is SpaceModel.SPHERICAL:
        y = math.sqrt(A / (epsilon - A)) * math.tan(z)
        if vz is not None:
            base = math.atan2(y, vz / math.sqrt(epsilon - A))
            if base < -0.5 * math.pi:
                base += 2.0 * math.pi
        else:
            y = _clip_unit(y, "axial")
            base = math.asin(y) if axial_sign > 0 else math.pi - math.asin(y)
        return (base + 2.0 * math.pi * winding) / sA
    if regime == "I":
        return axial_sign * math.asinh(math.sqrt(A / (epsilon - A)) * math.tanh(z)) / sA
    k = math.sqrt(A / (A - epsilon))
    if vz is not None:
        return math.copysign(1.0, z) * math.asinh(k * vz / sA) / sA
    arg = k * abs(math.tanh(z))
    if arg < 1.0:
        if arg < 1.0 - 1e-12:
            raise DomainError(f"z={z} is inside the forbidden axial gap")
        arg = 1.0
    return axial_sign * math.copysign(1.0, z) * math.acosh(arg) / sA


def _clip_unit(w: float, what: str) -> float:
    if abs(w) > 1.0:
        if abs(w) > 1.0 + 1e-9:
            raise DomainError(f"{what} argument {w} outside [-1, 1]")
        return math.copysign(1.0, w)
    return w


def trajectory_surface_rz(model: SpaceModel, B: float, I: float, A: float, epsilon: float,
                          p: CylPoint, branch: int = 1, phase: float = 0.0,
                          axial_sign: int = 1, winding: int = 0,
                          vz: Optional[float] = None) -> float:
    """Residual of the projected orbit equation in the ``(r, z)`` plane.

    Both sides are quadratures of the same transverse clock ``tau``: the
    radial side gives ``theta = phase + branch * k * tau`` through
    ``W(x) = sin theta`` (finite), ``cosh theta`` (infinite) or
    ``(b theta / 2)^2`` (``a = 0``), and the axial side gives ``tau`` from

    * hyperbolic eps > A:  tau = (1/sqrt A) arcsinh(sqrt(A/(eps-A)) tanh z)
    * hyperbolic eps < A:  tau = (1/sqrt A) arccosh(sqrt(A/(A-eps)) |tanh z|)
    * spherical:           tau = (1/sqrt A) arcsin(sqrt(A/(eps-A)) tan z)

    each signed by the direction of axial motion ``axial_sign``. On the
    sphere the arcsin is continued by ``pi - arcsin`` while ``dz/dt < 0`` and
    ``winding`` counts completed axial oscillations. The residual is
    ``W(x(r)) - W(theta)``; unlike the raw inverse-function form it stays
    continuous through the radial turning points. Passing the axial
    velocity ``vz`` selects the well-conditioned clock of :func:`axial_clock`.

    Raises
    ------
    DomainError
        If ``p`` lies outside the region the orbit can reach.
    RegimeMismatchError
        For ``eps = A`` or non-physical parameters.
    """
    _curved_only(model)
    _check_branch(branch)
    rq, cls = _radial_setup(model, B, I, A)
    tau = axial_clock(model, epsilon, A, p.z, axial_sign, winding, vz)
    x = math.cosh(p.r) if model is SpaceModel.HYPERBOLIC else math.cos(p.r)
    if cls is RadialClass.FIXED_RADIUS:
        return x - rq.vertex
    w = float(_radial_w(model, rq, cls, x))
    if cls is RadialClass.INFINITE_ONE_TURNING and w < 1.0 - 1e-9:
        raise DomainError(f"arccosh argument {w} below 1")
    if cls in (RadialClass.FINITE_TWO_TURNING, RadialClass.SPHERICAL_FINITE):
        _clip_unit(w, "arcsin")
    theta = phase + branch * _phase_rate(rq, cls) * tau
    return w - float(_w_of_theta(rq, cls, theta))


@dataclass(frozen=True)
class SurfaceFit:
    """Integration constants of the orbit through a given state."""

    i_phi: float
    a_transverse: float
    epsilon: float
    phi0: float
    phase: float
    axial_sign: int


def surface_constants(model: SpaceModel, B: float, state: CylState) -> SurfaceFit:
    """Constants that make both surface residuals vanish at ``state``."""
    inv = invariants_of(model, B, state)
    I, A, eps = inv.i_phi, inv.a_transverse, inv.epsilon
    rq, cls = _radial_setup(model, B, I, A)
    phi0 = rphi_orientation(model, B, state)
    x0 = math.cosh(state.point.r) if model is SpaceModel.HYPERBOLIC else math.cos(state.point.r)
    theta0 = radial_phase(model, B, I, A, x0, state.vr)
    sgn = 1 if state.vz >= 0.0 else -1
    tau0 = axial_clock(model, eps, A, state.point.z, sgn, 0, state.vz)
    phase = theta0 - _phase_rate(rq, cls) * tau0
    return SurfaceFit(I, A, eps, phi0, phase, sgn)


# ---------------------------------------------------------------------------
# shift-covariant parameters

def canonical_parameters(model: SpaceModel, B: float, I: float, A: float) -> CanonicalParams:
    """``(J, C)`` with the orbit surface ``J x -+ C (transverse term) = B``."""
    _curved_only(model)
    C = _c_par(model, B, I, A)
    if model is SpaceModel.HYPERBOLIC:
        return CanonicalParams(I + B, C, B * B - A)
    return CanonicalParams(B - I, C, A + B * B)


def _invariant(model: SpaceModel, j: float, c: float) -> float:
    return j * j - c * c if model is SpaceModel.HYPERBOLIC else j * j + c * c


def transform_parameters(model: SpaceModel, s: TransversalShift,
                         cp: CanonicalParams) -> CanonicalParams:
    """Parameters of the image orbit under a (0-1) or (0-2) shift.

    Points on the orbit ``(J, C)`` are mapped by :func:`shift_pullback_cyl`
    onto the orbit ``(J', C')``. ``invariant_value`` is carried over.
    """
    _curved_only(model)
    if s.plane is Plane.PLANE03:
        raise UnsupportedError("(0-3) shifts do not map orbits onto orbits")
    J, C = cp.j, cp.c_par
    if model is SpaceModel.HYPERBOLIC:
        ch, sh = math.cosh(s.amount), math.sinh(s.amount)
        Jn, Cn = J * ch + C * sh, J * sh + C * ch
    else:
        cs, sn = math.cos(s.amount), math.sin(s.amount)
        Jn, Cn = J * cs + C * sn, -J * sn + C * cs
    return CanonicalParams(Jn, Cn, cp.invariant_value)


def params_from_canonical(model: SpaceModel, B: float, cp: CanonicalParams):
    """Recover ``(I, A)`` from ``(J, C)`` at field ``B``."""
    _curved_only(model)
    if model is SpaceModel.HYPERBOLIC:
        I = cp.j - B
        return I, cp.c_par ** 2 - cp.j ** 2 + B * B
    return B - cp.j, cp.j ** 2 + cp.c_par ** 2 - B * B


def canonical_shift(model: SpaceModel, cp: CanonicalParams) -> TransversalShift:
    """(0-1) shift bringing ``(J, C)`` to the simplest representative.

    Hyperbolic: ``C' = 0`` if ``J^2 > C^2`` (a circle about the axis),
    ``J' = 0`` if ``J^2 < C^2``; no reduction when ``J^2 = C^2``. Spherical:
    always ``C' = 0`` with ``J' = sqrt(J^2 + C^2)``.
    """
    _curved_only(model)
    J, C = cp.j, cp.c_par
    if model is SpaceModel.SPHERICAL:
        return TransversalShift(Plane.PLANE01, math.atan2(C, J))
    if abs(J) > abs(C):
        return TransversalShift(Plane.PLANE01, -math.atanh(C / J))
    if abs(C) > abs(J):
        return TransversalShift(Plane.PLANE01, -math.atanh(J / C))
    return TransversalShift(Plane.PLANE01, 0.0)
