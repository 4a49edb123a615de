"""Cylindrical charts, embeddings and shift isometries of H3, S3 and E3.

All three spaces are written in the same cylindrical chart ``(r, phi, z)``

* hyperbolic:  ds^2 = cosh^2 z (dr^2 + sinh^2 r dphi^2) + dz^2
* spherical:   ds^2 = cos^2 z (dr^2 + sin^2 r dphi^2) + dz^2
* euclidean:   ds^2 = dr^2 + r^2 dphi^2 + dz^2

with lengths measured in units of the curvature radius. The curved spaces
are embedded in four dimensions as the upper sheet of
``u0^2 - u1^2 - u2^2 - u3^2 = 1`` and as the unit sphere ``|u| = 1``.

A *transversal shift* is a one-parameter isometry acting in a coordinate
plane ``(u0, uk)``: a boost with rapidity ``beta`` on the hyperboloid and a
rotation by angle ``alpha`` on the sphere.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AxisSingularityError,
    ChartDomainError,
    EmbeddingViolationError,
    UnsupportedError,
)

TWO_PI = 2.0 * math.pi

#: Radius below which 1/sinh r type factors are treated as singular.
R_MIN = 1e-10

#: Chart index order used by every array in the package.
R, PHI, Z = 0, 1, 2


class SpaceModel(enum.Enum):
    HYPERBOLIC = "hyperbolic"
    SPHERICAL = "spherical"
    EUCLIDEAN = "euclidean"

    @classmethod
    def parse(cls, text: str) -> "SpaceModel":
        """Accept ``hyperbolic``/``H3``/``h``, ``spherical``/``S3``/``s``,
        ``euclidean``/``E3``/``flat``/``e`` (case-insensitive)."""
        key = text.strip().lower()
        aliases = {
            "hyperbolic": cls.HYPERBOLIC, "h3": cls.HYPERBOLIC, "h": cls.HYPERBOLIC,
            "lobachevsky": cls.HYPERBOLIC,
            "spherical": cls.SPHERICAL, "s3": cls.SPHERICAL, "s": cls.SPHERICAL,
            "riemann": cls.SPHERICAL,
            "euclidean": cls.EUCLIDEAN, "e3": cls.EUCLIDEAN, "e": cls.EUCLIDEAN,
            "flat": cls.EUCLIDEAN,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown space model {text!r}") from None

    @property
    def curved(self) -> bool:
        return self is not SpaceModel.EUCLIDEAN


class Plane(enum.Enum):
    PLANE01 = 1
    PLANE02 = 2
    PLANE03 = 3


@dataclass(frozen=True)
class CylPoint:
    """Point of the cylindrical chart.

    ``phi`` is not reduced on construction so that accumulated angles along a
    trajectory can be stored; functions returning chart points reduce it to
    ``[0, 2 pi)``.
    """

    r: float
    phi: float
    z: float = 0.0


@dataclass(frozen=True)
class AmbientPoint:
    u0: float
    u1: float
    u2: float
    u3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u0, self.u1, self.u2, self.u3])

    @classmethod
    def from_array(cls, u) -> "AmbientPoint":
        u = np.asarray(u, dtype=float)
        return cls(float(u[0]), float(u[1]), float(u[2]), float(u[3]))


@dataclass(frozen=True)
class TransversalShift:
    """Boost (hyperbolic) or rotation (spherical) in the plane ``(u0, uk)``."""

    plane: Plane
    amount: float

    def inverse(self) -> "TransversalShift":
        return TransversalShift(self.plane, -self.amount)


def normalize_angle(phi: float) -> float:
    """Reduce an angle to ``[0, 2 pi)``."""
    out = math.fmod(phi, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    if out >= TWO_PI:
        out = 0.0
    return out


# Model profile functions: transverse scale S(r), its derivative, and the
# warp factor g(z) multiplying the transverse metric.

def transverse_scale(model: SpaceModel, r):
    """Return ``(S, dS/dr)`` with ``S = sinh r, sin r, r``."""
    if model is SpaceModel.HYPERBOLIC:
        return np.sinh(r), np.cosh(r)
    if model is SpaceModel.SPHERICAL:
        return np.sin(r), np.cos(r)
    return r, np.ones_like(r) if isinstance(r, np.ndarray) else 1.0


def warp_factor(model: SpaceModel, z):
    """Return ``(g, dg/dz)`` with ``g = cosh z, cos z, 1``."""
    if model is SpaceModel.HYPERBOLIC:
        return np.cosh(z), np.sinh(z)
    if model is SpaceModel.SPHERICAL:
        return np.cos(z), -np.sin(z)
    one = np.ones_like(z) if isinstance(z, np.ndarray) else 1.0
    return one, 0.0 * one


def check_chart(model: SpaceModel, p: CylPoint) -> None:
    """Raise :class:`ChartDomainError` if ``p`` is outside the chart."""
    if not (math.isfinite(p.r) and math.isfinite(p.phi) and math.isfinite(p.z)):
        raise ChartDomainError(f"non-finite chart point {p}")
    if p.r < 0.0:
        raise ChartDomainError(f"negative radius r={p.r}")
    if model is SpaceModel.SPHERICAL:
        if p.r > math.pi:
            raise ChartDomainError(f"spherical radius r={p.r} exceeds pi")
        if abs(p.z) >= 0.5 * math.pi:
            raise ChartDomainError(f"spherical axial coordinate |z|={abs(p.z)} >= pi/2")


def metric_diagonal(model: SpaceModel, p: CylPoint) -> np.ndarray:
    """Diagonal ``(g_rr, g_phiphi, g_zz)`` of the chart metric."""
    check_chart(model, p)
    S, _ = transverse_scale(model, p.r)
    g, _ = warp_factor(model, p.z)
    return np.array([g * g, g * g * S * S, 1.0])


def sqrt_det_metric(model: SpaceModel, p: CylPoint) -> float:
    """Volume density ``sqrt(det g) = g(z)^2 S(r)``."""
    check_chart(model, p)
    S, _ = transverse_scale(model, p.r)
    g, _ = warp_factor(model, p.z)
    return float(g * g * S)


def _require_off_axis(model: SpaceModel, r: float) -> None:
    if r <= R_MIN or (model is SpaceModel.SPHERICAL and math.pi - r <= R_MIN):
        raise AxisSingularityError(f"r={r} is on the symmetry axis")


def christoffel(model: SpaceModel, p: CylPoint) -> np.ndarray:
    """Christoffel symbols ``gamma[i, j, k]`` = Gamma^i_jk in (r, phi, z) order.

    Raises
    ------
    AxisSingularityError
        If ``r <= R_MIN`` (or ``pi - r <= R_MIN`` on the sphere), where
        the ``coth r`` / ``cot r`` / ``1/r`` entries diverge.
    """
    check_chart(model, p)
    _require_off_axis(model, p.r)
    r, z = p.r, p.z
    gam = np.zeros((3, 3, 3))
    if model is SpaceModel.HYPERBOLIC:
        t = math.tanh(z)
        gam[R, R, Z] = gam[R, Z, R] = t
        gam[R, PHI, PHI] = -math.sinh(r) * math.cosh(r)
        gam[PHI, R, PHI] = gam[PHI, PHI, R] = 1.0 / math.tanh(r)
        gam[PHI, PHI, Z] = gam[PHI, Z, PHI] = t
        gam[Z, R, R] = -math.cosh(z) * math.sinh(z)
        gam[Z, PHI, PHI] = -math.sinh(z) * math.cosh(z) * math.sinh(r) ** 2
    elif model is SpaceModel.SPHERICAL:
        t = math.tan(z)
        gam[R, R, Z] = gam[R, Z, R] = -t
        gam[R, PHI, PHI] = -math.sin(r) * math.cos(r)
        gam[PHI, R, PHI] = gam[PHI, PHI, R] = 1.0 / math.tan(r)
        gam[PHI, PHI, Z] = gam[PHI, Z, PHI] = -t
        gam[Z, R, R] = math.sin(z) * math.cos(z)
        gam[Z, PHI, PHI] = math.sin(z) * math.cos(z) * math.sin(r) ** 2
    else:
        gam[R, PHI, PHI] = -r
        gam[PHI, R, PHI] = gam[PHI, PHI, R] = 1.0 / r
    return gam


def quadric(model: SpaceModel, u: AmbientPoint) -> float:
    """Value of the embedding quadratic form (equals 1 on the space)."""
    if model is SpaceModel.HYPERBOLIC:
        return u.u0 ** 2 - u.u1 ** 2 - u.u2 ** 2 - u.u3 ** 2
    if model is SpaceModel.SPHERICAL:
        return u.u0 ** 2 + u.u1 ** 2 + u.u2 ** 2 + u.u3 ** 2
    raise UnsupportedError("flat space has no embedding quadric")


def to_ambient(model: SpaceModel, p: CylPoint) -> AmbientPoint:
    if not model.curved:
        raise UnsupportedError("flat space has no four-dimensional embedding")
    check_chart(model, p)
    S, _ = transverse_scale(model, p.r)
    C = math.cosh(p.r) if model is SpaceModel.HYPERBOLIC else math.cos(p.r)
    if model is SpaceModel.HYPERBOLIC:
        g, u3 = math.cosh(p.z), math.sinh(p.z)
    else:
        g, u3 = math.cos(p.z), math.sin(p.z)
    return AmbientPoint(g * C, g * S * math.cos(p.phi), g * S * math.sin(p.phi), u3)


def from_ambient(model: SpaceModel, u: AmbientPoint, tol: float = 1e-9) -> CylPoint:
    """Invert :func:`to_ambient`.

    Points on the axis ``u1 = u2 = 0`` get ``phi = 0``.

    Raises
    ------
    EmbeddingViolationError
        If the quadric deviates from 1 by more than ``tol`` (relative).
    ChartDomainError
        At the spherical poles ``u3 = +-1`` (``|z| = pi/2``).
    """
    if not model.curved:
        raise UnsupportedError("flat space has no four-dimensional embedding")
    scale = max(1.0, u.u0 ** 2 + u.u1 ** 2 + u.u2 ** 2 + u.u3 ** 2)
    q = quadric(model, u)
    if not abs(q - 1.0) <= tol * scale:
        raise EmbeddingViolationError(f"quadric value {q} differs from 1")
    rho = math.hypot(u.u1, u.u2)
    phi = normalize_angle(math.atan2(u.u2, u.u1)) if rho > 0.0 else 0.0
    if model is SpaceModel.HYPERBOLIC:
        if u.u0 <= 0.0:
            raise EmbeddingViolationError("point on the lower sheet of the hyperboloid")
        gz = math.sqrt(1.0 + u.u3 ** 2)
        return CylPoint(math.asinh(rho / gz), phi, math.asinh(u.u3))
    gz = math.hypot(u.u0, rho)
    if gz <= 1e-15:
        raise ChartDomainError("pole of the spherical chart (|z| = pi/2)")
    return CylPoint(math.atan2(rho, u.u0), phi, math.atan2(u.u3, gz))


def shift_matrix(model: SpaceModel, s: TransversalShift) -> np.ndarray:
    """4x4 matrix ``M`` with ``u' = M u``."""
    if not model.curved:
        raise UnsupportedError("shifts are defined for curved models only")
    k = s.plane.value
    m = np.eye(4)
    if model is SpaceModel.HYPERBOLIC:
        c, sh = math.cosh(s.amount), math.sinh(s.amount)
        m[0, 0] = m[k, k] = c
        m[0, k] = m[k, 0] = sh
    else:
        c, sn = math.cos(s.amount), math.sin(s.amount)
        m[0, 0] = m[k, k] = c
        m[0, k] = sn
        m[k, 0] = -sn
    return m


def apply_shift(model: SpaceModel, s: TransversalShift, u: AmbientPoint) -> AmbientPoint:
    if s.amount == 0.0:
        return u
    return AmbientPoint.from_array(shift_matrix(model, s) @ u.as_array())


def _require_transverse_plane(s: TransversalShift) -> None:
    if s.plane is Plane.PLANE03:
        raise UnsupportedError("(0-3) shifts mix r with z; use apply_shift on ambient points")


def shift_pullback_cyl(model: SpaceModel, s: TransversalShift, p: CylPoint) -> CylPoint:
    """Chart coordinates of the image of ``p`` under a (0-1) or (0-2) shift.

    The shift acts only on the transverse triple
    ``(C(r), S(r) cos phi, S(r) sin phi)`` so ``z`` is unchanged.
    """
    _require_transverse_plane(s)
    if not model.curved:
        raise UnsupportedError("shifts are defined for curved models only")
    check_chart(model, p)
    if s.amount == 0.0:
        return CylPoint(p.r, normalize_angle(p.phi), p.z)
    S, _ = transverse_scale(model, p.r)
    C = math.cosh(p.r) if model is SpaceModel.HYPERBOLIC else math.cos(p.r)
    x = np.array([C, S * math.cos(p.phi), S * math.sin(p.phi)])
    m = shift_matrix(model, s)[:3, :3]
    x0, x1, x2 = m @ x
    rho = math.hypot(x1, x2)
    if model is SpaceModel.HYPERBOLIC:
        r_new = math.asinh(rho)
    else:
        r_new = math.atan2(rho, x0)
    phi_new = normalize_angle(math.atan2(x2, x1)) if rho > 0.0 else 0.0
    out = CylPoint(r_new, phi_new, p.z)
    check_chart(model, out)
    return out


def shift_jacobian(model: SpaceModel, s: TransversalShift, p_shifted: CylPoint,
                   p: CylPoint) -> float:
    """Determinant of d(r, phi)/d(r', phi') for a (0-1) or (0-2) shift.

    Equals ``S(r')/S(r)``: the shift preserves the area element
    ``S(r) dr dphi`` of the transverse slice.
    """
    _require_transverse_plane(s)
    if not model.curved:
        raise UnsupportedError("shifts are defined for curved models only")
    _require_off_axis(model, p.r)
    _require_off_axis(model, p_shifted.r)
    S_new, _ = transverse_scale(model, p_shifted.r)
    S_old, _ = transverse_scale(model, p.r)
    return float(S_new / S_old)
