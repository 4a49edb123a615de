"""Uniform magnetic field on H3, S3 and E3 and its behaviour under shifts.

The only nonzero potential component is ``A_phi(r)``

* hyperbolic:  A_phi = -B (cosh r - 1)
* spherical:   A_phi =  B (cos r - 1)
* euclidean:   A_phi = -B r^2 / 2

so that ``F_{phi r} = -dA_phi/dr = B S(r)`` with ``S = sinh, sin, id``.
A (0-1) shift maps the potential to a gauge-equivalent one,
``A' = A + dLambda``; :func:`gauge_function` gives ``Lambda`` in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BranchSingularityError, DegenerateShiftError, UnsupportedError
from .geometry import (
    CylPoint,
    Plane,
    SpaceModel,
    TransversalShift,
    _require_off_axis,
    check_chart,
    metric_diagonal,
    shift_jacobian,
    shift_pullback_cyl,
    sqrt_det_metric,
    to_ambient,
    apply_shift,
    from_ambient,
    transverse_scale,
)

MAXWELL_STEP = 1e-6


@dataclass(frozen=True)
class GaugeEvaluation:
    lambda_value: float
    dLambda_dr: float
    dLambda_dphi: float


def potential_phi(model: SpaceModel, B: float, r: float) -> float:
    """Azimuthal potential component ``A_phi(r)``."""
    if model is SpaceModel.HYPERBOLIC:
        return -2.0 * B * math.sinh(0.5 * r) ** 2
    if model is SpaceModel.SPHERICAL:
        return -2.0 * B * math.sin(0.5 * r) ** 2
    return -0.5 * B * r * r


def field_strength(model: SpaceModel, B: float, r: float) -> float:
    """Field tensor component ``F_{phi r} = B S(r)``."""
    S, _ = transverse_scale(model, r)
    return float(B * S)


def _contravariant_flux(model: SpaceModel, B: float, p: CylPoint) -> float:
    """``sqrt(g) F^{r phi}`` built from the metric, not from its closed form."""
    g_rr, g_pp, _ = metric_diagonal(model, p)
    f_rphi = -field_strength(model, B, p.r)
    return sqrt_det_metric(model, p) * f_rphi / (g_rr * g_pp)


def maxwell_residual(model: SpaceModel, B: float, p: CylPoint, h: float = MAXWELL_STEP) -> float:
    """Central-difference value of ``(1/sqrt g) d_r (sqrt g F^{r phi})``.

    This is the only nontrivial component of the source-free Maxwell
    equations for the field; it vanishes analytically.
    """
    check_chart(model, p)
    _require_off_axis(model, p.r - h)
    plus = _contravariant_flux(model, B, CylPoint(p.r + h, p.phi, p.z))
    minus = _contravariant_flux(model, B, CylPoint(p.r - h, p.phi, p.z))
    return (plus - minus) / (2.0 * h) / sqrt_det_metric(model, p)


_ROTATE_02 = 0.5 * math.pi


def gauge_function(model: SpaceModel, s: TransversalShift, B: float,
                   p_shifted: CylPoint) -> GaugeEvaluation:
    """Gauge function ``Lambda(r', phi')`` generated by a transverse shift.

    Defined through

        (dphi/dphi') A_phi(r) = A_phi(r') + dLambda/dphi'
        (dphi/dr')   A_phi(r) = dLambda/dr'

    where ``(r, phi)`` is the preimage of ``(r', phi')``. The additive
    constant is fixed to zero and ``phi'`` is taken on the universal cover
    (the value is not reduced mod 2 pi). For a (0-2) shift the (0-1)
    expression is evaluated at ``phi' - pi/2``.

    Raises
    ------
    DegenerateShiftError
        For a zero shift.
    BranchSingularityError
        If ``sin phi' = 0`` and the arctan argument is 0/0 (numerator zero
        to rounding), so no one-sided limit exists, or on the sphere at the
        image of the antipodal axis where the partials diverge.
    """
    if not model.curved:
        raise UnsupportedError("shifts are defined for curved models only")
    if s.plane is Plane.PLANE03:
        raise UnsupportedError("(0-3) shifts do not preserve the field")
    if s.amount == 0.0:
        raise DegenerateShiftError("gauge function of the identity shift is trivial")
    rp = p_shifted.r
    phip = p_shifted.phi - (_ROTATE_02 if s.plane is Plane.PLANE02 else 0.0)
    sin_p, cos_p = math.sin(phip), math.cos(phip)

    if model is SpaceModel.HYPERBOLIC:
        c, sh = math.cosh(s.amount), math.sinh(s.amount)
        one_minus = 2.0 * math.sinh(0.5 * rp) ** 2            # cosh r' - 1
        Sr = math.sinh(rp)
        denom = 1.0 + c * math.cosh(rp) - sh * Sr * cos_p
        d_r = B * sh * sin_p / denom
        d_phi = B * (one_minus * (1.0 - c) + sh * Sr * cos_p) / denom
        num = (c - 1.0) * one_minus - sh * Sr * cos_p
        den = sh * Sr * sin_p
        size = abs(c - 1.0) * one_minus + abs(sh * Sr)
        coef, lin = 2.0 * B, -2.0 * B
    else:
        c, sn = math.cos(s.amount), math.sin(s.amount)
        one_minus = 2.0 * math.sin(0.5 * rp) ** 2             # 1 - cos r'
        Sr = math.sin(rp)
        denom = 1.0 + c * math.cos(rp) - sn * Sr * cos_p     # 1 + cos r of the preimage
        if denom <= 1e-14:
            raise BranchSingularityError("point is the image of the antipodal axis r = pi")
        d_r = -B * sn * sin_p / denom
        d_phi = -B * (-one_minus * (1.0 - c) + sn * Sr * cos_p) / denom
        num = (1.0 - c) * one_minus - sn * Sr * cos_p
        den = sn * Sr * sin_p
        size = abs(1.0 - c) * one_minus + abs(sn * Sr)
        coef, lin = -2.0 * B, 2.0 * B

    if B == 0.0:
        return GaugeEvaluation(0.0, 0.0, 0.0)
    if den == 0.0:
        if abs(num) <= 1e-12 * size:
            raise BranchSingularityError(f"gauge arctan is 0/0 at phi'={p_shifted.phi}")
        # one-sided limit phi' -> phi'+: sign of the denominator follows
        # d(sin phi')/dphi' = cos phi' (and the sign of the prefactor)
        lead = (sh if model is SpaceModel.HYPERBOLIC else sn) * Sr * cos_p
        angle = math.copysign(0.5 * math.pi, num * lead)
    else:
        angle = math.atan(num / den)
    value = coef * angle + lin * phip
    return GaugeEvaluation(value, d_r, d_phi)


def verify_field_invariance(model: SpaceModel, s: TransversalShift, B: float,
                            p: CylPoint) -> float:
    """Relative mismatch ``|J F_{phi r}(r) - F_{phi' r'}(r')| / |F_{phi' r'}|``.

    ``J`` is the closed-form shift Jacobian and ``F'`` is the field of the
    same form evaluated at the image point.
    """
    p_new = shift_pullback_cyl(model, s, p)
    J = shift_jacobian(model, s, p_new, p)
    pulled = J * field_strength(model, B, p.r)
    direct = field_strength(model, B, p_new.r)
    scale = abs(direct) if direct != 0.0 else 1.0
    return abs(pulled - direct) / scale


def induced_axial_component(model: SpaceModel, s: TransversalShift, B: float,
                            p_shifted: CylPoint, h: float = 1e-5) -> float:
    """``F_{phi' z'}`` picked up by the field under a (0-3) shift.

    A (0-3) shift leaves ``phi`` fixed, so the only new component is
    ``F_{phi' z'} = (dr/dz') F_{phi r}``; ``dr/dz'`` is obtained by central
    differences of the inverse map on ambient points.
    """
    if s.plane is not Plane.PLANE03:
        raise UnsupportedError("only (0-3) shifts generate an axial component")
    inv = s.inverse()

    def preimage(zp: float) -> CylPoint:
        q = CylPoint(p_shifted.r, p_shifted.phi, zp)
        return from_ambient(model, apply_shift(model, inv, to_ambient(model, q)))

    p = preimage(p_shifted.z)
    dr_dz = (preimage(p_shifted.z + h).r - preimage(p_shifted.z - h).r) / (2.0 * h)
    return dr_dz * field_strength(model, B, p.r)
