"""Cross-checks of the closed forms against numerics.

Every sweep draws its cases from a seeded generator, rejects parameter sets
that are non-physical or that run into the axis/chart boundary, and returns
a :class:`CheckReport` whose ``worst_error`` is compared with a fixed
threshold. Composite reports normalize each child by its threshold, so the
parent passes with ``worst_error <= 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analytic as an
from .dynamics import (
    Adaptive,
    CylState,
    FixedStep,
    StepControl,
    Trajectory,
    integrate,
    integrate_many,
    invariants_of,
)
from .errors import InsufficientDataError, InvalidParamsError
from .field import (
    gauge_function,
    induced_axial_component,
    potential_phi,
    verify_field_invariance,
)
from .geometry import (
    CylPoint,
    Plane,
    SpaceModel,
    TransversalShift,
    shift_jacobian,
    shift_pullback_cyl,
)


@dataclass(frozen=True)
class CheckReport:
    name: str
    samples: int
    worst_error: float
    threshold: float
    passed: bool
    details: Optional[dict] = None
    seed: Optional[int] = None
    children: tuple = ()

    def to_text(self, indent: int = 0) -> str:
        pad = "  " * indent
        flag = "PASS" if self.passed else "FAIL"
        line = (f"{pad}{flag} {self.name}: samples={self.samples} "
                f"worst={self.worst_error:.3e} threshold={self.threshold:.1e}")
        if self.seed is not None:
            line += f" seed={self.seed}"
        lines = [line]
        for child in self.children:
            lines.append(child.to_text(indent + 1))
        return "\n".join(lines)

    def to_record(self) -> dict:
        rec = {
            "name": self.name,
            "samples": self.samples,
            "worst_error": self.worst_error,
            "threshold": self.threshold,
            "passed": self.passed,
            "seed": self.seed,
            "details": self.details,
        }
        if self.children:
            rec["children"] = [c.to_record() for c in self.children]
        return rec


def make_report(name: str, samples: int, worst: float, threshold: float,
                details: Optional[dict] = None, seed: Optional[int] = None) -> CheckReport:
    worst = float(worst)
    passed = bool(worst <= threshold)      # NaN fails
    return CheckReport(name, int(samples), worst, float(threshold), passed, details, seed)


def combine(name: str, children: Sequence[CheckReport], seed: Optional[int] = None,
            details: Optional[dict] = None) -> CheckReport:
    ratios = [c.worst_error / c.threshold if c.threshold else c.worst_error for c in children]
    worst = max(ratios) if ratios else 0.0
    passed = all(c.passed for c in children)
    return CheckReport(name, sum(c.samples for c in children), float(worst), 1.0, passed,
                       details, seed, tuple(children))


# ---------------------------------------------------------------------------
# random physical states

@dataclass
class Sampler:
    """Draws well-conditioned physical initial states.

    A draw is rejected when its classification is non-physical, when the
    orbit comes closer than ``margin`` to the axis (or to ``r = pi``), when
    a spherical orbit comes closer than ``pole_margin`` to the poles, or when the
    hyperbolic axial motion would overflow ``cosh z`` before ``t_end``.
    """

    model: SpaceModel
    rng: np.random.Generator
    margin: float = 0.05
    pole_margin: float = 0.5
    t_end: float = 50.0
    speed: float = 1.5
    accepted: int = 0
    rejected: int = 0
    reasons: dict = field(default_factory=dict)

    def _reject(self, why: str) -> None:
        self.rejected += 1
        self.reasons[why] = self.reasons.get(why, 0) + 1

    def _acceptable(self, B: float, s: CylState, min_vphi: float) -> bool:
        model = self.model
        inv = invariants_of(model, B, s)
        I, A, eps = inv.i_phi, inv.a_transverse, inv.epsilon
        cls = an.classify(model, B, I, A, eps, s.point.z)
        if not cls.physical or cls.radial is an.RadialClass.FIXED_RADIUS:
            self._reject("non-physical")
            return False
        if abs(s.vphi) < min_vphi or A < 1e-3:
            self._reject("degenerate")
            return False
        rq = an.radial_quadratic(model, B, I, A)
        if model is SpaceModel.HYPERBOLIC:
            if rq.roots[0] < math.cosh(self.margin) and cls.radial is not an.RadialClass.INFINITE_ONE_TURNING:
                self._reject("axis")
                return False
            if cls.radial is an.RadialClass.INFINITE_ONE_TURNING and rq.roots[1] < math.cosh(self.margin):
                self._reject("axis")
                return False
            if math.sqrt(eps) * self.t_end + abs(s.point.z) > 250.0:
                self._reject("overflow")
                return False
        else:
            lo, hi = rq.roots
            if hi > math.cos(self.margin) or lo < -math.cos(self.margin):
                self._reject("axis")
                return False
            if A / eps < math.sin(self.pole_margin) ** 2:
                self._reject("pole")
                return False
        return True

    def draw(self, z0: Optional[float] = None, min_vphi: float = 0.05):
        """Return ``(B, state)``."""
        rng, model = self.rng, self.model
        while True:
            B = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 2.0)
            if model is SpaceModel.HYPERBOLIC:
                r = rng.uniform(0.3, 1.8)
                z = rng.uniform(-0.5, 0.5) if z0 is None else z0
            else:
                r = rng.uniform(0.3, math.pi - 0.3)
                z = rng.uniform(-0.4, 0.4) if z0 is None else z0
            v = rng.uniform(-self.speed, self.speed, size=3)
            s = CylState.of(r, rng.uniform(0.0, 2.0 * math.pi), z, v[0], v[1], v[2])
            if self._acceptable(B, s, min_vphi):
                self.accepted += 1
                return B, s

    def stats(self) -> dict:
        return {"accepted": self.accepted, "rejected": self.rejected,
                "rejections": dict(self.reasons)}


def _check_cases(n_cases: int) -> None:
    if n_cases < 1:
        raise ValueError("n_cases must be at least 1")


# ---------------------------------------------------------------------------
# conservation

def run_conservation_sweep(model: SpaceModel, n_cases: int = 100, t_end: float = 50.0,
                           ctl: StepControl = Adaptive(), seed: int = 0,
                           threshold: float = 1e-7) -> CheckReport:
    """Largest drift of ``(eps, I, A)`` over random integrated orbits."""
    _check_cases(n_cases)
    sampler = Sampler(model, np.random.default_rng(seed), t_end=t_end)
    cases = [sampler.draw() for _ in range(n_cases)]
    Bs = np.array([b for b, _ in cases])
    trajs = integrate_many(model, Bs, [s for _, s in cases], t_end, ctl, record=False)
    worst, where = 0.0, None
    aborted = 0
    for k, tr in enumerate(trajs):
        d = max(tr.drift.values())
        if tr.reason != "completed":
            aborted += 1
            d = math.inf
        if d > worst or where is None:
            worst, where = max(worst, d), k
    b, s = cases[where]
    details = {"worst_case": {"B": b, "state": s.as_array().tolist()},
               "aborted": aborted, **sampler.stats()}
    return make_report(f"conservation[{model.value}]", n_cases, worst, threshold, details, seed)


# ---------------------------------------------------------------------------
# closed forms

def _sup(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values))) if values.size else 0.0


def _fixed_radius_axial_cases(model, rng, n):
    """Fixed-radius orbits covering every axial regime of the model."""
    out = []
    for k in range(n):
        B = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        if model is SpaceModel.HYPERBOLIC:
            r0 = rng.uniform(0.3, 1.5)
        else:
            r0 = rng.uniform(0.3, 1.2) if k % 2 else rng.uniform(1.95, math.pi - 0.3)
        I, alpha, A = an.fixed_radius_orbit(model, B, r0)
        regime = k % 3 if model is SpaceModel.HYPERBOLIC else 0
        if regime == 0:          # crossing z = 0 (eps > A)
            vz = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 1.5)
            eps = A + vz * vz
            z0 = 0.0
            branch = 1 if vz > 0 else -1
        elif regime == 1:        # turning point (eps < A)
            eps = A * rng.uniform(0.3, 0.9)
            branch = int(rng.choice([-1, 1]))
            z0 = math.asinh(branch * math.sqrt(A / eps - 1.0))
            vz = 0.0
        else:                    # eps = A, z0 != 0
            z0 = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 1.0)
            branch = int(rng.choice([-1, 1]))
            vz = math.sqrt(A) * math.tanh(z0) * branch
            eps = A
        g2 = math.cosh(z0) ** 2 if model is SpaceModel.HYPERBOLIC else math.cos(z0) ** 2
        s = CylState.of(r0, 0.0, z0, 0.0, alpha / g2, vz)
        out.append((B, r0, alpha, A, eps, branch, z0, s))
    return out


def _completed(tr: Trajectory) -> bool:
    return tr.reason == "completed"


def closed_form_axial_check(model: SpaceModel, n_cases: int, seed: int,
                            threshold: float = 1e-6) -> CheckReport:
    """Axial and azimuthal closed forms of fixed-radius orbits vs integration."""
    rng = np.random.default_rng(seed)
    cases = _fixed_radius_axial_cases(model, rng, n_cases)
    if model is SpaceModel.HYPERBOLIC:
        t_end = np.full(len(cases), 4.0)
    else:
        # one full axial cycle
        t_end = np.array([2.0 * math.pi / math.sqrt(c[4]) for c in cases])
    trajs = integrate_many(model, np.array([c[0] for c in cases]), [c[-1] for c in cases], t_end)
    worst, info = 0.0, None
    for (B, r0, alpha, A, eps, branch, z0, s), tr in zip(cases, trajs):
        t, Y = tr.t, tr.states
        critical = abs(eps - A) <= 1e-12 * eps
        zb = branch if not critical else (1 if s.vz * z0 > 0 else -1)
        f = an.axial_solution(model, eps, A, t, branch=zb, z0=z0)
        z_cf = np.arcsinh(f) if model is SpaceModel.HYPERBOLIC else np.arcsin(f)
        phi_cf = an.azimuth_solution(model, eps, A, alpha, t, branch=zb, z0=z0)
        err = max(_sup(Y[:, 2] - z_cf), _sup(Y[:, 1] - phi_cf), _sup(Y[:, 0] - r0))
        if not _completed(tr):
            err = math.inf
        if err > worst or info is None:
            worst = max(worst, err)
            info = {"B": B, "r0": r0, "eps": eps, "A": A, "z0": z0}
    return make_report(f"axial-azimuth[{model.value}]", len(cases), worst, threshold, info, seed)


def spherical_period_check(n_cases: int, seed: int, threshold: float = 1e-9) -> CheckReport:
    """Zero-crossing spacing of ``z`` equals ``pi / sqrt(eps)`` on the sphere."""
    model = SpaceModel.SPHERICAL
    sampler = Sampler(model, np.random.default_rng(seed))
    cases = [sampler.draw(z0=0.0) for _ in range(n_cases)]
    T = np.array([math.pi / math.sqrt(invariants_of(model, b, s).epsilon) for b, s in cases])
    ctl = Adaptive(rel_tol=1e-12, abs_tol=1e-14)
    trajs = integrate_many(model, np.array([b for b, _ in cases]), [s for _, s in cases], T,
                           ctl, record=False)
    worst, info = 0.0, None
    for (B, s), Tk, tr in zip(cases, T, trajs):
        z, vz = tr.states[-1, 2], tr.states[-1, 5]
        crossing = Tk - z / vz                              # one Newton step
        err = abs(crossing - Tk) if _completed(tr) else math.inf
        if err > worst or info is None:
            worst = max(worst, err)
            info = {"B": B, "state": s.as_array().tolist(), "T": float(Tk)}
    return make_report("period[spherical]", n_cases, worst, threshold, info, seed)


def radial_closed_form_check(model: SpaceModel, n_cases: int, seed: int,
                             threshold: float = 1e-6, t_end: float = 6.0) -> CheckReport:
    """``x(t)`` of :func:`radial_solution` vs integrated ``cosh r`` / ``cos r``."""
    sampler = Sampler(model, np.random.default_rng(seed), t_end=t_end)
    cases = []
    while len(cases) < n_cases:
        B, s = sampler.draw(z0=0.0)
        if s.vz != 0.0:
            cases.append((B, s))
    trajs = integrate_many(model, np.array([b for b, _ in cases]), [s for _, s in cases], t_end)
    worst, info = 0.0, None
    for (B, s), tr in zip(cases, trajs):
        inv = invariants_of(model, B, s)
        I, A, eps = inv.i_phi, inv.a_transverse, inv.epsilon
        x0 = math.cosh(s.point.r) if model is SpaceModel.HYPERBOLIC else math.cos(s.point.r)
        phase = an.radial_phase(model, B, I, A, x0, s.vr)
        r = tr.states[:, 0]
        x_num = np.cosh(r) if model is SpaceModel.HYPERBOLIC else np.cos(r)
        x_cf = an.radial_solution(model, B, I, A, eps, tr.t, branch=1, phase=phase)
        err = _sup((x_num - x_cf) / np.maximum(1.0, np.abs(x_cf)))
        if not _completed(tr):
            err = math.inf
        if err > worst or info is None:
            worst = max(worst, err)
            info = {"B": B, "state": s.as_array().tolist()}
    return make_report(f"radial[{model.value}]", n_cases, worst, threshold,
                       {**info, **sampler.stats()}, seed)


def surface_residuals(model: SpaceModel, B: float, tr: Trajectory):
    """Largest ``(r, phi)`` and ``(r, z)`` surface residuals along ``tr``.

    The integration constants are fitted at the first sample; on the sphere
    the axial winding number is tracked by unwrapping the axial clock.
    """
    fit = an.surface_constants(model, B, tr.state(0))
    I, A, eps = fit.i_phi, fit.a_transverse, fit.epsilon
    Y = tr.states
    res_rphi = [an.trajectory_surface_rphi(model, B, I, A, CylPoint(*row[:3]), fit.phi0)
                for row in Y]
    if model is SpaceModel.SPHERICAL:
        base = np.array([an.axial_clock(model, eps, A, row[2], vz=row[5]) for row in Y])
        base *= math.sqrt(A)
        windings = np.round((np.unwrap(base) - base) / (2.0 * math.pi)).astype(int)
    else:
        windings = np.zeros(len(Y), dtype=int)
    res_rz = [an.trajectory_surface_rz(model, B, I, A, eps, CylPoint(*row[:3]), 1, fit.phase,
                                       winding=int(w), vz=row[5])
              for row, w in zip(Y, windings)]
    return _sup(res_rphi), _sup(res_rz)


def surface_check(model: SpaceModel, n_cases: int = 50, seed: int = 0,
                  threshold: float = 1e-6, t_end: float = 10.0) -> CheckReport:
    """Both orbit-surface residuals along random integrated orbits."""
    sampler = Sampler(model, np.random.default_rng(seed), t_end=t_end)
    cases = [sampler.draw() for _ in range(n_cases)]
    trajs = integrate_many(model, np.array([b for b, _ in cases]), [s for _, s in cases], t_end)
    w_rphi = w_rz = 0.0
    info = None
    for (B, s), tr in zip(cases, trajs):
        a, b = surface_residuals(model, B, tr) if _completed(tr) else (math.inf,) * 2
        if max(a, b) >= max(w_rphi, w_rz) or info is None:
            info = {"B": B, "state": s.as_array().tolist()}
        w_rphi, w_rz = max(w_rphi, a), max(w_rz, b)
    details = {"worst_case": info, **sampler.stats()}
    return combine(f"surfaces[{model.value}]", [
        make_report("surface-r-phi", n_cases, w_rphi, threshold, details, seed),
        make_report("surface-r-z", n_cases, w_rz, threshold, details, seed),
    ], seed)


def run_closed_form_sweep(model: SpaceModel, n_cases: int = 50, seed: int = 0) -> CheckReport:
    """Closed forms (axial, azimuthal, radial, surfaces, period) vs integration."""
    _check_cases(n_cases)
    children = [
        closed_form_axial_check(model, n_cases, seed),
        radial_closed_form_check(model, n_cases, seed + 1),
        surface_check(model, n_cases, seed + 2),
    ]
    if model is SpaceModel.SPHERICAL:
        children.append(spherical_period_check(n_cases, seed + 3))
    return combine(f"closed-form[{model.value}]", children, seed)


# ---------------------------------------------------------------------------
# symmetry

def _angle_diff(a: float, b: float) -> float:
    return math.remainder(a - b, 2.0 * math.pi)


def fd_shift_jacobian(model: SpaceModel, s: TransversalShift, p_shifted: CylPoint,
                      h: float = 1e-5) -> float:
    """Central-difference determinant of ``(r', phi') -> (r, phi)``."""
    inv = s.inverse()

    def pre(r, phi):
        q = shift_pullback_cyl(model, inv, CylPoint(r, phi, p_shifted.z))
        return q.r, q.phi

    r, ph = p_shifted.r, p_shifted.phi
    rp, pp = pre(r + h, ph)
    rm, pm = pre(r - h, ph)
    r_dr, phi_dr = (rp - rm) / (2 * h), _angle_diff(pp, pm) / (2 * h)
    rp, pp = pre(r, ph + h)
    rm, pm = pre(r, ph - h)
    r_dp, phi_dp = (rp - rm) / (2 * h), _angle_diff(pp, pm) / (2 * h)
    return r_dr * phi_dp - r_dp * phi_dr


def _d5(f, x: float, h: float) -> float:
    """Five-point central difference; ``f`` returns angle-like values."""
    return (8.0 * _angle_diff(f(x + h), f(x - h))
            - _angle_diff(f(x + 2 * h), f(x - 2 * h))) / (12.0 * h)


def pullback_potential(model: SpaceModel, s: TransversalShift, B: float, p_shifted: CylPoint,
                       h: float = 1e-3):
    """Components ``(A'_r', A'_phi')`` of the pulled-back potential.

    ``A'_k = (dphi/dx'^k) A_phi(r)`` with the derivatives of the inverse
    shift taken by five-point central differences.
    """
    inv = s.inverse()

    def phi_of(r, phi):
        return shift_pullback_cyl(model, inv, CylPoint(r, phi, p_shifted.z)).phi

    r, ph = p_shifted.r, p_shifted.phi
    dphi_dr = _d5(lambda x: phi_of(x, ph), r, h)
    dphi_dp = _d5(lambda x: phi_of(r, x), ph, h)
    a_phi = potential_phi(model, B, shift_pullback_cyl(model, inv, p_shifted).r)
    return dphi_dr * a_phi, dphi_dp * a_phi


def _random_shift_point(model: SpaceModel, rng, plane=None, margin: float = 0.1):
    """Random shift and a point; point and image stay ``margin`` off the axes."""
    while True:
        pl = plane or (Plane.PLANE01 if rng.random() < 0.5 else Plane.PLANE02)
        if model is SpaceModel.HYPERBOLIC:
            amount = rng.uniform(-1.5, 1.5)
            p = CylPoint(rng.uniform(margin, 2.0), rng.uniform(0, 2 * math.pi),
                         rng.uniform(-1, 1))
        else:
            amount = rng.uniform(0.0, 2.0 * math.pi)
            p = CylPoint(rng.uniform(margin, math.pi - margin), rng.uniform(0, 2 * math.pi),
                         rng.uniform(-1, 1))
        if abs(amount) < 1e-3:
            continue
        s = TransversalShift(pl, amount)
        q = shift_pullback_cyl(model, s, p)
        far = q.r > margin and (model is SpaceModel.HYPERBOLIC or q.r < math.pi - margin)
        if far:
            return s, p, q


def run_symmetry_sweep(model: SpaceModel, n_cases: int = 200, seed: int = 0) -> CheckReport:
    """Field invariance, Jacobian, gauge function and parameter-action checks."""
    _check_cases(n_cases)
    rng = np.random.default_rng(seed)
    w = {k: 0.0 for k in ("invariance", "jacobian", "gauge_fd", "gauge_relation",
                          "integrability", "param_invariant", "composition", "orbit_map")}
    min_axial = math.inf
    h = 1e-5
    for _ in range(n_cases):
        B = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 2.0)
        s, p, q = _random_shift_point(model, rng)
        w["invariance"] = max(w["invariance"], verify_field_invariance(model, s, B, p))
        J = shift_jacobian(model, s, q, p)
        w["jacobian"] = max(w["jacobian"],
                            abs(J - fd_shift_jacobian(model, s, q)) / max(1.0, abs(J)))

        # gauge function away from the arctan branch cut sin(phi') = 0
        s01, _, q01 = _random_shift_point(model, rng, Plane.PLANE01, 0.3)
        while abs(math.sin(q01.phi)) < 0.05:
            s01, _, q01 = _random_shift_point(model, rng, Plane.PLANE01, 0.3)
        g = gauge_function(model, s01, B, q01)

        def lam(dr, dp):
            return gauge_function(model, s01, B, CylPoint(q01.r + dr, q01.phi + dp, q01.z))

        fd_r = (lam(h, 0).lambda_value - lam(-h, 0).lambda_value) / (2 * h)
        fd_p = (lam(0, h).lambda_value - lam(0, -h).lambda_value) / (2 * h)
        w["gauge_fd"] = max(w["gauge_fd"], abs(fd_r - g.dLambda_dr), abs(fd_p - g.dLambda_dphi))
        mixed_rp = (lam(0, h).dLambda_dr - lam(0, -h).dLambda_dr) / (2 * h)
        mixed_pr = (lam(h, 0).dLambda_dphi - lam(-h, 0).dLambda_dphi) / (2 * h)
        w["integrability"] = max(w["integrability"], abs(mixed_rp - mixed_pr))
        a_r, a_p = pullback_potential(model, s01, B, q01)
        rel = max(abs(a_r - g.dLambda_dr),
                  abs(a_p - potential_phi(model, B, q01.r) - g.dLambda_dphi))
        w["gauge_relation"] = max(w["gauge_relation"], rel)

        # parameter action on (J, C)
        sampler_B, st = Sampler(model, rng).draw()
        inv = invariants_of(model, sampler_B, st)
        cp = an.canonical_parameters(model, sampler_B, inv.i_phi, inv.a_transverse)
        a1, a2 = _random_amount(model, rng), _random_amount(model, rng)
        c1 = an.transform_parameters(model, TransversalShift(Plane.PLANE01, a1), cp)
        c12 = an.transform_parameters(model, TransversalShift(Plane.PLANE01, a2), c1)
        c_sum = an.transform_parameters(model, TransversalShift(Plane.PLANE01, a1 + a2), cp)
        scale = max(1.0, c1.j ** 2 + c1.c_par ** 2)
        w["param_invariant"] = max(w["param_invariant"],
                                   abs(an._invariant(model, c1.j, c1.c_par) - cp.invariant_value) / scale)
        sc = max(1.0, abs(c_sum.j), abs(c_sum.c_par))
        w["composition"] = max(w["composition"],
                               abs(c12.j - c_sum.j) / sc, abs(c12.c_par - c_sum.c_par) / sc)
        # points of the orbit through st map onto the orbit (J', C')
        w["orbit_map"] = max(w["orbit_map"], _orbit_map_error(model, sampler_B, st, a1))

        # (0-3) shifts: the field picks up an axial component
        beta = math.copysign(rng.uniform(0.2, 1.2), rng.uniform(-1, 1))
        p3 = CylPoint(rng.uniform(0.3, 1.2), rng.uniform(0, 2 * math.pi), rng.uniform(-0.6, 0.6))
        f3 = induced_axial_component(model, TransversalShift(Plane.PLANE03, beta), B, p3)
        min_axial = min(min_axial, abs(f3))

    children = [
        make_report("field-invariance", n_cases, w["invariance"], 1e-9, seed=seed),
        make_report("jacobian-fd", n_cases, w["jacobian"], 1e-6, seed=seed),
        make_report("gauge-partials-fd", n_cases, w["gauge_fd"], 1e-6, seed=seed),
        make_report("gauge-potential-relation", n_cases, w["gauge_relation"], 1e-8, seed=seed),
        make_report("gauge-integrability", n_cases, w["integrability"], 1e-5, seed=seed),
        make_report("parameter-invariant", n_cases, w["param_invariant"], 1e-12, seed=seed),
        make_report("shift-composition", n_cases, w["composition"], 1e-10, seed=seed),
        make_report("orbit-mapping", n_cases, w["orbit_map"], 1e-9, seed=seed),
        make_report("plane03-noninvariance", n_cases, 1e-6 / min_axial, 1.0,
                    {"min_abs_F_phi_z": min_axial}, seed),
    ]
    return combine(f"symmetry[{model.value}]", children, seed)


def _random_amount(model: SpaceModel, rng) -> float:
    if model is SpaceModel.HYPERBOLIC:
        return rng.uniform(-2.0, 2.0)
    return rng.uniform(0.0, 2.0 * math.pi)


def _orbit_map_error(model: SpaceModel, B: float, st: CylState, amount: float) -> float:
    """Residual of shifted orbit points on the transformed (r, phi) surface."""
    inv = invariants_of(model, B, st)
    I, A = inv.i_phi, inv.a_transverse
    cp = an.canonical_parameters(model, B, I, A)
    s = TransversalShift(Plane.PLANE01, amount)
    cp_new = an.transform_parameters(model, s, cp)
    I_new, A_new = an.params_from_canonical(model, B, cp_new)
    worst = 0.0
    for psi in np.linspace(0.0, 2.0 * math.pi, 7, endpoint=False):
        r = _orbit_radius(model, B, I, A, psi)
        if r is None:
            continue
        q = shift_pullback_cyl(model, s, CylPoint(r, psi, 0.0))
        flip = 0.0 if cp_new.c_par >= 0.0 else math.pi
        try:
            res = an.trajectory_surface_rphi(model, B, I_new, max(A_new, 0.0), q, flip)
        except InvalidParamsError:
            continue
        worst = max(worst, abs(res) / max(1.0, abs(B)))
    return worst


def _orbit_radius(model, B, I, A, psi):
    """Radius where the orbit (symmetric about phi = 0) meets azimuth ``psi``."""
    cp = an.canonical_parameters(model, B, I, A)
    J, C = cp.j, cp.c_par
    # hyperbolic: J cosh r - C cos(psi) sinh r = B; spherical: J cos r + C cos(psi) sin r = B
    k = -C * math.cos(psi) if model is SpaceModel.HYPERBOLIC else C * math.cos(psi)
    if model is SpaceModel.HYPERBOLIC:
        # J cosh r + k sinh r = B with e^r = y: (J+k) y^2 - 2B y + (J-k) = 0
        qa, qb, qc = J + k, -2.0 * B, J - k
        d = qb * qb - 4 * qa * qc
        if d < 0 or qa == 0:
            return None
        for y in sorted(((-qb + math.sqrt(d)) / (2 * qa), (-qb - math.sqrt(d)) / (2 * qa))):
            if y > 1.0 + 1e-6:
                return math.log(y)
        return None
    amp = math.hypot(J, k)
    if amp == 0 or abs(B) > amp:
        return None
    delta = math.atan2(k, J)
    r = delta + math.acos(B / amp)
    r = math.remainder(r, 2 * math.pi)
    if not 1e-3 < r < math.pi - 1e-3:
        r = delta - math.acos(B / amp)
        r = math.remainder(r, 2 * math.pi)
    return r if 1e-3 < r < math.pi - 1e-3 else None


# ---------------------------------------------------------------------------
# convergence order and flat limit

def _reference_case(model: SpaceModel, case: Optional[str]):
    """Fixed-radius orbit with nontrivial axial motion and its closed form."""
    if model is SpaceModel.HYPERBOLIC:
        if case not in (None, "fixed_radius"):
            raise ValueError(f"unknown hyperbolic case {case!r}")
        B, r0, vz, t_end = 2.0, math.acosh(2.0), 1.0, 2.0
    elif model is SpaceModel.SPHERICAL:
        if case not in (None, "periodic", "fixed_radius"):
            raise ValueError(f"unknown spherical case {case!r}")
        B, r0, vz = 2.0, math.pi / 3.0, 2.0
        t_end = 2.0 * math.pi / 4.0                 # one full axial cycle, eps = 16
    else:
        raise ValueError("convergence cases are defined for curved models")
    I, alpha, A = an.fixed_radius_orbit(model, B, r0)
    eps = A + vz * vz
    s0 = CylState.of(r0, 0.0, 0.0, 0.0, alpha, vz)
    return B, s0, eps, A, alpha, t_end


def integration_error(model: SpaceModel, h: float, case: Optional[str] = None) -> float:
    """Sup-norm error of fixed-step integration against the closed form."""
    B, s0, eps, A, alpha, t_end = _reference_case(model, case)
    tr = integrate(model, B, s0, t_end, FixedStep(h))
    f = an.axial_solution(model, eps, A, tr.t)
    z_cf = np.arcsinh(f) if model is SpaceModel.HYPERBOLIC else np.arcsin(f)
    phi_cf = an.azimuth_solution(model, eps, A, alpha, tr.t)
    return max(_sup(tr.states[:, 2] - z_cf), _sup(tr.states[:, 1] - phi_cf))


def fit_loglog_slope(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 3:
        raise InsufficientDataError("at least three points are needed for a slope fit")
    if np.any(y <= 0) or np.any(x <= 0):
        raise InsufficientDataError("slope fit needs positive values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def measure_convergence_order(model: SpaceModel, case: Optional[str] = None,
                              steps: Sequence[float] = (1e-2, 5e-3, 2.5e-3)) -> float:
    """Least-squares slope of log(error) against log(h) for fixed steps."""
    steps = list(steps)
    if len(steps) < 3:
        raise InsufficientDataError("convergence order needs at least three step sizes")
    errors = [integration_error(model, h, case) for h in steps]
    return fit_loglog_slope(steps, errors)


def convergence_report(model: SpaceModel, steps=(1e-2, 5e-3, 2.5e-3),
                       tolerance: float = 0.3) -> CheckReport:
    order = measure_convergence_order(model, None, steps)
    return make_report(f"convergence[{model.value}]", len(steps), abs(order - 4.0), tolerance,
                       {"order": order})


def flat_limit_error(model: SpaceModel, s: float, B: float = 1.0, w: float = 0.5) -> float:
    """Deviation from the flat cyclotron orbit at scale ``s`` over one period.

    The orbit starts at ``r = s`` with the flat cyclotron velocity
    ``dphi/dt = -B`` and axial velocity ``s w``; the flat solution is
    ``r = s, phi = -B t, z = s w t``. Returns the sup over one period of the
    Cartesian distance divided by ``s``.
    """
    period = 2.0 * math.pi / abs(B)
    s0 = CylState.of(s, 0.0, 0.0, 0.0, -B, s * w)
    tr = integrate(model, B, s0, period)
    t, Y = tr.t, tr.states
    r, phi, z = Y[:, 0], Y[:, 1], Y[:, 2]
    dx = r * np.cos(phi) - s * np.cos(-B * t)
    dy = r * np.sin(phi) - s * np.sin(-B * t)
    dz = z - s * w * t
    return float(np.max(np.sqrt(dx * dx + dy * dy + dz * dz))) / s


def flat_limit_order(model: SpaceModel, scales=(0.1, 0.05, 0.025), B: float = 1.0) -> float:
    return fit_loglog_slope(scales, [flat_limit_error(model, s, B) for s in scales])


def flat_limit_report(model: SpaceModel, scales=(0.1, 0.05, 0.025),
                      tolerance: float = 0.2) -> CheckReport:
    order = flat_limit_order(model, scales)
    return make_report(f"flat-limit[{model.value}]", len(scales), abs(order - 2.0), tolerance,
                       {"order": order})
