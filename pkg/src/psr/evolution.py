"""Standard forms along the ray curve towards the cone boundary, and their limits.

For a unit direction ``v`` the curve is

    gamma(t) = beta(t)^(-1/3) * (1, t v),   beta(t) = 1 - t^2 + t^3 P3(v),

which stays on ``h = 1`` until ``t`` reaches the smallest positive zero
``R`` of ``beta``.  Pulling ``h`` back to standard form at ``gamma(t)``
gives the family ``P3|_t`` whose ``t -> R`` limit is the limit polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .cubic import CubicForm, FrameTransform, StandardFormPoly, assemble_standard, evaluate, monomials, pullback
from .errors import ExtrapolationUnstable, NoClosedHorizon, OutsideDomain
from .hyperbolicity import MAX_BOUND
from .standard_form import CONTINUOUS, GaugePolicy, standard_form_at

ROOT_SNAP = 1e-12
MIN_GAP = 1e-6
COND_LIMIT = 1e10
LIMIT_TOL = 1e-4


# -- beta and the horizon ------------------------------------------------------


@dataclass(frozen=True)
class BetaCubic:
    """``beta(r) = 1 - r^2 + a r^3``, the value of ``h`` along the ray ``(1, r v)``."""

    a: float

    def __call__(self, r):
        return 1.0 - r * r + self.a * r**3

    def derivative(self, r):
        return -2.0 * r + 3.0 * self.a * r * r

    def roots(self):
        return beta_roots(self.a)

    def horizon(self):
        return horizon_R(self.a)


def beta_roots(a: float):
    """Real zeros of ``1 - r^2 + a r^3``, sorted, each polished by Newton."""
    if a == 0.0:
        return [-1.0, 1.0]
    beta = BetaCubic(a)
    out = []
    for z in np.roots([a, -1.0, 0.0, 1.0]):
        if abs(z.imag) > 1e-7 * max(1.0, abs(z)):
            continue
        r = float(z.real)
        for _ in range(8):
            d = beta.derivative(r)
            if d == 0.0:
                break
            step = beta(r) / d
            if not math.isfinite(step) or abs(beta(r - step)) > abs(beta(r)):
                break
            r -= step
        out.append(r)
    return sorted(out)


def horizon_R(a: float) -> float:
    """Smallest positive zero ``R`` of ``beta``, so that ``a = (R^2 - 1) / R^3``."""
    if abs(a) > MAX_BOUND + ROOT_SNAP:
        raise NoClosedHorizon(f"|a| = {abs(a):.6g} exceeds 2/(3*sqrt(3)); the curve does not reach a closed horizon")
    if abs(a - MAX_BOUND) <= ROOT_SNAP:
        return math.sqrt(3.0)  # double zero; root finders only get sqrt(eps) here
    if abs(a + MAX_BOUND) <= ROOT_SNAP:
        return math.sqrt(3.0) / 2.0
    s3 = math.sqrt(3.0)
    beta = BetaCubic(a)
    if beta(s3) < 0.0:
        # beta(0) = 1 and exactly one zero lies in (0, sqrt 3) when beta(sqrt 3) < 0.
        return float(brentq(beta, 0.0, s3, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200))
    pos = [r for r in beta_roots(a) if r > 0.0]
    # Otherwise a sits within rounding of the bound: near-double zero close to 2/(3a).
    return min(pos) if pos else min(2.0 / (3.0 * a), s3)


def a_from_R(R: float) -> float:
    return (R * R - 1.0) / R**3


# -- reorientation -------------------------------------------------------------


def householder_to(v):
    """Orthogonal (symmetric) map sending the last axis ``e_n`` to the unit vector ``v``."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    e = np.zeros(n)
    e[-1] = 1.0
    u = e - v
    nu = float(u @ u)
    if nu < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(u, u) / nu


def reorient(sf: StandardFormPoly, v):
    """``(P3 o O, O)`` with ``O e_n = v``; the new last-axis cube coefficient is ``P3(v)``."""
    v = _unit(v, sf.n)
    O = householder_to(v)
    return StandardFormPoly(sf.n, pullback(sf.p3, O) if sf.n > 1 else sf.p3 * float(O[0, 0] ** 3)), O


def _unit(v, n):
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"direction must have length {n}")
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("direction must be nonzero")
    return v / nv


# -- evolution -----------------------------------------------------------------


def curve_point(sf: StandardFormPoly, v, t):
    """``gamma(t)`` in ambient coordinates, in extended precision.

    ``beta`` is evaluated in extended precision so that ``h(gamma(t)) = 1``
    holds to well below double rounding even where ``beta`` is tiny.
    """
    y = np.longdouble(t) * np.asarray(v, dtype=float).astype(np.longdouble)
    beta = 1 - y @ y + np.einsum("ijk,i,j,k->", sf.p3.tensor.astype(np.longdouble), y, y, y)
    if beta <= 0:
        raise OutsideDomain(f"beta({t}) = {float(beta):.3g} <= 0; t is past the horizon")
    return beta ** (-np.longdouble(1) / 3) * np.concatenate([[np.longdouble(1)], y])


@dataclass
class EvolutionSample:
    t: float
    sf: StandardFormPoly
    transform: FrameTransform
    cond: float = 1.0


@dataclass
class EvolutionTrace:
    direction: np.ndarray
    samples: list
    R: float

    def ts(self):
        return np.array([s.t for s in self.samples])

    def coefficient_table(self):
        return np.array([s.sf.p3.vector() for s in self.samples])


def evolve(sf: StandardFormPoly, v, t_schedule, gauge: GaugePolicy = CONTINUOUS, h: CubicForm = None) -> EvolutionTrace:
    """Standard forms ``P3|_t`` at ``gamma(t)`` for every ``t`` in the schedule.

    Coordinates are the original ``y``; at ``t = 0`` the identity gauge
    returns ``P3`` itself.  Negative ``t`` walk the curve in direction ``-v``.
    """
    v = _unit(v, sf.n)
    R = horizon_R(evaluate(sf.p3, v))
    R_back = horizon_R(evaluate(sf.p3, -v))
    h = assemble_standard(sf) if h is None else h
    samples = []
    for t in t_schedule:
        t = float(t)
        if not (-R_back < t < R):
            raise OutsideDomain(f"t = {t} outside the curve's domain ({-R_back:.6g}, {R:.6g})")
        at = standard_form_at(h, curve_point(sf, v, t), gauge, pivot=0)
        samples.append(EvolutionSample(t, at.sf, at.transform, float(np.linalg.cond(at.bilinear))))
    return EvolutionTrace(v, samples, R)


# -- limits --------------------------------------------------------------------


@dataclass
class LimitExtraction:
    limit_p3: CubicForm
    extrapolation_error_estimate: float
    samples_used: int
    R: float = float("nan")
    sigma0: float = float("nan")
    per_coefficient: dict = field(default_factory=dict)

    @property
    def limit_sf(self):
        return StandardFormPoly(self.limit_p3.dim, self.limit_p3)


def sigma_extrapolate(sigmas, values, deg=4):
    """Value at ``sigma = 0`` of least-squares fits of degree ``deg`` and ``deg + 1``.

    ``values`` has one row per sample.  Returns ``(estimate, error)``
    where ``error`` is the absolute difference of the two fits at 0.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    values = np.asarray(values, dtype=float)
    scale = sigmas.max()
    s = sigmas / scale
    lo = np.polynomial.polynomial.polyfit(s, values, deg)[0]
    hi = np.polynomial.polynomial.polyfit(s, values, min(deg + 1, len(s) - 1))[0]
    return lo, np.abs(hi - lo)


def limit_schedule(R, sigma0, n_samples=7):
    sig = sigma0 * 0.5 ** np.arange(n_samples)
    return R - sig**2, sig


def horizon_limit(sample, R, sigma0_frac=0.3, n_samples=7, deg=4, max_retries=3, target=1e-8):
    """Extrapolate ``sample(ts)`` to ``t -> R`` in ``sigma = sqrt(R - t)``.

    ``sample`` maps an array of ``t`` values to ``(values, keep)`` with one
    row of values per ``t`` and a mask of the rows fit to use.  Samples sit
    at ``t_k = R - sigma0^2 4^-k``.  While the degree-4 and degree-5 fits
    disagree by more than ``target``, ``sigma0`` is halved and the fit
    repeated, as long as the closest sample stays ``MIN_GAP`` from ``R``.
    Returns the best attempt as ``(estimate, error, samples_used, sigma0)``
    or None if no attempt had enough usable samples.
    """
    sigma0 = sigma0_frac * R
    best = None
    for _ in range(max_retries + 1):
        ts, sig = limit_schedule(R, sigma0, n_samples)
        vals, keep = sample(ts)
        if keep.sum() >= deg + 2:
            est, err = sigma_extrapolate(sig[keep], np.asarray(vals)[keep], deg)
            if best is None or err.max() < best[1].max():
                best = (est, err, int(keep.sum()), sigma0)
            if err.max() <= target:
                break
        sigma0 *= 0.5
        if (sigma0 * 0.5 ** (n_samples - 1)) ** 2 < MIN_GAP:
            break
    return best


def extract_limit(
    sf: StandardFormPoly,
    v,
    gauge: GaugePolicy = CONTINUOUS,
    sigma0_frac=0.3,
    n_samples=7,
    deg=4,
    tol=LIMIT_TOL,
    max_retries=3,
    target=1e-8,
) -> LimitExtraction:
    """Limit of ``P3|_t`` as ``t -> R`` along ``v``; see :func:`horizon_limit`.

    Samples whose tangent bilinear form has condition number above
    ``COND_LIMIT`` are left out of the fit.  The result must be within
    ``tol`` by the fit-difference estimate.
    """
    v = _unit(v, sf.n)
    R = horizon_R(evaluate(sf.p3, v))
    h = assemble_standard(sf)

    def sample(ts):
        trace = evolve(sf, v, ts, gauge, h=h)
        keep = np.array([s.cond <= COND_LIMIT for s in trace.samples])
        return trace.coefficient_table(), keep

    best = horizon_limit(sample, R, sigma0_frac, n_samples, deg, max_retries, target)
    if best is None:
        raise ExtrapolationUnstable("too few well-conditioned samples near the horizon", estimates=None)
    est, err, used, s0 = best
    per = {"".join(map(str, m)): float(e) for m, e in zip(monomials(sf.n), err)}
    if err.max() > tol:
        raise ExtrapolationUnstable(
            f"extrapolation error estimate {err.max():.3g} exceeds {tol:g}", estimates=per
        )
    est = np.where(np.abs(est) < 1e-13, 0.0, est)
    return LimitExtraction(CubicForm.from_vector(sf.n, est), float(err.max()), used, R, s0, per)


# -- closed forms (dimension 1 and 2) --------------------------------------------


def dim1_coefficient(a, r):
    """``y^3`` coefficient of the standard form at ``gamma(r)`` for ``h = x^3 - x y^2 + a y^3``."""
    num = 27 * a - 18 * r + 27 * a * r**2 + (2 - 27 * a**2) * r**3
    return num / (3 * math.sqrt(3) * math.sqrt(3 - 9 * a * r + r * r) ** 3)


DIM1_LIMIT = -MAX_BOUND


@dataclass
class Dim2Intermediate:
    lam: float
    chi: float
    mu: float
    theta_vvv: float
    theta_vvw: float
    theta_vww: float
    theta_www: float

    def as_quadratic(self):
        """Symmetric matrix of ``lam v^2 + chi v w + mu w^2``."""
        return np.array([[self.lam, self.chi / 2], [self.chi / 2, self.mu]])

    def as_cubic(self):
        return CubicForm(2, {(0, 0, 0): self.theta_vvv, (0, 0, 1): self.theta_vvw, (0, 1, 1): self.theta_vww, (1, 1, 1): self.theta_www})


def dim2_p3(a, b, c, q):
    """``c v^3 + q v^2 w + b v w^2 + a w^3``; the curve runs along ``+w``."""
    return CubicForm(2, {(0, 0, 0): c, (0, 0, 1): q, (0, 1, 1): b, (1, 1, 1): a})


def dim2_intermediate_oracle(a, b, c, q, r) -> Dim2Intermediate:
    """Coefficients of ``h`` pulled back with the unnormalised gauge ``E_1 = beta^(1/6) (3 - r^2)``."""
    beta = 1 - r * r + a * r**3
    R = horizon_R(a)
    if not (0.0 <= r < R) or beta <= 0:
        raise OutsideDomain(f"r = {r} outside [0, {R:.6g})")
    sb = math.sqrt(beta)
    u = 3 - r * r
    return Dim2Intermediate(
        lam=-3 * b * b * r**4 + (1 - q * r) * u * u,
        chi=-18 * b * r * beta,
        mu=3 * (3 - 9 * a * r + r * r) * beta,
        theta_vvv=(-(b**3) * r**6 + b * r * r * u * u + c * u**3) * sb,
        theta_vvw=(3 * b * b * r**5 * (2 - 3 * a * r) - r * (2 - 3 * a * r) * u * u + q * u**3) * sb,
        theta_vww=9 * b * (3 + r * r - 3 * a * r**3) * beta * sb,
        theta_www=((2 - 27 * a * a) * r**3 + 27 * a * r * r - 18 * r + 27 * a) * beta * sb,
    )


def dim2_e1_pullback(a, b, c, q, r) -> Dim2Intermediate:
    """The same record read off an explicit matrix pullback (independent of the closed forms)."""
    from .standard_form import tangent_frame

    h = assemble_standard(StandardFormPoly(2, dim2_p3(a, b, c, q)))
    beta = 1 - r * r + a * r**3
    p = beta ** (-1.0 / 3.0) * np.array([1.0, 0.0, r])
    E1 = beta ** (1.0 / 6.0) * (3 - r * r) * np.eye(2)
    A = np.column_stack([p, tangent_frame(h, p) @ E1])
    g = pullback(h, A)
    return Dim2Intermediate(
        lam=-g.coeff(0, 1, 1),
        chi=-g.coeff(0, 1, 2),
        mu=-g.coeff(0, 2, 2),
        theta_vvv=g.coeff(1, 1, 1),
        theta_vvw=g.coeff(1, 1, 2),
        theta_vww=g.coeff(1, 2, 2),
        theta_www=g.coeff(2, 2, 2),
    )


def q_for_vanishing_lambda(b, R):
    """The ``q`` making ``lam(R) = 0``."""
    u = 3 - R * R
    return (-3 * b * b * R**4 + u * u) / (R * u * u)


def c_for_vanishing_theta(b, R):
    u = 3 - R * R
    return b * R * R * (b * b * R**4 - u * u) / u**3


def chi_ratio_limit(b, R):
    """Closed-form limit of ``chi^2 / (lam mu)`` when ``lam(R) = 0``."""
    u = 3 - R * R
    return 108 * b * b * R**4 / (3 * b * b * R**4 * (9 + R * R) + u**3)


def chi_ratio_extrapolated(b, R, c=0.0, deg=6, n_samples=13):
    """``chi^2 / (lam mu)`` at ``r -> R`` from the explicit pullback, extrapolated in ``sigma``.

    The ratio is analytic in ``sigma`` only within ``sqrt(r2 - R)``, ``r2``
    the next root of beta, which is small as ``R -> sqrt3``.  Samples are
    geometric from ``0.3`` of that radius down to ``sqrt(MIN_GAP)``.
    Returns ``(estimate, error_estimate)``.
    """
    a, q = a_from_R(R), q_for_vanishing_lambda(b, R)
    further = [r for r in beta_roots(a) if r > R * (1 + 1e-12)]
    rho = math.sqrt(min(further) - R) if further else math.inf
    s0 = min(0.3 * R, 0.3 * rho)
    s_min = math.sqrt(MIN_GAP)
    if s0 <= s_min:
        raise ExtrapolationUnstable(f"horizon too close to a double root (R = {R})", estimates=None)
    sig = s0 * (s_min / s0) ** (np.arange(n_samples) / (n_samples - 1))
    vals = []
    for s in sig:
        rec = dim2_e1_pullback(a, b, c, q, R - s * s)
        vals.append([rec.chi**2 / (rec.lam * rec.mu)])
    est, err = sigma_extrapolate(sig, np.array(vals), deg)
    return float(est[0]), float(err[0])


@dataclass
class RotationOracle:
    b: float
    R: float
    a: float
    q: float
    c: float
    f: float
    rotation: np.ndarray
    vvw: float
    www: float
    solutions: list

    @property
    def p3(self):
        return CubicForm(2, {(0, 0, 1): self.vvw, (1, 1, 1): self.www})


def b_bound(R):
    """Largest ``b`` for which the rotated limit stays closed."""
    return (3 - R * R) * math.sqrt(12 * R * R - 9) / (3 * R**3)


def rotation_matrix(f):
    return np.array([[f, -1.0], [1.0, f]]) / math.sqrt(1 + f * f)


def dim2_rotation_oracle(b, R) -> RotationOracle:
    """Rotated limit form ``P~3 = vvw v^2 w + www w^3`` and its critical solutions.

    The data ``(a, q, c)`` are tied to ``(b, R)`` so that the limit is
    singular at infinity; rotating by ``M(f)``, ``f = (3 - R^2)/(b R^3)``
    kills the ``v w^2`` term.  ``solutions`` solve ``dP~3 = (2/sqrt 3) <p, d.>``.
    """
    if not b > 0:
        raise ValueError("b must be positive")
    if not (math.sqrt(3) / 2 < R < math.sqrt(3)):
        raise ValueError("R must lie in (sqrt(3)/2, sqrt(3))")
    u = 3 - R * R
    S = 9 - 6 * R * R + R**4 + b * b * R**6
    K = 9 - 15 * R * R + 7 * R**4 + (b * b - 1) * R**6
    vvw = math.sqrt(S) / (u * R)
    www = -K * math.sqrt(S) / (u**3 * R**3)
    first = np.array([0.0, -2 * u**3 * R**3 / (3 * math.sqrt(3) * K * math.sqrt(S))])
    rad = 27 - 27 * R * R + 9 * R**4 + (3 * b * b - 1) * R**6
    sx = math.sqrt(rad) / (math.sqrt(3) * math.sqrt(S))
    sy = u * R / (math.sqrt(3) * math.sqrt(S))
    f = u / (b * R**3)
    return RotationOracle(
        b, R, a_from_R(R), q_for_vanishing_lambda(b, R), c_for_vanishing_theta(b, R), f,
        rotation_matrix(f), vvw, www, [first, np.array([sx, sy]), np.array([-sx, sy])],
    )
