"""Hyperbolicity, closedness and critical points of P3 on the unit sphere.

Closedness of the standard-form component reduces to comparing the
maximum of ``P3`` over the unit sphere with ``2/(3*sqrt(3))``; equality
means the manifold is singular at infinity.  Maxima are found by a
multi-start shifted power iteration (monotone ascent for cubic forms)
and polished by Newton on the Lagrange system
``grad P3(p) = mu * p, |p| = 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc, norm

from .cubic import CubicForm, StandardFormPoly, evaluate, gradient, hessian
from .errors import NotHyperbolic

MAX_BOUND = 2.0 / (3.0 * math.sqrt(3.0))
DEFAULT_SEED = 20240611
DEFAULT_SING_TOL = 1e-6
DEDUP_DIST = 1e-6


def hessian_signature(h: CubicForm, p, rel_zero=1e-9):
    """Signs of the eigenvalues of ``-d^2 h_p`` as ``(n_pos, n_neg, n_zero)``.

    ``p`` is a hyperbolic point iff the result is ``(dim - 1, 1, 0)``,
    i.e. ``-d^2 h_p`` has Lorentz signature.
    """
    p = np.asarray(p, dtype=float)
    if evaluate(h, p) <= 0.0:
        raise NotHyperbolic("h(p) must be positive")
    ev = np.linalg.eigvalsh(-hessian(h, p))
    thresh = rel_zero * max(np.max(np.abs(ev)), 1e-300)
    n_pos = int(np.sum(ev > thresh))
    n_neg = int(np.sum(ev < -thresh))
    return n_pos, n_neg, len(ev) - n_pos - n_neg


def is_hyperbolic(h: CubicForm, p) -> bool:
    try:
        return hessian_signature(h, p) == (h.dim - 1, 1, 0)
    except NotHyperbolic:
        return False


# -- multi-start machinery ----------------------------------------------------


def start_directions(n, count, seed=DEFAULT_SEED):
    """Deterministic unit vectors: coordinate axes, Sobol points and seeded normals."""
    pts = [np.eye(n), -np.eye(n)]
    if n > 1:
        m = max(1, int(math.ceil(math.log2(max(count // 2, 2)))))
        sob = qmc.Sobol(d=n, scramble=True, seed=seed).random_base2(m)
        pts.append(norm.ppf(np.clip(sob, 1e-12, 1 - 1e-12)))
        rng = np.random.default_rng(seed)
        pts.append(rng.standard_normal((max(count - len(pts[-1]) - 2 * n, 0), n)))
    d = np.vstack(pts)
    nrm = np.linalg.norm(d, axis=1)
    d = d[nrm > 1e-12] / nrm[nrm > 1e-12, None]
    return d


def _normalize_rows(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _power_ascent(t, x, iters=400):
    """Shifted symmetric power iteration; each step does not decrease P3."""
    shift = 2.0 * np.sqrt(np.sum(t * t)) + 1e-12
    for _ in range(iters):
        g = np.einsum("ijk,bj,bk->bi", t, x, x)
        x_new = _normalize_rows(g + shift * x)
        if np.max(np.abs(x_new - x)) < 1e-15:
            x = x_new
            break
        x = x_new
    return x


def _batched_solve(J, F):
    try:
        return np.linalg.solve(J, F[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("bij,bj->bi", np.linalg.pinv(J), F)


def _lagrange_newton(t, x, iters=60):
    """Newton on ``3 T(x,x,.) - mu x = 0, (1 - |x|^2)/2 = 0`` from each row of ``x``."""
    b, n = x.shape
    mu = 3.0 * np.einsum("ijk,bi,bj,bk->b", t, x, x, x)
    eye = np.eye(n)
    with np.errstate(over="ignore", invalid="ignore"):
        x, mu = _newton_loop(t, x, mu, eye, iters)
        ok = np.all(np.isfinite(x), axis=1) & (np.abs(np.linalg.norm(x, axis=1) - 1.0) < 1e-6)
    x = x[ok]
    return _normalize_rows(x) if len(x) else x


def _newton_loop(t, x, mu, eye, iters):
    b, n = x.shape
    for _ in range(iters):
        g = 3.0 * np.einsum("ijk,bj,bk->bi", t, x, x)
        H = 6.0 * np.einsum("ijk,bk->bij", t, x)
        F = np.concatenate([g - mu[:, None] * x, 0.5 * (1.0 - np.sum(x * x, axis=1))[:, None]], axis=1)
        J = np.zeros((b, n + 1, n + 1))
        J[:, :n, :n] = H - mu[:, None, None] * eye
        J[:, :n, n] = -x
        J[:, n, :n] = -x
        step = _batched_solve(J, -F)
        step = np.where(np.isfinite(step), step, 0.0)
        x = x + step[:, :n]
        mu = mu + step[:, n]
        if np.max(np.abs(step)) < 1e-15:
            break
    return x, mu


def lagrange_residual(p3: CubicForm, p):
    """``|dP3|_p - 3 P3(p) p|`` for a unit vector ``p``."""
    p = np.asarray(p, dtype=float)
    return float(np.linalg.norm(gradient(p3, p) - 3.0 * evaluate(p3, p) * p))


def dedup_points(points, dist=DEDUP_DIST):
    """Cluster points closer than ``dist``; keep one representative per cluster.

    Output is sorted lexicographically so it does not depend on start order.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) == 0:
        return []
    pts = np.round(pts, 14)
    pts = pts[np.lexsort(pts.T[::-1])]
    kept = np.empty((0, pts.shape[1]))
    for p in pts:
        if len(kept) == 0 or np.min(np.sum((kept - p) ** 2, axis=1)) > dist * dist:
            kept = np.vstack([kept, p])
    return list(kept)


@dataclass
class CriticalPoint:
    direction: np.ndarray
    value: float
    residual: float


@dataclass
class SphereMaxResult:
    max_value: float
    argmax_points: list
    critical_points: list = field(default_factory=list)
    starts_used: int = 0


def sphere_critical_points(p3: CubicForm, seed=DEFAULT_SEED, n_starts=None, ascent=True):
    """Critical points of ``P3`` restricted to the unit sphere.

    Newton runs from every start; with ``ascent`` the starts are also
    pushed uphill first so that every local maximum basin is sampled.
    """
    n = p3.dim
    n_starts = n_starts or max(64 * n, 128)
    t = p3.tensor
    starts = start_directions(n, n_starts, seed)
    if not np.any(t):
        pts = [CriticalPoint(s, 0.0, 0.0) for s in np.eye(n)]
        return pts, len(starts)
    cands = [_lagrange_newton(t, starts.copy())]
    if ascent:
        up = _power_ascent(t, starts.copy())
        cands.append(up)
        cands.append(_lagrange_newton(t, up))
    allpts = np.vstack([c for c in cands if len(c)])
    res = np.linalg.norm(
        3.0 * np.einsum("ijk,bj,bk->bi", t, allpts, allpts)
        - 3.0 * np.einsum("ijk,bi,bj,bk->b", t, allpts, allpts, allpts)[:, None] * allpts,
        axis=1,
    )
    allpts = allpts[res < 1e-8]
    out = []
    for d in dedup_points(allpts):
        out.append(CriticalPoint(d, float(evaluate(p3, d)), lagrange_residual(p3, d)))
    return out, len(starts)


def sphere_max(p3: CubicForm, seed=DEFAULT_SEED, n_starts=None) -> SphereMaxResult:
    """Maximum of ``P3`` over the unit sphere, with argmax points."""
    crit, used = sphere_critical_points(p3, seed=seed, n_starts=n_starts)
    if not crit:
        # Newton failed everywhere; fall back on the ascent iterates.
        up = _power_ascent(p3.tensor, start_directions(p3.dim, n_starts or 64 * p3.dim, seed))
        crit = [CriticalPoint(d, float(evaluate(p3, d)), lagrange_residual(p3, d)) for d in dedup_points(up)]
    best = max(c.value for c in crit)
    tol = 1e-9 * max(1.0, abs(best))
    argmax = [c.direction for c in crit if c.value >= best - tol]
    return SphereMaxResult(best, argmax, crit, used)


def sphere_min(p3: CubicForm, seed=DEFAULT_SEED, n_starts=None) -> SphereMaxResult:
    """Minimum of ``P3`` over the unit sphere (reported as a maximum of ``-P3``)."""
    res = sphere_max(-p3, seed=seed, n_starts=n_starts)
    return res


class Status(str, enum.Enum):
    CLOSED_REGULAR = "CLOSED_REGULAR"
    CLOSED_SINGULAR_AT_INFINITY = "CLOSED_SINGULAR_AT_INFINITY"
    NOT_CLOSED = "NOT_CLOSED"

    @property
    def is_closed(self):
        return self is not Status.NOT_CLOSED


@dataclass
class ClosednessVerdict:
    status: Status
    max_value: float
    margin: float
    argmax: list = field(default_factory=list)


def closedness(sf: StandardFormPoly, sing_tol=DEFAULT_SING_TOL, seed=DEFAULT_SEED) -> ClosednessVerdict:
    res = sphere_max(sf.p3, seed=seed)
    margin = res.max_value - MAX_BOUND
    if abs(margin) <= sing_tol:
        status = Status.CLOSED_SINGULAR_AT_INFINITY
    elif margin < 0:
        status = Status.CLOSED_REGULAR
    else:
        status = Status.NOT_CLOSED
    return ClosednessVerdict(status, res.max_value, margin, res.argmax_points)


def critical_points_with_norms(p3: CubicForm, level=MAX_BOUND, seed=DEFAULT_SEED, n_starts=None):
    """Nonzero real solutions of ``dP3|_p = 3 * level * p`` with their norms.

    Every solution is ``p = (level / P3(d)) d`` for a sphere critical
    point ``d`` with ``P3(d) > 0`` (Euler's identity fixes the scale), so
    the sphere search enumerates them; each is then polished by Newton on
    the unscaled system.  A solution of norm below 1 means the sphere
    maximum exceeds ``level``.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    crit, _ = sphere_critical_points(p3, seed=seed, n_starts=n_starts or max(256 * p3.dim, 512))
    scale = max(1.0, max((abs(c.value) for c in crit), default=1.0))
    sols = []
    for c in crit:
        if c.value > 1e-10 * scale:
            sols.append(_polish_solution(p3, (level / c.value) * c.direction, level))
    sols = [s for s in sols if s is not None]
    out = []
    for s in sols:
        if all(np.linalg.norm(s - q) > DEDUP_DIST * max(1.0, np.linalg.norm(s)) for q, _ in out):
            out.append((s, float(np.linalg.norm(s))))
    out.sort(key=lambda r: tuple(r[0]))
    return out


def _polish_solution(p3, p, level, iters=60):
    # Degenerate (double) roots converge only linearly, hence the fixed budget.
    for _ in range(iters):
        F = gradient(p3, p) - 3.0 * level * p
        J = hessian(p3, p) - 3.0 * level * np.eye(len(p))
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        p = p + step
        if np.linalg.norm(step) <= 1e-16 * max(1.0, np.linalg.norm(p)):
            break
    if np.linalg.norm(gradient(p3, p) - 3.0 * level * p) > 1e-8 * max(1.0, np.linalg.norm(p)) ** 2:
        return None
    return p
