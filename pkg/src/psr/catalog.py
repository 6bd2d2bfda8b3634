"""Catalog of limit polynomials and classification of extracted limits.

Every limit polynomial is, after an orthogonal change of the ``y``
coordinates, of the form

    sum_i s_i <u, F_i u> + (2/sqrt3 <s,s> - 1/sqrt3 <u,u>) w - 2/(3 sqrt3) w^3

with ``y = (s_1..s_m, u_1..u_k, w)``, ``m + k = n - 1`` and symmetric
``k x k`` matrices ``F_i`` such that every unit combination ``sum c_i F_i``
has its spectrum in ``[-1, 1]``.  Dimension one has only ``-2/(3 sqrt3) w^3``;
in dimension two ``m = 0`` and ``m = 1`` are the two surfaces (hyperbolic
plane and flat plane).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .cubic import CubicForm, StandardFormPoly, gradient, hessian, monomials, pullback
from .errors import DimensionMismatch, NoCatalogMatch
from .evolution import householder_to
from .hyperbolicity import DEFAULT_SEED, MAX_BOUND, sphere_critical_points, start_directions

SQ3 = math.sqrt(3.0)
S_EIG = 2.0 / SQ3
U_EIG = -1.0 / SQ3
CLASS_TOL = 1e-4
F_BOUND_TOL = 1e-8


class Variant(str, enum.Enum):
    DIM1 = "DIM1"
    DIM2_A = "DIM2_A"
    DIM2_B = "DIM2_B"
    DIM_GE3 = "DIM_GE3"


@dataclass(frozen=True, eq=False)
class LimitForm:
    """A catalog entry.  ``F`` holds ``m`` symmetric ``(n-1-m)``-square matrices."""

    variant: Variant
    n: int
    m: int = 0
    F: tuple = ()

    def __post_init__(self):
        F = tuple(np.asarray(f, dtype=float).reshape(self.n - 1 - self.m, self.n - 1 - self.m) for f in self.F)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "variant", Variant(self.variant))
        if not 0 <= self.m <= self.n - 1:
            raise DimensionMismatch(f"m = {self.m} outside [0, {self.n - 1}]")
        if self.m and len(F) != self.m and self.n - 1 - self.m > 0:
            raise DimensionMismatch(f"need {self.m} matrices F_i, got {len(F)}")
        if self.variant != variant_for(self.n, self.m):
            raise DimensionMismatch(f"variant {self.variant.value} inconsistent with n = {self.n}, m = {self.m}")

    @classmethod
    def make(cls, n, m=0, F=()):
        return cls(variant_for(n, m), n, m, tuple(F))

    def to_dict(self):
        return {
            "variant": self.variant.value,
            "n": self.n,
            "m": self.m,
            "F": [f.tolist() for f in self.F],
        }


def variant_for(n, m):
    if n == 1:
        return Variant.DIM1
    if n == 2:
        return Variant.DIM2_A if m == 0 else Variant.DIM2_B
    return Variant.DIM_GE3


# -- the eigenvalue bound on F ---------------------------------------------------


def _spectral_radius(M):
    ev, V = np.linalg.eigh(M)
    j = int(np.argmax(np.abs(ev)))
    return abs(ev[j]), V[:, j]


def validate_F(F, n_starts=4096, seed=DEFAULT_SEED, iters=200):
    """Supremum over unit ``c`` of the spectral radius of ``sum c_i F_i``.

    The supremum equals ``max_{|x|=1} |(x^T F_i x)_i|``; alternating
    ``x <- top eigenvector``, ``c <- g(x)/|g(x)|`` never decreases it, so
    every grid start is pushed uphill and the best value kept.
    Returns ``{"max_abs_eigenvalue": ..., "witness_c": ...}``.
    """
    F = [np.asarray(f, dtype=float) for f in F]
    m = len(F)
    if m == 0 or F[0].size == 0:
        return {"max_abs_eigenvalue": 0.0, "witness_c": np.zeros(m)}
    k = F[0].shape[0]
    for f in F:
        if f.shape != (k, k):
            raise DimensionMismatch("all F_i must have the same square shape")
    stack = np.stack([0.5 * (f + f.T) for f in F])
    if m == 1:
        return {"max_abs_eigenvalue": _spectral_radius(stack[0])[0], "witness_c": np.ones(1)}
    starts = start_directions(m, n_starts, seed)
    mats = np.einsum("bi,ijk->bjk", starts, stack)
    ev = np.linalg.eigvalsh(mats)
    rho = np.max(np.abs(ev), axis=1)
    order = np.argsort(-rho, kind="stable")[:32]
    best_val, best_c = -1.0, None
    for c in starts[order]:
        val = -1.0
        for _ in range(iters):
            r, x = _spectral_radius(np.einsum("i,ijk->jk", c, stack))
            g = np.einsum("j,ijk,k->i", x, stack, x)
            ng = np.linalg.norm(g)
            if ng == 0.0:
                break
            c = g / ng
            if r <= val + 1e-15:
                val = max(val, r)
                break
            val = r
        if val > best_val:
            best_val, best_c = val, c
    return {"max_abs_eigenvalue": float(best_val), "witness_c": best_c}


# -- canonical polynomials -------------------------------------------------------


def canonical_p3(m, F, n) -> CubicForm:
    """Assemble the catalog cubic in the variables ``(s_1..s_m, u_1..u_k, w)``."""
    k = n - 1 - m
    w = n - 1
    coeffs = {(w, w, w): -2.0 / (3.0 * SQ3)}
    for i in range(m):
        coeffs[(i, i, w)] = S_EIG
    for j in range(k):
        coeffs[(m + j, m + j, w)] = U_EIG
    for i, Fi in enumerate(F):
        for j in range(k):
            for l in range(j, k):
                val = Fi[j, j] if j == l else 2.0 * Fi[j, l]
                if val != 0.0:
                    coeffs[(i, m + j, m + l)] = coeffs.get((i, m + j, m + l), 0.0) + val
    return CubicForm(n, coeffs)


def canonical_polynomial(form: LimitForm, n: int = None, check_F=True) -> StandardFormPoly:
    """The catalog polynomial of ``form`` as a standard form.

    Dimensions one and two use the ``(w)`` and ``(w, z)`` variable order of
    the classical normal forms, i.e. the distinguished axis comes first;
    for ``n >= 3`` the order is ``(s, u, w)``.
    """
    n = form.n if n is None else n
    if n != form.n:
        raise DimensionMismatch(f"form has n = {form.n}, asked for {n}")
    if check_F and form.F:
        rho = validate_F(form.F)["max_abs_eigenvalue"]
        if rho > 1.0 + F_BOUND_TOL:
            raise ValueError(f"F violates the eigenvalue bound (spectral radius {rho:.6g} > 1)")
    p3 = canonical_p3(form.m, form.F, n)
    if n == 2:
        p3 = pullback(p3, _swap2())
    return StandardFormPoly(n, p3)


def _swap2():
    return np.array([[0.0, 1.0], [1.0, 0.0]])


def _catalog_order(n):
    """Map from the ``(.., w)`` working order to the canonical variable order."""
    return _swap2() if n == 2 else np.eye(n)


# -- classification ------------------------------------------------------------------


@dataclass
class ClassificationResult:
    form: LimitForm
    aligning_map: np.ndarray
    residual: float
    w_axis: np.ndarray = None
    diagnostics: list = field(default_factory=list)

    def to_dict(self):
        d = self.form.to_dict()
        d["residual"] = self.residual
        return d


def _slice_matrix(p3: CubicForm):
    """Symmetric matrix of the ``w``-linear quadratic part (``w`` the last variable)."""
    n = p3.dim
    w = n - 1
    S = np.zeros((w, w))
    for i in range(w):
        for j in range(i, w):
            c = p3.coeff(i, j, w)
            S[i, j] = S[j, i] = c if i == j else 0.5 * c
    return S


def _w_axis_candidates(p3: CubicForm, tol, seed):
    """Unit directions with ``P3 = -2/(3 sqrt3)`` that are critical on the sphere."""
    crit, _ = sphere_critical_points(-p3, seed=seed, n_starts=max(128 * p3.dim, 256))
    cands = [c.direction for c in crit if abs(c.value - MAX_BOUND) <= tol]
    # Lexicographic order keeps the choice deterministic; near-duplicates
    # come from the slow convergence at degenerate minima.
    cands.sort(key=lambda d: tuple(np.round(d, 12)))
    return _cluster(cands, 1e-2)


def _structural_targets(m, n):
    """Monomials of the catalog form with a fixed value, and those values.

    The ``s_i u_j u_k`` monomials carry ``F`` and are left free.
    """
    w = n - 1
    targets = {}
    for mono in monomials(n):
        i, j, l = mono
        n_s = sum(1 for x in mono if x < m)
        n_w = sum(1 for x in mono if x == w)
        if n_s == 1 and n_w == 0:
            continue
        targets[mono] = 0.0
    for i in range(w):
        targets[(i, i, w)] = S_EIG if i < m else U_EIG
    targets[(w, w, w)] = -MAX_BOUND
    return targets


def _skew(params, n):
    K = np.zeros((n, n))
    K[np.triu_indices(n, 1)] = params
    return K - K.T


def _cayley(K):
    n = len(K)
    return np.linalg.solve(np.eye(n) - 0.5 * K, np.eye(n) + 0.5 * K)


def _polish_alignment(p3: CubicForm, O, m, iters=12):
    """Gauss-Newton over small rotations ``O -> O cayley(K)`` on the fixed catalog coefficients.

    Needed because the ``w``-axis is a degenerate minimum of ``P3`` on the
    sphere, so the sphere search only locates it to about the cube root
    of the gradient tolerance.
    """
    n = p3.dim
    if n == 1:
        return O
    targets = _structural_targets(m, n)
    keys = sorted(targets)
    want = np.array([targets[k] for k in keys])

    def resid(Q):
        g = pullback(p3, Q)
        return np.array([g.coeff(*k) for k in keys]) - want

    npar = n * (n - 1) // 2
    r = resid(O)
    for _ in range(iters):
        h = 1e-7
        J = np.empty((len(keys), npar))
        for c in range(npar):
            e = np.zeros(npar)
            e[c] = h
            J[:, c] = (resid(O @ _cayley(_skew(e, n))) - r) / h
        # Rotations inside the s- and u-blocks only move F; their columns
        # vanish at the solution and are cut off by rcond.
        step, *_ = np.linalg.lstsq(J, -r, rcond=1e-2)
        O_new = O @ _cayley(_skew(step, n))
        r_new = resid(O_new)
        if np.max(np.abs(r_new)) >= np.max(np.abs(r)):
            break
        O, r = O_new, r_new
        if np.max(np.abs(step)) < 1e-15:
            break
    return O


def _try_axis(p3: CubicForm, e, tol, loose):
    """Structural checks with ``e`` as the ``w``-axis.

    Returns ``(form, O, residual)`` or a failure string.  The slice
    spectrum is first read with the ``loose`` tolerance, the frame is then
    polished, and the final comparison uses ``tol``.
    """
    n = p3.dim
    H = householder_to(e)
    q = pullback(p3, H) if n > 1 else p3 * float(H[0, 0] ** 3)
    w = n - 1
    if abs(q.coeff(w, w, w) + MAX_BOUND) > loose:
        return f"w^3 coefficient {q.coeff(w, w, w):.6g} != -2/(3 sqrt3)"
    for i in range(w):
        if abs(q.coeff(i, w, w)) > loose:
            return f"y_{i} w^2 coefficient {q.coeff(i, w, w):.3g} != 0"
    if n == 1:
        residual = abs(q.coeff(0, 0, 0) + MAX_BOUND)
        if residual > tol:
            return f"w^3 coefficient off by {residual:.3g}"
        return LimitForm.make(1), H, residual
    lam, V = np.linalg.eigh(_slice_matrix(q))
    is_s = np.abs(lam - S_EIG) <= loose
    is_u = np.abs(lam - U_EIG) <= loose
    if not np.all(is_s | is_u):
        bad = lam[~(is_s | is_u)]
        return f"w-slice eigenvalue {bad[0]:.6g} not in {{2/sqrt3, -1/sqrt3}}"
    V = V[:, np.concatenate([np.flatnonzero(is_s)[::-1], np.flatnonzero(is_u)])]
    m = int(is_s.sum())
    k = w - m
    O = np.eye(n)
    O[:w, :w] = V
    O = _polish_alignment(p3, H @ O, m)
    g = pullback(p3, O)
    F = []
    for i in range(m):
        Fi = np.zeros((k, k))
        for j in range(k):
            for l in range(j, k):
                c = g.coeff(i, m + j, m + l)
                Fi[j, l] = Fi[l, j] = c if j == l else 0.5 * c
        F.append(Fi)
    form = LimitForm.make(n, m, F if k > 0 else ())
    ref = canonical_p3(m, form.F, n)
    residual = g.max_abs_diff(ref)
    if residual > tol:
        worst = max(monomials(n), key=lambda mono: abs(g.coeff(*mono) - ref.coeff(*mono)))
        return f"monomial {worst} off by {abs(g.coeff(*worst) - ref.coeff(*worst)):.3g} after alignment"
    return form, O @ _catalog_order(n), residual


def classify(limit_p3: CubicForm, tol=CLASS_TOL, seed=DEFAULT_SEED) -> ClassificationResult:
    """Match ``limit_p3`` against the catalog.

    Every candidate ``w``-axis is tried.  Forms whose ``F`` reaches the
    eigenvalue bound admit several normal forms, so among the consistent
    candidates the largest ``m`` wins, then the lexicographically first
    axis.  ``aligning_map`` is orthogonal with ``limit_p3 o aligning_map``
    equal to the catalog polynomial (in its canonical variable order) up to
    ``residual``.
    """
    if isinstance(limit_p3, StandardFormPoly):
        limit_p3 = limit_p3.p3
    loose = max(100.0 * tol, 1e-2)
    cands = _w_axis_candidates(limit_p3, loose, seed)
    if not cands:
        raise NoCatalogMatch("no unit direction with P3 = -2/(3 sqrt3); the limit is not singular at infinity")
    diags, best = [], None
    for e in cands:
        out = _try_axis(limit_p3, e, tol, loose)
        if isinstance(out, str):
            diags.append(out)
            continue
        form, O, residual = out
        if best is None or form.m > best.form.m:
            best = ClassificationResult(form, O, float(residual), e)
        if form.m == limit_p3.dim - 1:
            break
    if best is None:
        raise NoCatalogMatch(f"no candidate w-axis passed the structural checks; first failure: {diags[0]}")
    best.diagnostics = diags
    return best


def _cluster(points, dist):
    kept = []
    for p in points:
        if all(np.linalg.norm(p - q) > dist for q in kept):
            kept.append(p)
    return kept


# -- symmetries ------------------------------------------------------------------------


def first_variation_matrix(p3: CubicForm):
    """Matrix of ``e -> deltaP3(.)(e)`` with ``L = 0``, as cubic coefficient columns.

    ``deltaP3(y)(e) = -(2/3) <y,y> <y,e> + (1/4) dP3_y(d^2P3_y e)``.
    Rows follow ``monomials(n)``; the cubic in ``y`` is recovered by
    interpolation on enough sample points.
    """
    n = p3.dim
    mons = monomials(n)
    pts = start_directions(n, 4 * len(mons) + 8, seed=DEFAULT_SEED)[: max(3 * len(mons), len(mons) + 4)]
    if len(pts) < len(mons):
        rng = np.random.default_rng(DEFAULT_SEED)
        pts = np.vstack([pts, rng.standard_normal((len(mons) - len(pts) + 4, n))])
    basis = np.array([[p[i] * p[j] * p[k] for (i, j, k) in mons] for p in pts])
    cols = []
    for e in np.eye(n):
        vals = []
        for y in pts:
            g = gradient(p3, y)
            H = hessian(p3, y)
            vals.append(-(2.0 / 3.0) * (y @ y) * (y @ e) + 0.25 * g @ (H @ e))
        coef, *_ = np.linalg.lstsq(basis, np.array(vals), rcond=None)
        cols.append(coef)
    return np.column_stack(cols)


def symmetry_dim_lower_bound(sf, rel_tol=1e-8) -> int:
    """Kernel dimension of the ``L = 0`` first variation of ``P3``."""
    p3 = sf.p3 if isinstance(sf, StandardFormPoly) else sf
    M = first_variation_matrix(p3)
    sv = np.linalg.svd(M, compute_uv=False)
    scale = max(sv.max(initial=0.0), 1.0)
    return int(np.sum(sv <= rel_tol * scale))


# -- the R_{>0} x R^{n-1} action on the generic limit ------------------------------------


def generic_limit(n) -> StandardFormPoly:
    """``x^3 - x(<s,s> + w^2) - (1/sqrt3) <s,s> w - 2/(3 sqrt3) w^3``, coordinates ``(s, w)``."""
    return canonical_polynomial(LimitForm.make(n, 0)) if n != 2 else StandardFormPoly(2, canonical_p3(0, (), 2))


def group_action_matrix(lam, v):
    """Matrix of ``(lam, v)`` acting on ``(x, s, w)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    v = np.atleast_1d(np.asarray(v, dtype=float))
    k = len(v)
    vv = float(v @ v)
    r2, r4 = math.sqrt(2.0), 2.0**0.25
    c = 3.0**-1.5
    A = np.zeros((k + 2, k + 2))
    # x row
    A[0, 0] = lam * (2.0 / 3.0) + lam**-2 * (1.0 / 3.0 + vv * r2 / 3.0)
    A[0, -1] = lam * 2 * c + lam**-2 * (-2 * c + vv * r2 * c)
    A[0, 1:-1] = lam**-2 * (-(2.0**1.25) / 3.0) * v
    # s rows
    A[1:-1, 1:-1] = lam**-0.5 * np.eye(k)
    A[1:-1, 0] = lam**-0.5 * (-r4) * v
    A[1:-1, -1] = lam**-0.5 * (-r4 / SQ3) * v
    # w row
    A[-1, 0] = lam / SQ3 + lam**-2 * (-1.0 / SQ3 - vv * r2 / SQ3)
    A[-1, -1] = lam / 3.0 + lam**-2 * (2.0 / 3.0 - vv * r2 / 3.0)
    A[-1, 1:-1] = lam**-2 * (2.0**1.25 / SQ3) * v
    return A


def group_action(lam, v, p):
    return group_action_matrix(lam, v) @ np.asarray(p, dtype=float)


def group_multiply(g1, g2):
    """``(l1, v1) . (l2, v2) = (l1 l2, v1 + l1^(3/2) v2)``."""
    (l1, v1), (l2, v2) = g1, g2
    if not (l1 > 0 and l2 > 0):
        raise ValueError("lambda must be positive")
    return l1 * l2, np.asarray(v1, dtype=float) + l1**1.5 * np.asarray(v2, dtype=float)
