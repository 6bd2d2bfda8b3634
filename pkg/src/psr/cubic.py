"""Cubic homogeneous polynomials stored as monomial coefficients.

A cubic in ``N`` variables is kept as a map from nondecreasing index
triples ``(i, j, k)`` to the coefficient of the monomial
``p_i p_j p_k``.  The associated fully symmetric trilinear form is
materialised lazily as a dense ``N x N x N`` tensor, which is what all
the numerics run on.

For the ambient space the coordinate with index 0 is ``x`` and the
coordinates ``1..n`` are ``y_1..y_n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, NotStandardForm, SingularTransform

ABS_FLOOR = 1e-12
STANDARD_FORM_TOL = 1e-9


def isclose(a, b, rtol=1e-9):
    """Relative comparison with an absolute floor of 1e-12."""
    return abs(a - b) <= rtol * max(abs(a), abs(b)) + ABS_FLOOR


def _multiplicity(idx):
    """Number of distinct orderings of an index triple."""
    i, j, k = idx
    if i == j == k:
        return 1
    if i == j or j == k or i == k:
        return 3
    return 6


def monomials(dim):
    """All nondecreasing index triples for ``dim`` variables, in lexicographic order."""
    return list(itertools.combinations_with_replacement(range(dim), 3))


@dataclass(frozen=True, eq=False)
class CubicForm:
    dim: int
    coeffs: Mapping[tuple, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        clean = {}
        for key, val in dict(self.coeffs).items():
            idx = tuple(sorted(int(i) for i in key))
            if len(idx) != 3 or idx[0] < 0 or idx[2] >= self.dim:
                raise DimensionMismatch(f"monomial {key} out of range for dim {self.dim}")
            val = float(val)
            if not math.isfinite(val):
                raise ValueError(f"non-finite coefficient at {key}")
            clean[idx] = clean.get(idx, 0.0) + val
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, dim):
        return cls(dim, {})

    @classmethod
    def from_tensor(cls, tensor):
        """Build from a trilinear coefficient tensor (symmetrised first)."""
        t = np.asarray(tensor, dtype=float)
        dim = t.shape[0]
        if t.shape != (dim, dim, dim):
            raise DimensionMismatch(f"expected a cubic tensor, got shape {t.shape}")
        sym = sum(np.transpose(t, perm) for perm in itertools.permutations(range(3))) / 6.0
        coeffs = {idx: _multiplicity(idx) * sym[idx] for idx in monomials(dim)}
        return cls(dim, coeffs)

    @classmethod
    def from_vector(cls, dim, vec):
        vec = np.asarray(vec, dtype=float)
        mons = monomials(dim)
        if vec.shape != (len(mons),):
            raise DimensionMismatch("coefficient vector has wrong length")
        return cls(dim, dict(zip(mons, vec)))

    @cached_property
    def tensor(self):
        t = np.zeros((self.dim,) * 3)
        for idx, c in self.coeffs.items():
            val = c / _multiplicity(idx)
            for perm in set(itertools.permutations(idx)):
                t[perm] = val
        t.setflags(write=False)
        return t

    def vector(self):
        """Coefficients in the fixed ``monomials(dim)`` order."""
        return np.array([self.coeffs.get(m, 0.0) for m in monomials(self.dim)])

    def coeff(self, *idx):
        return self.coeffs.get(tuple(sorted(idx)), 0.0)

    def __call__(self, p):
        return evaluate(self, p)

    def __add__(self, other):
        _check_same_dim(self, other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return CubicForm(self.dim, out)

    def __mul__(self, scalar):
        return CubicForm(self.dim, {k: scalar * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def __sub__(self, other):
        return self + (-other)

    def max_abs_diff(self, other):
        _check_same_dim(self, other)
        return float(np.max(np.abs(self.vector() - other.vector()), initial=0.0))

    def __repr__(self):
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in sorted(self.coeffs.items()) if v != 0.0)
        return f"CubicForm(dim={self.dim}, {{{terms}}})"


def _check_same_dim(a, b):
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimension {a.dim} != {b.dim}")


def _as_point(h, p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != h.dim:
        raise DimensionMismatch(f"point of length {p.shape[-1]} for a cubic in {h.dim} variables")
    return p


def evaluate(h: CubicForm, p) -> float:
    """h(p) by direct monomial evaluation.  Accepts a stack of points."""
    p = _as_point(h, p)
    out = np.zeros(p.shape[:-1])
    for (i, j, k), c in h.coeffs.items():
        out = out + c * p[..., i] * p[..., j] * p[..., k]
    return float(out) if out.ndim == 0 else out


def polarize(h: CubicForm, p, q, r) -> float:
    p, q, r = (_as_point(h, v) for v in (p, q, r))
    return float(np.einsum("ijk,i,j,k->", h.tensor, p, q, r))


def gradient(h: CubicForm, p):
    p = _as_point(h, p)
    return 3.0 * np.einsum("ijk,...j,...k->...i", h.tensor, p, p)


def hessian(h: CubicForm, p):
    p = _as_point(h, p)
    return 6.0 * np.einsum("ijk,...k->...ij", h.tensor, p)


@dataclass(frozen=True, eq=False)
class FrameTransform:
    """An invertible linear map of the ambient space with its inverse."""

    matrix: np.ndarray
    inverse: np.ndarray = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch("frame transform must be square")
        if self.inverse is None:
            try:
                inv = np.linalg.inv(m)
            except np.linalg.LinAlgError as exc:
                raise SingularTransform("matrix is singular") from exc
            if not np.all(np.isfinite(inv)) or np.linalg.cond(m) > 1e14:
                raise SingularTransform("matrix is numerically singular")
        else:
            inv = np.array(self.inverse, dtype=float)
        m.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "inverse", inv)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return FrameTransform(self.matrix @ other.matrix, other.inverse @ self.inverse)

    def apply(self, p):
        return self.matrix @ np.asarray(p, dtype=float)


def _matrix_of(T):
    return T.matrix if isinstance(T, FrameTransform) else np.asarray(T, dtype=float)


def pullback(h: CubicForm, T) -> CubicForm:
    """The cubic ``p -> h(T p)``.

    ``T`` may be a :class:`FrameTransform` (square, invertible) or any
    ``N x M`` matrix, in which case the result lives in ``M`` variables;
    the non-square case is what restrictions to subspaces use.
    """
    if not isinstance(T, FrameTransform):
        M = np.asarray(T, dtype=float)
        if M.ndim != 2:
            raise DimensionMismatch("pullback needs a matrix")
        if M.shape[0] == M.shape[1]:
            T = FrameTransform(M)
    M = _matrix_of(T)
    if M.shape[0] != h.dim:
        raise DimensionMismatch(f"map with {M.shape[0]} rows for a cubic in {h.dim} variables")
    t = np.einsum("abc,ai,bj,ck->ijk", h.tensor, M, M, M, optimize=True)
    return CubicForm.from_tensor(t)


@dataclass(frozen=True, eq=False)
class StandardFormPoly:
    """``x^3 - x<y,y> + P3(y)`` with ``P3`` a cubic in ``n`` variables."""

    n: int
    p3: CubicForm

    def __post_init__(self):
        if self.p3.dim != self.n:
            raise DimensionMismatch(f"P3 in {self.p3.dim} variables for n = {self.n}")

    @classmethod
    def from_p3(cls, p3: CubicForm):
        return cls(p3.dim, p3)

    def ambient(self) -> CubicForm:
        return assemble_standard(self)

    def beta(self, direction, r):
        """Value of h along the ray (1, r*direction)."""
        return 1.0 - r * r * float(np.dot(direction, direction)) + r**3 * evaluate(self.p3, direction)


def assemble_standard(sf: StandardFormPoly) -> CubicForm:
    coeffs = {(0, 0, 0): 1.0}
    for i in range(1, sf.n + 1):
        coeffs[(0, i, i)] = -1.0
    for (i, j, k), c in sf.p3.coeffs.items():
        coeffs[(i + 1, j + 1, k + 1)] = c
    return CubicForm(sf.n + 1, coeffs)


def standard_form_deviation(h: CubicForm):
    """Worst deviation from the ``x^3 - x<y,y> + ...`` coefficient shape.

    Returns ``(deviation, monomial)``.
    """
    worst, where = 0.0, None
    n = h.dim - 1
    expected = {(0, 0, 0): 1.0}
    for i in range(1, n + 1):
        expected[(0, 0, i)] = 0.0
        for j in range(i, n + 1):
            expected[(0, i, j)] = -1.0 if i == j else 0.0
    for idx, target in expected.items():
        dev = abs(h.coeffs.get(idx, 0.0) - target)
        if dev > worst:
            worst, where = dev, idx
    return worst, where


def extract_standard(h: CubicForm, tol: float = STANDARD_FORM_TOL) -> StandardFormPoly:
    if h.dim < 2:
        raise DimensionMismatch("a standard form needs at least one y-variable")
    dev, where = standard_form_deviation(h)
    if dev > tol:
        raise NotStandardForm(
            f"coefficient of monomial {where} deviates by {dev:.3g} from the standard shape",
            monomial=list(where),
            deviation=dev,
        )
    n = h.dim - 1
    p3 = {
        (i - 1, j - 1, k - 1): c for (i, j, k), c in h.coeffs.items() if i >= 1
    }
    return StandardFormPoly(n, CubicForm(n, p3))


# -- JSON schema ---------------------------------------------------------------
# {"n": int, "terms": [{"monomial": [e_x, e_y1, ..., e_yn], "coeff": float}]}


def _exponents(idx, dim):
    e = [0] * dim
    for i in idx:
        e[i] += 1
    return e


def to_json_dict(h: CubicForm) -> dict:
    terms = [
        {"monomial": _exponents(idx, h.dim), "coeff": float(c)}
        for idx, c in sorted(h.coeffs.items())
        if c != 0.0
    ]
    return {"n": h.dim - 1, "terms": terms}


def from_json_dict(doc) -> CubicForm:
    from .errors import SchemaError

    if not isinstance(doc, dict) or "n" not in doc or "terms" not in doc:
        raise SchemaError("polynomial JSON needs keys 'n' and 'terms'")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("'n' must be a positive integer")
    if not isinstance(doc["terms"], list):
        raise SchemaError("'terms' must be a list")
    coeffs = {}
    for t in doc["terms"]:
        if not isinstance(t, dict) or "monomial" not in t or "coeff" not in t:
            raise SchemaError("each term needs 'monomial' and 'coeff'")
        mon, c = t["monomial"], t["coeff"]
        if (
            not isinstance(mon, list)
            or len(mon) != n + 1
            or any(not isinstance(e, int) or isinstance(e, bool) or e < 0 for e in mon)
        ):
            raise SchemaError(f"monomial {mon!r} must list n+1 nonnegative integer exponents")
        if sum(mon) != 3:
            raise SchemaError(f"monomial {mon!r} is not cubic")
        if not isinstance(c, (int, float)) or isinstance(c, bool) or not math.isfinite(c):
            raise SchemaError(f"coefficient {c!r} is not a finite number")
        idx = tuple(i for i, e in enumerate(mon) for _ in range(e))
        coeffs[idx] = coeffs.get(idx, 0.0) + float(c)
    return CubicForm(n + 1, coeffs)
