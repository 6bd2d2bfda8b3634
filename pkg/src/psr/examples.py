"""Named example polynomials and the closed-form critical point sets printed for them.

Every entry builds its coefficients exactly from the defining formulas;
nothing here is computed numerically.
"""

from __future__ import annotations

import math

import numpy as np

from .catalog import LimitForm, canonical_polynomial, generic_limit
from .cubic import CubicForm, StandardFormPoly
from .errors import PSRError

SQ2 = math.sqrt(2.0)
SQ3 = math.sqrt(3.0)
K = 2.0 / (3.0 * SQ3)
SQRT2_B_MAX = math.sqrt(10.0) / 12.0


class UnknownExample(PSRError):
    code = "UnknownExample"


def dim1_homogeneous() -> StandardFormPoly:
    """``x^3 - x y^2 - 2/(3 sqrt3) y^3``: the evolved coefficient is constant."""
    return StandardFormPoly(1, CubicForm(1, {(0, 0, 0): -K}))


def motivating() -> StandardFormPoly:
    """``x^3 - x(y^2 + z^2) + 2/(3 sqrt3) y^3``, variables ``(y, z)``."""
    return StandardFormPoly(2, CubicForm(2, {(0, 0, 0): K}))


def motivating_at(t) -> StandardFormPoly:
    """The closed-form standard form at the curve point ``t`` along ``+y``."""
    return StandardFormPoly(2, CubicForm(2, {(0, 0, 0): K, (0, 1, 1): -2.0 * t / 3.0}))


def ker01(n=3) -> StandardFormPoly:
    """``-2/(3 sqrt3) v_{n-1}^3 + (2/sqrt3) v_{n-1} w^2`` in ``(v_1..v_{n-1}, w)``."""
    if n < 2:
        raise ValueError("ker01 needs n >= 2")
    v, w = n - 2, n - 1
    return StandardFormPoly(n, CubicForm(n, {(v, v, v): -K, (v, w, w): 2.0 / SQ3}))


def sqrt2_family(b=0.2, n=3, m=1) -> StandardFormPoly:
    """``-2b <s,s> u_L + <s,s> w / sqrt2 + b u_L w^2 + w^3 / (2 sqrt2)`` in ``(s, u, w)``.

    ``s`` has ``m`` entries and ``u_L`` is the last ``u`` coordinate.
    """
    if not 1 <= m <= n - 2:
        raise ValueError("need 1 <= m <= n - 2")
    uL, w = n - 2, n - 1
    c = {(uL, w, w): b, (w, w, w): 1.0 / (2.0 * SQ2)}
    for i in range(m):
        c[(i, i, uL)] = -2.0 * b
        c[(i, i, w)] = 1.0 / SQ2
    return StandardFormPoly(n, CubicForm(n, c))


def kerm1(n=3, m=1) -> StandardFormPoly:
    """``-<s,s> u_L / sqrt3 - 2/(3 sqrt3) u_L^3 + <s,s> w + (2/sqrt3) u_L w^2``."""
    if not 1 <= m <= n - 2:
        raise ValueError("need 1 <= m <= n - 2")
    uL, w = n - 2, n - 1
    c = {(uL, uL, uL): -K, (uL, w, w): 2.0 / SQ3}
    for i in range(m):
        c[(i, i, uL)] = -1.0 / SQ3
        c[(i, i, w)] = 1.0
    return StandardFormPoly(n, CubicForm(n, c))


def eq110(n=3) -> StandardFormPoly:
    """The generic limit ``-(1/sqrt3) <s,s> w - 2/(3 sqrt3) w^3``."""
    return generic_limit(n)


def catalog(n=3, m=0, F=()) -> StandardFormPoly:
    F = tuple(np.asarray(f, dtype=float) for f in F)
    return canonical_polynomial(LimitForm.make(n, m, F))


REGISTRY = {
    "dim1_homogeneous": dim1_homogeneous,
    "motivating": motivating,
    "ker01": ker01,
    "sqrt2_family": sqrt2_family,
    "kerm1": kerm1,
    "eq110": eq110,
    "catalog": catalog,
}


def registry(name, **params) -> StandardFormPoly:
    try:
        build = REGISTRY[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
    return build(**params)


# -- reduced planar/3-space forms and their printed critical point sets ----------
# Each set solves dP = (2/sqrt3) <p, d.>, i.e. the critical points of P at level 2/(3 sqrt3).


def ker01_reduced(c) -> CubicForm:
    """``-2/(3 sqrt3) c^3 v^3 + (2/sqrt3) c v w^2`` on ``(v, w)``."""
    return CubicForm(2, {(0, 0, 0): -K * c**3, (0, 1, 1): 2.0 * c / SQ3})


def ker01_solutions(c):
    r = math.sqrt(c * c + 2.0) / (2.0 * c)
    return [np.array([1.0 / (2.0 * c), r]), np.array([1.0 / (2.0 * c), -r]), np.array([-1.0 / c**3, 0.0])]


def sqrt2_reduced(b) -> CubicForm:
    """``sqrt2_family`` for ``n = 3``, variables ``(s, u, w)``."""
    return sqrt2_family(b, 3, 1).p3


def sqrt2_solutions(b):
    rt = math.sqrt(64.0 * b * b + 9.0)
    pts = [np.array([1.0 / SQ3, 0.0, SQ2 / SQ3]), np.array([-1.0 / SQ3, 0.0, SQ2 / SQ3])]
    pts.append(np.array([0.0, (-3.0 + rt) ** 2 / (64.0 * SQ3 * b**3), (-3.0 + rt) / (4.0 * math.sqrt(6.0) * b * b)]))
    pts.append(np.array([0.0, (3.0 + rt) ** 2 / (64.0 * SQ3 * b**3), (-3.0 - rt) / (4.0 * math.sqrt(6.0) * b * b)]))
    return pts


def sqrt2_norm_squares(b):
    rt = math.sqrt(64.0 * b * b + 9.0)
    n1 = (-3.0 + rt) ** 2 * (32.0 * b * b + 3.0 - rt) / (2048.0 * b**6)
    n2 = (3.0 + rt) ** 2 * (32.0 * b * b + 3.0 + rt) / (2048.0 * b**6)
    return n1, n2


def kerm1_reduced(c) -> CubicForm:
    """``-(1/sqrt3) c s^2 u - 2/(3 sqrt3) c^3 u^3 + s^2 w + (2/sqrt3) c u w^2`` on ``(s, u, w)``."""
    return CubicForm(3, {(0, 0, 1): -c / SQ3, (1, 1, 1): -K * c**3, (0, 0, 2): 1.0, (1, 2, 2): 2.0 * c / SQ3})


def kerm1_solutions(c):
    """Printed solution set for ``c`` in ``[0, 1)``; ``c = 1`` has a curve of solutions."""
    side = [np.array([SQ2 / SQ3, 0.0, 1.0 / SQ3]), np.array([-SQ2 / SQ3, 0.0, 1.0 / SQ3])]
    if c == 0:
        return side
    if not 0 < c < 1:
        raise ValueError("closed-form set is listed for c in [0, 1)")
    r = math.sqrt(c * c + 2.0) / (2.0 * c)
    return [np.array([0.0, 1.0 / (2.0 * c), r]), np.array([0.0, 1.0 / (2.0 * c), -r])] + side + [
        np.array([0.0, -1.0 / c**3, 0.0])
    ]


def kerm1_curve(tau):
    """Points of the solution curve at ``c = 1``, ``tau`` in ``[0, sqrt3/2]``."""
    s = math.sqrt(max(2.0 * SQ3 * tau - 4.0 * tau * tau, 0.0))
    return [np.array([s, SQ3 * tau - 1.0, tau]), np.array([-s, SQ3 * tau - 1.0, tau])]


def hausdorff(A, B):
    A, B = np.atleast_2d(A), np.atleast_2d(B)
    D = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))
