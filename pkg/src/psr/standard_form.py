"""Moving the reference point: the transformation A(p) and the standard form at p.

For a hyperbolic point ``p`` with ``h(p) = 1`` the matrix

    A(p) = [ p | T E ]

has the tangent frame ``T`` (a basis of ``ker dh_p``) in its last ``n``
columns, post-multiplied by any ``E`` with ``E^T B E = 1`` where ``B``
is ``-1/2 d^2 h_p`` restricted to the frame.  Then ``A(p)^* h`` is in
standard form and ``A(p) e_0 = p``.  ``E`` is unique up to ``E -> E O``
with ``O`` orthogonal; a :class:`GaugePolicy` fixes that freedom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cubic import (
    STANDARD_FORM_TOL,
    CubicForm,
    FrameTransform,
    StandardFormPoly,
    evaluate,
    extract_standard,
    gradient,
    hessian,
)
from .errors import ChartError, NotHyperbolic

POSDEF_TOL = 1e-10
CHART_TOL = 1e-8


@dataclass(frozen=True)
class GaugePolicy:
    """How to pick ``E`` among all ``B^{-1/2} O``.

    ``fixed``: eigenvectors of ``B`` as columns, eigenvalues descending,
    each column's first nonzero entry positive.

    ``continuous``: the member closest (Frobenius) to ``reference``,
    i.e. ``B^{-1/2} polar(B^{-1/2} reference)``.  With the identity as
    reference this is the symmetric choice ``B^{-1/2}``, which depends
    smoothly on the point and equals the identity wherever the frame is
    already orthonormal for ``B``.
    """

    kind: str = "continuous"
    reference: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("fixed", "continuous"):
            raise ValueError(f"unknown gauge kind {self.kind!r}")


FIXED = GaugePolicy("fixed")
CONTINUOUS = GaugePolicy("continuous")


def continuous(reference=None) -> GaugePolicy:
    return GaugePolicy("continuous", None if reference is None else np.asarray(reference, dtype=float))


def choose_pivot(h: CubicForm, p) -> int:
    """Coordinate to solve for in the tangent frame: ``x`` unless ``d_x h`` (nearly) vanishes."""
    g = gradient(h, p)
    scale = np.linalg.norm(g)
    if scale == 0.0:
        raise ChartError("dh vanishes at p")
    if abs(g[0]) > CHART_TOL * scale:
        return 0
    return int(np.argmax(np.abs(g)))


def tangent_frame(h: CubicForm, p, pivot: int = 0, grad=None):
    """Basis of ``ker dh_p`` as the columns of an ``(n+1) x n`` matrix.

    With ``pivot = 0`` column ``i`` is ``(-(d_{y_i} h / d_x h)|_p, e_i)``.
    Another pivot solves for that coordinate instead, which amounts to a
    coordinate permutation done before building the frame.
    """
    g = gradient(h, np.asarray(p, dtype=float)) if grad is None else grad
    scale = np.linalg.norm(np.asarray(g, dtype=float))
    if scale == 0.0 or abs(g[pivot]) <= CHART_TOL * scale:
        raise ChartError(f"d h / d p_{pivot} vanishes at p; choose another chart")
    others = [i for i in range(h.dim) if i != pivot]
    T = np.zeros((h.dim, h.dim - 1), dtype=np.asarray(g).dtype)
    for col, i in enumerate(others):
        T[i, col] = 1.0
        T[pivot, col] = -g[i] / g[pivot]
    return T


def tangent_bilinear_form(h: CubicForm, p, frame=None):
    """Matrix of ``-1/2 d^2 h_p`` on the tangent frame; positive definite at hyperbolic points."""
    T = tangent_frame(h, p) if frame is None else frame
    B = -0.5 * T.T @ hessian(h, p) @ T
    B = 0.5 * (B + B.T)
    ev = np.linalg.eigvalsh(B)
    if ev.size and ev[0] <= POSDEF_TOL:
        raise NotHyperbolic(f"tangent form not positive definite (smallest eigenvalue {ev[0]:.3g})")
    return B


eq13_bilinear = tangent_bilinear_form


def _fix_signs(V):
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            V[:, j] = -col
    return V


LD = np.longdouble


def _jacobi_refine(M, V, sweeps=4):
    """Cyclic Jacobi sweeps on the nearly diagonal ``M = V^T B V`` (extended precision)."""
    n = M.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                if M[i, j] == 0:
                    continue
                off = max(off, abs(float(M[i, j])) / np.sqrt(abs(float(M[i, i] * M[j, j]))))
                theta = (M[j, j] - M[i, i]) / (2 * M[i, j])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta != 0 else LD(1)
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                G = np.eye(n, dtype=LD)
                G[i, i] = G[j, j] = c
                G[i, j], G[j, i] = s, -s
                M = G.T @ M @ G
                V = V @ G
        if off < 1e-21:
            break
    return np.diagonal(M).copy(), V


def eigh_extended(B):
    """Eigen-decomposition of a symmetric positive matrix in extended precision.

    A double-precision ``eigh`` is refined by Jacobi sweeps, so small
    eigenvalues keep their relative accuracy when ``B`` is ill-conditioned.
    """
    B = np.asarray(B, dtype=LD)
    lam, V = np.linalg.eigh(np.asarray(B, dtype=float))
    V = V.astype(LD)
    n = V.shape[0]
    V = V @ (1.5 * np.eye(n, dtype=LD) - 0.5 * V.T @ V)
    lam, V = _jacobi_refine(V.T @ B @ V, V)
    order = np.argsort(lam.astype(float), kind="stable")
    return lam[order], V[:, order]


def gauge_matrix(B, gauge: GaugePolicy = CONTINUOUS):
    """An ``E`` with ``E^T B E = 1`` selected by ``gauge`` (extended precision)."""
    lam, V = eigh_extended(B)
    if gauge.kind == "fixed":
        order = np.argsort(-lam.astype(float), kind="stable")
        lam, V = lam[order], V[:, order]
        V = _fix_signs(V)
        return V / np.sqrt(lam)
    inv_sqrt = (V / np.sqrt(lam)) @ V.T
    if gauge.reference is None:
        return inv_sqrt
    U, _, Wt = np.linalg.svd(np.asarray(inv_sqrt @ gauge.reference.astype(LD), dtype=float))
    Q = (U @ Wt).astype(LD)
    Q = Q @ (1.5 * np.eye(len(Q), dtype=LD) - 0.5 * Q.T @ Q)
    return inv_sqrt @ Q


def shape_tolerance(h: CubicForm, A):
    """Tolerance for the standard-form shape check after pulling back by ``A``.

    The pulled-back coefficients are sums of terms of size up to
    ``|h| |A|^3``, so near the cone boundary (where ``A`` blows up) the
    rounding floor exceeds the nominal 1e-9 and has to be allowed for.
    """
    scale = np.max(np.abs(h.vector()), initial=0.0) * np.linalg.norm(A, 2) ** 3
    return STANDARD_FORM_TOL + 64.0 * np.finfo(float).eps * scale


@dataclass(frozen=True, eq=False)
class StandardFormAtPoint:
    transform: FrameTransform
    sf: StandardFormPoly
    base_point: np.ndarray
    pivot: int = 0
    bilinear: np.ndarray | None = None


def _ambient_ld(h: CubicForm, p):
    t = h.tensor.astype(LD)
    return t, np.einsum("ijk,i,j,k->", t, p, p, p), 3 * np.einsum("ijk,j,k->i", t, p, p), 6 * np.einsum("ijk,k->ij", t, p)


def standard_form_at(h: CubicForm, p, gauge: GaugePolicy = CONTINUOUS, pivot=None, check=True):
    """Pull ``h`` back to standard form with reference point ``p``.

    Frame, bilinear form, gauge and pullback are computed in extended
    precision: near the cone boundary ``A(p)`` blows up and double
    precision loses digits in proportion.
    """
    p = np.asarray(p, dtype=LD)
    t, hp, g, Hs = _ambient_ld(h, p)
    # Allow for cancellation in h(p) itself near the cone boundary.
    size = evaluate(CubicForm(h.dim, {k: abs(c) for k, c in h.coeffs.items()}), np.abs(p.astype(float)))
    if abs(float(hp) - 1.0) > 1e-9 + 64.0 * np.finfo(float).eps * size:
        raise ValueError(f"h(p) = {float(hp)!r}; the base point must lie on h = 1")
    if pivot is None:
        pivot = choose_pivot(h, p.astype(float))
    T = tangent_frame(h, p, pivot, grad=g)
    B = -0.5 * T.T @ Hs @ T
    B = 0.5 * (B + B.T)
    ev = np.linalg.eigvalsh(B.astype(float))
    if ev.size and ev[0] <= POSDEF_TOL:
        raise NotHyperbolic(f"tangent form not positive definite (smallest eigenvalue {ev[0]:.3g})")
    E = gauge_matrix(B, gauge)
    A = np.column_stack([p, T @ E])
    pulled = CubicForm.from_tensor(np.einsum("abc,ai,bj,ck->ijk", t, A, A, A).astype(float))
    Ad = A.astype(float)
    transform = FrameTransform(Ad)
    sf = extract_standard(pulled, tol=shape_tolerance(h, Ad) if check else np.inf)
    return StandardFormAtPoint(transform, sf, p.astype(float), pivot, B.astype(float))
