"""The domain dom(H), the centro-affine metric in the central chart, and metric convergence.

In standard form the manifold is parametrised over

    dom(H) = connected component of 0 in { y : H(y) > 0 },   H(y) = h(1, y) = 1 - |y|^2 + P3(y),

by ``y -> H(y)^(-1/3) (1, y)``.  In this chart the centro-affine metric is

    g = -d^2 H / (3 H) + 2 dH dH / (9 H^2).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .cubic import CubicForm, StandardFormPoly, assemble_standard, evaluate, gradient, hessian
from .errors import NotConverged, OutsideDomain
from .evolution import _unit, evolve, extract_limit, horizon_R
from .hyperbolicity import DEFAULT_SEED, DEFAULT_SING_TOL, MAX_BOUND, start_directions

GRID_POINTS = 9


@dataclass
class DomBoundarySample:
    direction: np.ndarray
    radius: float


@dataclass
class MetricSample:
    base_y: np.ndarray
    g: np.ndarray


def dom_boundary_radius(sf: StandardFormPoly, q) -> float:
    """Distance from 0 to the boundary of dom(H) along the unit vector ``q``."""
    q = _unit(q, sf.n)
    a = evaluate(sf.p3, q)
    if MAX_BOUND < abs(a) <= MAX_BOUND + DEFAULT_SING_TOL:
        # Numerically extracted limits overshoot the bound by rounding.
        a = math.copysign(MAX_BOUND, a)
    return horizon_R(a)


def dom_boundary_samples(sf: StandardFormPoly, resolution: int, seed=DEFAULT_SEED):
    """Deterministic boundary samples: uniform angles for ``n = 2``, seeded directions otherwise."""
    if resolution < 1:
        raise ValueError("resolution must be positive")
    if sf.n == 2:
        th = 2.0 * math.pi * np.arange(resolution) / resolution
        dirs = np.column_stack([np.cos(th), np.sin(th)])
    elif sf.n == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        dirs = start_directions(sf.n, resolution, seed)[:resolution]
    return [DomBoundarySample(d, dom_boundary_radius(sf, d)) for d in dirs]


def dom_boundary_emit(sf: StandardFormPoly, resolution: int, seed=DEFAULT_SEED) -> str:
    """CSV text of the boundary samples.

    Columns are ``theta,radius`` for ``n = 2`` and ``q1,...,qn,radius`` otherwise.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    samples = dom_boundary_samples(sf, resolution, seed)
    if sf.n == 2:
        w.writerow(["theta", "radius"])
        for j, smp in enumerate(samples):
            w.writerow([repr(2.0 * math.pi * j / resolution), repr(smp.radius)])
    else:
        w.writerow([f"q{i + 1}" for i in range(sf.n)] + ["radius"])
        for smp in samples:
            w.writerow([repr(float(x)) for x in smp.direction] + [repr(smp.radius)])
    return buf.getvalue()


def in_dom(sf: StandardFormPoly, y) -> bool:
    y = np.asarray(y, dtype=float)
    r = np.linalg.norm(y)
    if r == 0.0:
        return True
    return r < dom_boundary_radius(sf, y / r)


def _metric_stack(p3: CubicForm, Y):
    """Local-formula metrics at each row of ``Y``, and the values of ``H``."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = p3.dim
    t = p3.tensor
    H = 1.0 - np.sum(Y * Y, axis=1) + np.einsum("ijk,bi,bj,bk->b", t, Y, Y, Y)
    dH = -2.0 * Y + 3.0 * np.einsum("ijk,bj,bk->bi", t, Y, Y)
    ddH = -2.0 * np.eye(n) + 6.0 * np.einsum("ijk,bk->bij", t, Y)
    g = -ddH / (3.0 * H[:, None, None]) + 2.0 * np.einsum("bi,bj->bij", dH, dH) / (9.0 * H[:, None, None] ** 2)
    return g, H


def centro_affine_metric(sf: StandardFormPoly, y) -> MetricSample:
    """The metric at ``y`` in the central chart, by the local formula."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape != (sf.n,):
        raise ValueError(f"point must have length {sf.n}")
    if not in_dom(sf, y):
        raise OutsideDomain(f"y = {y.tolist()} is not inside dom(H)")
    g, _ = _metric_stack(sf.p3, y[None, :])
    return MetricSample(y, g[0])


def intrinsic_metric(sf: StandardFormPoly, y):
    """The same metric from ``-(1/3) d^2 h`` evaluated on ``df`` at ``f(y) = H^(-1/3) (1, y)``."""
    y = np.asarray(y, dtype=float)
    h = assemble_standard(sf)
    n = sf.n
    H = 1.0 - y @ y + evaluate(sf.p3, y)
    if H <= 0.0:
        raise OutsideDomain("H(y) <= 0")
    dH = -2.0 * y + gradient(sf.p3, y)
    one_y = np.concatenate([[1.0], y])
    f = H ** (-1.0 / 3.0) * one_y
    df = np.zeros((n + 1, n))
    df[1:, :] = H ** (-1.0 / 3.0) * np.eye(n)
    df -= (1.0 / 3.0) * H ** (-4.0 / 3.0) * np.outer(one_y, dH)
    return -(1.0 / 3.0) * df.T @ hessian(h, f) @ df


def metric_discrepancy(G, D):
    """``|D|_G = sqrt(tr(G^-1 D G^-1 D))``, stacked over the leading axis."""
    Gi = np.linalg.inv(G)
    M = Gi @ D
    val = np.einsum("bij,bji->b", M, M)
    return np.sqrt(np.maximum(val, 0.0))


def ball_grid(n, radius, points=GRID_POINTS):
    """Tensor grid with ``points`` per axis, restricted to the closed ball."""
    ax = np.linspace(-radius, radius, points)
    G = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1).reshape(-1, n)
    return G[np.sum(G * G, axis=1) <= radius * radius * (1 + 1e-12)]


def default_schedule(R, count=17):
    """``t_k = R (1 - 2^-k)``, ``k = 0..count-1``.

    The last default sample sits ``1.5e-5 R`` before the horizon, where the
    ``O(sqrt(R - t))`` decay is past ``1e-2`` and rounding is still negligible.
    """
    return R * (1.0 - 0.5 ** np.arange(count))


@dataclass
class ConvergenceResult:
    achieved_t: float
    ts: list
    discrepancies: list
    limit_p3: CubicForm = None
    R: float = float("nan")
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "achieved_t": self.achieved_t,
            "R": self.R,
            "curve": [{"t": t, "discrepancy": d} for t, d in zip(self.ts, self.discrepancies)],
        }


def metric_convergence_check(
    sf: StandardFormPoly,
    v,
    U_radius=0.2,
    eps=1e-2,
    schedule=None,
    grid_points=GRID_POINTS,
    limit: CubicForm = None,
) -> ConvergenceResult:
    """First sampled ``t`` from which ``g_t`` stays within ``eps`` of the limit metric on a ball.

    The discrepancy at ``t`` is the maximum over a ball grid of
    ``|g_t - g_lim|`` measured in ``g_lim``.  Both metrics live in the same
    central ``y``-chart, so no alignment map is involved.
    """
    v = _unit(v, sf.n)
    if limit is None:
        lim = extract_limit(sf, v)
        limit, R = lim.limit_p3, lim.R
    else:
        R = horizon_R(evaluate(sf.p3, v))
    lim_sf = StandardFormPoly(sf.n, limit)
    if eps <= 0:
        raise ValueError("eps must be positive")
    Y = ball_grid(sf.n, U_radius, grid_points)
    inner = min(smp.radius for smp in dom_boundary_samples(lim_sf, 256))
    if U_radius >= inner:
        raise OutsideDomain(f"ball of radius {U_radius} is not inside dom of the limit (boundary at {inner:.4g})")
    G, _ = _metric_stack(limit, Y)
    ts = default_schedule(R) if schedule is None else np.asarray(schedule, dtype=float)
    trace = evolve(sf, v, ts)
    disc = []
    for smp in trace.samples:
        D, H = _metric_stack(smp.sf.p3, Y)
        if np.any(H <= 0.0):
            disc.append(math.inf)
            continue
        disc.append(float(np.max(metric_discrepancy(G, D - G))))
    good = [d < eps for d in disc]
    achieved = None
    for i in range(len(ts) - 1, -1, -1):
        if not good[i]:
            break
        achieved = float(ts[i])
    result = ConvergenceResult(achieved, [float(t) for t in ts], disc, limit, R)
    if achieved is None:
        raise NotConverged(
            f"discrepancy {disc[-1]:.3g} still >= eps = {eps:g} at the last sample",
            curve=result.to_dict()["curve"],
        )
    return result
