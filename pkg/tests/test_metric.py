
import numpy as np
import pytest
from hypothesis import given, strategies as st

from psr.cubic import CubicForm, StandardFormPoly
from psr.errors import NotConverged, OutsideDomain
from psr.evolution import horizon_R, reorient
from psr.metric import (
    ball_grid,
    centro_affine_metric,
    dom_boundary_emit,
    dom_boundary_radius,
    dom_boundary_samples,
    intrinsic_metric,
    metric_convergence_check,
)

from conftest import K, SQ3, random_regular

seeds = st.integers(0, 2**32 - 1)


def motivating():
    return StandardFormPoly(2, CubicForm(2, {(0, 0, 0): K}))


def test_flat_radius_is_one():
    sf = StandardFormPoly(3, CubicForm.zero(3))
    for s in dom_boundary_samples(sf, 50):
        assert s.radius == pytest.approx(1.0, abs=1e-15)


def test_motivating_radii():
    sf = motivating()
    assert dom_boundary_radius(sf, [1.0, 0.0]) == pytest.approx(SQ3, abs=1e-9)
    assert dom_boundary_radius(sf, [-1.0, 0.0]) == pytest.approx(SQ3 / 2, abs=1e-9)


def test_metric_at_origin():
    g = centro_affine_metric(motivating(), [0.0, 0.0]).g
    np.testing.assert_allclose(g, (2 / 3) * np.eye(2), atol=1e-15)
    g = centro_affine_metric(StandardFormPoly(2, CubicForm.zero(2)), [0.0, 0.0]).g
    np.testing.assert_allclose(g, (2 / 3) * np.eye(2), atol=1e-15)


def test_metric_positive_definite_inside_motivating_dom():
    sf = motivating()
    rng = np.random.default_rng(0)
    count = 0
    while count < 1000:
        y = rng.uniform(-SQ3, SQ3, 2)
        r = np.linalg.norm(y)
        if r == 0 or r >= 0.999 * dom_boundary_radius(sf, y / r):
            continue
        assert np.linalg.eigvalsh(centro_affine_metric(sf, y).g)[0] > 0
        count += 1


def test_outside_domain():
    with pytest.raises(OutsideDomain):
        centro_affine_metric(motivating(), [1.8, 0.0])


@given(seeds, st.integers(1, 4))
def test_local_formula_matches_intrinsic(seed, n):
    rng = np.random.default_rng(seed)
    sf = random_regular(rng, n)
    d = rng.standard_normal(n)
    d /= np.linalg.norm(d)
    y = rng.uniform(0, 0.9) * dom_boundary_radius(sf, d) * d
    np.testing.assert_allclose(centro_affine_metric(sf, y).g, intrinsic_metric(sf, y), rtol=1e-8, atol=1e-10)


@given(seeds, st.integers(1, 4))
def test_ball_bounds(seed, n):
    sf = random_regular(np.random.default_rng(seed), n, margin=0.0, low=0.0)
    for s in dom_boundary_samples(sf, 200, seed=seed % 1000):
        assert SQ3 / 2 - 1e-12 <= s.radius <= SQ3 + 1e-12


@given(seeds, st.integers(2, 4))
def test_radius_matches_reoriented_horizon(seed, n):
    rng = np.random.default_rng(seed)
    sf = random_regular(rng, n)
    v = rng.standard_normal(n)
    r, _ = reorient(sf, v)
    assert dom_boundary_radius(sf, v) == pytest.approx(horizon_R(r.p3.coeff(n - 1, n - 1, n - 1)), abs=1e-12)


def test_csv_emission():
    text = dom_boundary_emit(motivating(), 8)
    lines = text.strip().split("\n")
    assert lines[0] == "theta,radius"
    assert len(lines) == 9
    assert float(lines[1].split(",")[1]) == pytest.approx(SQ3)
    assert float(lines[5].split(",")[1]) == pytest.approx(SQ3 / 2)
    text3 = dom_boundary_emit(StandardFormPoly(3, CubicForm.zero(3)), 5)
    assert text3.split("\n")[0] == "q1,q2,q3,radius"


def test_adjacent_radii_are_close():
    rows = dom_boundary_samples(motivating(), 720)
    r = np.array([s.radius for s in rows] + [rows[0].radius])
    assert np.max(np.abs(np.diff(r))) < 20 * 2 * np.pi / 720


def test_ball_grid():
    G = ball_grid(2, 0.2, 9)
    assert np.all(np.linalg.norm(G, axis=1) <= 0.2 + 1e-12)
    assert any(np.allclose(g, 0) for g in G)


def test_motivating_convergence():
    for v in ([1.0, 0.0], [-1.0, 0.0]):
        res = metric_convergence_check(motivating(), v, U_radius=0.2, eps=1e-2)
        assert res.achieved_t < res.R
        tail = res.discrepancies[-5:]
        assert np.mean(np.diff(tail)) < 0


def test_huge_eps_gives_first_sample():
    res = metric_convergence_check(motivating(), [1.0, 0.0], eps=1e3)
    assert res.achieved_t == res.ts[0]


def test_not_converged_reports_curve():
    with pytest.raises(NotConverged) as exc:
        metric_convergence_check(motivating(), [1.0, 0.0], eps=1e-9)
    assert len(exc.value.curve) == 17


def test_ball_outside_limit_dom():
    with pytest.raises(OutsideDomain):
        metric_convergence_check(motivating(), [1.0, 0.0], U_radius=0.9)


def test_dim1_homogeneous_discrepancy_vanishes():
    sf = StandardFormPoly(1, CubicForm(1, {(0, 0, 0): -K}))
    res = metric_convergence_check(sf, [1.0])
    assert max(res.discrepancies) <= 1e-12
