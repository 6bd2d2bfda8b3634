import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from psr.catalog import classify
from psr.cubic import CubicForm, StandardFormPoly, evaluate
from psr.errors import NoClosedHorizon, OutsideDomain
from psr.evolution import (
    DIM1_LIMIT,
    BetaCubic,
    a_from_R,
    b_bound,
    beta_roots,
    chi_ratio_extrapolated,
    chi_ratio_limit,
    dim1_coefficient,
    dim2_e1_pullback,
    dim2_intermediate_oracle,
    dim2_p3,
    dim2_rotation_oracle,
    evolve,
    extract_limit,
    horizon_R,
    reorient,
)
from psr.cubic import pullback
from psr.hyperbolicity import MAX_BOUND, critical_points_with_norms, sphere_max
from psr.standard_form import FIXED

from conftest import K, SQ3, random_regular

seeds = st.integers(0, 2**32 - 1)


def motivating():
    return StandardFormPoly(2, CubicForm(2, {(0, 0, 0): K}))


def dim1(a):
    return StandardFormPoly(1, CubicForm(1, {(0, 0, 0): a}))


# -- beta and the horizon -----------------------------------------------------------


def test_horizon_oracles():
    assert horizon_R(0.0) == 1.0
    assert horizon_R(-K) == pytest.approx(SQ3 / 2, abs=1e-15)
    assert horizon_R(K) == pytest.approx(SQ3, abs=1e-15)
    assert a_from_R(math.sqrt(2)) == pytest.approx(1 / (2 * math.sqrt(2)), rel=1e-15)
    assert horizon_R(1 / (2 * math.sqrt(2))) == pytest.approx(math.sqrt(2), rel=1e-14)


def test_horizon_rejects_large_a():
    with pytest.raises(NoClosedHorizon):
        horizon_R(0.5)


def test_beta_zero_structure():
    assert len(beta_roots(0.1)) == 3
    r = beta_roots(K)
    # one simple zero at -sqrt3/2 plus the double zero at sqrt3
    assert r[0] == pytest.approx(-SQ3 / 2, abs=1e-12)
    assert r[-1] == pytest.approx(SQ3, abs=1e-6)
    assert BetaCubic(K).derivative(SQ3) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-MAX_BOUND, MAX_BOUND))
def test_horizon_round_trip(a):
    R = horizon_R(a)
    assert SQ3 / 2 - 1e-15 <= R <= SQ3 + 1e-15
    assert a_from_R(R) == pytest.approx(a, abs=1e-10)
    assert BetaCubic(a)(R) == pytest.approx(0.0, abs=1e-12)


# -- reorientation and evolution ---------------------------------------------------


def test_reorient():
    sf = motivating()
    same, O = reorient(sf, [0.0, 1.0])
    np.testing.assert_allclose(O, np.eye(2))
    r, O = reorient(sf, [1.0, 0.0])
    assert r.p3.coeff(1, 1, 1) == pytest.approx(K)


@given(seeds, st.integers(2, 4))
def test_reorient_keeps_sphere_max(seed, n):
    rng = np.random.default_rng(seed)
    sf = random_regular(rng, n)
    v = rng.standard_normal(n)
    r, O = reorient(sf, v)
    assert r.p3.coeff(n - 1, n - 1, n - 1) == pytest.approx(evaluate(sf.p3, v / np.linalg.norm(v)), abs=1e-12)
    assert sphere_max(r.p3).max_value == pytest.approx(sphere_max(sf.p3).max_value, abs=1e-8)


def test_evolve_at_zero_is_identity():
    rng = np.random.default_rng(1)
    sf = random_regular(rng, 3)
    tr = evolve(sf, [0.0, 0.0, 1.0], [0.0])
    assert tr.samples[0].sf.p3.max_abs_diff(sf.p3) < 1e-14


def test_motivating_evolution():
    tr = evolve(motivating(), [1.0, 0.0], [-0.8, 0.0, 0.8, 1.6])
    for s in tr.samples:
        assert s.sf.p3.coeff(0, 0, 0) == pytest.approx(K, abs=1e-12)
        assert s.sf.p3.coeff(0, 1, 1) == pytest.approx(-2 * s.t / 3, abs=1e-12)
        assert s.sf.p3.coeff(0, 0, 1) == pytest.approx(0.0, abs=1e-12)
        assert s.sf.p3.coeff(1, 1, 1) == pytest.approx(0.0, abs=1e-12)


def test_evolve_rejects_t_beyond_horizon():
    with pytest.raises(OutsideDomain):
        evolve(motivating(), [1.0, 0.0], [1.8])


@pytest.mark.parametrize("a", [-0.3, -0.1, 0.0, 0.2, 0.35])
def test_dim1_closed_form(a):
    R = horizon_R(a)
    ts = np.linspace(0, 0.95 * R, 10)
    tr = evolve(dim1(a), [1.0], ts)
    for s in tr.samples:
        assert s.sf.p3.coeff(0, 0, 0) == pytest.approx(dim1_coefficient(a, s.t), abs=1e-9)


def test_dim1_homogeneous_is_constant():
    R = horizon_R(-K)
    tr = evolve(dim1(-K), [1.0], R * (1 - 0.5 ** np.arange(12)))
    assert max(abs(s.sf.p3.coeff(0, 0, 0) + K) for s in tr.samples) <= 1e-10


@pytest.mark.parametrize("a", [-0.3, 0.0, 0.3])
def test_dim1_limit(a):
    lim = extract_limit(dim1(a), [1.0])
    assert lim.limit_p3.coeff(0, 0, 0) == pytest.approx(DIM1_LIMIT, abs=1e-5)


def test_motivating_limits():
    plus = extract_limit(motivating(), [1.0, 0.0])
    assert plus.limit_p3.coeff(0, 0, 0) == pytest.approx(K, abs=1e-4)
    assert plus.limit_p3.coeff(0, 1, 1) == pytest.approx(-2 / SQ3, abs=1e-4)
    minus = extract_limit(motivating(), [-1.0, 0.0])
    # along -y the y-coordinate still carries +K y^3 in the original orientation
    assert minus.limit_p3.coeff(0, 0, 0) == pytest.approx(K, abs=1e-4)
    assert minus.limit_p3.coeff(0, 1, 1) == pytest.approx(1 / SQ3, abs=1e-4)


@given(seeds, st.integers(1, 3))
def test_membership_preservation(seed, n):
    rng = np.random.default_rng(seed)
    sf = random_regular(rng, n)
    v = rng.standard_normal(n)
    R = horizon_R(evaluate(sf.p3, v / np.linalg.norm(v)))
    for s in evolve(sf, v, np.linspace(0, 0.98 * R, 5)).samples:
        assert sphere_max(s.sf.p3).max_value <= MAX_BOUND + 1e-6


@given(seeds, st.integers(2, 3))
def test_limit_is_in_the_closed_set(seed, n):
    rng = np.random.default_rng(seed)
    sf = random_regular(rng, n)
    v = rng.standard_normal(n)
    lim = extract_limit(sf, v)
    assert sphere_max(lim.limit_p3).max_value <= MAX_BOUND + 1e-5


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gauge_robustness(seed):
    rng = np.random.default_rng(seed)
    sf = random_regular(rng, 3)
    v = rng.standard_normal(3)
    a = classify(extract_limit(sf, v).limit_p3)
    b = classify(extract_limit(sf, v, gauge=FIXED).limit_p3)
    assert (a.form.variant, a.form.m) == (b.form.variant, b.form.m)
    assert max(a.residual, b.residual) <= 1e-4


# -- dimension-2 closed forms ---------------------------------------------------------


@given(seeds)
def test_dim2_oracle_matches_pullback(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-MAX_BOUND, MAX_BOUND)
    b, c, q = rng.uniform(-1, 1, 3)
    R = horizon_R(a)
    for r in rng.uniform(0, 0.99 * R, 5):
        x, y = dim2_intermediate_oracle(a, b, c, q, r), dim2_e1_pullback(a, b, c, q, r)
        for f in ("lam", "chi", "mu", "theta_vvv", "theta_vvw", "theta_vww", "theta_www"):
            assert getattr(x, f) == pytest.approx(getattr(y, f), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("b,R", [(0.3, 1.2), (0.8, 1.0), (1.5, 1.5), (2.0, 1.7), (0.5, 1.72)])
def test_chi_ratio_limit(b, R):
    est, err = chi_ratio_extrapolated(b, R)
    assert est == pytest.approx(chi_ratio_limit(b, R), abs=1e-6)


def test_rotation_oracle():
    R = 1.3
    o = dim2_rotation_oracle(0.5 * b_bound(R), R)
    rotated = pullback(dim2_p3(o.a, o.b, o.c, o.q), o.rotation)
    assert rotated.max_abs_diff(o.p3) < 1e-12
    for s in o.solutions[1:]:
        assert np.linalg.norm(s) == pytest.approx(1.0, abs=1e-12)
    found = [p for p, _ in critical_points_with_norms(o.p3)]
    for s in o.solutions:
        assert min(np.linalg.norm(s - f) for f in found) < 1e-8


def test_rotation_oracle_extremal_b():
    R = 1.3
    o = dim2_rotation_oracle(b_bound(R), R)
    assert o.vvw == pytest.approx(2 / SQ3, abs=1e-12)
    assert o.www == pytest.approx(-K, abs=1e-12)


def test_rotation_oracle_rejects_bad_parameters():
    with pytest.raises(ValueError):
        dim2_rotation_oracle(0.5, 2.0)
    with pytest.raises(ValueError):
        dim2_rotation_oracle(-0.1, 1.2)
