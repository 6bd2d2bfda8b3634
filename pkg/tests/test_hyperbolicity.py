import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import special_ortho_group

from psr.catalog import canonical_p3
from psr.cubic import CubicForm, StandardFormPoly, assemble_standard, pullback
from psr.hyperbolicity import (
    MAX_BOUND,
    Status,
    closedness,
    critical_points_with_norms,
    hessian_signature,
    is_hyperbolic,
    sphere_max,
)
from psr.errors import NotHyperbolic

from conftest import K, random_p3

seeds = st.integers(0, 2**32 - 1)


def test_bound_constant():
    assert MAX_BOUND == pytest.approx(2 / (3 * math.sqrt(3)), rel=1e-15)


def test_signature_of_flat_form():
    h = assemble_standard(StandardFormPoly(3, CubicForm.zero(3)))
    assert hessian_signature(h, [1, 0, 0, 0]) == (3, 1, 0)


def test_motivating_base_point_is_hyperbolic():
    h = assemble_standard(StandardFormPoly(2, CubicForm(2, {(0, 0, 0): K})))
    assert is_hyperbolic(h, [1, 0, 0])


def test_pure_cube_is_degenerate():
    h = CubicForm(2, {(0, 0, 0): 1.0})
    assert hessian_signature(h, [1, 0]) == (0, 1, 1)
    assert not is_hyperbolic(h, [1, 0])


def test_signature_needs_positive_value():
    with pytest.raises(NotHyperbolic):
        hessian_signature(CubicForm(2, {(0, 0, 0): 1.0}), [-1, 0])


def test_sphere_max_oracles():
    assert sphere_max(CubicForm.zero(3)).max_value == 0.0
    res = sphere_max(CubicForm(2, {(0, 0, 0): K}))
    assert res.max_value == pytest.approx(K, abs=1e-12)
    assert any(np.allclose(p, [1, 0], atol=1e-8) for p in res.argmax_points)


def test_eigenvalue_bound_equality_and_violation():
    F1 = canonical_p3(1, (np.array([[1.0]]),), 3)
    assert sphere_max(F1).max_value == pytest.approx(K, abs=1e-9)
    F11 = canonical_p3(1, (np.array([[1.1]]),), 3)
    assert sphere_max(F11).max_value > K + 1e-4


def test_closedness_oracles():
    assert closedness(StandardFormPoly(2, CubicForm.zero(2))).status is Status.CLOSED_REGULAR
    assert closedness(StandardFormPoly(2, CubicForm(2, {(0, 0, 0): K}))).status is Status.CLOSED_SINGULAR_AT_INFINITY
    v = closedness(StandardFormPoly(1, CubicForm(1, {(0, 0, 0): 0.5})))
    assert v.status is Status.NOT_CLOSED
    assert v.max_value == pytest.approx(0.5)


def test_grid_oracle_in_dimension_two():
    rng = np.random.default_rng(3)
    th = np.linspace(0, 2 * np.pi, 200001)
    for _ in range(5):
        p3 = random_p3(rng, 2)
        pts = np.column_stack([np.cos(th), np.sin(th)])
        grid = np.max(np.einsum("ijk,bi,bj,bk->b", p3.tensor, pts, pts, pts))
        assert sphere_max(p3).max_value == pytest.approx(grid, abs=2e-4)
        assert sphere_max(p3).max_value >= grid - 1e-12


def test_critical_point_residuals():
    rng = np.random.default_rng(5)
    res = sphere_max(random_p3(rng, 3))
    for c in res.critical_points:
        assert abs(np.linalg.norm(c.direction) - 1) < 1e-10
        assert c.residual <= 1e-8


def test_reproducible_under_seed():
    p3 = random_p3(np.random.default_rng(9), 4)
    a, b = sphere_max(p3, seed=7), sphere_max(p3, seed=7)
    assert a.max_value == b.max_value
    assert len(a.critical_points) == len(b.critical_points)


def test_critical_points_with_norms_rejects_bad_level():
    with pytest.raises(ValueError):
        critical_points_with_norms(CubicForm.zero(2), level=0.0)


@given(seeds, st.integers(2, 4), st.floats(0.1, 10.0))
def test_scaling_covariance(seed, n, lam):
    p3 = random_p3(np.random.default_rng(seed), n)
    a, b = sphere_max(p3), sphere_max(p3 * lam)
    assert b.max_value == pytest.approx(lam * a.max_value, rel=1e-8, abs=1e-10)
    for p in b.argmax_points:
        assert min(np.linalg.norm(p - q) for q in a.argmax_points) < 1e-8


@given(seeds, st.integers(2, 4))
def test_orthogonal_invariance(seed, n):
    rng = np.random.default_rng(seed)
    p3 = random_p3(rng, n)
    O = special_ortho_group.rvs(n, random_state=rng)
    assert sphere_max(pullback(p3, O)).max_value == pytest.approx(sphere_max(p3).max_value, abs=1e-8)


@given(st.floats(-1.5, 1.5))
def test_sign_flip_matches_sign_flip_of_F(F):
    a = canonical_p3(1, (np.array([[F]]),), 3)
    b = canonical_p3(1, (np.array([[-F]]),), 3)
    # F enters as F s u^2, so flipping the s axis is the same as flipping F.
    assert pullback(a, np.diag([-1.0, 1.0, 1.0])).max_abs_diff(b) <= 1e-15
    assert sphere_max(a).max_value == pytest.approx(sphere_max(b).max_value, abs=1e-9)
