import math

import numpy as np
import pytest
import scipy.special

from fraclab.errors import MemoryBudgetError
from fraclab.gridfn import CutoffSpec, GridFunction, build_cutoff, build_grid, extend_by_zero
from fraclab.operator import (
    FractionalParams,
    OperatorMatrix,
    apply_fractional_laplacian,
    assemble_operator_matrix,
    normalization_constant,
)
from fraclab.reference import naive_apply_omega
from fraclab.regions import Ball

from conftest import random_dirichlet


def test_normalization_half_is_inverse_pi():
    assert normalization_constant(1, 0.5) == pytest.approx(1.0 / math.pi, rel=1e-14)


def test_normalization_2d_value():
    # evaluated independently from the closed form with a Gamma routine
    assert normalization_constant(2, 0.75) == pytest.approx(0.1711671296905524, rel=1e-12)
    assert abs(normalization_constant(2, 0.75) - 0.1712) < 5e-5


def test_normalization_scipy_cross_check():
    for ndim in (1, 2):
        for s in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99):
            via_scipy = (s * 2 ** (2 * s) * float(scipy.special.gamma((2 * s + ndim) / 2))
                         / (math.pi ** (ndim / 2) * float(scipy.special.gamma(1 - s))))
            assert normalization_constant(ndim, s) == pytest.approx(via_scipy, rel=1e-12)


def test_normalization_vanishes_as_s_to_zero():
    assert normalization_constant(1, 1e-6) < 1e-5


def test_normalization_domain_errors():
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(ValueError):
            normalization_constant(1, bad)
    with pytest.raises(ValueError):
        normalization_constant(0, 0.5)


def test_params_cache_matches_closed_form():
    p = FractionalParams(2, 0.31)
    assert p.cns == pytest.approx(normalization_constant(2, 0.31), rel=1e-12)


def test_apply_zero_function(grid65, params_half):
    zero = extend_by_zero(np.zeros(grid65.n_omega), grid65)
    out = apply_fractional_laplacian(zero, params_half)
    assert out.linf() == 0.0


def test_apply_requires_dirichlet(grid65, params_half):
    u = GridFunction(grid65, np.ones(grid65.shape))
    with pytest.raises(ValueError):
        apply_fractional_laplacian(u, params_half)


def _getoor_profile(grid, s):
    pts = grid.nodes()
    r2 = (pts ** 2).sum(axis=1).reshape(grid.shape)
    vals = np.where(grid.mask, np.clip(1.0 - r2, 0.0, None) ** s, 0.0)
    return GridFunction(grid, vals, dirichlet=True)


def test_apply_getoor_half_sphere_density():
    # (-Delta)^(1/2) sqrt(1-x^2)_+ = 1 on (-1,1); interior error shrinks with h
    errs = []
    for n in (129, 257):
        grid = build_grid(1, ((-2.0, 2.0),), n, Ball((0.0,), 1.0))
        out = apply_fractional_laplacian(_getoor_profile(grid, 0.5), FractionalParams(1, 0.5))
        sel = np.abs(grid.axes[0]) <= 0.5
        errs.append(np.abs(out.values[sel] - 1.0).max())
    assert errs[0] < 0.01
    assert errs[1] < errs[0] / 1.5


def test_apply_fourier_symbol_windowed_sine():
    k, s = 2.0, 0.5
    grid = build_grid(1, ((-16.0, 16.0),), 513, Ball((0.0,), 10.0))
    x = grid.axes[0]
    window = build_cutoff(grid, CutoffSpec(Ball((0.0,), 4.0), Ball((0.0,), 9.0), order=5))
    u = GridFunction(grid, np.sin(k * x) * window.values, dirichlet=True)
    out = apply_fractional_laplacian(u, FractionalParams(1, s))
    i0 = grid.node_index((math.pi / (2 * k),))
    ref = k ** (2 * s) * math.sin(k * x[i0])
    assert abs(out.values[i0] - ref) / abs(ref) < 0.02


def test_matrix_symmetry_and_sign_pattern(grid65, params_half):
    A = assemble_operator_matrix(grid65, params_half).matrix
    assert np.abs(A - A.T).max() == 0.0
    off = A - np.diag(np.diag(A))
    assert off.max() <= 0.0
    assert np.diag(A).min() > 0.0
    assert (A @ np.ones(grid65.n_omega)).min() > 0.0


def test_matrix_matches_matrix_free(grid65, params_half):
    A = assemble_operator_matrix(grid65, params_half)
    rng = np.random.default_rng(7)
    for _ in range(5):
        u = random_dirichlet(grid65, rng)
        via_matrix = A.apply_to_omega(u.on_omega())
        via_apply = apply_fractional_laplacian(u, params_half).values[grid65.mask]
        scale = max(1.0, np.abs(via_apply).max())
        assert np.abs(via_matrix - via_apply).max() <= 1e-12 * scale


def test_matrix_matches_naive_double_loop():
    grid = build_grid(1, ((-2.0, 2.0),), 25, Ball((0.0,), 1.0))
    params = FractionalParams(1, 0.4)
    A = assemble_operator_matrix(grid, params)
    rng = np.random.default_rng(11)
    for _ in range(5):
        vec = rng.standard_normal(grid.n_omega)
        fast = A.apply_to_omega(vec)
        slow = naive_apply_omega(extend_by_zero(vec, grid), params)
        assert np.abs(fast - slow).max() <= 1e-12 * max(1.0, np.abs(slow).max())


def test_limit_s_to_one_recovers_second_difference_stencil():
    grid = build_grid(1, ((-2.0, 2.0),), 65, Ball((0.0,), 1.0))
    A = assemble_operator_matrix(grid, FractionalParams(1, 0.999)).matrix
    h2 = grid.h ** 2
    r = grid.n_omega // 2
    assert A[r, r] * h2 == pytest.approx(2.0, rel=0.02)
    assert A[r, r + 1] * h2 == pytest.approx(-1.0, rel=0.02)
    assert abs(A[r, r + 2] * h2) < 0.01


def test_bilinear_form_self_adjoint_and_coercive(grid65, params_half):
    A = assemble_operator_matrix(grid65, params_half)
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = rng.standard_normal(grid65.n_omega)
        w = rng.standard_normal(grid65.n_omega)
        lhs = np.dot(w, A.apply_to_omega(u))
        rhs = np.dot(u, A.apply_to_omega(w))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
        assert np.dot(u, A.apply_to_omega(u)) > 0.0


def test_quadrature_order_on_smooth_bump():
    # pointwise error vs a reference refinement should fit order >= 1.7
    for s in (0.3, 0.5, 0.7):
        params = FractionalParams(1, s)
        outs = {}
        for n in (65, 129, 257, 513):
            grid = build_grid(1, ((-2.0, 2.0),), n, Ball((0.0,), 1.0))
            u = build_cutoff(grid, CutoffSpec(Ball((0.0,), 0.3), Ball((0.0,), 0.8), order=5))
            outs[n] = apply_fractional_laplacian(u, params).values
        ref = outs[513]
        errs = [np.abs(outs[n] - ref[:: (513 - 1) // (n - 1)]).max() for n in (65, 129, 257)]
        order = np.polyfit(np.log2([4.0 / (n - 1) for n in (65, 129, 257)]), np.log2(errs), 1)[0]
        assert order >= 1.7, f"s={s}: fitted order {order}"


def test_memory_budget_cap(grid65, params_half):
    with pytest.raises(MemoryBudgetError):
        assemble_operator_matrix(grid65, params_half, dense_cap=grid65.n_omega - 1)


def test_matrix_dump_load_round_trip(tmp_path, grid65, params_half):
    A = assemble_operator_matrix(grid65, params_half)
    path = tmp_path / "op.bin"
    A.dump(path)
    B = OperatorMatrix.load(path, grid65, params_half)
    assert np.array_equal(A.matrix, B.matrix)
    with pytest.raises(ValueError):
        OperatorMatrix.load(path, grid65, FractionalParams(1, 0.6))
