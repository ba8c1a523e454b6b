import numpy as np
import pytest

from matrix_recovery import (
    FpcConfig,
    GeneralOperator,
    MsbConfig,
    SamplingMask,
    SolverDivergence,
    SvtConfig,
    adjoint,
    apply,
    fpc_solve,
    msb_solve,
    msb_z_update,
    nmse,
    random_mask,
    solve,
    svd_shrink,
    svt_solve,
)
from matrix_recovery.solvers import cgls_regularized, default_config
from matrix_recovery.solvers.fpc import mu_schedule


def dense_matrix(op):
    """Explicit N x (m*n) matrix of an operator acting on column-major vec(Z)."""
    m, n = op.shape
    cols = []
    for k in range(m * n):
        e = np.zeros(m * n)
        e[k] = 1.0
        cols.append(apply(op, e.reshape((m, n), order="F")))
    return np.array(cols).T


def reference_msb(op, y, lambda1, eta, factor, iters):
    """Plain dense transcription of the MSB loop."""
    m, n = op.shape
    a = dense_matrix(op)
    normal = a.T @ a + eta * np.eye(m * n)
    w, b = np.zeros((m, n)), np.ones((m, n))
    out = []
    for _ in range(iters):
        rhs = eta * (w - b).ravel(order="F") + a.T @ y
        z = np.linalg.solve(normal, rhs).reshape((m, n), order="F")
        arg = z + b
        u, s, vt = np.linalg.svd(arg, full_matrices=False)
        w = u @ np.diag(np.maximum(s - factor * lambda1 / eta, 0)) @ vt
        b = b - (w - z)
        out.append((z, w, b, arg))
    return out


def low_rank(rng, m, n, r):
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


# -- z-update ----------------------------------------------------------------

def test_z_update_unobserved_entry(rng):
    op = SamplingMask.from_pairs(2, 2, [(0, 0), (1, 1)])
    w, b = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    z = msb_z_update(op, [1.0, 4.0], w, b, eta=0.001)
    assert z[0, 1] == pytest.approx((w - b)[0, 1], rel=1e-14)
    assert z[1, 0] == pytest.approx((w - b)[1, 0], rel=1e-14)


def test_z_update_observed_entry(rng):
    op = SamplingMask.from_pairs(2, 2, [(0, 0), (1, 1)])
    w, b = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    z = msb_z_update(op, [1.0, 4.0], w, b, eta=0.001)
    assert z[1, 1] == pytest.approx((4.0 + 0.001 * (w - b)[1, 1]) / 1.001, rel=1e-14)


def test_z_update_general_operator_normal_equations(rng):
    eta = 0.001
    a = rng.standard_normal((3, 4))
    op = GeneralOperator(2, 2, a)
    y = rng.standard_normal(3)
    w, b = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    z, info = msb_z_update(op, y, w, b, eta, ls_tol=1e-10, ls_max_iters=50, return_info=True)
    rhs = a.T @ y + eta * (w - b).ravel(order="F")
    normal = a.T @ a + eta * np.eye(4)
    resid = np.linalg.norm(normal @ z.ravel(order="F") - rhs) / np.linalg.norm(rhs)
    assert resid < 1e-6
    assert info.converged
    np.testing.assert_allclose(z.ravel(order="F"), np.linalg.solve(normal, rhs), rtol=1e-6)


def test_z_update_mask_matches_dense_solve(rng):
    op = random_mask(4, 3, 0.5, rng)
    y = rng.standard_normal(op.n_measurements)
    w, b = rng.standard_normal((4, 3)), rng.standard_normal((4, 3))
    a = dense_matrix(op)
    expected = np.linalg.solve(a.T @ a + 0.01 * np.eye(12), a.T @ y + 0.01 * (w - b).ravel("F"))
    np.testing.assert_allclose(msb_z_update(op, y, w, b, 0.01).ravel("F"), expected, rtol=1e-12)


def test_cgls_reports_non_convergence(rng):
    a = rng.standard_normal((30, 40))
    fwd = lambda z: a @ z.ravel()
    adj = lambda v: (a.T @ v).reshape(40, 1)
    _, info = cgls_regularized(fwd, adj, rng.standard_normal(30), np.zeros((40, 1)),
                               eta=1e-6, tol=1e-14, max_iters=2)
    assert not info.converged and info.iterations == 2


def test_cgls_least_squares_residual_monotone(rng):
    a = rng.standard_normal((20, 30))
    y = rng.standard_normal(20)
    eta = 1e-3
    fwd = lambda z: a @ z.ravel()
    adj = lambda v: (a.T @ v).reshape(30, 1)
    prev = np.inf
    for k in range(1, 25):
        z, _ = cgls_regularized(fwd, adj, y, np.zeros((30, 1)), eta, tol=1e-300, max_iters=k)
        val = np.sum((a @ z.ravel() - y) ** 2) + eta * np.sum(z**2)
        assert val <= prev * (1 + 1e-12)
        prev = val


# -- MSB -----------------------------------------------------------------------

def test_msb_matches_dense_reference(rng):
    m, n = 5, 4
    truth = low_rank(rng, m, n, 2)
    op = random_mask(m, n, 0.6, rng)
    y = apply(op, truth)
    cfg = MsbConfig(lambda1=0.01, eta=0.05, max_outer_iters=7, obj_tol=1e-300)
    res = msb_solve(op, y, cfg)
    ref = reference_msb(op, y, 0.01, 0.05, 4.0, 7)
    z, w, _, _ = ref[-1]
    assert res.iterations_used == 7
    np.testing.assert_allclose(res.z_final, z, atol=1e-10)
    np.testing.assert_allclose(res.w_final, w, atol=1e-10)


def test_msb_general_operator_matches_reference(rng):
    m, n = 3, 3
    op = GeneralOperator(m, n, rng.standard_normal((6, 9)))
    y = apply(op, low_rank(rng, m, n, 1))
    cfg = MsbConfig(lambda1=0.01, eta=0.1, max_outer_iters=5, obj_tol=1e-300,
                    inner_ls_tol=1e-12, inner_ls_max_iters=200)
    res = msb_solve(op, y, cfg)
    z, w, _, _ = reference_msb(op, y, 0.01, 0.1, 4.0, 5)[-1]
    np.testing.assert_allclose(res.z_final, z, atol=1e-8)
    np.testing.assert_allclose(res.w_final, w, atol=1e-8)
    assert res.notes["ls_failures"] == 0


def test_msb_flags_inner_solver_failure(rng):
    op = GeneralOperator(4, 4, rng.standard_normal((10, 16)))
    y = apply(op, low_rank(rng, 4, 4, 1))
    cfg = MsbConfig(max_outer_iters=3, inner_ls_tol=1e-15, inner_ls_max_iters=1)
    res = msb_solve(op, y, cfg)
    assert res.notes["ls_failures"] > 0
    assert not res.converged


def test_msb_w_is_exactly_low_rank(rng):
    m, n = 12, 10
    op = random_mask(m, n, 0.6, rng)
    y = apply(op, low_rank(rng, m, n, 2))
    lambda1, eta = 0.05, 0.1
    thr = 4 * lambda1 / eta
    for z, w, _, arg in reference_msb(op, y, lambda1, eta, 4.0, 15):
        keep = int(np.sum(np.linalg.svd(arg, compute_uv=False) > thr))
        s_w = np.linalg.svd(w, compute_uv=False)
        assert np.all(s_w[keep:] <= 1e-10 * max(s_w[0], 1e-300))
    res = msb_solve(op, y, MsbConfig(lambda1=lambda1, eta=eta, max_outer_iters=15,
                                     obj_tol=1e-300))
    np.testing.assert_allclose(res.w_final, w, atol=1e-10)
    s = np.linalg.svd(res.w_final, compute_uv=False)
    assert np.sum(s > 1e-10 * s[0]) <= keep


def test_msb_bregman_initialisation():
    # With W0 = 0 and B0 = ones, an unobserved entry starts at W - B = -1.
    op = SamplingMask.from_pairs(2, 2, [(0, 0)])
    res = msb_solve(op, [3.0], MsbConfig(max_outer_iters=1))
    assert res.z_final[1, 1] == pytest.approx(-1.0)
    assert res.z_final[0, 0] == pytest.approx((3.0 - 0.001) / 1.001)


def test_msb_finds_nuclear_norm_minimiser():
    # For [[1, 2], [2, x]] the nuclear norm is sqrt((x-1)^2 + 16) for x < 4 and 1 + x
    # for x >= 4, so the minimum-nuclear-norm completion is x = 1 (norm 4), not the
    # rank-one completion x = 4 (norm 5).
    op = SamplingMask.from_pairs(2, 2, [(0, 0), (0, 1), (1, 0)])
    y = np.array([1.0, 2.0, 2.0])  # column-major order: (0,0), (1,0), (0,1)
    res = msb_solve(op, y, MsbConfig(obj_tol=1e-12))
    assert res.z_final[1, 1] == pytest.approx(1.0, abs=1e-2)
    assert res.converged


def test_msb_full_observation(rng):
    truth = low_rank(rng, 8, 6, 6)
    op = random_mask(8, 6, 1.0, rng)
    res = msb_solve(op, apply(op, truth), MsbConfig(lambda1=1e-6))
    assert nmse(res.z_final, truth) <= 1e-4


def test_msb_deterministic(rng):
    op = random_mask(20, 15, 0.5, 3)
    y = apply(op, low_rank(np.random.default_rng(4), 20, 15, 2))
    a, b = msb_solve(op, y), msb_solve(op, y)
    assert a.iterations_used == b.iterations_used
    np.testing.assert_array_equal(a.z_final, b.z_final)


def test_msb_data_fit_improves(rng):
    truth = low_rank(rng, 30, 30, 2)
    op = random_mask(30, 30, 0.5, rng)
    y = apply(op, truth)
    full = msb_solve(op, y)
    first = msb_solve(op, y, MsbConfig(max_outer_iters=1))
    fit = lambda z: 0.5 * np.sum((y - apply(op, z)) ** 2)
    assert fit(full.z_final) <= fit(first.z_final)


def test_msb_result_bookkeeping(rng):
    truth = low_rank(rng, 30, 30, 2)
    op = random_mask(30, 30, 0.5, rng)
    res = msb_solve(op, apply(op, truth))
    assert len(res.objective_history) == res.iterations_used <= 500
    assert np.all(np.isfinite(res.objective_history))
    expected_gap = np.linalg.norm(res.w_final - res.z_final) / max(np.linalg.norm(res.z_final), 1)
    assert res.constraint_gap == pytest.approx(expected_gap)
    if res.converged:
        assert res.constraint_gap < 1e-3


def test_msb_objective_definition(rng):
    op = random_mask(6, 5, 0.5, rng)
    y = apply(op, low_rank(rng, 6, 5, 1))
    cfg = MsbConfig(lambda1=0.01, eta=0.1, max_outer_iters=3, obj_tol=1e-300)
    res = msb_solve(op, y, cfg)
    expected = 0.5 * np.sum((y - apply(op, res.z_final)) ** 2) + \
        0.01 * np.linalg.svd(res.w_final, compute_uv=False).sum()
    assert res.objective_history[-1] == pytest.approx(expected, rel=1e-10)


def test_msb_dimension_mismatch():
    op = random_mask(4, 4, 0.5, 0)
    with pytest.raises(ValueError):
        msb_solve(op, np.ones(op.n_measurements + 1))


@pytest.mark.parametrize("kwargs", [
    {"lambda1": 0}, {"eta": -1}, {"max_outer_iters": 0}, {"max_outer_iters": 2.5},
    {"obj_tol": float("nan")}, {"threshold_factor": float("inf")},
])
def test_msb_config_validation(kwargs):
    with pytest.raises(ValueError):
        MsbConfig(**kwargs)


def test_msb_threshold():
    assert MsbConfig().threshold == pytest.approx(4.0)
    assert MsbConfig(threshold_factor=1.0).threshold == pytest.approx(1.0)


# -- SVT -------------------------------------------------------------------------

def test_svt_zero_measurements():
    op = random_mask(5, 5, 0.5, 0)
    res = svt_solve(op, np.zeros(op.n_measurements))
    assert res.iterations_used == 1
    np.testing.assert_array_equal(res.z_final, 0.0)
    assert res.converged


def test_svt_first_iterates(rng):
    # Y0 = 0 gives Z1 = D_tau(0) = 0, then Y1 = delta*y and Z2 = D_tau(A^T(delta*y)).
    op = random_mask(10, 8, 0.5, rng)
    y = apply(op, low_rank(rng, 10, 8, 2))
    cfg = SvtConfig(tau=1.5, step_delta=1.3, residual_tol=1e-12)
    one = svt_solve(op, y, SvtConfig(tau=1.5, step_delta=1.3, max_iters=1))
    np.testing.assert_array_equal(one.z_final, 0.0)
    two = svt_solve(op, y, SvtConfig(tau=1.5, step_delta=1.3, max_iters=2,
                                     residual_tol=cfg.residual_tol))
    np.testing.assert_allclose(two.z_final, svd_shrink(adjoint(op, 1.3 * y), 1.5), atol=1e-12)


def test_svt_default_parameters():
    op = random_mask(20, 10, 0.25, 0)
    cfg = SvtConfig().resolve(op)
    assert cfg.tau == pytest.approx(5 * np.sqrt(200))
    assert cfg.step_delta == pytest.approx(1.2 * 200 / 50)


def test_svt_divergence_guard(rng):
    op = random_mask(10, 10, 0.5, rng)
    y = apply(op, low_rank(rng, 10, 10, 2))
    with pytest.raises(SolverDivergence):
        svt_solve(op, y, SvtConfig(tau=0.01, step_delta=50.0, max_iters=200))


def test_svt_full_observation(rng):
    truth = low_rank(rng, 12, 9, 3)
    op = random_mask(12, 9, 1.0, rng)
    res = svt_solve(op, apply(op, truth), SvtConfig(residual_tol=1e-6, max_iters=2000))
    assert nmse(res.z_final, truth) <= 1e-4


def test_svt_deterministic(rng):
    op = random_mask(20, 15, 0.5, 1)
    y = apply(op, low_rank(np.random.default_rng(2), 20, 15, 2))
    a, b = svt_solve(op, y), svt_solve(op, y)
    assert a.iterations_used == b.iterations_used
    np.testing.assert_array_equal(a.z_final, b.z_final)


# -- FPC ---------------------------------------------------------------------------

def test_fpc_zero_measurements():
    op = random_mask(5, 5, 0.5, 0)
    res = fpc_solve(op, np.zeros(op.n_measurements))
    np.testing.assert_array_equal(res.z_final, 0.0)


def test_fpc_single_step(rng):
    op = random_mask(9, 7, 0.5, rng)
    y = apply(op, low_rank(rng, 9, 7, 2))
    mu0 = np.linalg.svd(adjoint(op, y), compute_uv=False)[0]
    # mu_final above mu0 leaves a single stage at mu0.
    cfg = FpcConfig(mu_final=2 * mu0, tau_step=0.8, max_inner_iters=1)
    res = fpc_solve(op, y, cfg)
    np.testing.assert_allclose(res.z_final, svd_shrink(0.8 * adjoint(op, y), 0.8 * mu0),
                               atol=1e-12)
    assert res.iterations_used == 1


def test_fpc_schedule():
    cfg = FpcConfig(mu_final=0.01, continuation_factor=0.25)
    assert mu_schedule(1.0, cfg) == [1.0, 0.25, 0.0625, 0.015625, 0.01]
    assert mu_schedule(0.005, cfg) == [0.005]


def test_fpc_full_observation(rng):
    truth = low_rank(rng, 12, 9, 3)
    op = random_mask(12, 9, 1.0, rng)
    res = fpc_solve(op, apply(op, truth), FpcConfig(mu_final=1e-8, inner_tol=1e-10))
    assert nmse(res.z_final, truth) <= 1e-4


@pytest.mark.parametrize("kwargs", [
    {"continuation_factor": 1.0}, {"continuation_factor": 0.0}, {"mu_final": 0},
    {"max_inner_iters": 0},
])
def test_fpc_config_validation(kwargs):
    with pytest.raises(ValueError):
        FpcConfig(**kwargs)


def test_fpc_divergence_guard(rng):
    op = random_mask(10, 10, 0.5, rng)
    y = apply(op, low_rank(rng, 10, 10, 2))
    with pytest.raises(SolverDivergence):
        fpc_solve(op, y, FpcConfig(tau_step=5.0, max_inner_iters=200, inner_tol=1e-12))


# -- dispatch ------------------------------------------------------------------------

def test_solve_dispatch(rng):
    op = random_mask(6, 6, 0.5, rng)
    y = apply(op, low_rank(rng, 6, 6, 1))
    for name in ("msb", "svt", "fpc"):
        assert solve(name, op, y).solver == name
        assert default_config(name) is not None
    with pytest.raises(ValueError):
        solve("admm", op, y)
