import math

import numpy as np
import pytest

from vcselrc.array import calibrate_to_target, sample_array
from vcselrc.reservoir import (
    LSTSQ_RCOND,
    CouplingMatrix,
    ReservoirConfig,
    ReservoirError,
    apply_node_mask,
    build_doe_coupling,
    echo_state_gap,
    evaluate,
    input_layer,
    node_nonlinearity,
    power_iteration_radius,
    reservoir_step,
    run_reservoir,
    run_task,
    train_readout,
)

FAST = ReservoirConfig(washout=50, n_train=200, n_test=100)


def _flip_permutation(rows: int, cols: int) -> np.ndarray:
    # node order is row-major; mirror each row left-right
    idx = np.arange(rows * cols).reshape(rows, cols)[:, ::-1].ravel()
    return idx


def test_doe_kernel_neighbor_structure(default_coupling):
    w = default_coupling.weights
    assert w.shape == (25, 25)
    assert np.array_equal(w, w.T)
    assert np.all(np.diag(w) == 0.0)
    corner = w[0]
    assert np.sum(corner == 1.0) == 3  # (0,1), (1,0), (1,1)
    assert np.sum(corner == 0.4) == 5  # the five cells at Chebyshev distance 2
    center = w[12]
    assert np.sum(center == 1.0) == 8
    assert np.sum(center == 0.4) == 16
    # raw kernel row sums peak at the center node
    assert default_coupling.scaled_to(default_coupling.spectral_radius)  # smoke
    raw = build_doe_coupling()
    assert raw.max_row_sum == pytest.approx(8.0 + 16.0 * 0.4)


def test_doe_kernel_is_translation_invariant_under_reflection(default_coupling):
    p = _flip_permutation(5, 5)
    w = default_coupling.weights
    assert np.array_equal(w[np.ix_(p, p)], w)
    p_v = np.arange(25).reshape(5, 5)[::-1, :].ravel()
    assert np.array_equal(w[np.ix_(p_v, p_v)], w)


def test_power_iteration_matches_dense_eigensolver(default_coupling, rng):
    dense = float(np.max(np.abs(np.linalg.eigvals(default_coupling.weights))))
    assert abs(power_iteration_radius(default_coupling.weights) - dense) < 1e-9
    # bipartite corner case: radius-1 kernel on a path grid
    path = build_doe_coupling(rows=1, cols=5, strengths={1: 1.0})
    dense_path = float(np.max(np.abs(np.linalg.eigvals(path.weights))))
    assert abs(path.spectral_radius - dense_path) < 1e-9
    assert dense_path == pytest.approx(math.sqrt(3.0))  # 2 cos(pi/6)
    # random symmetric nonnegative kernels
    for _ in range(5):
        m = rng.uniform(0.0, 1.0, (12, 12))
        m = (m + m.T) / 2
        dense_m = float(np.max(np.abs(np.linalg.eigvals(m))))
        assert abs(power_iteration_radius(m) - dense_m) < 1e-9 * dense_m


def test_self_coupling_fills_the_diagonal():
    c = build_doe_coupling(self_coupling=0.3)
    assert np.all(np.diag(c.weights) == 0.3)


def test_scaled_to_hits_target_radius(default_coupling):
    scaled = default_coupling.scaled_to(0.9)
    assert scaled.spectral_radius == pytest.approx(0.9)
    assert abs(power_iteration_radius(scaled.weights) - 0.9) < 1e-9
    g = 0.9 / default_coupling.spectral_radius
    assert scaled.strengths[1] == pytest.approx(g)
    assert scaled.strengths[2] == pytest.approx(0.4 * g)
    zero = default_coupling.scaled_to(0.0)
    assert not np.any(zero.weights)
    with pytest.raises(ReservoirError):
        zero.scaled_to(0.9)
    with pytest.raises(ReservoirError):
        default_coupling.scaled_to(-1.0)


def test_build_doe_coupling_validation():
    with pytest.raises(ReservoirError):
        build_doe_coupling(strengths={0: 1.0})
    with pytest.raises(ReservoirError):
        build_doe_coupling(strengths={1.5: 1.0})
    with pytest.raises(ReservoirError):
        build_doe_coupling(strengths={1: -0.1})
    with pytest.raises(ReservoirError):
        build_doe_coupling(radius=5)  # cannot fit a 5x5 grid
    with pytest.raises(ReservoirError):
        build_doe_coupling(strengths={1: 1.0, 3: 0.2}, radius=2)
    with pytest.raises(ReservoirError):
        build_doe_coupling(row_sum_bound=10.0)  # center row sums to 14.4
    with pytest.raises(ReservoirError):
        build_doe_coupling(rows=0)


def test_config_contraction_factor_and_totals():
    cfg = ReservoirConfig()
    assert cfg.contraction_factor() == pytest.approx(0.965)
    assert cfg.contraction_factor() < 1.0
    assert cfg.n_total == 3200
    with pytest.raises(ReservoirError):
        ReservoirConfig(leak=0.0)
    with pytest.raises(ReservoirError):
        ReservoirConfig(nonlinearity="relu")
    with pytest.raises(ReservoirError):
        ReservoirConfig(n_train=10)
    with pytest.raises(ReservoirError):
        ReservoirConfig(ridge=-1e-9)


def test_nonlinearities_are_rectified_and_bounded():
    for name, limit in (("saturating", 1.0), ("tanh", 1.0)):
        f = node_nonlinearity(name)
        z = np.linspace(-5.0, 50.0, 200)
        y = f(z)
        assert np.all(y >= 0.0)
        assert np.all(y <= limit)
        assert np.all(y[z <= 0] == 0.0)
        assert np.all(np.diff(y) >= 0)
    with pytest.raises(ReservoirError):
        node_nonlinearity("sigmoid")


def test_input_layer_ranges_and_determinism():
    cfg = ReservoirConfig()
    w1, b1 = input_layer(25, cfg, seed=5)
    w2, b2 = input_layer(25, cfg, seed=5)
    assert np.array_equal(w1, w2) and np.array_equal(b1, b2)
    assert np.all((np.abs(w1) >= 0.5 * cfg.input_scale) & (np.abs(w1) <= cfg.input_scale))
    assert np.all((b1 >= 0.0) & (b1 <= cfg.bias_scale))
    eff = np.full(25, 0.5)
    w3, b3 = input_layer(25, cfg, seed=5, efficiencies=eff)
    assert np.allclose(w3, 0.5 * w1)
    assert np.array_equal(b3, b1)  # bias is electrical, not injected
    with pytest.raises(ReservoirError):
        input_layer(25, cfg, seed=5, efficiencies=np.ones(24))
    with pytest.raises(ReservoirError):
        input_layer(25, cfg, seed=5, efficiencies=np.full(25, 1.5))


def test_step_decays_geometrically_without_drive():
    n = 25
    x = np.full(n, 0.8)
    w = np.zeros((n, n))
    f = node_nonlinearity("saturating")
    for k in range(1, 6):
        x = reservoir_step(x, 0.0, w, np.zeros(n), np.zeros(n), 0.35, f)
        assert np.allclose(x, 0.8 * 0.65**k, rtol=1e-12)


def test_states_stay_in_the_node_range(default_coupling, rng):
    u = rng.uniform(0.0, 0.5, 400)
    states = run_reservoir(u, default_coupling, ReservoirConfig(), seed=1)
    assert states.shape == (400, 25)
    assert np.all(states >= 0.0)
    assert np.all(states <= 1.0)


def test_constant_drive_reaches_a_fixed_point(default_coupling):
    cfg = ReservoirConfig()
    u = np.full(1200, 0.25)
    states = run_reservoir(u, default_coupling, cfg, seed=0)
    assert float(np.max(np.abs(states[-1] - states[-2]))) < 1e-9


def test_echo_state_gap_vanishes_after_washout(default_coupling):
    gap = echo_state_gap(default_coupling, ReservoirConfig(), seed=0, steps=1000)
    assert gap < 1e-6


def test_run_reservoir_validation(default_coupling):
    cfg = ReservoirConfig()
    with pytest.raises(ReservoirError):
        run_reservoir(np.zeros((5, 2)), default_coupling, cfg)
    with pytest.raises(ReservoirError):
        run_reservoir(np.zeros(5), default_coupling, cfg, x0=np.zeros(3))


def test_readout_recovers_exact_linear_map(rng):
    x = rng.uniform(0.0, 1.0, (300, 10))
    w_true = rng.standard_normal(10)
    y = x @ w_true + 1.7
    fit = train_readout(x, y, ridge=0.0)
    assert not fit.rank_deficient
    assert np.allclose(fit.node_weights, w_true, atol=1e-8)
    assert fit.intercept == pytest.approx(1.7, abs=1e-8)
    assert evaluate(fit, x, y) < 1e-15


@pytest.mark.parametrize("ridge", [1e-8, 1e-3, 1.0])
def test_readout_matches_normal_equation_oracle(rng, ridge):
    x = rng.uniform(0.0, 1.0, (500, 25))
    y = rng.standard_normal(500)
    fit = train_readout(x, y, ridge)
    xc = x - x.mean(axis=0)
    yc = y - y.mean()
    w = np.linalg.solve(xc.T @ xc + ridge * np.eye(25), xc.T @ yc)
    assert np.max(np.abs(fit.node_weights - w)) < 1e-8
    assert abs(fit.intercept - (y.mean() - x.mean(axis=0) @ w)) < 1e-8


def test_huge_ridge_collapses_to_mean_predictor(rng):
    x = rng.uniform(0.0, 1.0, (300, 10))
    y = rng.standard_normal(300)
    fit = train_readout(x, y, ridge=1e12)
    assert np.max(np.abs(fit.node_weights)) < 1e-9
    assert fit.intercept == pytest.approx(float(y.mean()), abs=1e-9)
    assert evaluate(fit, x, y) == pytest.approx(1.0, abs=1e-6)


def test_duplicate_columns_flag_rank_deficiency(rng):
    base = rng.uniform(0.0, 1.0, (200, 5))
    x = np.hstack([base, base[:, :2]])  # 7 columns, rank 5
    y = rng.standard_normal(200)
    fit0 = train_readout(x, y, ridge=0.0)
    assert fit0.rank == 5
    assert fit0.rank_deficient
    fit_r = train_readout(x, y, ridge=1e-6)
    assert not fit_r.rank_deficient  # the penalty restores identifiability


def test_train_readout_validation(rng):
    x = rng.uniform(0.0, 1.0, (100, 4))
    with pytest.raises(ReservoirError):
        train_readout(x, np.zeros(99), ridge=0.0)
    with pytest.raises(ReservoirError):
        train_readout(x[:1], np.zeros(1), ridge=0.0)
    with pytest.raises(ReservoirError):
        train_readout(x, np.zeros(100), ridge=-0.1)
    with pytest.raises(ReservoirError):
        evaluate(train_readout(x, np.zeros(100), ridge=0.0), x, np.zeros(100))


def test_apply_node_mask_zeroes_inactive_columns(rng):
    states = rng.uniform(0.0, 1.0, (50, 6))
    active = np.array([True, False, True, True, False, True])
    masked = apply_node_mask(states, active)
    assert np.all(masked[:, ~active] == 0.0)
    assert np.array_equal(masked[:, active], states[:, active])
    assert states[0, 1] != 0.0  # input untouched
    with pytest.raises(ReservoirError):
        apply_node_mask(states, active[:4])


def test_run_task_default_narma10_reference(default_coupling):
    res = run_task("narma10", default_coupling, ReservoirConfig(), seed=0)
    assert res.task == "narma10"
    assert res.n_nodes == 25
    assert res.n_active == 25
    assert res.nmse_test == pytest.approx(0.3107, abs=2e-3)
    assert res.improvement_vs_bias == pytest.approx(1.0 - res.nmse_test / res.nmse_bias_only)
    assert res.improvement_vs_bias > 0.30
    assert res.states.shape == (3200, 25)
    assert res.predictions_test.shape == (1000,)


def test_run_task_is_deterministic(default_coupling):
    a = run_task("narma10", default_coupling, FAST, seed=3)
    b = run_task("narma10", default_coupling, FAST, seed=3)
    assert a.nmse_test == b.nmse_test
    assert np.array_equal(a.states, b.states)


def test_all_masked_run_equals_bias_only_baseline(default_coupling):
    res = run_task(
        "narma10", default_coupling, FAST, seed=0, active=np.zeros(25, dtype=bool)
    )
    assert res.n_active == 0
    assert res.nmse_test == pytest.approx(res.nmse_bias_only, abs=1e-15)
    assert res.improvement_vs_bias == pytest.approx(0.0, abs=1e-12)


def test_train_error_improves_with_nested_masks(default_coupling):
    cfg = ReservoirConfig(washout=50, n_train=200, n_test=100, ridge=0.0)
    small = np.zeros(25, dtype=bool)
    small[:5] = True
    mid = np.zeros(25, dtype=bool)
    mid[:15] = True
    full = np.ones(25, dtype=bool)
    errs = [
        run_task("narma10", default_coupling, cfg, seed=0, active=m).nmse_train
        for m in (small, mid, full)
    ]
    assert errs[0] >= errs[1] - 1e-12
    assert errs[1] >= errs[2] - 1e-12


def test_run_task_with_calibrated_array_operating_point(default_coupling):
    arr = sample_array(seed=0)
    cal = calibrate_to_target(arr, 978.0)
    res = run_task(
        "narma10",
        default_coupling,
        FAST,
        seed=0,
        array=arr,
        currents_ma=np.array(cal.currents_ma),
        master_power_per_device_mw=3.4 * cal.mean_power_mw,
    )
    assert res.n_active == 25
    assert res.nmse_test < res.nmse_bias_only


def test_run_task_array_size_must_match_grid(default_coupling):
    arr = sample_array(seed=0, rows=2, cols=3)
    with pytest.raises(ReservoirError):
        run_task("narma10", default_coupling, FAST, seed=0, array=arr)


def test_run_task_rejects_bad_active_shape(default_coupling):
    with pytest.raises(ReservoirError):
        run_task("narma10", default_coupling, FAST, seed=0, active=np.ones(7, dtype=bool))


def test_coupling_matrix_weights_are_read_only(default_coupling):
    with pytest.raises(ValueError):
        default_coupling.weights[0, 0] = 5.0
