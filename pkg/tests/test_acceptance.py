"""End-to-end checks of the toolkit's headline numbers and guarantees.

One test per guarantee, each at its stated tolerance, so a verbose run
reads as a checklist.  Ensemble statistics use fixed seed lists; the
windows describe ensemble means of per-array statistics, not any single
sampled array.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from vcselrc.array import (
    calibrate_to_target,
    homogeneity_report,
    locked_fraction,
    sample_array,
    sweep_targets,
)
from vcselrc.budget import array_budget, device_power_mw, energy_per_transform_fj
from vcselrc.cli import EXIT_OK, main
from vcselrc.device import li_output
from vcselrc.locking import (
    DEFAULT_REFERENCE_BIASES_MA,
    DEFAULT_SLAVE_POWERS_MW,
    DEFAULT_SLOPE_LAW,
    LockingParams,
    fit_locking_boundaries,
    injected_power_per_laser,
    locking_bounds,
    locking_width,
    power_ratio,
    rc_locking_extrapolation,
)
from vcselrc.reservoir import (
    ReservoirConfig,
    build_doe_coupling,
    echo_state_gap,
    run_task,
    train_readout,
)
from vcselrc.units import convert_detuning

import vcselrc.budget


def test_unit_conversions_hit_reference_values_and_round_trip():
    ghz = convert_detuning(0.112, "nm", "GHz", 977.77)
    assert abs(ghz - 35.12) <= 0.05
    assert abs(convert_detuning(0.112, "nm", "ueV", 977.77) - 145.2) <= 0.5
    assert abs(convert_detuning(0.033, "nm", "ueV", 977.77) - 42.4) <= 0.5
    rng = np.random.default_rng(42)
    units = ("nm", "GHz", "ueV")
    for _ in range(500):
        v = float(rng.uniform(1e-4, 0.5))
        lam = float(rng.uniform(900.0, 1100.0))
        a, b = rng.choice(len(units), 2)
        back = convert_detuning(
            convert_detuning(v, units[a], units[b], lam), units[b], units[a], lam
        )
        assert abs(back - v) <= 1e-9 * v


def test_locking_interval_asymmetry_width_scaling_and_alpha_zero_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(300):
        lp = LockingParams(
            nu_ghz=float(rng.uniform(1e5, 5e5)),
            q_factor=float(rng.uniform(1e4, 1e6)),
            alpha=float(rng.uniform(0.0, 8.0)),
        )
        ratio = float(rng.uniform(1e-3, 30.0))
        lower, upper = locking_bounds(lp, ratio)
        assert abs(-lower / upper - math.sqrt(1.0 + lp.alpha**2)) < 1e-12
        k = float(rng.uniform(0.05, 20.0))
        assert abs(
            locking_width(lp, k * ratio) / locking_width(lp, ratio) - math.sqrt(k)
        ) < 1e-12
        sym = LockingParams(nu_ghz=lp.nu_ghz, q_factor=lp.q_factor, alpha=0.0)
        lo0, up0 = locking_bounds(sym, ratio)
        assert abs(lo0 + up0) <= 1e-12 * up0


def test_boundary_fit_recovers_parameters_noiseless_and_under_noise():
    rng = np.random.default_rng(2)
    for _ in range(50):
        lp = LockingParams(
            nu_ghz=float(rng.uniform(1e5, 5e5)),
            q_factor=float(rng.uniform(1e4, 1e6)),
            alpha=float(rng.uniform(0.3, 7.0)),
        )
        x = np.sqrt(rng.uniform(0.05, 9.0, 12))
        lowers, uppers = zip(*(locking_bounds(lp, float(s * s)) for s in x))
        fit = fit_locking_boundaries(x, lowers, uppers)
        assert abs(fit.nu_over_q_ghz - lp.nu_over_q_ghz) / lp.nu_over_q_ghz < 1e-6
        assert abs(fit.alpha - lp.alpha) / lp.alpha < 1e-6
    lp = LockingParams(nu_ghz=3.066e5, q_factor=9.3e4, alpha=3.0)
    x = np.linspace(0.2, 2.0, 10)
    clean_lo = np.array([locking_bounds(lp, float(s * s))[0] for s in x])
    clean_up = np.array([locking_bounds(lp, float(s * s))[1] for s in x])
    for seed in range(100):
        noise = np.random.default_rng(seed)
        fit = fit_locking_boundaries(
            x,
            clean_lo * (1.0 + 0.02 * noise.standard_normal(x.shape)),
            clean_up * (1.0 + 0.02 * noise.standard_normal(x.shape)),
        )
        assert abs(fit.nu_over_q_ghz - lp.nu_over_q_ghz) / lp.nu_over_q_ghz < 0.05


def test_bias_slope_law_endpoints_exact_and_operating_point_width_in_window():
    assert abs(DEFAULT_SLOPE_LAW.slope_at(0.76) - 5.2) < 1e-9
    assert abs(DEFAULT_SLOPE_LAW.slope_at(2.2) - 16.8) < 1e-9
    ratio = power_ratio(0.870, 0.288, objective_loss=0.30, mode="symmetric")
    width = DEFAULT_SLOPE_LAW.slope_at(1.2) * math.sqrt(ratio)
    assert abs(width - 12.7) <= 2.1


def test_fanout_extrapolation_exact_share_and_width_range():
    assert injected_power_per_laser(100.0, 25, 0.5) == 2.0
    widths = [
        rc_locking_extrapolation(100.0, 25, 0.5, slave, DEFAULT_SLOPE_LAW.slope_at(bias))
        for bias, slave in zip(DEFAULT_REFERENCE_BIASES_MA, DEFAULT_SLAVE_POWERS_MW)
    ]
    assert abs(widths[0] - 18.8) / 18.8 <= 0.10
    assert abs(widths[-1] - 24.8) / 24.8 <= 0.10
    assert all(18.8 * 0.9 <= w <= 24.8 * 1.1 for w in widths)
    assert all(a < b for a, b in zip(widths, widths[1:]))


def test_array_homogeneity_ensemble_statistics_within_windows():
    t0 = time.time()
    means, sds = [], []
    for seed in range(10000):
        rep = homogeneity_report(sample_array(seed=seed), 0.7)
        means.append(rep.mean_nm)
        sds.append(rep.sd_nm)
        assert rep.span_nm <= 0.112
    elapsed = time.time() - t0
    assert abs(float(np.mean(means)) - 977.77) <= 0.01
    assert abs(float(np.mean(sds)) - 0.033) <= 0.003
    assert elapsed < 60.0


def test_array_calibration_ensemble_statistics_within_windows():
    mean_i, sd_i, span_i, mean_p = [], [], [], []
    for seed in range(300):
        cal = calibrate_to_target(sample_array(seed=seed), 978.0)
        assert not cal.failures
        assert all(abs(lam - 978.0) <= 1e-4 for lam in cal.achieved_nm)
        mean_i.append(cal.mean_current_ma)
        sd_i.append(cal.sd_current_ma)
        span_i.append(cal.span_current_ma)
        mean_p.append(cal.mean_power_mw)
    assert abs(float(np.mean(mean_i)) - 1.74) <= 0.15
    assert abs(float(np.mean(sd_i)) - 0.12) <= 0.04
    assert abs(float(np.mean(span_i)) - 0.41) <= 0.10
    assert abs(float(np.mean(mean_p)) - 0.50) <= 0.10


def test_tuning_trend_ensemble_endpoints_within_windows():
    acc = None
    n_seeds = 300
    for seed in range(n_seeds):
        rows = sweep_targets(sample_array(seed=seed), 977.8, 978.6, 5)
        stats = np.array(
            [[r.sd_current_ma, r.span_power_mw, r.rel_power_dev] for r in rows]
        )
        acc = stats if acc is None else acc + stats
    acc /= n_seeds
    sd_current_ua = acc[:, 0] * 1000.0
    span_power_uw = acc[:, 1] * 1000.0
    rel_dev = acc[:, 2]
    assert all(a > b for a, b in zip(sd_current_ua, sd_current_ua[1:]))
    assert abs(sd_current_ua[0] - 185.0) <= 0.25 * 185.0
    assert abs(sd_current_ua[-1] - 110.0) <= 0.25 * 110.0
    assert all(a < b for a, b in zip(span_power_uw, span_power_uw[1:]))
    assert abs(span_power_uw[0] - 240.0) <= 0.30 * 240.0
    assert abs(span_power_uw[-1] - 700.0) <= 0.30 * 700.0
    assert all(a > b for a, b in zip(rel_dev, rel_dev[1:]))
    assert abs(rel_dev[0] - 0.42) <= 0.08
    assert abs(rel_dev[-1] - 0.13) <= 0.08


def test_energy_budget_reference_points_linearity_and_consistency_note():
    device_mw = device_power_mw(760.0, 2.0, 0.609)
    assert abs(energy_per_transform_fj(device_mw, 20.0) - 106.5) <= 6.0
    rep = array_budget([760.0] * 25, 0.609, bandwidth_ghz=20.0)
    assert abs(rep.array_energy_pj - 2.6) <= 0.2
    # linearity: totals add over concatenation and scale with device count
    half_a = array_budget([760.0] * 12, 0.609, bandwidth_ghz=20.0)
    half_b = array_budget([760.0] * 13, 0.609, bandwidth_ghz=20.0)
    assert abs(rep.array_total_mw - (half_a.array_total_mw + half_b.array_total_mw)) < 1e-12
    assert abs(rep.array_total_mw - 25.0 * device_mw) < 1e-12
    # the occasionally quoted ~45 mW aggregate is inconsistent with the
    # per-device numbers; the module documents that and reports only the
    # self-consistent total
    assert "inconsistent" in vcselrc.budget.__doc__
    assert "45 mW" in vcselrc.budget.__doc__
    assert abs(rep.array_total_mw - 45.0) > 5.0


def test_majority_locks_across_seeded_arrays_and_all_lock_after_calibration():
    hits = 0
    for seed in range(1000):
        arr = sample_array(seed=seed)
        powers = np.array([li_output(d.params, 0.7) for d in arr.devices])
        frac = locked_fraction(arr, 0.7, 3.4 * float(powers.mean()))
        if frac > 0.5:
            hits += 1
    assert hits >= 950
    arr = sample_array(seed=0)
    cal = calibrate_to_target(arr, 978.0)
    assert locked_fraction(
        arr, np.array(cal.currents_ma), 3.4 * cal.mean_power_mw
    ) == 1.0


def test_reservoir_contraction_readout_oracle_and_narma10_benchmark():
    t0 = time.time()
    coupling = build_doe_coupling()
    config = ReservoirConfig()
    assert config.contraction_factor() < 1.0
    assert echo_state_gap(coupling, config, seed=0) < 1e-6
    rng = np.random.default_rng(3)
    states = rng.uniform(0.0, 1.0, (600, 25))
    targets = rng.standard_normal(600)
    fit = train_readout(states, targets, config.ridge)
    xc = states - states.mean(axis=0)
    yc = targets - targets.mean()
    oracle = np.linalg.solve(xc.T @ xc + config.ridge * np.eye(25), xc.T @ yc)
    assert float(np.max(np.abs(fit.node_weights - oracle))) < 1e-8
    for seed in range(5):
        res = run_task("narma10", coupling, config, seed=seed)
        assert res.nmse_test < 0.5
        assert res.improvement_vs_bias >= 0.30
    assert time.time() - t0 < 120.0


def test_cli_outputs_are_byte_reproducible_from_config_and_seed(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"seed": 9}))
    rc_cfg = tmp_path / "rc.json"
    rc_cfg.write_text(
        json.dumps(
            {"reservoir": {"washout": 50, "n_train": 200, "n_test": 100},
             "trace_steps": 20, "seed": 9}
        )
    )
    runs = [
        ("characterize", []),
        ("calibrate", ["--config", str(cfg)]),
        ("locking", []),
        ("rc", ["--config", str(rc_cfg)]),
        ("budget", ["--seed", "5"]),
    ]
    for verb, extra in runs:
        a, b = tmp_path / f"a_{verb}", tmp_path / f"b_{verb}"
        assert main([verb, "--out", str(a), *extra]) == EXIT_OK
        assert main([verb, "--out", str(b), *extra]) == EXIT_OK
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
