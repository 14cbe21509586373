"""Command implementations behind the service endpoints.

Each handler resolves a validated config into core-layer calls and packs
the results into the response schema.  Handlers are pure: same config,
same response.
"""

from __future__ import annotations

import math

import numpy as np

from .. import __version__
from ..array import (
    ArrayError,
    calibrate_to_target,
    homogeneity_report,
    sample_array,
    sweep_targets,
)
from ..budget import array_budget
from ..device import beta_scurve, fit_li, li_output
from ..io import config_hash
from ..locking import (
    DEFAULT_REFERENCE_BIASES_MA,
    DEFAULT_SLAVE_POWERS_MW,
    LockingError,
    LockingParams,
    fit_locking_boundaries,
    injected_power_per_laser,
    locking_bounds,
    power_ratio,
    rc_locking_extrapolation,
    synth_locking_map,
    width_factor,
)
from ..reservoir import build_doe_coupling, run_task
from ..units import optical_frequency_ghz
from . import schemas as s


def _prov(cfg, seed: int) -> s.ProvenanceBlock:
    resolved = cfg.model_dump(mode="json")
    return s.ProvenanceBlock(
        config_sha256=config_hash(resolved), seed=seed, version=__version__, config=resolved
    )


def characterize(cfg: s.CharacterizeConfig) -> s.CharacterizeResponse:
    params = cfg.device.to_params()
    currents = np.linspace(cfg.sweep.i_from_ma, cfg.sweep.i_to_ma, cfg.sweep.steps)
    powers = li_output(params, currents)
    i_th_fit, slope_fit = fit_li(currents, powers)
    pumps = np.geomspace(cfg.scurve.pump_from, cfg.scurve.pump_to, cfg.scurve.steps)
    scurve_rows = [
        s.ScurveRow(beta=b, pump=float(p), output=float(out))
        for b in cfg.scurve.betas
        for p, out in zip(pumps, beta_scurve(b, pumps))
    ]
    return s.CharacterizeResponse(
        li_table=[
            s.LIRow(current_ma=float(i), power_mw=float(p))
            for i, p in zip(currents, powers)
        ],
        scurve_table=scurve_rows,
        fit=s.LIFitBlock(i_th_ma=i_th_fit, slope_eff_w_per_a=slope_fit),
        provenance=_prov(cfg, cfg.seed),
    )


def _locking_params(nu_ghz: float, slope_ghz: float, convention: str, alpha: float) -> LockingParams:
    # the calibrated slope is a width under the "width" convention and
    # nu/Q directly under "upper"
    nu_over_q = slope_ghz / width_factor(alpha) if convention == "width" else slope_ghz
    return LockingParams(nu_ghz=nu_ghz, q_factor=nu_ghz / nu_over_q, alpha=alpha)


def locking(cfg: s.LockingConfig) -> s.LockingResponse:
    law = cfg.slope_law.to_law()
    nu = optical_frequency_ghz(cfg.lambda_nm)

    b = cfg.boundaries
    sqrt_ratios = np.linspace(b.sqrt_ratio_from, b.sqrt_ratio_to, b.steps)
    lp = _locking_params(nu, law.slope_at(b.bias_ma), cfg.slope_convention, cfg.alpha)
    bounds = [locking_bounds(lp, float(sr) ** 2) for sr in sqrt_ratios]
    fit = fit_locking_boundaries(
        sqrt_ratios, [lo for lo, _ in bounds], [up for _, up in bounds]
    )

    w = cfg.widths
    if w.slave_powers_mw is not None:
        slave_powers = list(w.slave_powers_mw)
    elif tuple(w.biases_ma) == DEFAULT_REFERENCE_BIASES_MA:
        slave_powers = list(DEFAULT_SLAVE_POWERS_MW)
    else:
        raise LockingError("slave_powers_mw is required for non-default bias lists")
    width_rows = []
    for bias, slave in zip(w.biases_ma, slave_powers):
        slope = law.slope_at(bias)
        width_rows.append(
            s.WidthRow(
                bias_ma=bias,
                slope_ghz_per_sqrt_ratio=slope,
                slave_power_mw=slave,
                injected_mw=injected_power_per_laser(
                    w.input_power_mw, w.n_lasers, w.injection_fraction
                ),
                width_ghz=rc_locking_extrapolation(
                    w.input_power_mw, w.n_lasers, w.injection_fraction, slave, slope
                ),
            )
        )

    ratio = power_ratio(
        cfg.ratio.master_mw, cfg.ratio.slave_mw, cfg.ratio.objective_loss, cfg.ratio.loss_mode
    )
    m = cfg.map
    slope_map = law.slope_at(m.bias_ma)
    width_at_ratio = slope_map * math.sqrt(ratio)
    if cfg.slope_convention == "upper":
        width_at_ratio *= width_factor(cfg.alpha)
    detunings = np.linspace(m.detuning_from_ghz, m.detuning_to_ghz, m.detuning_steps)
    freqs = np.linspace(m.freq_from_ghz, m.freq_to_ghz, m.freq_steps)
    lp_map = _locking_params(nu, slope_map, cfg.slope_convention, cfg.alpha)
    grid = synth_locking_map(lp_map, ratio, detunings, freqs, m.enhancement, m.linewidth_ghz)
    map_rows = [
        s.MapRow(detuning_ghz=float(d), freq_ghz=float(f), intensity=float(grid[i, j]))
        for i, d in enumerate(detunings)
        for j, f in enumerate(freqs)
    ]
    return s.LockingResponse(
        boundary_table=[
            s.BoundaryRow(sqrt_ratio=float(sr), lower_ghz=lo, upper_ghz=up)
            for sr, (lo, up) in zip(sqrt_ratios, bounds)
        ],
        boundary_fit=s.BoundaryFitBlock(
            nu_over_q_ghz=fit.nu_over_q_ghz, alpha=fit.alpha, degenerate=fit.degenerate
        ),
        width_table=width_rows,
        power_ratio=ratio,
        width_at_ratio_ghz=width_at_ratio,
        map_table=map_rows,
        provenance=_prov(cfg, cfg.seed),
    )


def calibrate(cfg: s.CalibrateConfig) -> s.CalibrateResponse:
    arr = sample_array(cfg.stats.to_stats(), cfg.seed, cfg.rows, cfg.cols)
    hom = homogeneity_report(arr, cfg.uniform_bias_ma)
    cal = calibrate_to_target(arr, cfg.target_nm, i_max_ma=cfg.i_max_ma)
    trend = sweep_targets(arr, cfg.sweep.from_nm, cfg.sweep.to_nm, cfg.sweep.steps,
                          i_max_ma=cfg.i_max_ma)
    return s.CalibrateResponse(
        homogeneity=s.HomogeneityBlock(
            bias_ma=hom.bias_ma,
            mean_nm=hom.mean_nm,
            sd_nm=hom.sd_nm,
            span_nm=hom.span_nm,
            span_ghz=hom.span_ghz,
            span_uev=hom.span_uev,
            table=[
                s.LambdaRow(row=d.row, col=d.col, lambda_nm=lam)
                for d, lam in zip(arr.devices, hom.lambda_nm)
            ],
        ),
        calibration_table=[
            s.CalibrationRow(
                row=r, col=c, current_ua=i * 1000.0, power_mw=p, lambda_nm=lam
            )
            for (r, c), i, p, lam in zip(
                cal.positions, cal.currents_ma, cal.powers_mw, cal.achieved_nm
            )
        ],
        calibration_summary=s.CalibrationSummaryBlock(
            target_nm=cal.target_nm,
            mean_current_ma=cal.mean_current_ma,
            sd_current_ma=cal.sd_current_ma,
            span_current_ma=cal.span_current_ma,
            mean_power_mw=cal.mean_power_mw,
            sd_power_mw=cal.sd_power_mw,
            span_power_mw=cal.span_power_mw,
            n_converged=len(cal.currents_ma),
            failures=[s.FailureRow(row=r, col=c, reason=msg) for r, c, msg in cal.failures],
        ),
        sweep_table=[
            s.TrendRow(
                target_nm=t.target_nm,
                mean_current_ua=t.mean_current_ma * 1000.0,
                sd_current_ua=t.sd_current_ma * 1000.0,
                span_current_ua=t.span_current_ma * 1000.0,
                mean_power_uw=t.mean_power_mw * 1000.0,
                sd_power_uw=t.sd_power_mw * 1000.0,
                span_power_uw=t.span_power_mw * 1000.0,
                rel_power_dev=t.rel_power_dev,
                n_converged=t.n_converged,
                n_failed=t.n_failed,
            )
            for t in trend
        ],
        array=arr.to_dict(),
        provenance=_prov(cfg, cfg.seed),
    )


def rc(cfg: s.RcConfig) -> s.RcResponse:
    c = cfg.coupling
    coupling = build_doe_coupling(
        rows=c.rows,
        cols=c.cols,
        strengths=c.strengths,
        radius=c.radius,
        self_coupling=c.self_coupling,
        row_sum_bound=c.row_sum_bound,
    )
    rcfg = cfg.reservoir.to_config()
    kwargs = {}
    if cfg.array is not None:
        arr = sample_array(cfg.array.stats.to_stats(), cfg.seed, c.rows, c.cols)
        cal = calibrate_to_target(arr, cfg.array.target_nm)
        if cal.failures:
            raise ArrayError(
                f"{len(cal.failures)} devices cannot reach {cfg.array.target_nm} nm; "
                "no well-defined operating point"
            )
        kwargs = dict(
            array=arr,
            currents_ma=np.asarray(cal.currents_ma),
            master_power_per_device_mw=cfg.array.injection_ratio * cal.mean_power_mw,
        )
    res = run_task(cfg.task, coupling, rcfg, seed=cfg.seed, **kwargs)
    return s.RcResponse(
        metrics=s.RcMetricsBlock(
            task=res.task,
            seed=res.seed,
            n_nodes=res.n_nodes,
            n_active=res.n_active,
            nmse_train=res.nmse_train,
            nmse_test=res.nmse_test,
            nmse_bias_only=res.nmse_bias_only,
            improvement_vs_bias=res.improvement_vs_bias,
            coupling_spectral_radius=rcfg.spectral_radius,
            contraction_factor=rcfg.contraction_factor(),
            rank_deficient=res.weights.rank_deficient,
        ),
        active=list(res.active),
        states_trace=[[float(v) for v in row] for row in res.states[: cfg.trace_steps]],
        provenance=_prov(cfg, cfg.seed),
    )


def budget(cfg: s.BudgetConfig) -> s.BudgetResponse:
    bias = cfg.bias_ua
    if isinstance(bias, float | int):
        bias = [float(bias)] * cfg.n_devices
    rep = array_budget(
        bias,
        cfg.injection_mw,
        cfg.bandwidth_ghz,
        v_bias_v=cfg.v_bias_v,
        master_overhead_mw=cfg.master_overhead_mw,
    )
    return s.BudgetResponse(
        report=s.BudgetReportBlock(**rep.to_dict()), provenance=_prov(cfg, cfg.seed)
    )
