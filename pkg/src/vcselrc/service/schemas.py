"""Request and response models for every service command.

All models reject unknown keys, so a typo in a config is a validation
error rather than a silently ignored field.  Config blocks carry the
committed defaults; the provenance block of each response embeds the
fully resolved config, its hash, the seed, and the tool version.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..array import HeterogeneityStats
from ..device import DeviceParams
from ..locking import LOSS_MODES, SLOPE_CONVENTIONS, BiasSlopeLaw
from ..reservoir import NONLINEARITIES, ReservoirConfig
from ..tasks import TASKS


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProvenanceBlock(StrictModel):
    config_sha256: str
    seed: int
    version: str
    config: dict


# ---------------------------------------------------------------- characterize


class DeviceBlock(StrictModel):
    """Single-device parameters; a null rollover current means a linear LI."""

    i_th_ma: float = 0.368
    slope_eff_w_per_a: float = 0.359
    i_sat_ma: float | None = None
    beta: float = Field(default=0.0032, gt=0, le=1)
    lambda_ref_nm: float = 977.77
    i_ref_ma: float = 0.7
    v_bias_v: float = 2.0
    tune_coeff_nm_per_mw: float = 0.23 / 2.08
    pol_angle_deg: float = 0.0
    q_ref: float = 2.5e5
    q_slope_per_ma: float = 0.0

    def to_params(self) -> DeviceParams:
        d = self.model_dump()
        d["i_sat_ma"] = math.inf if d["i_sat_ma"] is None else d["i_sat_ma"]
        return DeviceParams(**d)


class CurrentSweepBlock(StrictModel):
    i_from_ma: float = 0.0
    i_to_ma: float = 3.0
    steps: int = Field(default=61, ge=2)

    @model_validator(mode="after")
    def _increasing(self):
        if self.i_to_ma <= self.i_from_ma:
            raise ValueError("sweep range must be increasing")
        return self


class ScurveBlock(StrictModel):
    """Log-spaced pump grid for the spontaneous-coupling response curves."""

    betas: list[float] = Field(default=[0.0032, 0.01, 0.1, 1.0], min_length=1)
    pump_from: float = Field(default=1e-2, gt=0)
    pump_to: float = 10.0
    steps: int = Field(default=41, ge=2)

    @model_validator(mode="after")
    def _valid(self):
        if self.pump_to <= self.pump_from:
            raise ValueError("pump range must be increasing")
        if any(not 0 < b <= 1 for b in self.betas):
            raise ValueError("every beta must be in (0, 1]")
        return self


class CharacterizeConfig(StrictModel):
    device: DeviceBlock = Field(default_factory=DeviceBlock)
    sweep: CurrentSweepBlock = Field(default_factory=CurrentSweepBlock)
    scurve: ScurveBlock = Field(default_factory=ScurveBlock)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _sweep_crosses_threshold(self):
        if self.sweep.i_to_ma <= self.device.i_th_ma:
            raise ValueError("current sweep must extend beyond the threshold current")
        return self


class LIRow(StrictModel):
    current_ma: float
    power_mw: float


class ScurveRow(StrictModel):
    beta: float
    pump: float
    output: float


class LIFitBlock(StrictModel):
    i_th_ma: float
    slope_eff_w_per_a: float


class CharacterizeResponse(StrictModel):
    li_table: list[LIRow]
    scurve_table: list[ScurveRow]
    fit: LIFitBlock
    provenance: ProvenanceBlock


# -------------------------------------------------------------------- locking


class SlopeLawBlock(StrictModel):
    """Two measured (bias, slope) anchor points pinning the slope law."""

    bias_lo_ma: float = 0.76
    slope_lo_ghz: float = 5.2
    bias_hi_ma: float = 2.2
    slope_hi_ghz: float = 16.8
    i_ref_ma: float = 0.7

    def to_law(self) -> BiasSlopeLaw:
        return BiasSlopeLaw.calibrate(
            self.bias_lo_ma, self.slope_lo_ghz, self.bias_hi_ma, self.slope_hi_ghz,
            i_ref_ma=self.i_ref_ma,
        )


class BoundaryTableBlock(StrictModel):
    bias_ma: float = 1.2
    sqrt_ratio_from: float = Field(default=0.2, gt=0)
    sqrt_ratio_to: float = 2.0
    steps: int = Field(default=10, ge=2)

    @model_validator(mode="after")
    def _increasing(self):
        if self.sqrt_ratio_to <= self.sqrt_ratio_from:
            raise ValueError("sqrt-ratio range must be increasing")
        return self


class WidthTableBlock(StrictModel):
    """Extrapolation of the calibrated lines to a fanned-out operating point."""

    biases_ma: list[float] = Field(default=[0.76, 1.2, 1.7, 2.2], min_length=1)
    slave_powers_mw: list[float] | None = None
    input_power_mw: float = Field(default=100.0, ge=0)
    n_lasers: int = Field(default=25, ge=1)
    injection_fraction: float = Field(default=0.5, ge=0, le=1)

    @model_validator(mode="after")
    def _sizes(self):
        if self.slave_powers_mw is not None and len(self.slave_powers_mw) != len(self.biases_ma):
            raise ValueError("need one slave power per bias")
        return self


class RatioBlock(StrictModel):
    """Measured master/slave powers and the objective-loss correction mode."""

    master_mw: float = Field(default=0.870, ge=0)
    slave_mw: float = Field(default=0.288, gt=0)
    objective_loss: float = Field(default=0.30, ge=0, lt=1)
    loss_mode: str = "symmetric"

    @model_validator(mode="after")
    def _mode(self):
        if self.loss_mode not in LOSS_MODES:
            raise ValueError(f"loss_mode must be one of {LOSS_MODES}")
        return self


class MapBlock(StrictModel):
    bias_ma: float = 1.2
    detuning_from_ghz: float = -30.0
    detuning_to_ghz: float = 15.0
    detuning_steps: int = Field(default=31, ge=2)
    freq_from_ghz: float = -30.0
    freq_to_ghz: float = 30.0
    freq_steps: int = Field(default=61, ge=2)
    enhancement: float = Field(default=6.0, gt=0)
    linewidth_ghz: float = Field(default=0.5, gt=0)

    @model_validator(mode="after")
    def _increasing(self):
        if self.detuning_to_ghz <= self.detuning_from_ghz:
            raise ValueError("detuning range must be increasing")
        if self.freq_to_ghz <= self.freq_from_ghz:
            raise ValueError("frequency range must be increasing")
        return self


class LockingConfig(StrictModel):
    lambda_nm: float = Field(default=977.77, gt=0)
    alpha: float = Field(default=3.0, ge=0)
    slope_convention: str = "width"
    slope_law: SlopeLawBlock = Field(default_factory=SlopeLawBlock)
    boundaries: BoundaryTableBlock = Field(default_factory=BoundaryTableBlock)
    widths: WidthTableBlock = Field(default_factory=WidthTableBlock)
    ratio: RatioBlock = Field(default_factory=RatioBlock)
    map: MapBlock = Field(default_factory=MapBlock)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _convention(self):
        if self.slope_convention not in SLOPE_CONVENTIONS:
            raise ValueError(f"slope_convention must be one of {SLOPE_CONVENTIONS}")
        return self


class BoundaryRow(StrictModel):
    sqrt_ratio: float
    lower_ghz: float
    upper_ghz: float


class BoundaryFitBlock(StrictModel):
    nu_over_q_ghz: float
    alpha: float
    degenerate: bool


class WidthRow(StrictModel):
    bias_ma: float
    slope_ghz_per_sqrt_ratio: float
    slave_power_mw: float
    injected_mw: float
    width_ghz: float


class MapRow(StrictModel):
    detuning_ghz: float
    freq_ghz: float
    intensity: float


class LockingResponse(StrictModel):
    boundary_table: list[BoundaryRow]
    boundary_fit: BoundaryFitBlock
    width_table: list[WidthRow]
    power_ratio: float
    width_at_ratio_ghz: float
    map_table: list[MapRow]
    provenance: ProvenanceBlock


# ------------------------------------------------------------------ calibrate


class StatsBlock(StrictModel):
    """Device-to-device statistics; mirrors the sampler's parameters."""

    i_th_mean_ma: float = 0.368
    i_th_sd_ma: float = Field(default=0.011, ge=0)
    slope_mean_w_per_a: float = 0.359
    slope_sd_w_per_a: float = Field(default=0.045, ge=0)
    lambda_mean_nm: float = 977.77
    lambda_sd_nm: float = Field(default=0.033, ge=0)
    lambda_span_max_nm: float = Field(default=0.112, gt=0)
    lambda_edge_weight: float = Field(default=0.85, gt=0)
    pol_mean_deg: float = 0.0
    pol_sd_deg: float = Field(default=1.5, ge=0)
    pol_span_max_deg: float = Field(default=2.8, gt=0)
    tune_coeff_nm_per_mw: float = 0.23 / 2.08
    tune_noise_rel: float = Field(default=0.01, ge=0, lt=1)
    lambda_convergence_nm: float = 981.0
    v_bias_v: float = 2.0
    i_ref_ma: float = 0.7
    i_sat_ma: float | None = None
    beta: float = Field(default=0.0032, gt=0, le=1)
    clip_sigmas: float = Field(default=4.0, gt=0)

    def to_stats(self) -> HeterogeneityStats:
        d = self.model_dump()
        d["i_sat_ma"] = math.inf if d["i_sat_ma"] is None else d["i_sat_ma"]
        return HeterogeneityStats(**d)


class TargetSweepBlock(StrictModel):
    from_nm: float = 977.8
    to_nm: float = 978.6
    steps: int = Field(default=5, ge=2)

    @model_validator(mode="after")
    def _increasing(self):
        if self.to_nm <= self.from_nm:
            raise ValueError("sweep range must be increasing")
        return self


class CalibrateConfig(StrictModel):
    stats: StatsBlock = Field(default_factory=StatsBlock)
    rows: int = Field(default=5, ge=1)
    cols: int = Field(default=5, ge=1)
    uniform_bias_ma: float = Field(default=0.7, gt=0)
    target_nm: float = Field(default=978.0, gt=0)
    sweep: TargetSweepBlock = Field(default_factory=TargetSweepBlock)
    i_max_ma: float = Field(default=5.0, gt=0)
    seed: int = Field(default=0, ge=0)


class LambdaRow(StrictModel):
    row: int
    col: int
    lambda_nm: float


class HomogeneityBlock(StrictModel):
    bias_ma: float
    mean_nm: float
    sd_nm: float
    span_nm: float
    span_ghz: float
    span_uev: float
    table: list[LambdaRow]


class CalibrationRow(StrictModel):
    row: int
    col: int
    current_ua: float
    power_mw: float
    lambda_nm: float


class FailureRow(StrictModel):
    row: int
    col: int
    reason: str


class CalibrationSummaryBlock(StrictModel):
    target_nm: float
    mean_current_ma: float
    sd_current_ma: float
    span_current_ma: float
    mean_power_mw: float
    sd_power_mw: float
    span_power_mw: float
    n_converged: int
    failures: list[FailureRow]


class TrendRow(StrictModel):
    target_nm: float
    mean_current_ua: float
    sd_current_ua: float
    span_current_ua: float
    mean_power_uw: float
    sd_power_uw: float
    span_power_uw: float
    rel_power_dev: float
    n_converged: int
    n_failed: int


class CalibrateResponse(StrictModel):
    homogeneity: HomogeneityBlock
    calibration_table: list[CalibrationRow]
    calibration_summary: CalibrationSummaryBlock
    sweep_table: list[TrendRow]
    array: dict
    provenance: ProvenanceBlock


# ------------------------------------------------------------------------- rc


class ReservoirBlock(StrictModel):
    leak: float = Field(default=0.35, gt=0, le=1)
    spectral_radius: float = Field(default=0.9, ge=0)
    input_scale: float = Field(default=0.2, ge=0)
    bias_scale: float = Field(default=0.2, ge=0)
    nonlinearity: str = "saturating"
    node_scale: float = Field(default=1.0, gt=0)
    ridge: float = Field(default=1e-8, ge=0)
    washout: int = Field(default=200, ge=0)
    n_train: int = Field(default=2000, ge=50)
    n_test: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def _nonlinearity(self):
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f"nonlinearity must be one of {NONLINEARITIES}")
        return self

    def to_config(self) -> ReservoirConfig:
        return ReservoirConfig(**self.model_dump())


class CouplingBlock(StrictModel):
    rows: int = Field(default=5, ge=1)
    cols: int = Field(default=5, ge=1)
    strengths: dict[int, float] = Field(default={1: 1.0, 2: 0.4})
    radius: int | None = None
    self_coupling: float = 0.0
    row_sum_bound: float | None = None


class RcArrayBlock(StrictModel):
    """Optional physical operating point driving efficiencies and masking."""

    stats: StatsBlock = Field(default_factory=StatsBlock)
    target_nm: float = Field(default=978.0, gt=0)
    injection_ratio: float = Field(default=3.4, ge=0)


class RcConfig(StrictModel):
    task: str = "narma10"
    reservoir: ReservoirBlock = Field(default_factory=ReservoirBlock)
    coupling: CouplingBlock = Field(default_factory=CouplingBlock)
    array: RcArrayBlock | None = None
    trace_steps: int = Field(default=200, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _task(self):
        key = self.task.strip().lower().replace("-", "_")
        if key not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        return self


class RcMetricsBlock(StrictModel):
    task: str
    seed: int
    n_nodes: int
    n_active: int
    nmse_train: float
    nmse_test: float
    nmse_bias_only: float
    improvement_vs_bias: float
    coupling_spectral_radius: float
    contraction_factor: float
    rank_deficient: bool


class RcResponse(StrictModel):
    metrics: RcMetricsBlock
    active: list[bool]
    states_trace: list[list[float]]
    provenance: ProvenanceBlock


# --------------------------------------------------------------------- budget


class BudgetConfig(StrictModel):
    bias_ua: float | list[float] = 760.0
    n_devices: int = Field(default=25, ge=1)
    v_bias_v: float = Field(default=2.0, ge=0)
    injection_mw: float | list[float] = 0.609
    bandwidth_ghz: float = Field(default=20.0, gt=0)
    master_overhead_mw: float = Field(default=0.0, ge=0)
    seed: int = Field(default=0, ge=0)


class BudgetReportBlock(StrictModel):
    bias_ua: list[float]
    electrical_mw: list[float]
    injection_mw: list[float]
    total_mw: list[float]
    array_total_mw: float
    device_energy_fj: list[float]
    array_energy_pj: float
    bandwidth_ghz: float
    master_overhead_mw: float


class BudgetResponse(StrictModel):
    report: BudgetReportBlock
    provenance: ProvenanceBlock


# --------------------------------------------------------------------- errors


class ErrorBody(StrictModel):
    kind: str
    message: str


class ErrorResponse(StrictModel):
    error: ErrorBody
