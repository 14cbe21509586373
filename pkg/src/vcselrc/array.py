"""Array-level statistics: sampling, homogeneity, calibration, locking yield.

An array is a grid of emitters drawn from measured device statistics.  The
sampling model reproduces the measured single-array numbers:

* wavelength offsets follow a symmetric Beta distribution scaled to the
  measured maximum span, so any sampled array respects the span while the
  ensemble standard deviation matches the measured one;
* thresholds, slope efficiencies and polarization angles are clipped
  Gaussians (polarization clipped at half the measured maximum spread);
* per-device tuning coefficients shrink in proportion to the remaining
  distance to a convergence wavelength, which makes the per-device
  current-versus-target lines converge slowly and the bias spread fall
  with target wavelength, as observed.  A small independent relative
  noise is added on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .device import (
    DeviceModelError,
    DeviceParams,
    TuningRangeError,
    current_for_wavelength,
    injection_efficiency,
    li_output,
    wavelength_of_current,
)
from .locking import (
    DEFAULT_ALPHA,
    BiasSlopeLaw,
    DEFAULT_SLOPE_LAW,
    LockingParams,
    is_locked,
    locking_bounds,
)
from .units import convert_detuning, optical_frequency_ghz


class ArrayError(ValueError):
    """Array construction or analysis failure."""


@dataclass(frozen=True)
class HeterogeneityStats:
    """Device-to-device statistics an array is sampled from.

    Mean/sigma pairs for threshold, slope efficiency, reference wavelength
    and polarization angle, plus hard span caps for the latter two.  The
    ``lambda_edge_weight`` is the symmetric Beta shape of the wavelength
    offsets (1 is uniform on the span; below 1 weights the edges).
    """

    i_th_mean_ma: float = 0.368
    i_th_sd_ma: float = 0.011
    slope_mean_w_per_a: float = 0.359
    slope_sd_w_per_a: float = 0.045
    lambda_mean_nm: float = 977.77
    lambda_sd_nm: float = 0.033
    lambda_span_max_nm: float = 0.112
    lambda_edge_weight: float = 0.85
    pol_mean_deg: float = 0.0
    pol_sd_deg: float = 1.5
    pol_span_max_deg: float = 2.8
    tune_coeff_nm_per_mw: float = 0.23 / 2.08
    tune_noise_rel: float = 0.01
    lambda_convergence_nm: float = 981.0
    v_bias_v: float = 2.0
    i_ref_ma: float = 0.7
    i_sat_ma: float = math.inf
    beta: float = 0.0032
    clip_sigmas: float = 4.0

    def __post_init__(self) -> None:
        for name in ("i_th_sd_ma", "slope_sd_w_per_a", "lambda_sd_nm", "pol_sd_deg"):
            if getattr(self, name) < 0:
                raise ArrayError(f"{name} must be >= 0")
        if self.lambda_span_max_nm <= 0 or self.pol_span_max_deg <= 0:
            raise ArrayError("span caps must be > 0")
        if self.lambda_edge_weight <= 0:
            raise ArrayError("lambda_edge_weight must be > 0")
        if not 0 <= self.tune_noise_rel < 1:
            raise ArrayError("tune_noise_rel must be in [0, 1)")
        if self.lambda_convergence_nm <= self.lambda_mean_nm:
            raise ArrayError("convergence wavelength must exceed the mean wavelength")
        if self.clip_sigmas <= 0:
            raise ArrayError("clip_sigmas must be > 0")


DEFAULT_STATS = HeterogeneityStats()


@dataclass(frozen=True)
class DeviceRecord:
    row: int
    col: int
    params: DeviceParams


@dataclass(frozen=True)
class ArrayModel:
    """A sampled grid of emitters plus the statistics and seed behind it."""

    stats: HeterogeneityStats
    seed: int
    rows: int
    cols: int
    devices: tuple[DeviceRecord, ...]

    @property
    def n(self) -> int:
        return len(self.devices)

    def params(self) -> list[DeviceParams]:
        return [d.params for d in self.devices]

    def lambda_ref_nm(self) -> np.ndarray:
        return np.array([d.params.lambda_ref_nm for d in self.devices])

    def i_th_ma(self) -> np.ndarray:
        return np.array([d.params.i_th_ma for d in self.devices])

    def pol_angle_deg(self) -> np.ndarray:
        return np.array([d.params.pol_angle_deg for d in self.devices])

    def to_dict(self) -> dict:
        """JSON-safe form; an unbounded rollover current maps to null."""
        return {
            "stats": _dump_inf(asdict(self.stats)),
            "seed": self.seed,
            "rows": self.rows,
            "cols": self.cols,
            "devices": [
                {"row": d.row, "col": d.col, **_dump_inf(asdict(d.params))}
                for d in self.devices
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ArrayModel":
        stats = HeterogeneityStats(**_load_inf(payload["stats"]))
        devices = tuple(
            DeviceRecord(
                row=d["row"],
                col=d["col"],
                params=DeviceParams(
                    **_load_inf({k: v for k, v in d.items() if k not in ("row", "col")})
                ),
            )
            for d in payload["devices"]
        )
        return cls(
            stats=stats,
            seed=payload["seed"],
            rows=payload["rows"],
            cols=payload["cols"],
            devices=devices,
        )


def _dump_inf(d: dict) -> dict:
    return {k: (None if k == "i_sat_ma" and math.isinf(v) else v) for k, v in d.items()}


def _load_inf(d: dict) -> dict:
    return {k: (math.inf if k == "i_sat_ma" and v is None else v) for k, v in d.items()}


def _clipped_normal(rng, mean, sd, half_span, n):
    if sd == 0 or half_span == 0:
        return np.full(n, mean)
    return mean + np.clip(rng.normal(0.0, sd, n), -half_span, half_span)


def sample_array(
    stats: HeterogeneityStats = DEFAULT_STATS,
    seed: int = 0,
    rows: int = 5,
    cols: int = 5,
    slope_law: BiasSlopeLaw = DEFAULT_SLOPE_LAW,
    alpha: float = DEFAULT_ALPHA,
) -> ArrayModel:
    """Draw one array from device statistics, reproducibly from a seed.

    The draw order is fixed (threshold, slope, wavelength, polarization,
    tuning noise) so a seed pins the array bit for bit.  Each device's Q
    law is calibrated from ``slope_law`` at its own carrier frequency.
    """
    n = rows * cols
    if n < 1:
        raise ArrayError("array must contain at least one device")
    rng = np.random.default_rng(seed)
    cs = stats.clip_sigmas
    i_th = _clipped_normal(rng, stats.i_th_mean_ma, stats.i_th_sd_ma, cs * stats.i_th_sd_ma, n)
    slope = _clipped_normal(
        rng, stats.slope_mean_w_per_a, stats.slope_sd_w_per_a, cs * stats.slope_sd_w_per_a, n
    )
    a = stats.lambda_edge_weight
    lam = stats.lambda_mean_nm + (rng.beta(a, a, n) - 0.5) * stats.lambda_span_max_nm
    pol = _clipped_normal(rng, stats.pol_mean_deg, stats.pol_sd_deg, stats.pol_span_max_deg / 2, n)
    tune_noise = _clipped_normal(rng, 0.0, stats.tune_noise_rel, cs * stats.tune_noise_rel, n)
    tune = (
        stats.tune_coeff_nm_per_mw
        * (stats.lambda_convergence_nm - lam)
        / (stats.lambda_convergence_nm - stats.lambda_mean_nm)
        * (1.0 + tune_noise)
    )
    devices = []
    for k in range(n):
        nu = optical_frequency_ghz(float(lam[k]))
        q_ref, q_slope = slope_law.q_calibration(nu, alpha=alpha, convention="width")
        devices.append(
            DeviceRecord(
                row=k // cols,
                col=k % cols,
                params=DeviceParams(
                    i_th_ma=float(i_th[k]),
                    slope_eff_w_per_a=float(slope[k]),
                    i_sat_ma=stats.i_sat_ma,
                    beta=stats.beta,
                    lambda_ref_nm=float(lam[k]),
                    i_ref_ma=stats.i_ref_ma,
                    v_bias_v=stats.v_bias_v,
                    tune_coeff_nm_per_mw=float(tune[k]),
                    pol_angle_deg=float(pol[k]),
                    q_ref=q_ref,
                    q_slope_per_ma=q_slope,
                ),
            )
        )
    return ArrayModel(stats=stats, seed=seed, rows=rows, cols=cols, devices=tuple(devices))


@dataclass(frozen=True)
class HomogeneityReport:
    """Wavelength spread of an array driven at one common bias."""

    bias_ma: float
    lambda_nm: tuple[float, ...]
    mean_nm: float
    sd_nm: float
    span_nm: float
    span_ghz: float
    span_uev: float

    def rows(self) -> list[dict]:
        return [
            {"index": k, "lambda_nm": v}
            for k, v in enumerate(self.lambda_nm)
        ]


def homogeneity_report(array: ArrayModel, bias_ma: float) -> HomogeneityReport:
    """Wavelength statistics at a uniform bias applied to every device."""
    below = [
        (d.row, d.col)
        for d in array.devices
        if bias_ma < d.params.i_th_ma
    ]
    if below:
        raise ArrayError(
            f"bias {bias_ma} mA is below threshold for devices {below}"
        )
    lam = np.array([wavelength_of_current(d.params, bias_ma) for d in array.devices])
    mean = float(lam.mean())
    span = float(np.ptp(lam))
    return HomogeneityReport(
        bias_ma=bias_ma,
        lambda_nm=tuple(float(v) for v in lam),
        mean_nm=mean,
        sd_nm=float(lam.std(ddof=1)) if lam.size > 1 else 0.0,
        span_nm=span,
        span_ghz=convert_detuning(span, "nm", "GHz", mean),
        span_uev=convert_detuning(span, "nm", "ueV", mean),
    )


@dataclass(frozen=True)
class CalibrationResult:
    """Per-device bias currents that tune an array onto a common wavelength."""

    target_nm: float
    positions: tuple[tuple[int, int], ...]
    currents_ma: tuple[float, ...]
    powers_mw: tuple[float, ...]
    achieved_nm: tuple[float, ...]
    failures: tuple[tuple[int, int, str], ...]
    mean_current_ma: float
    sd_current_ma: float
    span_current_ma: float
    mean_power_mw: float
    sd_power_mw: float
    span_power_mw: float

    @property
    def converged(self) -> bool:
        return not self.failures


def calibrate_to_target(
    array: ArrayModel, target_nm: float, i_max_ma: float = 5.0
) -> CalibrationResult:
    """Solve every device's bias for a common target wavelength.

    Devices whose reachable band misses the target are reported in
    ``failures`` as (row, col, reason); statistics cover the converged
    devices only.
    """
    positions, currents, powers, achieved, failures = [], [], [], [], []
    for d in array.devices:
        try:
            i = current_for_wavelength(d.params, target_nm, i_max_ma=i_max_ma)
        except (TuningRangeError, DeviceModelError) as exc:
            failures.append((d.row, d.col, str(exc)))
            continue
        positions.append((d.row, d.col))
        currents.append(i)
        powers.append(li_output(d.params, i))
        achieved.append(wavelength_of_current(d.params, i))
    if not currents:
        raise ArrayError(f"no device can reach {target_nm} nm")
    cur = np.asarray(currents)
    pw = np.asarray(powers)
    return CalibrationResult(
        target_nm=target_nm,
        positions=tuple(positions),
        currents_ma=tuple(float(v) for v in currents),
        powers_mw=tuple(float(v) for v in powers),
        achieved_nm=tuple(float(v) for v in achieved),
        failures=tuple(failures),
        mean_current_ma=float(cur.mean()),
        sd_current_ma=float(cur.std(ddof=1)) if cur.size > 1 else 0.0,
        span_current_ma=float(np.ptp(cur)),
        mean_power_mw=float(pw.mean()),
        sd_power_mw=float(pw.std(ddof=1)) if pw.size > 1 else 0.0,
        span_power_mw=float(np.ptp(pw)),
    )


@dataclass(frozen=True)
class SweepRow:
    """Calibration statistics at one target wavelength."""

    target_nm: float
    mean_current_ma: float
    sd_current_ma: float
    span_current_ma: float
    mean_power_mw: float
    sd_power_mw: float
    span_power_mw: float
    rel_power_dev: float
    n_converged: int
    n_failed: int


def sweep_targets(
    array: ArrayModel,
    lambda_from_nm: float,
    lambda_to_nm: float,
    steps: int,
    i_max_ma: float = 5.0,
) -> list[SweepRow]:
    """Calibrate the array to a ladder of targets and tabulate the spread.

    The relative power deviation is sigma(P)/mean(P) per target.
    """
    if steps < 2:
        raise ArrayError("sweep needs at least 2 steps")
    if lambda_to_nm <= lambda_from_nm:
        raise ArrayError("sweep range must be increasing")
    rows = []
    for t in np.linspace(lambda_from_nm, lambda_to_nm, steps):
        res = calibrate_to_target(array, float(t), i_max_ma=i_max_ma)
        if res.mean_power_mw <= 0:
            raise ArrayError(f"mean power vanished at target {t} nm")
        rows.append(
            SweepRow(
                target_nm=float(t),
                mean_current_ma=res.mean_current_ma,
                sd_current_ma=res.sd_current_ma,
                span_current_ma=res.span_current_ma,
                mean_power_mw=res.mean_power_mw,
                sd_power_mw=res.sd_power_mw,
                span_power_mw=res.span_power_mw,
                rel_power_dev=res.sd_power_mw / res.mean_power_mw,
                n_converged=len(res.currents_ma),
                n_failed=len(res.failures),
            )
        )
    return rows


def locked_mask(
    array: ArrayModel,
    currents_ma,
    master_power_per_device_mw: float,
    slope_law: BiasSlopeLaw = DEFAULT_SLOPE_LAW,
    alpha: float = DEFAULT_ALPHA,
    master_pol_deg: float | None = None,
) -> np.ndarray:
    """Per-device flags: detuning inside the device's locking interval.

    The master line sits at the array-mean optical frequency and, unless
    ``master_pol_deg`` says otherwise, at the array-mean polarization.
    Each device's interval uses the slope law's value at its own bias as
    the nu/Q prefactor of the locking inequality (the positive-bound
    reading of the calibrated slope), a power ratio of the per-device
    master share over the device's emitted power, and the
    polarization-projected injection.  Zero master power short-circuits
    to all-unlocked: without injection nothing locks.
    """
    if master_power_per_device_mw < 0:
        raise ArrayError("master power must be >= 0")
    if master_power_per_device_mw == 0:
        return np.zeros(array.n, dtype=bool)
    i = np.broadcast_to(np.asarray(currents_ma, dtype=float), (array.n,))
    lam = np.array(
        [wavelength_of_current(d.params, float(b)) for d, b in zip(array.devices, i)]
    )
    nu = np.array([optical_frequency_ghz(float(v)) for v in lam])
    master_nu = float(nu.mean())
    if master_pol_deg is None:
        master_pol_deg = float(array.pol_angle_deg().mean())
    out = np.zeros(array.n, dtype=bool)
    for k, d in enumerate(array.devices):
        p_slave = li_output(d.params, float(i[k]))
        if p_slave <= 0:
            continue
        eff = injection_efficiency(d.params.pol_angle_deg - master_pol_deg)
        ratio = master_power_per_device_mw * eff / p_slave
        prefactor = slope_law.slope_at(float(i[k]))
        lp = LockingParams(nu_ghz=float(nu[k]), q_factor=float(nu[k]) / prefactor, alpha=alpha)
        out[k] = is_locked(master_nu - float(nu[k]), locking_bounds(lp, ratio))
    return out


def locked_fraction(
    array: ArrayModel,
    currents_ma,
    master_power_per_device_mw: float,
    slope_law: BiasSlopeLaw = DEFAULT_SLOPE_LAW,
    alpha: float = DEFAULT_ALPHA,
    master_pol_deg: float | None = None,
) -> float:
    """Fraction of devices locked at the operating point; see locked_mask."""
    return float(
        locked_mask(
            array,
            currents_ma,
            master_power_per_device_mw,
            slope_law=slope_law,
            alpha=alpha,
            master_pol_deg=master_pol_deg,
        ).mean()
    )
