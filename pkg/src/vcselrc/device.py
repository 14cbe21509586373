"""Single-emitter model: LI curve, spontaneous-emission s-curve, thermal tuning.

Currents are mA, powers mW, wavelengths nm throughout.  The W/A slope
efficiency doubles as mW/mA, so no unit juggling is needed in the LI maths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .units import optical_frequency_ghz


class DeviceModelError(ValueError):
    """Parameter or fit failure in the emitter model."""


class TuningRangeError(DeviceModelError):
    """Requested wavelength falls outside the reachable band."""


@dataclass(frozen=True)
class DeviceParams:
    """Static parameters of one emitter.

    i_th_ma
        Threshold current.
    slope_eff_w_per_a
        Differential efficiency of the LI curve above threshold.
    i_sat_ma
        Current scale of the thermal rollover; ``inf`` keeps the LI linear.
    beta
        Spontaneous-emission fraction coupled into the lasing mode.
    lambda_ref_nm
        Emission wavelength at the reference bias ``i_ref_ma``.
    v_bias_v
        Operating voltage used to convert bias current to dissipated power.
    tune_coeff_nm_per_mw
        Red shift per dissipated electrical milliwatt.
    pol_angle_deg
        Polarization axis relative to the array nominal axis.
    q_ref, q_slope_per_ma
        Cavity quality factor at the reference bias and its fractional
        decrease per mA, Q(i) = q_ref * (1 - q_slope * (i - i_ref)).
    """

    i_th_ma: float
    slope_eff_w_per_a: float
    i_sat_ma: float = math.inf
    beta: float = 0.0032
    lambda_ref_nm: float = 977.77
    i_ref_ma: float = 0.7
    v_bias_v: float = 2.0
    tune_coeff_nm_per_mw: float = 0.23 / 2.08
    pol_angle_deg: float = 0.0
    q_ref: float = 2.5e5
    q_slope_per_ma: float = 0.0

    def __post_init__(self) -> None:
        if self.i_th_ma < 0:
            raise DeviceModelError(f"threshold current must be >= 0, got {self.i_th_ma}")
        if self.slope_eff_w_per_a <= 0:
            raise DeviceModelError(f"slope efficiency must be > 0, got {self.slope_eff_w_per_a}")
        if self.i_sat_ma <= 0:
            raise DeviceModelError(f"rollover current must be > 0, got {self.i_sat_ma}")
        if not 0 < self.beta <= 1:
            raise DeviceModelError(f"beta must be in (0, 1], got {self.beta}")
        if self.lambda_ref_nm <= 0 or self.v_bias_v <= 0:
            raise DeviceModelError("reference wavelength and bias voltage must be > 0")
        if self.tune_coeff_nm_per_mw <= 0:
            raise DeviceModelError("tuning coefficient must be > 0")
        if self.q_ref <= 0:
            raise DeviceModelError(f"quality factor must be > 0, got {self.q_ref}")

    @property
    def nu_ghz(self) -> float:
        """Optical frequency at the reference bias, GHz."""
        return optical_frequency_ghz(self.lambda_ref_nm)

    def with_(self, **changes) -> "DeviceParams":
        return replace(self, **changes)


def li_output(params: DeviceParams, current_ma):
    """Optical output power (mW) at a bias current (mA).

    Zero below threshold; above it a linear rise with a smooth rollover,

        P = slope * (i - i_th) / (1 + (i - i_th) / i_sat)
    """
    i = np.asarray(current_ma, dtype=float)
    x = np.clip(i - params.i_th_ma, 0.0, None)
    with np.errstate(invalid="ignore"):
        p = params.slope_eff_w_per_a * x / (1.0 + x / params.i_sat_ma)
    if np.ndim(current_ma) == 0:
        return float(p)
    return p


def saturated_output_mw(params: DeviceParams) -> float:
    """Limit of the LI curve at large bias (``inf`` when the LI is linear)."""
    return params.slope_eff_w_per_a * params.i_sat_ma


def fit_li(currents_ma, powers_mw, positive_frac: float = 0.02) -> tuple[float, float]:
    """Fit (i_th_ma, slope_w_per_a) from LI samples.

    A least-squares line through the samples that are clearly lasing
    (power above ``positive_frac`` of the maximum); the threshold is the
    line's zero crossing.  Samples must straddle the threshold.
    """
    i = np.asarray(currents_ma, dtype=float)
    p = np.asarray(powers_mw, dtype=float)
    if i.shape != p.shape or i.size < 4:
        raise DeviceModelError("need at least 4 (current, power) samples of equal length")
    pmax = float(np.max(p))
    if pmax <= 0:
        raise DeviceModelError("no samples above threshold; cannot fit an LI line")
    lasing = p > positive_frac * pmax
    if int(np.sum(lasing)) < 2:
        raise DeviceModelError("need at least 2 samples above threshold")
    if not bool(np.any(~lasing)):
        raise DeviceModelError("no samples below threshold; threshold crossing not bracketed")
    slope, intercept = np.polyfit(i[lasing], p[lasing], 1)
    if slope <= 0:
        raise DeviceModelError(f"fitted slope must be > 0, got {slope}")
    i_th = -intercept / slope
    return float(i_th), float(slope)


def beta_scurve(beta: float, pump):
    """Steady-state intracavity photon number against normalized pump.

    Positive root of the rate-equation quadratic
    s**2 + (1 - p) * s - beta * p = 0:

        s = ((p - 1) + sqrt((p - 1)**2 + 4 * beta * p)) / 2

    For beta = 1 this is s = p exactly (thresholdless limit); for small
    beta the log-log curve jumps by roughly 1/beta around p = 1.
    """
    if not 0 < beta <= 1:
        raise DeviceModelError(f"beta must be in (0, 1], got {beta}")
    p = np.asarray(pump, dtype=float)
    if np.any(p < 0):
        raise DeviceModelError("pump must be >= 0")
    d = p - 1.0
    s = 0.5 * (d + np.sqrt(d * d + 4.0 * beta * p))
    if np.ndim(pump) == 0:
        return float(s)
    return s


def electrical_power_mw(params: DeviceParams, current_ma: float) -> float:
    """Dissipated electrical power at a bias current, mW."""
    return params.v_bias_v * current_ma


def wavelength_of_current(params: DeviceParams, current_ma):
    """Emission wavelength (nm) at a bias current at or above threshold.

    Thermal tuning is linear in dissipated electrical power:
    lam(i) = lambda_ref + tune_coeff * v_bias * (i - i_ref).
    """
    i = np.asarray(current_ma, dtype=float)
    if np.any(i < params.i_th_ma):
        raise DeviceModelError(
            f"bias {current_ma} mA is below threshold {params.i_th_ma:.4f} mA"
        )
    lam = params.lambda_ref_nm + params.tune_coeff_nm_per_mw * params.v_bias_v * (
        i - params.i_ref_ma
    )
    if np.ndim(current_ma) == 0:
        return float(lam)
    return lam


#: absolute wavelength tolerance of the bisection inverse, nm (0.1 pm)
WAVELENGTH_TOL_NM = 1e-4
_BISECT_MAX_ITER = 200


def current_for_wavelength(
    params: DeviceParams, target_nm: float, i_max_ma: float = 5.0
) -> float:
    """Bias current (mA) that tunes the emitter to ``target_nm``.

    Deterministic bisection on [i_th, i_max] down to 0.1 pm.  Raises
    :class:`TuningRangeError` naming the reachable band when the target
    lies outside it.
    """
    if i_max_ma <= params.i_th_ma:
        raise DeviceModelError("i_max must exceed the threshold current")
    lo, hi = params.i_th_ma, i_max_ma
    lam_lo = wavelength_of_current(params, lo)
    lam_hi = wavelength_of_current(params, hi)
    if not lam_lo - WAVELENGTH_TOL_NM <= target_nm <= lam_hi + WAVELENGTH_TOL_NM:
        raise TuningRangeError(
            f"target {target_nm:.4f} nm outside reachable band "
            f"[{lam_lo:.4f}, {lam_hi:.4f}] nm for bias in [{lo:.4f}, {hi:.4f}] mA"
        )
    for _ in range(_BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        lam_mid = wavelength_of_current(params, mid)
        if abs(lam_mid - target_nm) <= WAVELENGTH_TOL_NM:
            return mid
        if lam_mid < target_nm:
            lo = mid
        else:
            hi = mid
    raise DeviceModelError(
        f"bisection did not reach {WAVELENGTH_TOL_NM} nm in {_BISECT_MAX_ITER} iterations"
    )


def injection_efficiency(delta_theta_deg: float) -> float:
    """Fraction of injected power coupled across a polarization mismatch."""
    return float(np.cos(np.radians(delta_theta_deg)) ** 2)
