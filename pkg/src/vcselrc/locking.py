"""Injection-locking range analytics.

The locking interval of a slave laser under master injection is asymmetric
in detuning (master minus slave frequency):

    -(nu/Q) * sqrt(Pm/Ps) * sqrt(1 + alpha**2)  <  delta  <  (nu/Q) * sqrt(Pm/Ps)

with nu the slave optical frequency, Q the cavity quality factor, alpha the
linewidth-enhancement factor and Pm/Ps the injected-to-emitted power ratio.
The module also carries the bias-dependent slope law calibrated against
measured locking-range-vs-sqrt-ratio lines, and the extrapolation of those
lines to a reservoir operating point.

Two slope conventions are in circulation for "GHz per sqrt power ratio":
the full interval width per sqrt-ratio ("width") and the positive bound
alone ("upper").  Functions that consume a calibrated slope say which
reading they use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_ALPHA = 3.0
#: objective transmission loss between instrument and facet
DEFAULT_OBJECTIVE_LOSS = 0.30

LOSS_MODES = ("symmetric", "master_only", "slave_only", "round_trip")
SLOPE_CONVENTIONS = ("width", "upper")


class LockingError(ValueError):
    """Parameter or fit failure in the locking analytics."""


def width_factor(alpha: float) -> float:
    """Ratio of the full locking width to its positive bound, 1 + sqrt(1 + alpha**2)."""
    if alpha < 0:
        raise LockingError(f"alpha must be >= 0, got {alpha}")
    return 1.0 + math.sqrt(1.0 + alpha * alpha)


@dataclass(frozen=True)
class LockingParams:
    """Slave-cavity quantities entering the locking interval."""

    nu_ghz: float
    q_factor: float
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        if self.nu_ghz <= 0:
            raise LockingError(f"optical frequency must be > 0, got {self.nu_ghz}")
        if self.q_factor <= 0:
            raise LockingError(f"quality factor must be > 0, got {self.q_factor}")
        if self.alpha < 0:
            raise LockingError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def nu_over_q_ghz(self) -> float:
        return self.nu_ghz / self.q_factor


def locking_bounds(lp: LockingParams, power_ratio: float) -> tuple[float, float]:
    """Closed detuning interval (lower, upper) in GHz that locks the slave."""
    if power_ratio < 0:
        raise LockingError(f"power ratio must be >= 0, got {power_ratio}")
    upper = lp.nu_over_q_ghz * math.sqrt(power_ratio)
    lower = -upper * math.sqrt(1.0 + lp.alpha * lp.alpha)
    return lower, upper


def locking_width(lp: LockingParams, power_ratio: float) -> float:
    """Full width (GHz) of the locking interval."""
    lower, upper = locking_bounds(lp, power_ratio)
    return upper - lower


def is_locked(detuning_ghz: float, bounds: tuple[float, float]) -> bool:
    """Whether a detuning lies inside the closed locking interval."""
    lower, upper = bounds
    return lower <= detuning_ghz <= upper


@dataclass(frozen=True)
class BoundaryFit:
    """Result of fitting measured locking boundaries against sqrt-ratio."""

    nu_over_q_ghz: float
    alpha: float
    degenerate: bool


def fit_locking_boundaries(sqrt_ratios, lowers_ghz, uppers_ghz) -> BoundaryFit:
    """Recover (nu/Q, alpha) from boundary samples.

    Both boundaries are lines through the origin in sqrt-ratio; two
    independent least-squares slopes give nu/Q from the upper line and
    alpha from the ratio of the two.  When the lower slope magnitude does
    not exceed the upper one the alpha root is imaginary; the fit then
    reports alpha = 0 with the ``degenerate`` flag set.
    """
    x = np.asarray(sqrt_ratios, dtype=float)
    lo = np.asarray(lowers_ghz, dtype=float)
    up = np.asarray(uppers_ghz, dtype=float)
    if x.shape != lo.shape or x.shape != up.shape or x.size < 2:
        raise LockingError("need at least 2 equal-length boundary samples")
    if np.any(x <= 0):
        raise LockingError("sqrt power ratios must be > 0")
    xx = float(np.dot(x, x))
    s_up = float(np.dot(x, up)) / xx
    s_lo = float(np.dot(x, lo)) / xx
    if s_up <= 0:
        raise LockingError(f"upper-boundary slope must be > 0, got {s_up}")
    r = -s_lo / s_up
    if r <= 1.0:
        return BoundaryFit(nu_over_q_ghz=s_up, alpha=0.0, degenerate=True)
    return BoundaryFit(nu_over_q_ghz=s_up, alpha=math.sqrt(r * r - 1.0), degenerate=False)


def power_ratio(
    master_mw: float,
    slave_mw: float,
    objective_loss: float = DEFAULT_OBJECTIVE_LOSS,
    mode: str = "symmetric",
) -> float:
    """Injected-to-emitted power ratio at the facet from measured powers.

    ``symmetric`` (default) applies the same objective transmission to both
    beams, so the loss cancels and the ratio is simply master/slave.  The
    asymmetric modes correct only one beam, or the master inward and the
    slave outward (``round_trip``).
    """
    if mode not in LOSS_MODES:
        raise LockingError(f"mode must be one of {LOSS_MODES}, got {mode!r}")
    if not 0 <= objective_loss < 1:
        raise LockingError(f"objective loss must be in [0, 1), got {objective_loss}")
    if master_mw < 0 or slave_mw <= 0:
        raise LockingError("master power must be >= 0 and slave power > 0")
    t = 1.0 - objective_loss
    if mode == "symmetric":
        return master_mw / slave_mw
    if mode == "master_only":
        return master_mw * t / slave_mw
    if mode == "slave_only":
        return master_mw / (slave_mw / t)
    return master_mw * t / (slave_mw / t)


@dataclass(frozen=True)
class BiasSlopeLaw:
    """Locking-range slope (GHz per sqrt power ratio) against bias current.

    The slope follows s(i) = coeff / (1 - curv * (i - i_ref)), equivalent
    to a cavity quality factor falling linearly with bias.  ``calibrate``
    pins the law exactly to two measured (bias, slope) points.
    """

    i_ref_ma: float
    coeff_ghz: float
    curv_per_ma: float

    def __post_init__(self) -> None:
        if self.coeff_ghz <= 0:
            raise LockingError(f"slope coefficient must be > 0, got {self.coeff_ghz}")

    @classmethod
    def calibrate(
        cls,
        bias_lo_ma: float,
        slope_lo_ghz: float,
        bias_hi_ma: float,
        slope_hi_ghz: float,
        i_ref_ma: float = 0.7,
    ) -> "BiasSlopeLaw":
        if bias_hi_ma <= bias_lo_ma:
            raise LockingError("calibration biases must be increasing")
        if slope_lo_ghz <= 0 or slope_hi_ghz <= 0:
            raise LockingError("calibration slopes must be > 0")
        g = slope_hi_ghz / slope_lo_ghz
        dlo = bias_lo_ma - i_ref_ma
        dhi = bias_hi_ma - i_ref_ma
        curv = (g - 1.0) / (g * dhi - dlo)
        coeff = slope_lo_ghz * (1.0 - curv * dlo)
        return cls(i_ref_ma=i_ref_ma, coeff_ghz=coeff, curv_per_ma=curv)

    def slope_at(self, bias_ma) -> float:
        denom = 1.0 - self.curv_per_ma * (np.asarray(bias_ma, dtype=float) - self.i_ref_ma)
        if np.any(denom <= 0):
            raise LockingError(f"slope law is not defined at bias {bias_ma} mA")
        s = self.coeff_ghz / denom
        if np.ndim(bias_ma) == 0:
            return float(s)
        return s

    def q_calibration(
        self, nu_ghz: float, alpha: float = DEFAULT_ALPHA, convention: str = "width"
    ) -> tuple[float, float]:
        """(q_ref, q_slope_per_ma) reproducing this law for a given carrier.

        Under the ``width`` convention the calibrated slope is the full
        interval width per sqrt-ratio, so Q absorbs the asymmetry factor
        1 + sqrt(1 + alpha**2); under ``upper`` the slope is nu/Q directly.
        """
        if convention not in SLOPE_CONVENTIONS:
            raise LockingError(f"convention must be one of {SLOPE_CONVENTIONS}")
        factor = width_factor(alpha) if convention == "width" else 1.0
        return nu_ghz * factor / self.coeff_ghz, self.curv_per_ma


#: slope endpoints of the measured locking-range lines, GHz per sqrt-ratio
DEFAULT_SLOPE_LAW = BiasSlopeLaw.calibrate(
    bias_lo_ma=0.76, slope_lo_ghz=5.2, bias_hi_ma=2.2, slope_hi_ghz=16.8, i_ref_ma=0.7
)

#: reference biases of the measured lines (mA) and the emitted power (mW)
#: at each one, calibrated so the 2 mW-per-laser extrapolation reproduces
#: the published 18.8 and 24.8 GHz endpoint widths
DEFAULT_REFERENCE_BIASES_MA = (0.76, 1.2, 1.7, 2.2)


def _calibrated_slave_powers() -> tuple[float, ...]:
    biases = DEFAULT_REFERENCE_BIASES_MA
    lo, hi = biases[0], biases[-1]
    out = []
    for b in biases:
        w = 18.8 + (24.8 - 18.8) * (b - lo) / (hi - lo)
        s = DEFAULT_SLOPE_LAW.slope_at(b)
        out.append(2.0 * (s / w) ** 2)
    return tuple(out)


DEFAULT_SLAVE_POWERS_MW = _calibrated_slave_powers()


def bias_dependent_slope(
    params, bias_ma: float, alpha: float = DEFAULT_ALPHA, convention: str = "width"
) -> float:
    """Locking-range slope (GHz per sqrt-ratio) of a device at a bias.

    Reads the device's linear Q law, Q(i) = q_ref * (1 - q_slope * (i -
    i_ref)).  The convention must match the one the device's q_ref was
    calibrated under for the returned slope to reproduce the measured
    endpoints; :func:`BiasSlopeLaw.q_calibration` produces matching values.
    """
    if convention not in SLOPE_CONVENTIONS:
        raise LockingError(f"convention must be one of {SLOPE_CONVENTIONS}")
    q = params.q_ref * (1.0 - params.q_slope_per_ma * (bias_ma - params.i_ref_ma))
    if q <= 0:
        raise LockingError(f"Q law is not defined at bias {bias_ma} mA")
    factor = width_factor(alpha) if convention == "width" else 1.0
    return params.nu_ghz * factor / q


def injected_power_per_laser(
    input_power_mw: float, n_lasers: int, injection_fraction: float
) -> float:
    """Optical power delivered to each laser by an even fan-out."""
    if n_lasers < 1:
        raise LockingError(f"need at least 1 laser, got {n_lasers}")
    if not 0 <= injection_fraction <= 1:
        raise LockingError(f"injection fraction must be in [0, 1], got {injection_fraction}")
    if input_power_mw < 0:
        raise LockingError(f"input power must be >= 0, got {input_power_mw}")
    return input_power_mw / n_lasers * injection_fraction


def rc_locking_extrapolation(
    input_power_mw: float,
    n_lasers: int,
    injection_fraction: float,
    slave_power_mw: float,
    slope_ghz_per_sqrt_ratio: float,
) -> float:
    """Locking-range width (GHz) at a fanned-out reservoir operating point.

    Extends a measured locking-range line of slope ``slope`` to the power
    ratio obtained when ``input_power`` is split over ``n_lasers`` and only
    ``injection_fraction`` of each share reaches the facet.
    """
    if slave_power_mw <= 0:
        raise LockingError(f"slave power must be > 0, got {slave_power_mw}")
    if slope_ghz_per_sqrt_ratio <= 0:
        raise LockingError(f"slope must be > 0, got {slope_ghz_per_sqrt_ratio}")
    injected = injected_power_per_laser(input_power_mw, n_lasers, injection_fraction)
    return slope_ghz_per_sqrt_ratio * math.sqrt(injected / slave_power_mw)


def synth_locking_map(
    lp: LockingParams,
    power_ratio: float,
    detunings_ghz,
    freq_axis_ghz,
    enhancement: float = 6.0,
    linewidth_ghz: float = 0.5,
) -> np.ndarray:
    """Synthetic detuning-sweep spectrogram around the locking interval.

    One row per detuning step, one column per analysis frequency (relative
    to the master line at 0).  Inside the locking interval the map shows a
    single master-frequency line with ``enhancement`` times the unlocked
    intensity; outside it shows separate unit-height master and slave
    lines, the slave sitting at minus the detuning.  Lines are Lorentzian
    with half width ``linewidth_ghz``.  Deterministic.
    """
    if enhancement <= 0:
        raise LockingError(f"enhancement must be > 0, got {enhancement}")
    if linewidth_ghz <= 0:
        raise LockingError(f"linewidth must be > 0, got {linewidth_ghz}")
    det = np.asarray(detunings_ghz, dtype=float)
    freq = np.asarray(freq_axis_ghz, dtype=float)
    lower, upper = locking_bounds(lp, power_ratio)

    def line(center: float, amp: float) -> np.ndarray:
        return amp / (1.0 + ((freq - center) / linewidth_ghz) ** 2)

    rows = []
    for d in det:
        if lower <= d <= upper:
            rows.append(line(0.0, enhancement))
        else:
            rows.append(line(0.0, 1.0) + line(-d, 1.0))
    return np.asarray(rows)
