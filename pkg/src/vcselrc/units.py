"""Spectral difference quantities near a fixed reference wavelength.

Detunings and linewidths in this package show up in three interchangeable
units: wavelength difference (nm), optical frequency difference (GHz) and
photon energy difference (ueV).  For small differences around a reference
wavelength lam the conversions are linear in the difference:

    dnu = c * dlam / lam**2
    dE  = (h*c/e) * dlam / lam**2

so every value carries its reference wavelength along.  All conversions
go through nm as the base unit, which makes round trips exact to float
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import c as _C_M_PER_S
from scipy.constants import e as _E_C
from scipy.constants import h as _H_JS

# c in nm*GHz (numerically equal to c in m/s).
C_NM_GHZ = _C_M_PER_S
# h*c/e in eV*nm.
HC_E_EV_NM = _H_JS * _C_M_PER_S / _E_C * 1e9

UNITS = ("nm", "GHz", "ueV")


class UnitError(ValueError):
    """Bad unit name or unusable value/reference."""


def _check(value: float, ref_lambda_nm: float) -> None:
    if not math.isfinite(value):
        raise UnitError(f"value must be finite, got {value!r}")
    if not (math.isfinite(ref_lambda_nm) and ref_lambda_nm > 0):
        raise UnitError(f"reference wavelength must be positive, got {ref_lambda_nm!r}")


def convert_detuning(value: float, from_unit: str, to_unit: str, ref_lambda_nm: float) -> float:
    """Convert a spectral difference between nm, GHz and ueV.

    Differences may be negative (red detunings).  The reference wavelength
    sets the local slope of the frequency and energy scales.
    """
    if from_unit not in UNITS or to_unit not in UNITS:
        raise UnitError(f"unit must be one of {UNITS}, got {from_unit!r} -> {to_unit!r}")
    _check(value, ref_lambda_nm)
    lam2 = ref_lambda_nm * ref_lambda_nm
    if from_unit == "nm":
        dlam = value
    elif from_unit == "GHz":
        dlam = value * lam2 / C_NM_GHZ
    else:
        dlam = value * 1e-6 * lam2 / HC_E_EV_NM
    if to_unit == "nm":
        return dlam
    if to_unit == "GHz":
        return C_NM_GHZ * dlam / lam2
    return HC_E_EV_NM * dlam / lam2 * 1e6


@dataclass(frozen=True)
class SpectralQuantity:
    """A spectral difference with explicit unit and reference wavelength."""

    value: float
    unit: str
    ref_lambda_nm: float

    def __post_init__(self) -> None:
        if self.unit not in UNITS:
            raise UnitError(f"unit must be one of {UNITS}, got {self.unit!r}")
        _check(self.value, self.ref_lambda_nm)

    def to(self, unit: str) -> "SpectralQuantity":
        v = convert_detuning(self.value, self.unit, unit, self.ref_lambda_nm)
        return SpectralQuantity(v, unit, self.ref_lambda_nm)

    @property
    def nm(self) -> float:
        return convert_detuning(self.value, self.unit, "nm", self.ref_lambda_nm)

    @property
    def ghz(self) -> float:
        return convert_detuning(self.value, self.unit, "GHz", self.ref_lambda_nm)

    @property
    def uev(self) -> float:
        return convert_detuning(self.value, self.unit, "ueV", self.ref_lambda_nm)


def optical_frequency_ghz(lambda_nm: float) -> float:
    """Absolute optical frequency of a wavelength, in GHz."""
    if not (math.isfinite(lambda_nm) and lambda_nm > 0):
        raise UnitError(f"wavelength must be positive, got {lambda_nm!r}")
    return C_NM_GHZ / lambda_nm
