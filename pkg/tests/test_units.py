import math

import numpy as np
import pytest

from vcselrc.units import (
    SpectralQuantity,
    UnitError,
    convert_detuning,
    optical_frequency_ghz,
)


def test_nm_to_ghz_reference_value():
    # c * 0.112 / 977.77**2
    ghz = convert_detuning(0.112, "nm", "GHz", 977.77)
    assert abs(ghz - 35.12) < 0.05
    assert abs(ghz - 35.120874) < 1e-3


def test_nm_to_uev_reference_values():
    uev = convert_detuning(0.112, "nm", "ueV", 977.77)
    assert abs(uev - 145.2) < 0.5
    uev_small = convert_detuning(0.033, "nm", "ueV", 977.77)
    assert abs(uev_small - 42.4) < 0.5


def test_round_trip_identity_randomized(rng):
    units = ("nm", "GHz", "ueV")
    for _ in range(300):
        value = float(rng.uniform(1e-4, 0.5))
        lam = float(rng.uniform(900.0, 1100.0))
        a, b = rng.choice(len(units), 2)
        there = convert_detuning(value, units[a], units[b], lam)
        back = convert_detuning(there, units[b], units[a], lam)
        assert abs(back - value) <= 1e-9 * value


def test_identity_conversion_is_exact():
    assert convert_detuning(0.25, "nm", "nm", 977.77) == 0.25


def test_optical_frequency_reference():
    nu = optical_frequency_ghz(977.77)
    assert abs(nu - 299792458.0 / 977.77) < 1e-6
    assert 306000.0 < nu < 307000.0


def test_spectral_quantity_to_and_properties():
    q = SpectralQuantity(0.112, "nm", 977.77)
    assert abs(q.ghz - 35.120874) < 1e-3
    assert abs(q.to("ueV").value - q.uev) < 1e-12
    assert q.to("nm").value == q.value


def test_unknown_unit_rejected():
    with pytest.raises(UnitError):
        convert_detuning(0.1, "nm", "THz", 977.77)
    with pytest.raises(UnitError):
        SpectralQuantity(0.1, "angstrom", 977.77)


def test_nonpositive_reference_wavelength_rejected():
    with pytest.raises(UnitError):
        convert_detuning(0.1, "nm", "GHz", 0.0)
    with pytest.raises(UnitError):
        optical_frequency_ghz(-1.0)


def test_conversion_is_linear_in_value(rng):
    for _ in range(50):
        v = float(rng.uniform(1e-3, 0.2))
        k = float(rng.uniform(0.1, 5.0))
        a = convert_detuning(k * v, "nm", "GHz", 977.77)
        b = k * convert_detuning(v, "nm", "GHz", 977.77)
        assert abs(a - b) <= 1e-9 * max(abs(a), 1e-12)


def test_negative_detunings_convert_sign_preserving():
    ghz = convert_detuning(-0.033, "nm", "GHz", 977.77)
    assert ghz < 0
    assert math.isclose(-ghz, convert_detuning(0.033, "nm", "GHz", 977.77))
