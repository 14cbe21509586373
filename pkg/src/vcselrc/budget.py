"""Power and energy accounting for single devices and full arrays.

Per-device consumption is the electrical wall-plug power (bias current
times bias voltage) plus the optical injection share delivered to that
device; the master laser's own wall-plug power is excluded from the
per-device figure and enters only through an optional overhead term on
the array aggregate.  Energy per nonlinear transform is power over
update bandwidth, 1 mW / 1 GHz = 1 pJ exactly.

Reference operating point: 760 uA at 2 V plus a 0.609 mW injection
share gives 2.129 mW per device, 106.45 fJ per transform at 20 GHz, and
53.225 mW / 2.66 pJ for 25 such devices.  An array total of about 45 mW
is sometimes quoted next to these per-device numbers; it is inconsistent
with them (25 x 2.129 mW = 53.2 mW, and 2.66 pJ at 20 GHz implies the
same 53.2 mW), so reports always carry the self-consistent aggregate
and never the 45 mW figure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: fJ per (mW / GHz); 1 mW / 1 GHz = 1 pJ
_FJ_PER_MW_PER_GHZ = 1000.0


class BudgetError(ValueError):
    """Invalid budget input."""


def device_power_mw(bias_ua: float, v_bias_v: float, injection_mw: float = 0.0) -> float:
    """Total per-device consumption: electrical wall-plug plus injection share."""
    if bias_ua < 0 or v_bias_v < 0 or injection_mw < 0:
        raise BudgetError("bias, voltage and injection power must all be >= 0")
    return bias_ua * v_bias_v / 1000.0 + injection_mw


def energy_per_transform_fj(power_mw: float, bandwidth_ghz: float) -> float:
    """Energy (fJ) of one nonlinear transform at the given update bandwidth."""
    if bandwidth_ghz <= 0:
        raise BudgetError(f"bandwidth must be > 0 GHz, got {bandwidth_ghz}")
    if power_mw < 0:
        raise BudgetError(f"power must be >= 0 mW, got {power_mw}")
    return power_mw / bandwidth_ghz * _FJ_PER_MW_PER_GHZ


@dataclass(frozen=True)
class BudgetReport:
    """Per-device and aggregate power/energy figures at one bandwidth."""

    bias_ua: tuple[float, ...]
    electrical_mw: tuple[float, ...]
    injection_mw: tuple[float, ...]
    total_mw: tuple[float, ...]
    array_total_mw: float
    device_energy_fj: tuple[float, ...]
    array_energy_pj: float
    bandwidth_ghz: float
    master_overhead_mw: float

    @property
    def n_devices(self) -> int:
        return len(self.total_mw)

    def to_dict(self) -> dict:
        return {
            "bias_ua": list(self.bias_ua),
            "electrical_mw": list(self.electrical_mw),
            "injection_mw": list(self.injection_mw),
            "total_mw": list(self.total_mw),
            "array_total_mw": self.array_total_mw,
            "device_energy_fj": list(self.device_energy_fj),
            "array_energy_pj": self.array_energy_pj,
            "bandwidth_ghz": self.bandwidth_ghz,
            "master_overhead_mw": self.master_overhead_mw,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "BudgetReport":
        return cls(
            bias_ua=tuple(payload["bias_ua"]),
            electrical_mw=tuple(payload["electrical_mw"]),
            injection_mw=tuple(payload["injection_mw"]),
            total_mw=tuple(payload["total_mw"]),
            array_total_mw=payload["array_total_mw"],
            device_energy_fj=tuple(payload["device_energy_fj"]),
            array_energy_pj=payload["array_energy_pj"],
            bandwidth_ghz=payload["bandwidth_ghz"],
            master_overhead_mw=payload["master_overhead_mw"],
        )


def array_budget(
    bias_ua,
    injection_mw,
    bandwidth_ghz: float,
    v_bias_v: float = 2.0,
    master_overhead_mw: float = 0.0,
) -> BudgetReport:
    """Aggregate the per-device accounting over an array.

    ``bias_ua`` and ``injection_mw`` are per-device sequences (a scalar
    injection is broadcast; an empty plan means zero injection).  The
    array total is the sum of device totals plus the optional master
    wall-plug overhead; energies follow exactly from the reported powers.
    """
    bias = np.atleast_1d(np.asarray(bias_ua, dtype=float))
    if bias.size == 0:
        raise BudgetError("need at least one device")
    if injection_mw is None:
        inj = np.zeros_like(bias)
    else:
        inj = np.atleast_1d(np.asarray(injection_mw, dtype=float))
        if inj.size == 1:
            inj = np.full_like(bias, float(inj[0]))
    if inj.shape != bias.shape:
        raise BudgetError(
            f"injection plan size {inj.size} does not match {bias.size} devices"
        )
    if master_overhead_mw < 0:
        raise BudgetError("master overhead must be >= 0")
    elec = [bias_i * v_bias_v / 1000.0 for bias_i in bias]
    total = [device_power_mw(float(b), v_bias_v, float(p)) for b, p in zip(bias, inj)]
    array_total = float(sum(total)) + master_overhead_mw
    return BudgetReport(
        bias_ua=tuple(float(b) for b in bias),
        electrical_mw=tuple(float(e) for e in elec),
        injection_mw=tuple(float(p) for p in inj),
        total_mw=tuple(float(t) for t in total),
        array_total_mw=array_total,
        device_energy_fj=tuple(
            energy_per_transform_fj(float(t), bandwidth_ghz) for t in total
        ),
        array_energy_pj=energy_per_transform_fj(array_total, bandwidth_ghz) / 1000.0,
        bandwidth_ghz=bandwidth_ghz,
        master_overhead_mw=master_overhead_mw,
    )
