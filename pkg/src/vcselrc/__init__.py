"""Calibrated simulator and calibration toolkit for a laser-array reservoir computer.

Core layers: single-device models (:mod:`vcselrc.device`), injection-locking
analytics (:mod:`vcselrc.locking`), array sampling and calibration
(:mod:`vcselrc.array`), power/energy accounting (:mod:`vcselrc.budget`),
reservoir dynamics and readout (:mod:`vcselrc.reservoir`), benchmark tasks
(:mod:`vcselrc.tasks`), and spectral unit conversions (:mod:`vcselrc.units`).
A FastAPI service (:mod:`vcselrc.service`) exposes each workflow; the CLI
(:mod:`vcselrc.cli`) is a thin client of that service.
"""

__version__ = "0.1.0"

from .array import (
    ArrayError,
    ArrayModel,
    CalibrationResult,
    DeviceRecord,
    HeterogeneityStats,
    HomogeneityReport,
    SweepRow,
    calibrate_to_target,
    homogeneity_report,
    locked_fraction,
    locked_mask,
    sample_array,
    sweep_targets,
)
from .budget import BudgetError, BudgetReport, array_budget, device_power_mw, energy_per_transform_fj
from .device import (
    DeviceModelError,
    DeviceParams,
    TuningRangeError,
    beta_scurve,
    current_for_wavelength,
    fit_li,
    injection_efficiency,
    li_output,
    wavelength_of_current,
)
from .locking import (
    BiasSlopeLaw,
    BoundaryFit,
    LockingError,
    LockingParams,
    fit_locking_boundaries,
    is_locked,
    locking_bounds,
    locking_width,
    power_ratio,
    rc_locking_extrapolation,
)
from .reservoir import (
    CouplingMatrix,
    RCRunResult,
    ReadoutWeights,
    ReservoirConfig,
    ReservoirError,
    build_doe_coupling,
    echo_state_gap,
    evaluate,
    run_reservoir,
    run_task,
    train_readout,
)
from .tasks import TaskData, TaskError, mackey_glass, make_task, narma10
from .units import SpectralQuantity, UnitError, convert_detuning, optical_frequency_ghz

__all__ = [
    "ArrayError",
    "ArrayModel",
    "BiasSlopeLaw",
    "BoundaryFit",
    "BudgetError",
    "BudgetReport",
    "CalibrationResult",
    "CouplingMatrix",
    "DeviceModelError",
    "DeviceParams",
    "DeviceRecord",
    "HeterogeneityStats",
    "HomogeneityReport",
    "LockingError",
    "LockingParams",
    "RCRunResult",
    "ReadoutWeights",
    "ReservoirConfig",
    "ReservoirError",
    "SpectralQuantity",
    "SweepRow",
    "TaskData",
    "TaskError",
    "TuningRangeError",
    "UnitError",
    "__version__",
    "array_budget",
    "beta_scurve",
    "build_doe_coupling",
    "calibrate_to_target",
    "convert_detuning",
    "current_for_wavelength",
    "device_power_mw",
    "echo_state_gap",
    "energy_per_transform_fj",
    "evaluate",
    "fit_li",
    "fit_locking_boundaries",
    "homogeneity_report",
    "injection_efficiency",
    "is_locked",
    "li_output",
    "locked_fraction",
    "locked_mask",
    "locking_bounds",
    "locking_width",
    "mackey_glass",
    "make_task",
    "narma10",
    "optical_frequency_ghz",
    "power_ratio",
    "rc_locking_extrapolation",
    "run_reservoir",
    "run_task",
    "sample_array",
    "sweep_targets",
    "train_readout",
    "wavelength_of_current",
]
