"""Benchmark sequence generators for the reservoir: NARMA10 and Mackey-Glass.

Both tasks are generated internally from a seed; no external data.  Each
generator returns an aligned (inputs, targets) pair: ``targets[t]`` is
what the readout should produce after the reservoir has absorbed
``inputs[t]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TASKS = ("narma10", "mackey_glass")


class TaskError(ValueError):
    """Invalid task request."""


@dataclass(frozen=True)
class TaskData:
    name: str
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        if self.inputs.shape != self.targets.shape or self.inputs.ndim != 1:
            raise TaskError("inputs and targets must be 1-D and equal length")


def narma10(n: int, seed: int, order: int = 10) -> TaskData:
    """Nonlinear autoregressive moving-average sequence of the given order.

    Drive u ~ U[0, 0.5];
    y[t+1] = 0.3 y[t] + 0.05 y[t] sum(y[t-order+1..t]) + 1.5 u[t-order+1] u[t] + 0.1.
    The target at step t is y[t+1], the next sequence value.
    """
    if order < 1:
        raise TaskError(f"order must be >= 1, got {order}")
    if n < order + 2:
        raise TaskError(f"need at least {order + 2} samples, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 0.5, n + 1)
    y = np.zeros(n + 1)
    for t in range(order - 1, n):
        y[t + 1] = (
            0.3 * y[t]
            + 0.05 * y[t] * np.sum(y[t - order + 1 : t + 1])
            + 1.5 * u[t - order + 1] * u[t]
            + 0.1
        )
    return TaskData(name="narma10", inputs=u[:n], targets=y[1 : n + 1])


def mackey_glass(
    n: int,
    seed: int,
    tau: float = 17.0,
    beta: float = 0.2,
    gamma: float = 0.1,
    exponent: float = 10.0,
    dt: float = 0.1,
    sample_every: int = 10,
    burn_in: int = 500,
    horizon: int = 1,
) -> TaskData:
    """Chaotic delay-differential sequence, one-step-ahead prediction.

    dx/dt = beta x(t - tau) / (1 + x(t - tau)**exponent) - gamma x(t),
    integrated with RK4 on a grid of step ``dt`` and decimated by
    ``sample_every``.  The seed perturbs the constant initial history, and
    ``burn_in`` samples are discarded so trajectories from different seeds
    decorrelate.  The target at step t is the sample ``horizon`` steps ahead.
    """
    if n < 2:
        raise TaskError(f"need at least 2 samples, got {n}")
    if tau <= 0 or dt <= 0 or sample_every < 1 or horizon < 1 or burn_in < 0:
        raise TaskError("tau, dt, sample_every, horizon must be positive")
    delay_steps = int(round(tau / dt))
    if abs(delay_steps * dt - tau) > 1e-9:
        raise TaskError(f"tau {tau} is not a multiple of dt {dt}")
    rng = np.random.default_rng(seed)
    total = (burn_in + n + horizon) * sample_every
    hist = np.empty(delay_steps + total + 1)
    hist[: delay_steps + 1] = 1.2 + 0.2 * (rng.uniform(size=delay_steps + 1) - 0.5)

    def deriv(x: float, x_delay: float) -> float:
        return beta * x_delay / (1.0 + x_delay**exponent) - gamma * x

    # RK4 with the delayed term interpolated midway between grid samples
    for k in range(total):
        i = delay_steps + k
        x = hist[i]
        xd0 = hist[i - delay_steps]
        xd1 = hist[i - delay_steps + 1]
        xdh = 0.5 * (xd0 + xd1)
        k1 = deriv(x, xd0)
        k2 = deriv(x + 0.5 * dt * k1, xdh)
        k3 = deriv(x + 0.5 * dt * k2, xdh)
        k4 = deriv(x + dt * k3, xd1)
        hist[i + 1] = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    series = hist[delay_steps::sample_every][burn_in : burn_in + n + horizon]
    return TaskData(name="mackey_glass", inputs=series[:n], targets=series[horizon : n + horizon])


def make_task(name: str, n: int, seed: int, **kwargs) -> TaskData:
    """Dispatch a task generator by name."""
    key = name.strip().lower().replace("-", "_")
    if key == "narma10":
        return narma10(n, seed, **kwargs)
    if key == "mackey_glass":
        return mackey_glass(n, seed, **kwargs)
    raise TaskError(f"unknown task {name!r}; expected one of {TASKS}")
