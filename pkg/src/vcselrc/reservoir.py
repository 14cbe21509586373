"""Diffractive-coupling reservoir over a laser grid with a trained readout.

The network is a translation-invariant kernel on the emitter grid: each
node couples to every neighbor within a Chebyshev radius, one strength
per distance order, hard edges, no wraparound.  Dynamics are a
discrete-time leaky map

    x' = (1 - leak) * x + leak * scale * f(W x + w_in * u + b)

with f a saturating monotone nonlinearity applied to the rectified
drive, so states stay in [0, scale].  One step stands for 50 ps of
wall-clock physics; the mapping affects reporting only.  Only the linear
readout is trained (ridge regression with an unpenalized intercept).

Echo-state check: both nonlinearities have slope at most 1, so the state
map contracts at rate (1 - leak) + leak * rho * scale per step, with rho
the coupling spectral radius; the factor is below 1 whenever
rho * scale < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .array import ArrayModel, locked_mask
from .device import injection_efficiency
from .tasks import make_task

NONLINEARITIES = ("saturating", "tanh")


class ReservoirError(ValueError):
    """Invalid reservoir construction or run request."""


@dataclass(frozen=True)
class CouplingMatrix:
    """Grid coupling kernel with its spectral radius attached."""

    weights: np.ndarray
    rows: int
    cols: int
    radius: int
    strengths: dict
    spectral_radius: float

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def max_row_sum(self) -> float:
        return float(np.abs(self.weights).sum(axis=1).max())

    def scaled_to(self, spectral_radius: float) -> "CouplingMatrix":
        """Rescale the kernel to a target spectral radius."""
        if spectral_radius < 0:
            raise ReservoirError(f"spectral radius must be >= 0, got {spectral_radius}")
        if spectral_radius == 0:
            w = np.zeros_like(self.weights)
            w.setflags(write=False)
            return replace(self, weights=w, strengths={k: 0.0 for k in self.strengths},
                           spectral_radius=0.0)
        if self.spectral_radius == 0:
            raise ReservoirError("cannot rescale a zero coupling matrix to a nonzero radius")
        g = spectral_radius / self.spectral_radius
        w = self.weights * g
        w.setflags(write=False)
        return replace(
            self,
            weights=w,
            strengths={k: v * g for k, v in self.strengths.items()},
            spectral_radius=spectral_radius,
        )


def power_iteration_radius(weights: np.ndarray, tol: float = 1e-13, max_iter: int = 20000) -> float:
    """Spectral radius of a symmetric nonnegative kernel by power iteration.

    The Perron root equals the spectral radius for such kernels; a
    Gershgorin shift makes the whole spectrum nonnegative first, so the
    iteration cannot oscillate between opposite-sign eigenpairs (radius-1
    kernels on thin grids are bipartite).
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ReservoirError("coupling matrix must be square")
    if not np.any(w):
        return 0.0
    n = w.shape[0]
    shift = float(np.abs(w).sum(axis=1).max())
    m = w + shift * np.eye(n)
    x = np.full(n, 1.0 / math.sqrt(n))
    prev = 0.0
    for _ in range(max_iter):
        y = m @ x
        r = float(x @ y)
        x = y / np.linalg.norm(y)
        if abs(r - prev) <= tol * max(1.0, abs(r)):
            return r - shift
        prev = r
    return prev - shift


def build_doe_coupling(
    rows: int = 5,
    cols: int = 5,
    strengths: dict | None = None,
    radius: int | None = None,
    self_coupling: float = 0.0,
    row_sum_bound: float | None = None,
) -> CouplingMatrix:
    """Translation-invariant Chebyshev-distance kernel on the grid.

    ``strengths`` maps each distance order to a nonnegative coupling
    weight (default {1: 1.0, 2: 0.4}); orders above ``radius`` (default:
    the largest keyed order) are rejected, as is a radius the grid cannot
    contain.  Hard edges: border nodes simply have fewer neighbors.
    """
    if rows < 1 or cols < 1:
        raise ReservoirError("grid must be at least 1x1")
    if strengths is None:
        strengths = {1: 1.0, 2: 0.4}
    if any(o < 1 or int(o) != o for o in strengths):
        raise ReservoirError("strength orders must be integers >= 1")
    if any(v < 0 for v in strengths.values()):
        raise ReservoirError("strengths must be >= 0")
    if radius is None:
        radius = max(strengths, default=1)
    if radius < 1:
        raise ReservoirError(f"radius must be >= 1, got {radius}")
    grid_reach = max(rows, cols) - 1
    if radius > grid_reach:
        raise ReservoirError(f"radius {radius} exceeds the grid reach {grid_reach}")
    if strengths and max(strengths) > radius:
        raise ReservoirError(f"strength order {max(strengths)} exceeds radius {radius}")
    n = rows * cols
    w = np.zeros((n, n))
    for a in range(n):
        ra, ca = divmod(a, cols)
        for b in range(n):
            if a == b:
                w[a, b] = self_coupling
                continue
            rb, cb = divmod(b, cols)
            d = max(abs(ra - rb), abs(ca - cb))
            if d <= radius:
                w[a, b] = strengths.get(d, 0.0)
    if row_sum_bound is not None:
        worst = float(np.abs(w).sum(axis=1).max())
        if worst > row_sum_bound:
            raise ReservoirError(
                f"max row sum {worst:.6g} exceeds the configured bound {row_sum_bound}"
            )
    w.setflags(write=False)
    return CouplingMatrix(
        weights=w,
        rows=rows,
        cols=cols,
        radius=radius,
        strengths=dict(strengths),
        spectral_radius=power_iteration_radius(w),
    )


@dataclass(frozen=True)
class ReservoirConfig:
    """Hyperparameters of the leaky-map reservoir and its readout."""

    leak: float = 0.35
    spectral_radius: float = 0.9
    input_scale: float = 0.2
    bias_scale: float = 0.2
    nonlinearity: str = "saturating"
    node_scale: float = 1.0
    ridge: float = 1e-8
    washout: int = 200
    n_train: int = 2000
    n_test: int = 1000

    def __post_init__(self) -> None:
        if not 0 < self.leak <= 1:
            raise ReservoirError(f"leak must be in (0, 1], got {self.leak}")
        if self.spectral_radius < 0:
            raise ReservoirError("spectral radius must be >= 0")
        if self.input_scale < 0 or self.bias_scale < 0 or self.node_scale <= 0:
            raise ReservoirError("input/bias scales must be >= 0 and node scale > 0")
        if self.nonlinearity not in NONLINEARITIES:
            raise ReservoirError(
                f"nonlinearity must be one of {NONLINEARITIES}, got {self.nonlinearity!r}"
            )
        if self.ridge < 0:
            raise ReservoirError(f"ridge must be >= 0, got {self.ridge}")
        if self.washout < 0:
            raise ReservoirError("washout must be >= 0")
        if self.n_train < 50:
            raise ReservoirError(f"need at least 50 training samples, got {self.n_train}")
        if self.n_test < 1:
            raise ReservoirError("need at least 1 test sample")

    @property
    def n_total(self) -> int:
        return self.washout + self.n_train + self.n_test

    def contraction_factor(self) -> float:
        """Per-step bound on state-difference shrinkage (slope of f is <= 1)."""
        return (1.0 - self.leak) + self.leak * self.spectral_radius * self.node_scale


def node_nonlinearity(name: str):
    """Monotone saturating response on the rectified drive, unit max slope."""
    if name == "saturating":
        def f(z):
            r = np.maximum(z, 0.0)
            return r / (1.0 + r)
        return f
    if name == "tanh":
        def f(z):
            return np.tanh(np.maximum(z, 0.0))
        return f
    raise ReservoirError(f"nonlinearity must be one of {NONLINEARITIES}, got {name!r}")


def input_layer(
    n: int, config: ReservoirConfig, seed: int, efficiencies=None
) -> tuple[np.ndarray, np.ndarray]:
    """Per-node input weights and bias, drawn in a fixed order from the seed.

    Draw order: signs, magnitudes, biases.  Input weights are signed,
    scaled by ``input_scale`` and by each node's injection efficiency.
    """
    rng = np.random.default_rng(seed)
    sign = rng.choice([-1.0, 1.0], n)
    mag = rng.uniform(0.5, 1.0, n)
    bias = rng.uniform(0.0, config.bias_scale, n)
    if efficiencies is None:
        eff = np.ones(n)
    else:
        eff = np.asarray(efficiencies, dtype=float)
        if eff.shape != (n,):
            raise ReservoirError(f"need {n} efficiencies, got shape {eff.shape}")
        if np.any(eff < 0) or np.any(eff > 1):
            raise ReservoirError("efficiencies must lie in [0, 1]")
    return config.input_scale * sign * mag * eff, bias


def reservoir_step(state, u: float, weights, w_in, bias, leak: float, f, node_scale: float = 1.0):
    """One leaky-map update; pure function of its arguments."""
    x = np.asarray(state, dtype=float)
    z = weights @ x + np.asarray(w_in) * u + bias
    return (1.0 - leak) * x + leak * node_scale * f(z)


def run_reservoir(
    inputs,
    coupling: CouplingMatrix,
    config: ReservoirConfig,
    seed: int = 0,
    efficiencies=None,
    x0=None,
) -> np.ndarray:
    """Drive the reservoir over an input sequence; returns the state matrix."""
    u = np.asarray(inputs, dtype=float)
    if u.ndim != 1:
        raise ReservoirError("inputs must be a 1-D sequence")
    n = coupling.n
    w = coupling.scaled_to(config.spectral_radius).weights
    w_in, bias = input_layer(n, config, seed, efficiencies)
    f = node_nonlinearity(config.nonlinearity)
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (n,):
        raise ReservoirError(f"initial state must have shape ({n},)")
    states = np.empty((u.size, n))
    for t in range(u.size):
        x = reservoir_step(x, float(u[t]), w, w_in, bias, config.leak, f, config.node_scale)
        states[t] = x
    return states


def echo_state_gap(
    coupling: CouplingMatrix, config: ReservoirConfig, seed: int = 0, steps: int | None = None
) -> float:
    """Largest state difference left after driving two extreme initial states.

    Runs the same random input sequence from the zero state and from the
    all-saturated state; the sup-norm gap after ``steps`` (default: the
    configured washout) bounds any initial-condition memory.
    """
    if steps is None:
        steps = config.washout
    if steps < 1:
        raise ReservoirError("need at least 1 step")
    u = np.random.default_rng(seed).uniform(0.0, 0.5, steps)
    a = run_reservoir(u, coupling, config, seed=seed, x0=np.zeros(coupling.n))
    b = run_reservoir(u, coupling, config, seed=seed, x0=np.full(coupling.n, config.node_scale))
    return float(np.max(np.abs(a[-1] - b[-1])))


@dataclass(frozen=True)
class ReadoutWeights:
    """Trained linear readout: one weight per node plus an intercept."""

    node_weights: np.ndarray
    intercept: float
    ridge: float
    rank: int
    rank_deficient: bool

    def predict(self, states) -> np.ndarray:
        x = np.asarray(states, dtype=float)
        return x @ self.node_weights + self.intercept


#: rank cutoff (relative to the largest singular value) for ridge = 0 fits
LSTSQ_RCOND = 1e-10


def train_readout(states, targets, ridge: float) -> ReadoutWeights:
    """Ridge regression of targets on states with an unpenalized intercept.

    Both sides are centered, so the intercept absorbs the means and the
    penalty acts on the node weights only.  ridge = 0 falls back to the
    minimum-norm least-squares solution with rank cutoff ``LSTSQ_RCOND``;
    rank deficiency is flagged on the result, not fatal.
    """
    x = np.asarray(states, dtype=float)
    y = np.asarray(targets, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.size:
        raise ReservoirError("states must be (samples, nodes) matching targets")
    if x.shape[0] < 2:
        raise ReservoirError("need at least 2 training samples")
    if ridge < 0:
        raise ReservoirError(f"ridge must be >= 0, got {ridge}")
    n = x.shape[1]
    xm = x.mean(axis=0)
    ym = float(y.mean())
    xc = x - xm
    yc = y - ym
    if ridge == 0:
        w, _, rank, _ = np.linalg.lstsq(xc, yc, rcond=LSTSQ_RCOND)
    else:
        a = np.vstack([xc, math.sqrt(ridge) * np.eye(n)])
        b = np.concatenate([yc, np.zeros(n)])
        w, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
        rank = min(rank, n)
    w = np.asarray(w, dtype=float)
    w.setflags(write=False)
    return ReadoutWeights(
        node_weights=w,
        intercept=ym - float(xm @ w),
        ridge=ridge,
        rank=int(rank),
        rank_deficient=int(rank) < n,
    )


def evaluate(weights: ReadoutWeights, states, targets) -> float:
    """Mean squared error normalized by target variance (1.0 = mean predictor)."""
    y = np.asarray(targets, dtype=float)
    pred = weights.predict(states)
    if pred.shape != y.shape:
        raise ReservoirError("states and targets lengths differ")
    var = float(y.var())
    if var == 0:
        raise ReservoirError("targets have zero variance; NMSE undefined")
    return float(np.mean((pred - y) ** 2) / var)


def apply_node_mask(states, active) -> np.ndarray:
    """Zero the columns of inactive nodes so they cannot reach the readout."""
    x = np.asarray(states, dtype=float).copy()
    a = np.asarray(active, dtype=bool)
    if a.shape != (x.shape[1],):
        raise ReservoirError(f"need one flag per node, got shape {a.shape}")
    x[:, ~a] = 0.0
    return x


@dataclass(frozen=True)
class RCRunResult:
    """Metrics and traces of one reservoir benchmark run."""

    task: str
    seed: int
    config: ReservoirConfig
    n_nodes: int
    active: tuple[bool, ...]
    nmse_train: float
    nmse_test: float
    nmse_bias_only: float
    improvement_vs_bias: float
    weights: ReadoutWeights
    states: np.ndarray
    inputs: np.ndarray
    targets: np.ndarray
    predictions_test: np.ndarray

    @property
    def n_active(self) -> int:
        return int(sum(self.active))


def run_task(
    task_name: str,
    coupling: CouplingMatrix,
    config: ReservoirConfig = ReservoirConfig(),
    seed: int = 0,
    array: ArrayModel | None = None,
    currents_ma=None,
    master_power_per_device_mw: float | None = None,
    active=None,
) -> RCRunResult:
    """Generate a task, drive the reservoir, train the readout, evaluate.

    The input sequence comes from a stream derived from ``seed + 1`` and
    the input layer from ``seed``, so one seed pins the whole run.  When
    an array is given, its polarization angles set the per-node injection
    efficiencies; with an operating point (``currents_ma`` and master
    power) on top, nodes outside their locking interval are masked out of
    the readout unless ``active`` overrides the mask.  Masked columns are
    zeroed for training and prediction alike, so an all-masked run falls
    back exactly to the bias-only (train-mean) predictor.
    """
    n = coupling.n
    efficiencies = None
    if array is not None:
        if array.n != n:
            raise ReservoirError(f"array has {array.n} devices but the grid has {n} nodes")
        pol = array.pol_angle_deg()
        mean_pol = float(pol.mean())
        efficiencies = np.array([injection_efficiency(p - mean_pol) for p in pol])
        if active is None and currents_ma is not None and master_power_per_device_mw is not None:
            active = locked_mask(array, currents_ma, master_power_per_device_mw)
    if active is None:
        active = np.ones(n, dtype=bool)
    else:
        active = np.asarray(active, dtype=bool)
        if active.shape != (n,):
            raise ReservoirError(f"need one active flag per node, got shape {active.shape}")
    data = make_task(task_name, config.n_total, seed + 1)
    states = run_reservoir(data.inputs, coupling, config, seed=seed, efficiencies=efficiencies)
    masked = apply_node_mask(states, active)
    lo, hi = config.washout, config.washout + config.n_train
    x_train, y_train = masked[lo:hi], data.targets[lo:hi]
    x_test, y_test = masked[hi:], data.targets[hi:]
    weights = train_readout(x_train, y_train, config.ridge)
    nmse_train = evaluate(weights, x_train, y_train)
    nmse_test = evaluate(weights, x_test, y_test)
    var_test = float(y_test.var())
    nmse_bias = float(np.mean((float(y_train.mean()) - y_test) ** 2) / var_test)
    return RCRunResult(
        task=data.name,
        seed=seed,
        config=config,
        n_nodes=n,
        active=tuple(bool(v) for v in active),
        nmse_train=nmse_train,
        nmse_test=nmse_test,
        nmse_bias_only=nmse_bias,
        improvement_vs_bias=1.0 - nmse_test / nmse_bias,
        weights=weights,
        states=states,
        inputs=data.inputs,
        targets=data.targets,
        predictions_test=weights.predict(x_test),
    )
