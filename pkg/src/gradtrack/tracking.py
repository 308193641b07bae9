"""Gradient tracking runtime.

Every node keeps a local copy of the decision variable and an auxiliary
tracker whose node-average always equals the average of the current local
gradients.  One outer iteration performs n_g local gradient steps (the last
one fused with communication) and n_c consensus steps through each of the
four communication matrices:

    inner (j = 1 .. n_g-1):  x <- x - alpha*y ;  y <- y + grad(x') - grad(x)
    outer:  x' = W1^nc x - alpha W2^nc y
            y' = W3^nc y + W4^nc (grad(x') - grad(x))

Mixing is applied blockwise to the (n, d) stack of local copies, never
materializing the (nd, nd) Kronecker form.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .problems import ObjectiveSuite
from .topology import CommunicationStrategy

DIVERGENCE_LIMIT = 1e12


class DivergenceError(RuntimeError):
    """Optimization error exceeded the divergence guard."""

    def __init__(self, k: int, opt_err: float):
        super().__init__(f"diverged at outer iteration {k}: opt_err = {opt_err:.3e}")
        self.k = k
        self.opt_err = opt_err


@dataclass(frozen=True)
class GtaConfig:
    """Run parameters: strategy, step size, computation steps, budgets."""

    strategy: CommunicationStrategy
    alpha: float
    n_g: int = 1
    max_outer_iters: int = 1000
    stop_tol: float | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"step size must be positive, got {self.alpha}")
        if self.n_g < 1 or int(self.n_g) != self.n_g:
            raise ValueError(f"n_g must be an integer >= 1, got {self.n_g}")
        if self.max_outer_iters < 0:
            raise ValueError("max_outer_iters must be nonnegative")


@dataclass(frozen=True)
class ErrorVector:
    """(optimization error, x consensus error, y consensus error) at an
    outer-iteration boundary."""

    opt_err: float
    x_consensus: float
    y_consensus: float

    def as_array(self) -> np.ndarray:
        return np.array([self.opt_err, self.x_consensus, self.y_consensus])


class GtaState:
    """Mutable iteration state owned by a single run.

    x, y and grads are (n, d) stacks of the local copies; k is the outer
    iteration and j the inner iteration (1-based, reset on communication).
    """

    __slots__ = ("suite", "x", "y", "grads", "k", "j")

    def __init__(self, suite: ObjectiveSuite, x: np.ndarray, y: np.ndarray,
                 grads: np.ndarray, k: int = 0, j: int = 1):
        self.suite = suite
        self.x = x
        self.y = y
        self.grads = grads
        self.k = k
        self.j = j

    def x_flat(self) -> np.ndarray:
        return self.x.reshape(-1)

    def y_flat(self) -> np.ndarray:
        return self.y.reshape(-1)


def initialize(suite: ObjectiveSuite, x0: np.ndarray) -> GtaState:
    """State at (k=0, j=1): trackers start at the local gradients of x0."""
    x0 = np.asarray(x0, dtype=float)
    if x0.size != suite.n * suite.d:
        raise ValueError(f"x0 has {x0.size} entries, expected n*d = {suite.n * suite.d}")
    x = x0.reshape(suite.n, suite.d).copy()
    grads = suite.grad_stack(x)
    return GtaState(suite, x=x, y=grads.copy(), grads=grads, k=0, j=1)


def inner_step(state: GtaState, alpha: float) -> GtaState:
    """One local computation step (no mixing): exactly one new gradient
    evaluation per node."""
    x_new = state.x - alpha * state.y
    g_new = state.suite.grad_stack(x_new)
    state.y = state.y + (g_new - state.grads)
    state.x = x_new
    state.grads = g_new
    state.j += 1
    return state


def outer_step(state: GtaState, cfg: GtaConfig) -> GtaState:
    """Communication update: n_c consensus steps through each slot, applied
    as precomputed matrix powers; one new gradient evaluation per node."""
    w1p, w2p, w3p, w4p = cfg.strategy.powered
    x_new = w1p @ state.x - cfg.alpha * (w2p @ state.y)
    g_new = state.suite.grad_stack(x_new)
    state.y = w3p @ state.y + w4p @ (g_new - state.grads)
    state.x = x_new
    state.grads = g_new
    state.k += 1
    state.j = 1
    return state


def error_vector(state: GtaState, suite: ObjectiveSuite) -> ErrorVector:
    """Measure the three errors against suite.x_star."""
    x_bar = state.x.mean(axis=0)
    y_bar = state.y.mean(axis=0)
    return ErrorVector(
        opt_err=float(np.linalg.norm(x_bar - suite.x_star)),
        x_consensus=float(np.linalg.norm(state.x - x_bar)),
        y_consensus=float(np.linalg.norm(state.y - y_bar)),
    )


@dataclass(frozen=True)
class RunTrace:
    """Per-outer-iteration error vectors plus cost counters.

    Row k reports the state at the boundary (k, 1); the cumulative counters
    are exact: comms = k * n_c consensus rounds and grads = k * n_g * n local
    gradient evaluations.
    """

    k: np.ndarray
    opt_err: np.ndarray
    x_consensus_err: np.ndarray
    y_consensus_err: np.ndarray
    n_c: int
    n_g: int
    n: int
    vectors_per_round: int
    wall_time: float

    @property
    def comms(self) -> np.ndarray:
        """Cumulative consensus rounds (each round touches every slot)."""
        return self.k * self.n_c

    @property
    def comm_vectors(self) -> np.ndarray:
        """Cumulative per-vector communication count (non-identity slots)."""
        return self.k * self.n_c * self.vectors_per_round

    @property
    def grad_evals(self) -> np.ndarray:
        return self.k * self.n_g * self.n

    def final(self) -> ErrorVector:
        return ErrorVector(float(self.opt_err[-1]), float(self.x_consensus_err[-1]),
                           float(self.y_consensus_err[-1]))

    def error_matrix(self) -> np.ndarray:
        """(iters+1, 3) array of error vectors, one row per boundary."""
        return np.column_stack([self.opt_err, self.x_consensus_err, self.y_consensus_err])

    def to_csv(self, path) -> None:
        comms = self.comms
        grads = self.grad_evals
        lines = ["k,comms_cumulative,grads_cumulative,opt_err,x_consensus_err,y_consensus_err"]
        for i in range(len(self.k)):
            lines.append("%d,%d,%d,%.17g,%.17g,%.17g" % (
                self.k[i], comms[i], grads[i], self.opt_err[i],
                self.x_consensus_err[i], self.y_consensus_err[i]))
        Path(path).write_text("\n".join(lines) + "\n")


def run(suite: ObjectiveSuite, cfg: GtaConfig, x0: np.ndarray) -> RunTrace:
    """Execute outer iterations until the budget or stop_tol is reached.

    Deterministic for fixed inputs.  Raises DivergenceError when the
    optimization error exceeds 1e12 (so step-size sweeps can safely probe
    unstable configurations).
    """
    if cfg.strategy.n != suite.n:
        raise ValueError(f"strategy has n={cfg.strategy.n} but suite has n={suite.n}")
    t0 = time.perf_counter()
    state = initialize(suite, x0)
    ks = [0]
    errs = [error_vector(state, suite)]
    # overflow on the way past the divergence guard is expected, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.max_outer_iters):
            if cfg.stop_tol is not None and errs[-1].opt_err <= cfg.stop_tol:
                break
            for _ in range(cfg.n_g - 1):
                inner_step(state, cfg.alpha)
            outer_step(state, cfg)
            ev = error_vector(state, suite)
            ks.append(state.k)
            errs.append(ev)
            if not np.isfinite(ev.opt_err) or ev.opt_err > DIVERGENCE_LIMIT:
                raise DivergenceError(state.k, ev.opt_err)
    return RunTrace(
        k=np.array(ks, dtype=int),
        opt_err=np.array([e.opt_err for e in errs]),
        x_consensus_err=np.array([e.x_consensus for e in errs]),
        y_consensus_err=np.array([e.y_consensus for e in errs]),
        n_c=cfg.strategy.n_c,
        n_g=cfg.n_g,
        n=suite.n,
        vectors_per_round=cfg.strategy.vectors_per_round(),
        wall_time=time.perf_counter() - t0,
    )
