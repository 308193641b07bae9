"""Objective suites: strongly convex quadratics and l2-regularized logistic
regression split across nodes, with exact gradients, global smoothness and
strong-convexity constants, and a reference optimum."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    """Raised for malformed dataset files or impossible partitions."""


class ReferenceOptimumError(RuntimeError):
    """Raised when the reference-optimum solver hits its iteration cap."""


class ObjectiveSuite:
    """n local differentiable objectives plus global constants.

    Attributes:
        n, d: node count and decision dimension.
        L: largest Lipschitz constant of the local gradients.
        mu: strong-convexity constant of the global average objective.
        x_star: minimizer of the global average objective.
    """

    n: int
    d: int
    L: float
    mu: float
    x_star: np.ndarray

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    def local_value(self, i: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def local_grad(self, i: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_stack(self, xs: np.ndarray) -> np.ndarray:
        """Gradients of all locals, node i evaluated at row i of xs (n, d)."""
        raise NotImplementedError

    def grad_stack_batch(self, xs: np.ndarray) -> np.ndarray:
        """grad_stack over a trailing batch axis: (n, d, c) -> (n, d, c).

        Candidates-last keeps every per-node contraction a clean matrix
        product (used by the vectorized step-size sweep).
        """
        out = np.empty_like(xs)
        for c in range(xs.shape[2]):
            out[:, :, c] = self.grad_stack(np.ascontiguousarray(xs[:, :, c]))
        return out

    def global_value(self, x: np.ndarray) -> float:
        return sum(self.local_value(i, x) for i in range(self.n)) / self.n

    def global_grad(self, x: np.ndarray) -> np.ndarray:
        xs = np.broadcast_to(x, (self.n, self.d))
        return self.grad_stack(np.ascontiguousarray(xs)).mean(axis=0)


class QuadraticSuite(ObjectiveSuite):
    """f_i(x) = 0.5 x'Q_i x + b_i'x with Q_i symmetric positive definite."""

    def __init__(self, qs: np.ndarray, bs: np.ndarray):
        qs = np.asarray(qs, dtype=float)
        bs = np.asarray(bs, dtype=float)
        if qs.ndim != 3 or qs.shape[1] != qs.shape[2]:
            raise ValueError(f"expected stacked square matrices, got shape {qs.shape}")
        if bs.shape != qs.shape[:2]:
            raise ValueError(f"b shape {bs.shape} does not match Q shape {qs.shape}")
        self.n, self.d = bs.shape
        for i in range(self.n):
            if np.max(np.abs(qs[i] - qs[i].T)) > 1e-12:
                raise ValueError(f"Q_{i} is not symmetric")
        self.qs = qs
        self.bs = bs
        self.hessian = qs.mean(axis=0)
        b_bar = bs.mean(axis=0)
        h_eigs = np.linalg.eigvalsh(self.hessian)
        if h_eigs[0] <= 0:
            raise ValueError("global Hessian is not positive definite")
        self.mu = float(h_eigs[0])
        self.L = float(max(np.linalg.eigvalsh(qs[i])[-1] for i in range(self.n)))
        self.x_star = np.linalg.solve(self.hessian, -b_bar)

    def local_value(self, i, x):
        return float(0.5 * x @ self.qs[i] @ x + self.bs[i] @ x)

    def local_grad(self, i, x):
        return self.qs[i] @ x + self.bs[i]

    def grad_stack(self, xs):
        return np.einsum("nij,nj->ni", self.qs, xs) + self.bs

    def grad_stack_batch(self, xs):
        return np.matmul(self.qs, xs) + self.bs[:, :, None]


@dataclass(frozen=True)
class QuadraticSpec:
    """Seeded recipe for a random quadratic suite with a target global
    condition number (serializable: the four fields replay the suite)."""

    n: int
    d: int
    kappa_target: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        if self.kappa_target < 1:
            raise ValueError(f"kappa_target must be >= 1, got {self.kappa_target}")


def quadratic_suite(qs, bs) -> QuadraticSuite:
    """Suite from explicit per-node matrices Q_i and vectors b_i."""
    return QuadraticSuite(np.asarray(qs, dtype=float), np.asarray(bs, dtype=float))


def generate_quadratic(spec: QuadraticSpec) -> QuadraticSuite:
    """Random quadratic suite whose global Hessian hits spec.kappa_target.

    Each Q_i = U_i diag(lam_i) U_i' with U_i a random orthogonal matrix and
    lam_i log-uniform on [1, kappa_target].  Averaging washes the spread out
    (the raw global condition number lands far below the per-node one), so
    every node then receives the same positive-semidefinite rank-1 correction
    aligned with an extreme eigenvector of the global Hessian, sized to make
    its condition number match the target exactly.  The shared correction
    keeps the largest local smoothness constant close to the global one, so
    L/mu lands near the target as well.
    """
    if spec.d == 1 and spec.kappa_target > 1.0:
        raise ValueError("d = 1 forces a global condition number of exactly 1")
    rng = np.random.default_rng(spec.seed)
    qs = np.empty((spec.n, spec.d, spec.d))
    for i in range(spec.n):
        u, _ = np.linalg.qr(rng.normal(size=(spec.d, spec.d)))
        lam = np.exp(rng.uniform(0.0, np.log(spec.kappa_target), size=spec.d)) \
            if spec.kappa_target > 1 else np.ones(spec.d)
        q = (u * lam) @ u.T
        qs[i] = 0.5 * (q + q.T)
    bs = rng.normal(size=(spec.n, spec.d))

    if spec.d > 1:
        h = qs.mean(axis=0)
        evals, evecs = np.linalg.eigh(h)
        lo, hi = evals[0], evals[-1]
        if hi / lo <= spec.kappa_target:
            # stretch the top of the global spectrum up to target * lo
            v = evecs[:, -1]
            gamma = spec.kappa_target * lo - hi
        else:
            # lift the bottom of the global spectrum up to hi / target
            v = evecs[:, 0]
            gamma = hi / spec.kappa_target - lo
        ridge = gamma * np.outer(v, v)
        for i in range(spec.n):
            qs[i] = qs[i] + ridge
            qs[i] = 0.5 * (qs[i] + qs[i].T)
        # normalize the scale so mu = 1: keeps both condition numbers, puts
        # 1/L on the order of 1/kappa_target (inside the 2^-t tuning range)
        qs /= np.linalg.eigvalsh(qs.mean(axis=0))[0]
    return QuadraticSuite(qs, bs)


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True)
class LogRegDataset:
    """Samples partitioned across nodes; labels already mapped to {-1, +1}."""

    features: tuple[np.ndarray, ...]   # node i: (n_i, d)
    labels: tuple[np.ndarray, ...]     # node i: (n_i,), values in {-1, +1}
    d: int

    @property
    def n_nodes(self) -> int:
        return len(self.features)

    @property
    def total_samples(self) -> int:
        return sum(a.shape[0] for a in self.features)


def _map_labels(raw: np.ndarray) -> np.ndarray:
    values = sorted(set(raw.tolist()))
    if values in ([-1.0, 1.0], [-1.0], [1.0]):
        return raw
    if len(values) == 1:
        raise DataFormatError(f"only one label value present: {values[0]}")
    if len(values) != 2:
        raise DataFormatError(f"expected binary labels, got values {values}")
    lo, hi = values
    return np.where(raw == lo, -1.0, 1.0)


def load_libsvm(path, n_nodes: int, normalize: bool = False,
                shuffle_seed: int | None = None) -> LogRegDataset:
    """Parse a LIBSVM text file ("label idx:val ...") and shard it.

    Features are densified with d inferred as the maximum feature index.
    Samples are split into n_nodes contiguous shards of near-equal size (the
    remainder goes to the first shards).  Labels in {0,1} (or any two
    distinct values) are mapped to {-1,+1}.  normalize rescales each feature
    to [0, 1] over the whole dataset.  shuffle_seed, if given, permutes the
    samples reproducibly before sharding.
    """
    if n_nodes < 1:
        raise DataFormatError(f"n_nodes must be >= 1, got {n_nodes}")
    labels = []
    rows = []   # list of (idx array, val array), 1-based indices
    d = 0
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            try:
                labels.append(float(toks[0]))
                idx = np.empty(len(toks) - 1, dtype=int)
                val = np.empty(len(toks) - 1)
                for t, tok in enumerate(toks[1:]):
                    i_str, v_str = tok.split(":")
                    idx[t] = int(i_str)
                    val[t] = float(v_str)
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}: malformed line {ln}: {exc}") from exc
            if len(idx) and idx.min() < 1:
                raise DataFormatError(f"{path}: malformed line {ln}: feature index < 1")
            if len(idx):
                d = max(d, int(idx.max()))
            rows.append((idx, val))
    m = len(rows)
    if m < n_nodes:
        raise DataFormatError(f"{m} samples cannot be split over {n_nodes} nodes")
    if d == 0:
        raise DataFormatError(f"{path}: no features found")

    a = np.zeros((m, d))
    for r, (idx, val) in enumerate(rows):
        a[r, idx - 1] = val
    y = _map_labels(np.asarray(labels))

    if normalize:
        lo = a.min(axis=0)
        rng_ = a.max(axis=0) - lo
        rng_[rng_ == 0] = 1.0
        a = (a - lo) / rng_

    if shuffle_seed is not None:
        perm = np.random.default_rng(shuffle_seed).permutation(m)
        a, y = a[perm], y[perm]

    base, rem = divmod(m, n_nodes)
    feats, labs = [], []
    start = 0
    for i in range(n_nodes):
        size = base + (1 if i < rem else 0)
        feats.append(a[start:start + size].copy())
        labs.append(y[start:start + size].copy())
        start += size
    return LogRegDataset(features=tuple(feats), labels=tuple(labs), d=d)


class LogisticSuite(ObjectiveSuite):
    """Per node: f_i(x) = (1/n_i) sum_s log(1 + exp(-y_s a_s'x)) + (1/n_i)||x||^2.

    The per-node regularizer weight 1/n_i makes the global strong-convexity
    constant data dependent: mu = (2/n) sum_i 1/n_i (curvature of the
    regularizers alone; the loss term only adds curvature).
    L_i = lam_max(A_i'A_i)/(4 n_i) + 2/n_i and L = max_i L_i.
    """

    def __init__(self, dataset: LogRegDataset):
        for i, a in enumerate(dataset.features):
            if a.shape[0] == 0:
                raise DataFormatError(f"node {i} received an empty shard")
        self.dataset = dataset
        self.n = dataset.n_nodes
        self.d = dataset.d
        counts = np.array([a.shape[0] for a in dataset.features], dtype=float)
        self.mu = float(2.0 / self.n * np.sum(1.0 / counts))
        l_is = []
        for a, n_i in zip(dataset.features, counts):
            gram_top = float(np.linalg.eigvalsh(a.T @ a)[-1])
            l_is.append(gram_top / (4.0 * n_i) + 2.0 / n_i)
        self.L = float(max(l_is))
        self.x_star = None  # filled in by logreg_suite
        # signed features y_s * a_s, precomputed per node
        self._signed = tuple(a * y[:, None] for a, y in zip(dataset.features, dataset.labels))

    def local_value(self, i, x):
        margins = self._signed[i] @ x
        n_i = margins.shape[0]
        return float(np.logaddexp(0.0, -margins).sum() / n_i + (x @ x) / n_i)

    def local_grad(self, i, x):
        sa = self._signed[i]
        n_i = sa.shape[0]
        sig = _sigmoid(-(sa @ x))
        return (-(sa.T @ sig) + 2.0 * x) / n_i

    def grad_stack(self, xs):
        out = np.empty_like(xs)
        for i in range(self.n):
            out[i] = self.local_grad(i, xs[i])
        return out

    def grad_stack_batch(self, xs):
        out = np.empty_like(xs)
        for i, sa in enumerate(self._signed):
            n_i = sa.shape[0]
            sig = _sigmoid(-(sa @ xs[i]))                  # (n_i, c)
            out[i] = (-(sa.T @ sig) + 2.0 * xs[i]) / n_i
        return out


def compute_reference_optimum(suite: ObjectiveSuite, tol: float = 1e-12,
                              max_iters: int = 10_000_000) -> np.ndarray:
    """Minimizer of the global average objective.

    Quadratic suites are solved analytically; anything else runs centralized
    gradient descent with step 1/L from zero until the global gradient norm
    drops below tol.  Deterministic for a fixed suite.
    """
    if isinstance(suite, QuadraticSuite):
        return np.linalg.solve(suite.hessian, -suite.bs.mean(axis=0))
    x = np.zeros(suite.d)
    step = 1.0 / suite.L
    for _ in range(max_iters):
        g = suite.global_grad(x)
        if np.linalg.norm(g) <= tol:
            return x
        x = x - step * g
    achieved = float(np.linalg.norm(suite.global_grad(x)))
    raise ReferenceOptimumError(
        f"gradient norm {achieved:.3e} after {max_iters} iterations (target {tol:.1e})")


def logreg_suite(dataset: LogRegDataset) -> LogisticSuite:
    """Logistic suite with the reference optimum solved to 1e-12."""
    suite = LogisticSuite(dataset)
    suite.x_star = compute_reference_optimum(suite)
    return suite
