"""Shared fixtures and independent test oracles.

The oracles here deliberately avoid the library's own code paths: finite
differences for gradients, dense eigendecompositions for spectral
quantities, and an explicit Kronecker-product reference for the blockwise
mixing update.
"""

import numpy as np
import pytest

import gradtrack as gt


def central_diff(f, x, h=None):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-6 * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def eig_beta(w):
    """Deflated spectral norm via a dense symmetric eigensolver."""
    n = w.shape[0]
    return float(np.max(np.abs(np.linalg.eigvalsh(w - np.ones((n, n)) / n))))


def eig_matrix_power(w, p):
    """Matrix power reconstructed from an eigendecomposition."""
    vals, vecs = np.linalg.eigh(w)
    return (vecs * vals**p) @ vecs.T


def kron_outer_step(state_x, state_y, grads, suite, strategy, alpha):
    """Dense Kronecker reference for the communication update.

    Materializes Z_i = W_i^nc (x) I_d and applies it to the flattened
    vectors; returns the next (x, y) stacks.
    """
    n, d = state_x.shape
    eye_d = np.eye(d)
    z = [np.kron(p, eye_d) for p in strategy.powered]
    x_flat = state_x.reshape(-1)
    y_flat = state_y.reshape(-1)
    x_next = z[0] @ x_flat - alpha * (z[1] @ y_flat)
    g_next = suite.grad_stack(x_next.reshape(n, d))
    y_next = z[2] @ y_flat + z[3] @ (g_next.reshape(-1) - grads.reshape(-1))
    return x_next.reshape(n, d), y_next.reshape(n, d)


@pytest.fixture
def scalar_suite():
    """Single node, f(x) = x^2/2 (L = mu = 1, x* = 0)."""
    return gt.quadratic_suite([[[1.0]]], [[0.0]])


@pytest.fixture
def two_node_suite():
    """The hand-solvable pair Q1 = I, Q2 = diag(3, 1), b = (-2, 0)."""
    return gt.quadratic_suite([np.diag([1.0, 1.0]), np.diag([3.0, 1.0])],
                              [[-2.0, 0.0], [-2.0, 0.0]])


@pytest.fixture
def small_quadratic():
    return gt.generate_quadratic(gt.QuadraticSpec(n=8, d=4, kappa_target=30.0, seed=2))


@pytest.fixture
def cycle8_mixing():
    return gt.metropolis_weights(gt.build_graph("cycle", 8))
