import numpy as np
import pytest

import gradtrack as gt
from gradtrack.problems import (DataFormatError, LogRegDataset, QuadraticSpec,
                                compute_reference_optimum, generate_quadratic,
                                load_libsvm, logreg_suite, quadratic_suite)

from conftest import central_diff


# --------------------------------------------------------------- quadratics

def test_scalar_quadratic():
    s = quadratic_suite([[[2.0]]], [[-4.0]])
    assert s.x_star == pytest.approx([2.0])
    assert s.L == 2.0 and s.mu == 2.0


def test_two_node_suite_constants(two_node_suite):
    # oracle: solve 0.5*(Q1+Q2) x = -b_bar directly
    h = 0.5 * (np.diag([1.0, 1.0]) + np.diag([3.0, 1.0]))
    x_oracle = np.linalg.solve(h, [2.0, 0.0])
    assert two_node_suite.x_star == pytest.approx(x_oracle, abs=1e-15)
    assert two_node_suite.x_star == pytest.approx([1.0, 0.0])
    assert two_node_suite.mu == 1.0
    assert two_node_suite.L == 3.0


def test_batched_gradients_match_per_point_evaluation(small_quadratic):
    # quadratic and logistic batch kernels against the per-point path
    rng = np.random.default_rng(12)
    logistic = logreg_suite(load_libsvm("data/synth_binary.libsvm", 4))
    for suite in (small_quadratic, logistic):
        xs = rng.normal(size=(suite.n, suite.d, 6))
        batched = suite.grad_stack_batch(xs)
        for c in range(6):
            single = suite.grad_stack(np.ascontiguousarray(xs[:, :, c]))
            assert np.max(np.abs(batched[:, :, c] - single)) <= 1e-13


def test_quadratic_gradients_are_exact(small_quadratic):
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.normal(size=small_quadratic.d)
        i = int(rng.integers(small_quadratic.n))
        expected = small_quadratic.qs[i] @ x + small_quadratic.bs[i]
        assert np.array_equal(small_quadratic.local_grad(i, x), expected)


def test_generated_suite_hits_kappa_window():
    suite = generate_quadratic(QuadraticSpec(n=16, d=10, kappa_target=1e4, seed=0))
    assert 9e3 <= suite.kappa <= 1.1e4
    cond = np.linalg.cond(suite.hessian)
    assert abs(cond - 1e4) <= 0.1 * 1e4


def test_generated_suite_is_positive_definite_and_deterministic():
    spec = QuadraticSpec(n=6, d=5, kappa_target=100.0, seed=11)
    a, b = generate_quadratic(spec), generate_quadratic(spec)
    assert np.array_equal(a.qs, b.qs) and np.array_equal(a.bs, b.bs)
    for q in a.qs:
        assert np.linalg.eigvalsh(q)[0] > 0


def test_generator_rejects_bad_targets():
    with pytest.raises(ValueError):
        QuadraticSpec(n=2, d=3, kappa_target=0.5)
    with pytest.raises(ValueError, match="d = 1"):
        generate_quadratic(QuadraticSpec(n=2, d=1, kappa_target=10.0))


def test_normal_equations_at_optimum(small_quadratic):
    g = small_quadratic.global_grad(small_quadratic.x_star)
    assert np.linalg.norm(g) <= 1e-12


def test_assumption_inequalities_hold(small_quadratic):
    # strong convexity of the average and Lipschitz gradients of the locals
    # on random pairs, with the reported constants
    rng = np.random.default_rng(1)
    s = small_quadratic
    for _ in range(100):
        a = rng.normal(size=s.d)
        b = rng.normal(size=s.d)
        lhs = s.global_value(b)
        rhs = (s.global_value(a) + s.global_grad(a) @ (b - a)
               + 0.5 * s.mu * np.linalg.norm(b - a) ** 2)
        assert lhs >= rhs - 1e-9 * (1 + abs(lhs))
        i = int(rng.integers(s.n))
        gdiff = np.linalg.norm(s.local_grad(i, a) - s.local_grad(i, b))
        assert gdiff <= s.L * np.linalg.norm(a - b) * (1 + 1e-12)


# ------------------------------------------------------------------ libsvm

def _write(tmp_path, text, name="data.txt"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_even_split(tmp_path):
    p = _write(tmp_path, "1 1:1\n0 1:2\n1 2:3\n0 2:4\n")
    ds = load_libsvm(p, 2)
    assert [a.shape[0] for a in ds.features] == [2, 2]
    assert ds.d == 2


def test_remainder_goes_to_first_shards(tmp_path):
    p = _write(tmp_path, "\n".join(f"1 1:{i}" for i in range(5)) + "\n")
    ds = load_libsvm(p, 2)
    assert [a.shape[0] for a in ds.features] == [3, 2]


def test_zero_one_labels_mapped_to_signs(tmp_path):
    p = _write(tmp_path, "0 1:1\n1 1:2\n")
    ds = load_libsvm(p, 1)
    assert set(ds.labels[0].tolist()) == {-1.0, 1.0}


def test_malformed_line_reports_line_number(tmp_path):
    p = _write(tmp_path, "1 1:1\n1 broken\n")
    with pytest.raises(DataFormatError, match="line 2"):
        load_libsvm(p, 1)


def test_more_nodes_than_samples_rejected(tmp_path):
    p = _write(tmp_path, "1 1:1\n0 1:2\n")
    with pytest.raises(DataFormatError, match="split over"):
        load_libsvm(p, 3)


def test_d_inferred_as_max_feature_index(tmp_path):
    p = _write(tmp_path, "1 3:1 7:2\n0 1:5\n")
    assert load_libsvm(p, 1).d == 7


def test_normalize_scales_features_to_unit_interval(tmp_path):
    p = _write(tmp_path, "1 1:2\n0 1:6\n1 1:4\n")
    ds = load_libsvm(p, 1, normalize=True)
    col = ds.features[0][:, 0]
    assert col.min() == 0.0 and col.max() == 1.0


def test_shuffle_is_seeded(tmp_path):
    p = _write(tmp_path, "\n".join(f"1 1:{i}" for i in range(8)) + "\n")
    a = load_libsvm(p, 2, shuffle_seed=5)
    b = load_libsvm(p, 2, shuffle_seed=5)
    c = load_libsvm(p, 2, shuffle_seed=6)
    assert np.array_equal(a.features[0], b.features[0])
    assert not np.array_equal(a.features[0], c.features[0])


def test_bundled_dataset_loads():
    ds = load_libsvm("data/synth_binary.libsvm", 8)
    assert ds.total_samples == 240
    assert ds.d == 8
    assert all(set(np.unique(y)) <= {-1.0, 1.0} for y in ds.labels)


# ---------------------------------------------------------------- logistic

def test_single_sample_gradient_at_zero():
    ds = LogRegDataset(features=(np.array([[1.0, 0.0]]),),
                       labels=(np.array([1.0]),), d=2)
    suite = logreg_suite(ds)
    assert suite.local_grad(0, np.zeros(2)) == pytest.approx([-0.5, 0.0])


def test_loss_at_zero_is_log_two():
    ds = LogRegDataset(features=(np.array([[1.0], [2.0]]),),
                       labels=(np.array([1.0, -1.0]),), d=1)
    suite = logreg_suite(ds)
    # per-sample loss log(2) plus a zero regularizer at the origin
    assert suite.local_value(0, np.zeros(1)) == pytest.approx(np.log(2.0))


def test_toy_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    ds = LogRegDataset(
        features=(np.array([[0.5, -1.0], [1.5, 0.3]]),),
        labels=(np.array([1.0, -1.0]),), d=2)
    suite = logreg_suite(ds)
    for _ in range(5):
        x = rng.normal(size=2)
        fd = central_diff(lambda z: suite.local_value(0, z), x)
        g = suite.local_grad(0, x)
        assert np.linalg.norm(g - fd) <= 1e-6 * (1 + np.linalg.norm(g))


def test_empty_shard_rejected():
    ds = LogRegDataset(features=(np.zeros((0, 2)), np.ones((1, 2))),
                       labels=(np.zeros(0), np.array([1.0])), d=2)
    with pytest.raises(DataFormatError, match="empty shard"):
        logreg_suite(ds)


def test_bundled_suite_constants_and_gradients():
    suite = logreg_suite(load_libsvm("data/synth_binary.libsvm", 8))
    counts = [a.shape[0] for a in suite.dataset.features]
    assert suite.mu == pytest.approx(2 / 8 * sum(1 / c for c in counts))
    rng = np.random.default_rng(4)
    for _ in range(10):
        x = rng.normal(size=suite.d)
        i = int(rng.integers(8))
        fd = central_diff(lambda z: suite.local_value(i, z), x)
        g = suite.local_grad(i, x)
        assert np.linalg.norm(g - fd) <= 1e-5 * (1 + np.linalg.norm(g))


# ------------------------------------------------------- reference optimum

def test_reference_optimum_scalar():
    s = quadratic_suite([[[2.0]]], [[-4.0]])
    assert compute_reference_optimum(s) == pytest.approx([2.0])


def test_reference_optimum_two_node(two_node_suite):
    assert compute_reference_optimum(two_node_suite) == pytest.approx([1.0, 0.0])


def test_symmetric_logistic_has_zero_optimum():
    a = np.array([0.7, -0.2])
    ds = LogRegDataset(features=(np.stack([a, -a]),),
                       labels=(np.array([1.0, 1.0]),), d=2)
    suite = logreg_suite(ds)
    assert np.linalg.norm(suite.x_star) <= 1e-10


def test_reference_optimum_meets_tolerance_and_determinism():
    suite = logreg_suite(load_libsvm("data/synth_binary.libsvm", 4))
    x1 = compute_reference_optimum(suite)
    x2 = compute_reference_optimum(suite)
    assert np.array_equal(x1, x2)
    assert np.linalg.norm(suite.global_grad(x1)) <= 1e-12
