"""Smoke tests for the attrep python module (built via CMake/scikit-build-core)."""

import math

import numpy as np
import pytest

import attrep


def test_softmax_simplex_and_known_value():
    p = attrep.softmax(np.array([1.0, 2.0]))
    assert p.shape == (2,)
    assert abs(p.sum() - 1.0) < 1e-12
    assert p[0] == pytest.approx(0.26894142136999512, abs=1e-12)


def test_cross_entropy_matches_direct_sum():
    q = np.array([0.7, 0.3])
    p = np.array([0.6, 0.4])
    expected = -(0.7 * math.log(0.6) + 0.3 * math.log(0.4))
    assert attrep.cross_entropy(q, p) == pytest.approx(expected, abs=1e-12)


def test_reverse_cross_entropy_clamp():
    q = np.array([1.0, 0.0])
    p = np.array([0.9, 0.1])
    assert attrep.reverse_cross_entropy(q, p, -4.0) == pytest.approx(0.4, abs=1e-12)


def test_js_divergence_symmetric_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.dirichlet(np.ones(5))
        b = rng.dirichlet(np.ones(5))
        ab = attrep.js_divergence(a, b)
        assert ab == pytest.approx(attrep.js_divergence(b, a), abs=1e-12)
        assert 0.0 <= ab <= attrep.LN2 + 1e-9


def test_label_smoothing():
    q = np.array([1.0, 0.0, 0.0, 0.0])
    s = attrep.label_smoothing(q, 0.1, 4)
    np.testing.assert_allclose(s, [0.925, 0.025, 0.025, 0.025], atol=1e-12)


def test_cr_delta_zero_equals_infonce():
    rng = np.random.default_rng(1)
    n = 4
    labels = [rng.dirichlet(np.ones(6)) for _ in range(n)]
    labels = labels + labels  # two views share labels
    probs = [rng.dirichlet(np.ones(6)) for _ in range(2 * n)]
    sets = attrep.build_positive_sets(labels, 0.0)
    assert sets.skipped_count() == 0
    cr = attrep.contrastive_regularization(probs, sets, 0.1, True)
    nce = attrep.info_nce_reference(probs, 0.1, True)
    assert cr == pytest.approx(nce, abs=1e-10)


def test_positive_sets_cross_view_partner():
    rng = np.random.default_rng(2)
    labels = [rng.dirichlet(np.ones(4)) for _ in range(3)]
    sets = attrep.build_positive_sets(labels + labels, 0.0)
    assert sets.members[0] == [3]
    assert sets.members[4] == [1]


def test_ema_closed_form():
    teacher = attrep.make_teacher(np.zeros(4), 0.9)
    for _ in range(3):
        teacher = attrep.ema_update(teacher, np.ones(4))
    np.testing.assert_allclose(teacher.params, 0.271, atol=1e-12)
    assert teacher.step_count == 3


def test_mean_teacher_loss_oracle():
    value = attrep.mean_teacher_loss(np.array([0.9, 0.1]), np.array([0.5, 0.5]))
    expected = 0.9 * math.log(1.8) + 0.1 * math.log(0.2)
    assert value == pytest.approx(expected, abs=1e-12)


def test_aux_fusion_and_ensemble():
    fused = attrep.aux_fusion(np.array([0.8, 0.2]), np.array([0.4, 0.6]), 0.3)
    np.testing.assert_allclose(fused, [0.68, 0.32], atol=1e-12)
    mean = attrep.ensemble_average([[np.array([1.0, 0.0])], [np.array([0.0, 1.0])]])
    np.testing.assert_allclose(mean[0], [0.5, 0.5], atol=1e-15)


def test_schedule_endpoints():
    sched = attrep.ScheduleConfig()
    sched.steps_per_epoch = 10
    assert attrep.lr_at(0, sched) == pytest.approx(1e-6, abs=1e-15)
    assert attrep.lr_at(3 * 10, sched) == pytest.approx(0.005, abs=1e-15)
    assert attrep.lr_at(100 * 10, sched) == pytest.approx(0.0, abs=1e-9)


def test_synthetic_blobs_deterministic():
    a = attrep.make_synthetic_blobs(3, 5, 8, 42)
    b = attrep.make_synthetic_blobs(3, 5, 8, 42)
    assert a.size() == 15
    np.testing.assert_array_equal(a.images(), b.images())
    assert a.images().shape == (15, 3, 8, 8)
    sub = attrep.subsample_per_class(a, 2, 7)
    assert sub.size() == 6


def test_gradcheck_entry():
    result = attrep.check_loss_gradients(cases_per_op=3, tolerance=1e-4, seed=5)
    assert result["failures"] == 0
