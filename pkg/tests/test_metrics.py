import numpy as np
import pytest

from auc_oracle import brute_force_auc
from hamcredit.metrics import (
    ConfusionMatrix,
    MetricsReport,
    aggregate_folds,
    confusion_at_threshold,
    evaluate,
    precision_recall_f1,
    roc_auc,
    roc_curve,
    trapezoid_area,
)


def test_confusion_examples():
    labels = np.array([0, 1, 1, 0, 1])
    cm = confusion_at_threshold(labels.astype(float), labels, 0.5)
    assert cm.fp == cm.fn == 0 and cm.total == 5
    cm = confusion_at_threshold([0.2, 0.1, 0.9], [0, 1, 1], 0.0)
    assert cm.tn == cm.fn == 0
    assert confusion_at_threshold([0.6, 0.4], [1, 1], 0.5) == ConfusionMatrix(tp=1, fp=0, tn=0, fn=1)
    # boundary counts as positive
    assert confusion_at_threshold([0.5], [0], 0.5).fp == 1


def test_confusion_input_checks():
    with pytest.raises(ValueError):
        confusion_at_threshold([0.1, 0.2], [0, 1, 1])
    with pytest.raises(ValueError):
        confusion_at_threshold([0.1], [2])


def test_prf_examples():
    assert tuple(precision_recall_f1(ConfusionMatrix(4, 0, 3, 0))) == (1.0, 1.0, 1.0)
    prf = precision_recall_f1(ConfusionMatrix(0, 0, 5, 2))
    assert prf.precision == 0.0 and "precision" in prf.degenerate
    prf = precision_recall_f1(ConfusionMatrix(3, 1, 0, 2))
    assert (prf.precision, prf.recall) == (0.75, 0.6)
    assert prf.f1 == pytest.approx(0.666667, abs=5e-7)
    assert prf.degenerate == ()


def test_auc_examples():
    assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert brute_force_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert roc_auc([0.3] * 6, [0, 1, 0, 1, 1, 0]) == 0.5


def test_auc_single_class_is_an_error():
    with pytest.raises(ValueError, match="positive and one negative"):
        roc_auc([0.1, 0.9], [1, 1])
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.9], [0, 0])


def test_auc_matches_brute_force(np_rng):
    for _ in range(100):
        n = int(np_rng.integers(2, 120))
        scores = np.round(np_rng.random(n), int(np_rng.integers(1, 3)))  # forces ties
        labels = np_rng.integers(0, 2, n)
        labels[:2] = [0, 1]
        assert abs(roc_auc(scores, labels) - float(brute_force_auc(scores, labels))) <= 1e-12


def test_auc_invariant_to_increasing_transform(np_rng):
    s = np_rng.normal(size=80)
    y = np_rng.integers(0, 2, 80)
    y[:2] = [0, 1]
    base = roc_auc(s, y)
    for f in (np.exp, lambda v: 3 * v - 7, lambda v: v**3, np.arctan):
        assert roc_auc(f(s), y) == base


def test_roc_curve_properties(np_rng):
    s = np_rng.random(50)
    y = np_rng.integers(0, 2, 50)
    y[:2] = [0, 1]
    fpr, tpr, thr = roc_curve(s, y)
    assert (fpr[0], tpr[0], fpr[-1], tpr[-1]) == (0.0, 0.0, 1.0, 1.0)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    assert np.all(np.diff(thr) < 0)
    assert abs(trapezoid_area(fpr, tpr) - roc_auc(s, y)) <= 1e-12
    fr, tr, _ = roc_curve(-s, y)
    assert abs(trapezoid_area(fr, tr) - (1 - roc_auc(s, y))) <= 1e-12


def test_roc_curve_with_ties_matches_midrank_auc():
    s = np.array([0.2, 0.2, 0.5, 0.5, 0.5, 0.9])
    y = np.array([0, 1, 0, 1, 1, 0])
    fpr, tpr, _ = roc_curve(s, y)
    assert abs(trapezoid_area(fpr, tpr) - roc_auc(s, y)) <= 1e-12


def test_perfect_scores_reach_top_left():
    fpr, tpr, _ = roc_curve([0.1, 0.2, 0.7, 0.9], [0, 0, 1, 1])
    assert any(f == 0.0 and t == 1.0 for f, t in zip(fpr, tpr))


def _report(acc, auc=0.7):
    return MetricsReport(accuracy=acc, precision=0.5, recall=0.5, f1=0.5, auc=auc, n=10)


def test_aggregate_examples():
    one = aggregate_folds([_report(0.8)])
    assert one.accuracy == 0.8 and one.std["accuracy"] == 0.0 and one.n_folds == 1
    two = aggregate_folds([_report(0.8), _report(0.9)])
    assert two.accuracy == pytest.approx(0.85, abs=1e-15)
    assert two.std["accuracy"] == pytest.approx(0.070711, abs=5e-7)
    assert two.n == 20
    with pytest.raises(ValueError):
        aggregate_folds([])


def test_aggregate_permutation_invariant(np_rng):
    reports = [_report(float(a), float(b)) for a, b in np_rng.random((7, 2))]
    ref = aggregate_folds(reports).to_dict()
    for _ in range(10):
        perm = np_rng.permutation(7)
        assert aggregate_folds([reports[i] for i in perm]).to_dict() == ref


def test_degenerate_flags_propagate():
    r = evaluate([0.1, 0.2, 0.3, 0.4], [0, 1, 0, 1], 0.9)
    assert r.precision == 0.0 and "precision" in r.degenerate
    assert "precision" in aggregate_folds([r, _report(0.5)]).degenerate


def test_report_dict_round_trip():
    r = evaluate([0.1, 0.7, 0.4, 0.9], [0, 1, 0, 1])
    assert MetricsReport.from_dict(r.to_dict()) == r


def test_accuracy_sanity_band():
    g = np.random.default_rng(99)
    y = np.repeat([0, 1], 500)
    r = evaluate(g.random(1000), y)
    assert 0.4 <= r.accuracy <= 0.6
