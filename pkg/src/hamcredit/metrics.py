"""Thresholded classification metrics, rank-statistic ROC-AUC and fold aggregation."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "auc")


def _scores_labels(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValueError(f"{s.size} scores for {y.size} labels")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return s, y.astype(np.int64)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion_at_threshold(scores, labels, threshold: float = 0.5) -> ConfusionMatrix:
    """Predict positive iff score >= threshold."""
    s, y = _scores_labels(scores, labels)
    pred = s >= threshold
    pos = y == 1
    return ConfusionMatrix(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    degenerate: tuple[str, ...] = ()

    def __iter__(self):
        return iter((self.precision, self.recall, self.f1))


def precision_recall_f1(cm: ConfusionMatrix) -> PRF:
    """Zero denominators give 0 and are named in ``degenerate``."""
    flags = []
    if cm.tp + cm.fp:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        flags.append("precision")
    if cm.tp + cm.fn:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        flags.append("recall")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        flags.append("f1")
    return PRF(precision, recall, f1, tuple(flags))


def _check_both_classes(y: np.ndarray) -> tuple[int, int]:
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC-AUC needs at least one positive and one negative label")
    return n_pos, n_neg


def roc_auc(scores, labels) -> float:
    """Mann-Whitney U / (n_pos n_neg), ties counted one half via midranks."""
    s, y = _scores_labels(scores, labels)
    n_pos, n_neg = _check_both_classes(y)
    ranks = rankdata(s, method="average")
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve(scores, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds), one point per distinct score plus the (0, 0) origin."""
    s, y = _scores_labels(scores, labels)
    n_pos, n_neg = _check_both_classes(y)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tps = np.cumsum(y)[last]
    fps = (last + 1) - tps
    fpr = np.r_[0.0, fps / n_neg]
    tpr = np.r_[0.0, tps / n_pos]
    thresholds = np.r_[np.inf, s[last]]
    return fpr, tpr, thresholds


def trapezoid_area(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    n: int = 0
    threshold: float = 0.5
    degenerate: list[str] = field(default_factory=list)
    std: dict[str, float] | None = None
    n_folds: int = 0
    source: str = "internal"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(**d)

    def values(self) -> dict[str, float]:
        return {m: getattr(self, m) for m in METRIC_NAMES}


def evaluate(scores, labels, threshold: float = 0.5, source: str = "internal") -> MetricsReport:
    s, y = _scores_labels(scores, labels)
    cm = confusion_at_threshold(s, y, threshold)
    prf = precision_recall_f1(cm)
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=prf.precision,
        recall=prf.recall,
        f1=prf.f1,
        auc=roc_auc(s, y),
        n=cm.total,
        threshold=threshold,
        degenerate=list(prf.degenerate),
        source=source,
    )


def aggregate_folds(reports) -> MetricsReport:
    """Mean and sample standard deviation (n - 1; 0 for a single report)."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    # sorted columns make the result independent of report order, bit for bit
    table = np.sort(np.array([[getattr(r, m) for m in METRIC_NAMES] for r in reports]), axis=0)
    mean = table.mean(axis=0)
    std = table.std(axis=0, ddof=1) if len(reports) > 1 else np.zeros(len(METRIC_NAMES))
    flags = sorted({f for r in reports for f in r.degenerate})
    return MetricsReport(
        *map(float, mean),
        n=sum(r.n for r in reports),
        threshold=reports[0].threshold,
        degenerate=flags,
        std={m: float(v) for m, v in zip(METRIC_NAMES, std)},
        n_folds=len(reports),
        source=reports[0].source,
    )
