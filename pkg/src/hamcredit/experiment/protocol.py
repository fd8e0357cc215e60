"""End-to-end out-of-time protocol.

    load / generate -> temporal split -> [grid search over temporal CV]
    -> temporal CV on the training partition (SMOTE inside each training portion)
    -> final fit on the SMOTE'd training partition, early-stopped on validation
    -> evaluate on validation and out-of-time rows

Random streams are derived from the master seed by job: CV job (cell, fold)
uses ``spawn(CELL_BASE + cell, fold)``, the final fit ``spawn(FINAL)``.
"""

from __future__ import annotations

import csv
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..metrics import MetricsReport, aggregate_folds, evaluate
from ..mlp import predict_proba
from ..numerics import RngStream
from ..pipeline.dataset import Dataset, load_csv
from ..pipeline.smote import smote_oversample
from ..pipeline.splits import temporal_split, time_based_folds
from ..pipeline.synthetic import synthesize_credit_data
from .config import ExperimentConfig
from .report import RunReport
from .training import TrainResult, run_training

CELL_BASE = 1000
FINAL = 1
SMOTE_STREAM = 3


class StageError(RuntimeError):
    """Failure inside a named pipeline stage."""

    def __init__(self, stage: str, exc: Exception):
        self.stage = stage
        self.cause = exc
        super().__init__(f"[{stage}] {type(exc).__name__}: {exc}")


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def load_data(cfg: ExperimentConfig) -> Dataset:
    if cfg.data.source == "csv":
        return load_csv(cfg.data.csv_path, cfg.data.feature_columns or None)
    return synthesize_credit_data(cfg.generator_config())


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, ds: Dataset) -> "Standardizer":
        sd = ds.features.std(axis=0)
        return cls(ds.features.mean(axis=0), np.where(sd > 0, sd, 1.0))

    def apply(self, ds: Dataset) -> Dataset:
        return ds.with_features((ds.features - self.mean) / self.scale)


def prepare_fit(cfg: ExperimentConfig, train: Dataset, holdouts: list[Dataset], rng: RngStream):
    """Standardize with training statistics, then oversample the training rows only."""
    if cfg.data.standardize:
        scaler = Standardizer.fit(train)
        train = scaler.apply(train)
        holdouts = [scaler.apply(h) for h in holdouts]
    if cfg.smote.enabled:
        train = smote_oversample(train, cfg.smote_config(), rng.spawn(SMOTE_STREAM))
    return train, holdouts


def fit_and_score(cfg: ExperimentConfig, train: Dataset, val: Dataset, rng: RngStream,
                  extra: list[Dataset] = (), record_energy: bool = False):
    """Fit on ``train`` early-stopped on ``val``; score ``val`` and each of ``extra``."""
    fit_train, holdouts = prepare_fit(cfg, train, [val, *extra], rng)
    result = run_training(cfg, fit_train, holdouts[0], rng, record_energy=record_energy)
    reports = [
        evaluate(predict_proba(result.params, h.features), h.labels, cfg.training.threshold)
        for h in holdouts
    ]
    return result, reports


def _run_jobs(jobs: list[Callable], n_jobs: int) -> list:
    if n_jobs <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda job: job(), jobs))


def cross_validate(cfg: ExperimentConfig, train: Dataset, folds, master: RngStream,
                   cell_index: int = 0) -> list[MetricsReport]:
    """One report per temporal fold pair, SMOTE applied inside each training portion."""

    def job(fold_index, tr, va):
        rng = master.spawn(CELL_BASE + cell_index, fold_index)
        return fit_and_score(cfg, train.subset(tr), train.subset(va), rng)[1][0]

    jobs = [lambda i=i, tr=tr, va=va: job(i, tr, va) for i, (tr, va) in enumerate(folds)]
    return _run_jobs(jobs, cfg.training.n_jobs)


# ---------------------------------------------------------------- grid search


@dataclass
class GridResult:
    best: dict
    best_config: ExperimentConfig
    table: list[dict] = field(default_factory=list)
    best_folds: list[MetricsReport] = field(default_factory=list)


def grid_cells(cfg: ExperimentConfig) -> list[dict]:
    axes = cfg.grid_axes()
    if not axes:
        return [{}]
    keys = list(axes)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


def _parsimony_key(cell_cfg: ExperimentConfig, mean_auc: float, index: int):
    # higher AUC first; ties -> lower lambda, lower learning rate, smaller network
    return (-mean_auc, cell_cfg.loss.lam, cell_cfg.optimizer.learning_rate,
            sum(cell_cfg.model.hidden_dims), len(cell_cfg.model.hidden_dims), index)


def grid_search(cfg: ExperimentConfig, train: Dataset, folds, master: RngStream | None = None,
                evaluate_cell: Callable[[ExperimentConfig, int], list[MetricsReport]] | None = None
                ) -> GridResult:
    """Score every grid cell by mean validation AUC over the temporal folds.

    ``evaluate_cell(cell_cfg, cell_index)`` may replace the default fold
    evaluation; it must return one report per fold.
    """
    cells = grid_cells(cfg)
    if not cells:
        raise ValueError("empty grid")
    master = master if master is not None else RngStream(cfg.seed)
    if evaluate_cell is None:
        def evaluate_cell(cell_cfg, index):
            return cross_validate(cell_cfg, train, folds, master, index)

    rows, keyed = [], []
    for index, cell in enumerate(cells):
        cell_cfg = cfg.with_overrides(cell)
        reports = evaluate_cell(cell_cfg, index)
        aucs = [r.auc for r in reports]
        mean_auc = float(np.mean(aucs))
        rows.append({"cell": index, **cell, "mean_auc": mean_auc, "fold_auc": aucs})
        keyed.append((_parsimony_key(cell_cfg, mean_auc, index), index, cell_cfg, reports))
    _, best_index, best_cfg, best_reports = min(keyed, key=lambda k: k[0])
    return GridResult(cells[best_index], best_cfg, rows, best_reports)


# ------------------------------------------------------------------ benchmark


def run_benchmark(cfg: ExperimentConfig, use_grid: bool = True) -> tuple[RunReport, TrainResult]:
    started = time.perf_counter()
    master = RngStream(cfg.seed)
    data = _stage("load", load_data, cfg)
    split = _stage("split", temporal_split, data, cfg.data.val_cut, cfg.data.oot_cut)
    train, val, oot = split.apply(data)
    folds = _stage("folds", time_based_folds, train, cfg.cv.k)

    grid = None
    if use_grid and cfg.grid_axes():
        grid = _stage("grid", grid_search, cfg, train, folds, master)
        cfg = grid.best_config
        fold_reports = grid.best_folds
    else:
        fold_reports = _stage("cv", cross_validate, cfg, train, folds, master)

    result, (val_report, oot_report) = _stage(
        "final_fit", fit_and_score, cfg, train, val, master.spawn(FINAL), [oot], record_energy=True
    )
    report = RunReport(
        kind="benchmark",
        config=cfg.to_dict(),
        folds=fold_reports,
        aggregate=aggregate_folds(fold_reports),
        validation=val_report,
        oot=oot_report,
        curves=result.curves,
        best_epoch=result.best_epoch,
        epochs_run=result.epochs_run,
        sizes={"train": len(train), "validation": len(val), "oot": len(oot)},
        grid=grid.table if grid else None,
        best_cell=grid.best if grid else None,
        wall_clock_seconds=time.perf_counter() - started,
    )
    return report, result


def run_single(cfg: ExperimentConfig) -> tuple[RunReport, TrainResult]:
    """One fit on the training partition; no cross-validation or grid."""
    started = time.perf_counter()
    data = _stage("load", load_data, cfg)
    split = _stage("split", temporal_split, data, cfg.data.val_cut, cfg.data.oot_cut)
    train, val, oot = split.apply(data)
    result, (val_report, oot_report) = _stage(
        "fit", fit_and_score, cfg, train, val, RngStream(cfg.seed).spawn(FINAL), [oot], record_energy=True
    )
    report = RunReport(
        kind="train",
        config=cfg.to_dict(),
        validation=val_report,
        oot=oot_report,
        curves=result.curves,
        best_epoch=result.best_epoch,
        epochs_run=result.epochs_run,
        sizes={"train": len(train), "validation": len(val), "oot": len(oot)},
        wall_clock_seconds=time.perf_counter() - started,
    )
    return report, result


def run_grid(cfg: ExperimentConfig) -> tuple[RunReport, GridResult]:
    started = time.perf_counter()
    data = _stage("load", load_data, cfg)
    split = _stage("split", temporal_split, data, cfg.data.val_cut, cfg.data.oot_cut)
    train = data.subset(split.train)
    folds = _stage("folds", time_based_folds, train, cfg.cv.k)
    grid = _stage("grid", grid_search, cfg, train, folds, RngStream(cfg.seed))
    report = RunReport(
        kind="grid",
        config=grid.best_config.to_dict(),
        folds=grid.best_folds,
        aggregate=aggregate_folds(grid.best_folds),
        sizes={"train": len(train)},
        grid=grid.table,
        best_cell=grid.best,
        wall_clock_seconds=time.perf_counter() - started,
    )
    return report, grid


# ----------------------------------------------------------- external scores


def _read_keyed_column(path, candidates: tuple[str, ...]) -> dict[str, float]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "id" not in fields:
            raise ValueError(f"{path}: missing 'id' column")
        col = next((c for c in candidates if c in fields), None)
        if col is None:
            raise ValueError(f"{path}: needs one of the columns {candidates}")
        out: dict[str, float] = {}
        for lineno, row in enumerate(reader, start=2):
            key = row["id"]
            if key in out:
                raise ValueError(f"{path}:{lineno}: duplicate id {key!r}")
            try:
                out[key] = float(row[col])
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{lineno}: bad {col} value {row[col]!r}") from None
    return out


def score_external(predictions_csv, labels_csv, threshold: float = 0.5) -> MetricsReport:
    """Score another model's predictions (columns id, score) against labels (id, label)."""
    scores = _read_keyed_column(predictions_csv, ("score",))
    labels = _read_keyed_column(labels_csv, ("label", "default_flag"))
    missing = sorted(set(labels) - set(scores))
    unknown = sorted(set(scores) - set(labels))
    if missing or unknown:
        raise ValueError(
            f"id mismatch: {len(missing)} labelled ids without a score {missing[:5]}, "
            f"{len(unknown)} scored ids without a label {unknown[:5]}"
        )
    ids = sorted(labels)
    s = np.array([scores[i] for i in ids])
    y = np.array([labels[i] for i in ids])
    try:
        return evaluate(s, y, threshold, source="external")
    except ValueError as exc:
        raise ValueError(f"scoring {predictions_csv}: {exc}") from exc
