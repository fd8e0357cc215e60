"""Run reports and their file formats.

report.json (schema_version 1) holds every RunReport field except the
wall-clock time, so identical runs produce identical bytes. Keys are sorted
and floats are written with full precision.

summary.csv has the columns ``scope, n, <metric>..., <metric>_std...`` with
one row per CV fold (``fold_1``...) and a final ``aggregate`` row (fold means
and sample standard deviations). A report without folds gets only the
aggregate row, holding its headline metrics: the aggregate if present, else
out-of-time, else validation.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..metrics import METRIC_NAMES, MetricsReport

SCHEMA_VERSION = 1
SUMMARY_COLUMNS = ("scope", "n", *METRIC_NAMES, *(f"{m}_std" for m in METRIC_NAMES))


@dataclass
class RunReport:
    kind: str
    config: dict
    folds: list[MetricsReport] = field(default_factory=list)
    aggregate: MetricsReport | None = None
    validation: MetricsReport | None = None
    oot: MetricsReport | None = None
    curves: dict[str, list[float]] = field(default_factory=dict)
    best_epoch: int = 0
    epochs_run: int = 0
    sizes: dict[str, int] = field(default_factory=dict)
    energy_trace: str | None = None
    params_snapshot: str | None = None
    grid: list[dict] | None = None
    best_cell: dict | None = None
    wall_clock_seconds: float = 0.0

    def to_dict(self, include_wall_clock: bool = False) -> dict:
        def m(r):
            return None if r is None else r.to_dict()

        d = {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "config": self.config,
            "folds": [r.to_dict() for r in self.folds],
            "aggregate": m(self.aggregate),
            "validation": m(self.validation),
            "oot": m(self.oot),
            "curves": self.curves,
            "best_epoch": self.best_epoch,
            "epochs_run": self.epochs_run,
            "sizes": self.sizes,
            "energy_trace": self.energy_trace,
            "params_snapshot": self.params_snapshot,
            "grid": self.grid,
            "best_cell": self.best_cell,
        }
        if include_wall_clock:
            d["wall_clock_seconds"] = self.wall_clock_seconds
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        version = d.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {version}")

        def m(r):
            return None if r is None else MetricsReport.from_dict(r)

        return cls(
            kind=d["kind"],
            config=d["config"],
            folds=[MetricsReport.from_dict(r) for r in d.get("folds", [])],
            aggregate=m(d.get("aggregate")),
            validation=m(d.get("validation")),
            oot=m(d.get("oot")),
            curves=d.get("curves", {}),
            best_epoch=d.get("best_epoch", 0),
            epochs_run=d.get("epochs_run", 0),
            sizes=d.get("sizes", {}),
            energy_trace=d.get("energy_trace"),
            params_snapshot=d.get("params_snapshot"),
            grid=d.get("grid"),
            best_cell=d.get("best_cell"),
            wall_clock_seconds=d.get("wall_clock_seconds", 0.0),
        )

    def headline(self) -> MetricsReport | None:
        return self.aggregate or self.oot or self.validation


def _as_run_report(report) -> RunReport:
    if isinstance(report, MetricsReport):
        return RunReport(kind=report.source, config={}, aggregate=report)
    return report


def report_json(report) -> str:
    return json.dumps(_as_run_report(report).to_dict(), indent=2, sort_keys=True) + "\n"


def _summary_row(scope: str, r: MetricsReport) -> list:
    std = r.std or {}
    return [scope, r.n, *(repr(float(getattr(r, m))) for m in METRIC_NAMES),
            *(repr(float(std[m])) if m in std else "" for m in METRIC_NAMES)]


def export_report(report, path, fmt: str = "json") -> Path:
    """Write a RunReport (or bare MetricsReport) as ``json`` or ``csv-summary``."""
    path = Path(path)
    run = _as_run_report(report)
    if fmt == "json":
        path.write_text(report_json(run))
    elif fmt == "csv-summary":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_COLUMNS)
            for i, r in enumerate(run.folds, start=1):
                w.writerow(_summary_row(f"fold_{i}", r))
            head = run.headline()
            if head is not None:
                w.writerow(_summary_row("aggregate", head))
    else:
        raise ValueError(f"unknown report format {fmt!r}; use 'json' or 'csv-summary'")
    return path


def load_report(path) -> RunReport:
    return RunReport.from_dict(json.loads(Path(path).read_text()))


def read_summary(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
