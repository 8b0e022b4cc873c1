"""Cross-run comparison: aligned per-epoch metric deltas and summaries.

The first run found (file order, then row order) is the baseline. For each
other run, the per-epoch "advantage" over the baseline is

    loss metrics:      baseline - run   (positive: run's loss is lower)
    accuracy metrics:  run - baseline   (positive: run is more accurate)

so a positive number always means the compared run did better. The report
also names dominating runs (better val_loss / val_acc at every common
epoch) and, when thresholds are given, the first epoch each run reached
them. A long-format companion table (run_id, epoch, metric, value) is
produced for plotting.
"""

from dataclasses import dataclass

from ..errors import DataFormatError
from .metrics import MetricsRecord, fmt_float, read_metrics

_LOSS_METRICS = ("train_loss", "val_loss")
_ACC_METRICS = ("train_acc", "val_acc")
_METRICS = ("train_loss", "train_acc", "val_loss", "val_acc")

LONG_CSV_HEADER = "run_id,epoch,metric,value"


@dataclass
class RunSeries:
    label: str
    rows: dict[int, MetricsRecord]  # epoch -> record (epoch rows only)

    @property
    def epochs(self) -> list[int]:
        return sorted(self.rows)

    def metric(self, epoch: int, name: str):
        return getattr(self.rows[epoch], name)


@dataclass
class Report:
    text: str
    baseline: str
    # label -> metric -> {epoch: advantage over baseline}
    deltas: dict[str, dict[str, dict[int, float]]]
    series: list[RunSeries]
    long_rows: list[tuple[str, int, str, float]]


def load_series(csv_paths) -> list[RunSeries]:
    series: list[RunSeries] = []
    for path in csv_paths:
        per_run: dict[str, dict[int, MetricsRecord]] = {}
        for r in read_metrics(path):
            if r.step is not None:
                continue
            per_run.setdefault(r.run_id, {})[r.epoch] = r
        for run_id, rows in per_run.items():
            series.append(RunSeries(label=run_id, rows=rows))
    labels = [s.label for s in series]
    for i, s in enumerate(series):
        if labels.count(s.label) > 1:
            s.label = f"{s.label}#{labels[:i].count(s.label)}"
    return series


def compare_report(csv_paths, loss_threshold: float | None = None,
                   acc_threshold: float | None = None) -> Report:
    if len(csv_paths) < 1:
        raise ValueError("need at least one CSV path")
    series = load_series(csv_paths)
    if len(series) < 2:
        raise ValueError(f"need at least two runs to compare, found {len(series)}")

    base = series[0]
    lines = [f"baseline: {base.label}"]
    deltas: dict[str, dict[str, dict[int, float]]] = {}

    for other in series[1:]:
        common = sorted(set(base.epochs) & set(other.epochs))
        if not common:
            raise DataFormatError(
                f"runs {base.label!r} and {other.label!r} share no epochs"
            )
        per_metric: dict[str, dict[int, float]] = {m: {} for m in _METRICS}
        lines.append("")
        lines.append(f"{other.label} vs {base.label} (positive = {other.label} better)")
        lines.append("epoch  d_train_loss  d_train_acc  d_val_loss  d_val_acc")
        for epoch in common:
            cells = [f"{epoch:>5}"]
            for m in _METRICS:
                a, b = base.metric(epoch, m), other.metric(epoch, m)
                if a is None or b is None:
                    cells.append("-")
                    continue
                adv = (a - b) if m in _LOSS_METRICS else (b - a)
                per_metric[m][epoch] = adv
                cells.append(f"{adv:.6g}")
            lines.append("  ".join(cells))
        deltas[other.label] = per_metric

    dominance = _dominance_lines(series)
    if dominance:
        lines.append("")
        lines.extend(dominance)

    if loss_threshold is not None or acc_threshold is not None:
        lines.append("")
        lines.extend(_threshold_lines(series, loss_threshold, acc_threshold))

    long_rows = [
        (s.label, epoch, m, value)
        for s in series
        for epoch in s.epochs
        for m in (*_METRICS, "effective_lr")
        if (value := s.metric(epoch, m)) is not None
    ]
    return Report(
        text="\n".join(lines) + "\n", baseline=base.label, deltas=deltas,
        series=series, long_rows=long_rows,
    )


def _dominance_lines(series) -> list[str]:
    out = []
    for metric in ("val_loss", "val_acc"):
        better_is_less = metric in _LOSS_METRICS
        for a in series:
            for b in series:
                if a is b:
                    continue
                common = [
                    e for e in sorted(set(a.epochs) & set(b.epochs))
                    if a.metric(e, metric) is not None and b.metric(e, metric) is not None
                ]
                if not common:
                    continue
                if all(
                    (a.metric(e, metric) < b.metric(e, metric)) == better_is_less
                    and a.metric(e, metric) != b.metric(e, metric)
                    for e in common
                ):
                    out.append(f"{a.label} dominates {b.label} on {metric}")
    return out


def _threshold_lines(series, loss_threshold, acc_threshold) -> list[str]:
    out = []
    for s in series:
        if loss_threshold is not None:
            hit = next(
                (e for e in s.epochs
                 if s.metric(e, "val_loss") is not None
                 and s.metric(e, "val_loss") <= loss_threshold),
                None,
            )
            out.append(
                f"{s.label}: val_loss <= {loss_threshold:g} "
                + (f"first at epoch {hit}" if hit is not None else "never")
            )
        if acc_threshold is not None:
            hit = next(
                (e for e in s.epochs
                 if s.metric(e, "val_acc") is not None
                 and s.metric(e, "val_acc") >= acc_threshold),
                None,
            )
            out.append(
                f"{s.label}: val_acc >= {acc_threshold:g} "
                + (f"first at epoch {hit}" if hit is not None else "never")
            )
    return out


def write_long_csv(report: Report, path) -> None:
    with open(path, "w", newline="") as f:
        f.write(LONG_CSV_HEADER + "\n")
        for label, epoch, metric, value in report.long_rows:
            f.write(f"{label},{epoch},{metric},{fmt_float(value)}\n")
