"""Metrics records and their CSV form.

The header is fixed; reals are printed with 17 significant digits so that
reading a file back reproduces the exact float64 values. Empty cells stand
for absent optional fields (step on epoch rows, validation metrics on
iteration rows or off-cadence epochs).
"""

import csv
import io
from dataclasses import dataclass

from ..errors import DataFormatError

CSV_HEADER = (
    "run_id,epoch,step,train_loss,train_acc,val_loss,val_acc,effective_lr,wall_ms"
)
_FIELDS = CSV_HEADER.split(",")


@dataclass
class MetricsRecord:
    run_id: str
    epoch: int
    step: int | None
    train_loss: float
    train_acc: float | None
    val_loss: float | None
    val_acc: float | None
    effective_lr: float
    wall_ms: float


def fmt_float(x: float | None) -> str:
    return "" if x is None else format(x, ".17g")


def _sort_key(rec: MetricsRecord):
    # iteration rows precede their epoch's summary row
    return (rec.run_id, rec.epoch, rec.step is None, rec.step or 0)


def render_metrics(records: list[MetricsRecord]) -> str:
    """The CSV text for a record list, sorted by (run_id, epoch, step)."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in sorted(records, key=_sort_key):
        row = [
            r.run_id,
            str(r.epoch),
            "" if r.step is None else str(r.step),
            fmt_float(r.train_loss),
            fmt_float(r.train_acc),
            fmt_float(r.val_loss),
            fmt_float(r.val_acc),
            fmt_float(r.effective_lr),
            fmt_float(r.wall_ms),
        ]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def write_metrics(records: list[MetricsRecord], path) -> None:
    with open(path, "w", newline="") as f:
        f.write(render_metrics(records))


def read_metrics(path) -> list[MetricsRecord]:
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty metrics file") from None
        if header != _FIELDS:
            raise DataFormatError(
                f"{path}: header {','.join(header)!r} != expected {CSV_HEADER!r}"
            )
        records = []
        for row in reader:
            if len(row) != len(_FIELDS):
                raise DataFormatError(f"{path}: row has {len(row)} cells: {row!r}")
            records.append(
                MetricsRecord(
                    run_id=row[0],
                    epoch=int(row[1]),
                    step=None if row[2] == "" else int(row[2]),
                    train_loss=float(row[3]),
                    train_acc=None if row[4] == "" else float(row[4]),
                    val_loss=None if row[5] == "" else float(row[5]),
                    val_acc=None if row[6] == "" else float(row[6]),
                    effective_lr=float(row[7]),
                    wall_ms=float(row[8]),
                )
            )
        return records
