"""CSV and chart output of sweep results."""

import logging
from pathlib import Path
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from ..app.models import JobReport  # noqa: E402
from ..mpc.circuit import Circuit  # noqa: E402
from .fit import fit_scaling  # noqa: E402
from .plan import CSV_COLUMNS, BenchRow, ExecutionModel  # noqa: E402

logger = logging.getLogger(__name__)

PLOTTED_METRICS = ("full_time_s", "comp_time_s", "rounds", "bytes_global", "client_bytes")


def rows_frame(rows: Sequence[BenchRow]) -> pd.DataFrame:
    frame = pd.DataFrame([row.model_dump(mode="json") for row in rows])
    if frame.empty:
        return pd.DataFrame(columns=CSV_COLUMNS)
    return frame[CSV_COLUMNS]


def job_row(report: JobReport, circuit: Circuit, correct: bool = True) -> BenchRow:
    """Metrics row of one orchestrated job, in the sweep CSV layout."""
    metrics = report.job.metrics
    return BenchRow(
        model=ExecutionModel.DELEGATED,
        circuit=circuit.name,
        op="",
        array_size=max(circuit.input_widths().values(), default=0),
        parties=len(report.selection.computation_agents),
        clients=len(circuit.input_widths()),
        protocol=report.selection.protocol.value,
        full_time_s=metrics.full_time,
        comp_time_s=metrics.comp_time,
        rounds=metrics.rounds,
        bytes_global=metrics.bytes_global,
        bytes_p0=metrics.bytes_sent_per_party[0] if metrics.bytes_sent_per_party else 0,
        client_bytes=metrics.client_bytes,
        gates=circuit.cost_profile().player_side_gates,
        correct=correct,
    )


def write_csv(rows: Sequence[BenchRow], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows_frame(rows).to_csv(path, index=False)
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path)


def emit_plots(rows: Sequence[BenchRow], directory: Path) -> List[Path]:
    """One log-log chart per metric; the legend carries the fitted slope when the sweep allows a fit."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if not rows:
        return []
    written = []
    label = "clients" if rows[0].clients else "parties"
    for metric in PLOTTED_METRICS:
        xs = [r.sweep_point for r in rows]
        ys = [getattr(r, metric) for r in rows]
        if any(y <= 0 for y in ys):
            logger.debug(f"Skipping {metric}: non-positive values")
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        legend = metric
        if len(set(xs)) >= 4:
            fit = fit_scaling(rows, metric)
            legend = f"{metric} (slope {fit.slope:.2f}, R² {fit.r_squared:.3f})"
        ax.plot(xs, ys, marker="o", label=legend)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(label)
        ax.set_ylabel(metric)
        ax.set_title(f"{rows[0].model.value} {rows[0].circuit}")
        ax.legend()
        fig.tight_layout()
        path = directory / f"{rows[0].model.value}_{rows[0].circuit}_{metric}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    logger.info(f"Wrote {len(written)} charts to {directory}")
    return written
