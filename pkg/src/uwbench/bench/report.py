"""Report assembly: deterministic CSV as the source of truth, Markdown
tables rendered from it, and matplotlib bar charts saved next to both.

Timings are kept out of the score CSV so reruns of the same corpus with the
same configuration produce byte-identical score files; wall-clock numbers
live in a separate timings file.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ..metrics import MetricScores

__all__ = [
    "MetricRow",
    "MetricReport",
    "write_scores_csv",
    "read_scores_csv",
    "write_timings_csv",
    "render_markdown",
    "render_figures",
    "mos_table_markdown",
    "win_table_markdown",
]

METRIC_COLUMNS = ("mse", "psnr", "ssim", "uciqe", "uiqm")
HIGHER_IS_BETTER = {"mse": False, "psnr": True, "ssim": True, "uciqe": True, "uiqm": True}


@dataclass(frozen=True)
class MetricRow:
    image_id: str
    method: str
    scores: MetricScores
    seconds: float


@dataclass
class MetricReport:
    rows: list[MetricRow] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    mos: dict[str, dict[str, float]] | None = None

    def methods(self) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if row.method not in seen:
                seen.append(row.method)
        return seen

    def aggregate(self) -> dict[str, dict[str, float | None]]:
        """Arithmetic mean per method per metric, None when no row has it."""
        out: dict[str, dict[str, float | None]] = {}
        for method in self.methods():
            rows = [r for r in self.rows if r.method == method]
            agg: dict[str, float | None] = {}
            for name in METRIC_COLUMNS:
                values = [getattr(r.scores, name) for r in rows]
                values = [v for v in values if v is not None]
                agg[name] = sum(values) / len(values) if values else None
            agg["seconds"] = sum(r.seconds for r in rows) / len(rows)
            out[method] = agg
        return out


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return f"{value:.6f}"


def write_scores_csv(report: MetricReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("image", "method") + METRIC_COLUMNS)
        for row in report.rows:
            writer.writerow(
                [row.image_id, row.method]
                + [_fmt(getattr(row.scores, name)) for name in METRIC_COLUMNS]
            )


def read_scores_csv(path: str | Path) -> MetricReport:
    report = MetricReport()
    with open(path, newline="", encoding="utf-8") as f:
        for rec in csv.DictReader(f):
            values = {
                name: (None if rec[name] == "" else float(rec[name]))
                for name in METRIC_COLUMNS
            }
            report.rows.append(
                MetricRow(
                    image_id=rec["image"],
                    method=rec["method"],
                    scores=MetricScores(**values),
                    seconds=0.0,
                )
            )
    return report


def write_timings_csv(report: MetricReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("image", "method", "seconds"))
        for row in report.rows:
            writer.writerow([row.image_id, row.method, f"{row.seconds:.6f}"])


def _md_table(headers: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def render_markdown(report: MetricReport) -> str:
    """Aggregate score table in the conventional benchmark layout."""
    agg = report.aggregate()
    headers = ["Method", "MSE (x10^3) v", "PSNR (dB) ^", "SSIM ^", "UCIQE ^", "UIQM ^"]
    rows = []
    for method in report.methods():
        a = agg[method]
        mse_scaled = None if a["mse"] is None else a["mse"] / 1000.0
        rows.append(
            [
                method,
                _fmt(mse_scaled) if mse_scaled is not None else "-",
                _fmt(a["psnr"]) if a["psnr"] is not None else "-",
                _fmt(a["ssim"]) if a["ssim"] is not None else "-",
                _fmt(a["uciqe"]) if a["uciqe"] is not None else "-",
                _fmt(a["uiqm"]) if a["uiqm"] is not None else "-",
            ]
        )
    parts = ["# Benchmark report\n", "## Average scores\n", _md_table(headers, rows)]
    if report.mos:
        parts += ["\n## Subjective scores\n", mos_table_markdown(report.mos)]
    if report.skipped:
        parts.append("\n## Skipped inputs\n")
        parts += [f"- {name}\n" for name in report.skipped]
    return "".join(parts)


def mos_table_markdown(mos: dict[str, dict[str, float]]) -> str:
    headers = ["Method", "Average Score ^", "Standard Deviation v"]
    rows = [
        [method, f"{stats['mean']:.2f}", f"{stats['stddev']:.4f}"]
        for method, stats in mos.items()
    ]
    return _md_table(headers, rows)


def win_table_markdown(shares: dict[str, float]) -> str:
    headers = ["Method", "Percentage (%)"]
    rows = [[method, f"{100.0 * share:.2f}"] for method, share in shares.items()]
    return _md_table(headers, rows)


def render_figures(report: MetricReport, out_dir: str | Path) -> list[Path]:
    """One bar chart per metric over the per-method aggregates."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    agg = report.aggregate()
    methods = report.methods()
    written = []
    for name in METRIC_COLUMNS + ("seconds",):
        values = [agg[m].get(name) for m in methods]
        pairs = [(m, v) for m, v in zip(methods, values) if v is not None and math.isfinite(v)]
        if not pairs:
            continue
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.bar([p[0] for p in pairs], [p[1] for p in pairs], color="#4878a8")
        arrow = "" if name == "seconds" else (" (higher better)" if HIGHER_IS_BETTER[name] else " (lower better)")
        ax.set_ylabel(name + arrow)
        ax.set_title(f"Mean {name} by method")
        fig.tight_layout()
        path = out_dir / f"{name}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
