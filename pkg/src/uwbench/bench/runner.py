"""Corpus runner: enhance every manifest entry with every selected method,
score and time the results, and emit the report files.

Timing wraps the enhancement call only; decode and encode stay outside the
measured window. Methods run at the input's native resolution, including
the fusion network, which is fully convolutional.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..enhance import clahe_on_l, gamma_correct, generate_inputs, white_balance
from ..imaging import FormatError, load_image, save_image
from ..metrics import MetricScores, score_pair, uciqe, uiqm
from ..waternet import forward as waternet_forward
from ..waternet import load_model
from .manifest import CorpusManifest
from .report import (
    MetricReport,
    MetricRow,
    render_figures,
    render_markdown,
    write_scores_csv,
    write_timings_csv,
)

__all__ = [
    "KNOWN_METHODS",
    "RuntimeTable",
    "make_enhancer",
    "run_benchmark",
    "runtime_table",
    "runtime_table_markdown",
    "win_percentages",
    "mos_aggregate",
]

log = logging.getLogger(__name__)

KNOWN_METHODS = ("wb", "he", "gc", "waternet")

RUNTIME_SIZES = ((500, 500), (640, 480), (1280, 720))


def make_enhancer(method: str, model_path: str | Path | None = None):
    """Callable image -> image for one method name."""
    if method == "wb":
        return white_balance
    if method == "he":
        return clahe_on_l
    if method == "gc":
        return gamma_correct
    if method == "waternet":
        if model_path is None:
            raise ValueError("the waternet method needs a model file")
        model = load_model(model_path)

        def run(img):
            return waternet_forward(model, generate_inputs(img))[0]

        return run
    raise ValueError(f"unknown method {method!r} (choose from {KNOWN_METHODS})")


def run_benchmark(
    manifest: CorpusManifest,
    methods: list[str],
    out_dir: str | Path,
    model_path: str | Path | None = None,
) -> MetricReport:
    """Enhance, save, score, and time every (image, method) combination.

    Unreadable inputs are skipped with a logged warning and recorded in the
    report. Output images land in out_dir/results/<method>/, the score and
    timing CSVs, Markdown report, and figures directly in out_dir.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    enhancers = {m: make_enhancer(m, model_path) for m in methods}
    report = MetricReport()

    for entry in manifest.entries:
        try:
            raw = load_image(entry.raw_path)
        except (FormatError, OSError) as exc:
            log.warning("skipping unreadable image %s: %s", entry.raw_path, exc)
            report.skipped.append(entry.raw_path)
            continue
        reference = None
        if entry.reference_path is not None:
            reference = load_image(entry.reference_path)

        for method in methods:
            enhance = enhancers[method]
            start = time.perf_counter()
            result = enhance(raw)
            seconds = time.perf_counter() - start

            method_dir = out_dir / "results" / method
            method_dir.mkdir(parents=True, exist_ok=True)
            save_image(result, method_dir / f"{entry.image_id}.png")

            scores = score_pair(result, reference)
            report.rows.append(
                MetricRow(entry.image_id, method, scores, seconds)
            )

    write_scores_csv(report, out_dir / "metrics.csv")
    write_timings_csv(report, out_dir / "timings.csv")
    (out_dir / "report.md").write_text(render_markdown(report), encoding="utf-8")
    render_figures(report, out_dir / "figures")
    return report


@dataclass
class RuntimeTable:
    sizes: tuple[tuple[int, int], ...]
    seconds: dict[str, list[float]]  # method -> mean seconds per size


def runtime_table(
    methods: list[str],
    sizes=RUNTIME_SIZES,
    repeats: int = 3,
    model_path: str | Path | None = None,
    seed: int = 0,
) -> RuntimeTable:
    """Mean wall time per method and image size on synthetic noise images."""
    if repeats < 3:
        raise ValueError("need at least 3 repeats for a stable mean")
    rng = np.random.default_rng(seed)
    table = RuntimeTable(sizes=tuple(sizes), seconds={m: [] for m in methods})
    for w, h in sizes:
        img = rng.random((h, w, 3))
        for method in methods:
            enhance = make_enhancer(method, model_path)
            elapsed = []
            for _ in range(repeats):
                start = time.perf_counter()
                enhance(img)
                elapsed.append(time.perf_counter() - start)
            table.seconds[method].append(sum(elapsed) / repeats)
    return table


def runtime_table_markdown(table: RuntimeTable) -> str:
    headers = ["Method"] + [f"{w} x {h}" for w, h in table.sizes]
    lines = ["| " + " | ".join(headers) + " |", "|" + "---|" * len(headers)]
    for method, secs in table.seconds.items():
        lines.append("| " + " | ".join([method] + [f"{s:.4f}" for s in secs]) + " |")
    return "\n".join(lines) + "\n"


def win_percentages(reference_methods, methods: list[str] | None = None) -> dict[str, float]:
    """Share of images whose final reference came from each method.

    ``reference_methods`` holds, per finalized image with a reference, the
    method that produced the winning candidate. Shares sum to one.
    """
    wins: list[str] = list(reference_methods)
    if not wins:
        raise ValueError("no reference images to tally")
    order = methods if methods is not None else sorted(set(wins))
    counts = {m: 0 for m in order}
    for name in wins:
        if name not in counts:
            raise ValueError(f"winning method {name!r} missing from method list")
        counts[name] += 1
    return {m: counts[m] / len(wins) for m in order}


def mos_aggregate(records) -> dict[str, dict[str, float]]:
    """Mean and population standard deviation of 1-5 scores per method.

    ``records`` is an iterable of (image_id, rater_id, method, score).
    """
    per_method: dict[str, list[int]] = {}
    for image_id, rater_id, method, score in records:
        if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
            raise ValueError(f"score must be an integer in [1, 5], got {score!r}")
        per_method.setdefault(method, []).append(score)
    out = {}
    for method, scores in per_method.items():
        mean = sum(scores) / len(scores)
        var = sum((s - mean) ** 2 for s in scores) / len(scores)
        out[method] = {"mean": mean, "stddev": math.sqrt(var)}
    return out
