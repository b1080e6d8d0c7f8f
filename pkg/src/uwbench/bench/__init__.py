"""Benchmark harness: manifests, the corpus runner, and report rendering."""

from .manifest import CorpusManifest, ManifestEntry, load_manifest, write_manifest
from .report import (
    MetricReport,
    MetricRow,
    mos_table_markdown,
    read_scores_csv,
    render_figures,
    render_markdown,
    win_table_markdown,
    write_scores_csv,
    write_timings_csv,
)
from .runner import (
    KNOWN_METHODS,
    RuntimeTable,
    make_enhancer,
    mos_aggregate,
    run_benchmark,
    runtime_table,
    runtime_table_markdown,
    win_percentages,
)

__all__ = [
    "CorpusManifest",
    "ManifestEntry",
    "load_manifest",
    "write_manifest",
    "MetricReport",
    "MetricRow",
    "write_scores_csv",
    "read_scores_csv",
    "write_timings_csv",
    "render_markdown",
    "render_figures",
    "mos_table_markdown",
    "win_table_markdown",
    "KNOWN_METHODS",
    "RuntimeTable",
    "make_enhancer",
    "run_benchmark",
    "runtime_table",
    "runtime_table_markdown",
    "win_percentages",
    "mos_aggregate",
]
