"""Command line interface.

Subcommands: enhance (run methods over a manifest and score them), metrics
(score result/reference pairs listed in a CSV), runtime (timing table on
synthetic images), train (fit the fusion network on a manifest), and
report (re-render Markdown and figures from a results directory). The
UWBENCH_SEED environment variable overrides any configured seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bench import (
    load_manifest,
    read_scores_csv,
    render_figures,
    render_markdown,
    run_benchmark,
    runtime_table,
    runtime_table_markdown,
    write_scores_csv,
)
from .bench.runner import KNOWN_METHODS, mos_aggregate
from .enhance import generate_inputs
from .imaging import load_image, resize_bilinear
from .metrics import score_pair
from .waternet import (
    TrainConfig,
    Trainer,
    WaterNetConfig,
    init_waternet,
    load_extractor,
    random_extractor,
    save_model,
)
from .waternet.train import augment

log = logging.getLogger("uwbench")


def _seed_override(seed: int) -> int:
    env = os.environ.get("UWBENCH_SEED")
    return int(env) if env else seed


def _parse_methods(raw: str) -> list[str]:
    methods = [m.strip() for m in raw.split(",") if m.strip()]
    for m in methods:
        if m not in KNOWN_METHODS:
            raise SystemExit(f"unknown method {m!r}; choose from {', '.join(KNOWN_METHODS)}")
    return methods


def cmd_enhance(args) -> int:
    manifest = load_manifest(args.manifest)
    methods = _parse_methods(args.methods)
    if "waternet" in methods and not args.model:
        raise SystemExit("--model is required when the waternet method is selected")
    report = run_benchmark(manifest, methods, args.out, model_path=args.model)
    print(f"{len(report.rows)} rows over {len(methods)} methods -> {args.out}")
    if report.skipped:
        print(f"skipped {len(report.skipped)} unreadable inputs", file=sys.stderr)
    return 0


def cmd_metrics(args) -> int:
    from .bench.report import MetricReport, MetricRow

    report = MetricReport()
    with open(args.pairs, newline="", encoding="utf-8") as f:
        for rec in csv.DictReader(f):
            result = load_image(rec["result"])
            ref_path = rec.get("reference") or None
            reference = load_image(ref_path) if ref_path else None
            scores = score_pair(result, reference)
            report.rows.append(
                MetricRow(Path(rec["result"]).stem, rec.get("method", "unknown"), scores, 0.0)
            )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_scores_csv(report, out / "metrics.csv")
    (out / "report.md").write_text(render_markdown(report), encoding="utf-8")
    render_figures(report, out / "figures")
    print(f"scored {len(report.rows)} pairs -> {out}")
    return 0


def cmd_runtime(args) -> int:
    methods = _parse_methods(args.methods)
    sizes = []
    for token in args.sizes.split(","):
        w, _, h = token.strip().partition("x")
        sizes.append((int(w), int(h)))
    table = runtime_table(
        methods,
        sizes=tuple(sizes),
        repeats=args.repeats,
        model_path=args.model,
        seed=_seed_override(0),
    )
    md = runtime_table_markdown(table)
    print(md)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "runtime.md").write_text(md, encoding="utf-8")
        with open(out / "runtime.csv", "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["method"] + [f"{w}x{h}" for w, h in table.sizes])
            for method, secs in table.seconds.items():
                writer.writerow([method] + [f"{s:.6f}" for s in secs])
    return 0


def _load_train_config(path: str | None) -> tuple[TrainConfig, dict]:
    raw = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
    cfg = TrainConfig(
        batch_size=raw.get("batch_size", 16),
        lr0=raw.get("lr0", 1e-3),
        lr_decay=raw.get("lr_decay", 0.1),
        decay_every=raw.get("decay_every", 10_000),
        max_iters=raw.get("iters", 200),
        patch=raw.get("patch", 112),
        seed=_seed_override(raw.get("seed", 0)),
    )
    return cfg, raw


def cmd_train(args) -> int:
    cfg, raw_cfg = _load_train_config(args.config)
    manifest = load_manifest(args.manifest)
    paired = [e for e in manifest.entries if e.reference_path]
    if not paired:
        raise SystemExit("manifest holds no entries with references")

    pool = []
    for entry in paired:
        raw = resize_bilinear(load_image(entry.raw_path), cfg.patch, cfg.patch)
        ref = resize_bilinear(load_image(entry.reference_path), cfg.patch, cfg.patch)
        for a_raw, a_ref in augment((raw, ref)):
            pool.append((generate_inputs(a_raw), a_ref))
    log.info("training pool: %d pairs (augmented from %d)", len(pool), len(paired))

    arch = raw_cfg.get("model_size", "default")
    config = WaterNetConfig.small() if arch == "small" else WaterNetConfig()
    model = init_waternet(config, seed=cfg.seed)
    if raw_cfg.get("extractor"):
        fx = load_extractor(raw_cfg["extractor"])
    else:
        fx = random_extractor(seed=raw_cfg.get("extractor_seed", cfg.seed), dtype=np.float32)

    trainer = Trainer(model, fx, cfg)
    rng = np.random.default_rng(cfg.seed)
    for step in range(cfg.max_iters):
        take = min(cfg.batch_size, len(pool))
        idx = rng.choice(len(pool), size=take, replace=False)
        loss = trainer.step([pool[i] for i in idx])
        if step % 10 == 0 or step == cfg.max_iters - 1:
            print(f"iter {step:5d}  loss {loss:.6f}")
    save_model(model, args.out)
    print(f"model -> {args.out}")
    return 0


def cmd_report(args) -> int:
    src = Path(args.src)
    report = read_scores_csv(src / "metrics.csv")
    mos_path = src / "mos.csv"
    if mos_path.exists():
        with open(mos_path, newline="", encoding="utf-8") as f:
            records = [
                (r["image"], r["rater"], r["method"], int(r["score"]))
                for r in csv.DictReader(f)
            ]
        report.mos = mos_aggregate(records)
    (src / "report.md").write_text(render_markdown(report), encoding="utf-8")
    figures = render_figures(report, src / "figures")
    print(f"report.md and {len(figures)} figures -> {src}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwbench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance a manifest of images and score the results")
    p.add_argument("--manifest", required=True)
    p.add_argument("--methods", default="wb,he,gc")
    p.add_argument("--model", default=None, help="weight file for the waternet method")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("metrics", help="score result/reference pairs from a CSV listing")
    p.add_argument("--pairs", required=True, help="CSV with result,reference[,method] columns")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("runtime", help="average enhancement runtime on synthetic images")
    p.add_argument("--repeats", type=int, required=True)
    p.add_argument("--methods", default="wb,he,gc")
    p.add_argument("--sizes", default="500x500,640x480,1280x720")
    p.add_argument("--model", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_runtime)

    p = sub.add_parser("train", help="train the fusion network on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None, help="JSON training configuration")
    p.add_argument("--out", required=True, help="output weight file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("report", help="re-render Markdown and figures from a results directory")
    p.add_argument("--from", dest="src", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
