"""Command-line interface.

Subcommands: eval-correlation, eval-preference, iaa, discretize, best-of-k,
leaderboard, pipeline.  Every subcommand takes --config <file> plus
overrides.  Exit codes: 0 success, 2 schema/config errors, 3 backend
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

from videval import discretize as disc
from videval import report, stats
from videval.errors import AllParsesFailed, ProviderError, SchemaError, VidevalError
from videval.harness import (
    EVALCRAFTER_ASPECTS,
    RunConfig,
    best_of_k,
    build_backend,
    leaderboard,
    load_evalcrafter_csv,
    load_labeled_dataset,
    load_pairs_jsonl,
    load_records_jsonl,
    random_baseline_result,
    random_preference_result,
    run_correlation_eval,
    run_preference_eval,
    subsample_prompts,
)
from videval.model import ASPECTS, MetricValue, dump_records_jsonl
from videval.pipeline import ImageDirDecoder, PipelineConfig, extract_frames, filter_prompt, is_static
from videval.scorer import ScoreCache

EXIT_SCHEMA = 2
EXIT_BACKEND = 3


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="run config file (YAML)")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--k", type=int, help="override best-of-K candidate count")
    p.add_argument("--tie-margin", type=float, help="override preference tie margin")
    p.add_argument("--rules", help="override discretization rule file")
    p.add_argument("--backend", help="override backend kind (stub, echo, remote, composite)")
    p.add_argument("--endpoint", help="remote backend/provider endpoint")
    p.add_argument("--mode", choices=["generative", "regression"], help="remote/stub scoring mode")
    p.add_argument("--out", help="output path prefix (writes .csv, .txt, .json)")


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.k is not None:
        cfg.k = args.k
    if args.tie_margin is not None:
        cfg.tie_margin = args.tie_margin
    if args.rules is not None:
        cfg.rules = args.rules
    if args.backend is not None:
        cfg.backend = {"kind": args.backend}
    if args.endpoint is not None:
        cfg.backend["endpoint"] = args.endpoint
    if args.mode is not None:
        cfg.backend["mode"] = args.mode
    return RunConfig(**{k: getattr(cfg, k) for k in RunConfig.KEYS})  # re-validate


def _rules_for(cfg: RunConfig):
    if cfg.rules is not None:
        return disc.load_rules(cfg.rules), _file_digest(cfg.rules)
    rules = disc.default_rules()
    blob = json.dumps(
        {name: [list(b) for b in r.bins] for name, r in sorted(rules.items())}, sort_keys=True
    )
    return rules, hashlib.sha256(blob.encode()).hexdigest()[:16]


def _file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()[:16]


def _frame_source(cfg: RunConfig, dataset_path: str):
    decoder = ImageDirDecoder(root=os.path.dirname(os.path.abspath(dataset_path)))
    pipe_cfg = PipelineConfig(target_fps=cfg.target_fps)

    def source(record):
        return extract_frames(record, pipe_cfg, decoder)

    return source


def _emit(args, results, fingerprint):
    text = report.run_report(results, "aligned_text")
    sys.stdout.write(text)
    if args.out:
        _write(args.out + ".txt", text)
        _write(args.out + ".csv", report.run_report(results, "csv"))
        _write(args.out + ".json", report.result_document(results, fingerprint))


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --- subcommands -------------------------------------------------------------

def cmd_eval_correlation(args) -> int:
    cfg = _load_config(args)
    rules, rules_digest = _rules_for(cfg)
    backend = build_backend(cfg.backend, rules=rules, providers=cfg.providers)
    fingerprint = cfg.fingerprint(rules_digest)
    cache = ScoreCache(cfg.cache_path) if cfg.cache_path else None

    if args.evalcrafter:
        dataset = load_records_jsonl(args.dataset)
        reference = load_evalcrafter_csv(args.evalcrafter)
        aspects = EVALCRAFTER_ASPECTS
        benchmark = "evalcrafter"
    else:
        dataset = load_labeled_dataset(args.dataset)
        reference = None
        aspects = tuple(args.aspects.split(",")) if args.aspects else None
        benchmark = args.benchmark

    frame_source = _frame_source(cfg, args.dataset) if backend.needs_frames else None
    results = []
    if cfg.random_trials > 0 and reference is None:
        results.append(
            random_baseline_result(dataset, cfg.seed, cfg.random_trials, aspects, benchmark)
        )
    results.append(
        run_correlation_eval(
            dataset,
            backend,
            aspects=aspects,
            reference=reference,
            frame_source=frame_source,
            cache=cache,
            max_workers=cfg.max_workers,
            benchmark=benchmark,
            fingerprint=fingerprint,
        )
    )
    _emit(args, results, fingerprint)
    return 0


def cmd_eval_preference(args) -> int:
    cfg = _load_config(args)
    rules, rules_digest = _rules_for(cfg)
    backend = build_backend(cfg.backend, rules=rules, providers=cfg.providers)
    fingerprint = cfg.fingerprint(rules_digest)
    cache = ScoreCache(cfg.cache_path) if cfg.cache_path else None

    dataset = load_records_jsonl(args.dataset)
    pairs = load_pairs_jsonl(args.pairs)
    if args.subsample_prompts is not None:
        n = cfg.vbench_subsample if args.subsample_prompts == -1 else args.subsample_prompts
        dataset_ids = {r.id for r in subsample_prompts(dataset, n, cfg.seed)}
        pairs = [p for p in pairs if p.left in dataset_ids and p.right in dataset_ids]
        if not pairs:
            raise SchemaError("prompt subsampling left no usable pairs")
    frame_source = _frame_source(cfg, args.dataset) if backend.needs_frames else None
    results = []
    if cfg.random_trials > 0:
        results.append(random_preference_result(pairs, cfg.seed, cfg.random_trials, args.benchmark))
    results.append(
        run_preference_eval(
            pairs,
            dataset,
            backend,
            tie_margin=cfg.tie_margin,
            frame_source=frame_source,
            cache=cache,
            max_workers=cfg.max_workers,
            benchmark=args.benchmark,
            fingerprint=fingerprint,
        )
    )
    _emit(args, results, fingerprint)
    return 0


def _load_label_matrix_csv(path: str):
    """items x raters label CSV per aspect: columns item, rater, vq..fc."""
    per_aspect: dict[str, dict[str, dict[str, int | None]]] = {a: {} for a in ASPECTS}
    items: list[str] = []
    raters: list[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"item", "rater", *ASPECTS}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise SchemaError(f"{path}: expected columns {sorted(required)}")
        for lineno, row in enumerate(reader, start=2):
            item, rater = row["item"].strip(), row["rater"].strip()
            if item not in items:
                items.append(item)
            if rater not in raters:
                raters.append(rater)
            for aspect in ASPECTS:
                cell = row[aspect].strip()
                value = None if cell == "" else int(cell)
                cell_map = per_aspect[aspect].setdefault(item, {})
                if rater in cell_map:
                    raise SchemaError(f"{path}:{lineno}: duplicate rating ({item}, {rater})")
                cell_map[rater] = value
    matrices = {}
    for aspect in ASPECTS:
        rows = [
            tuple(per_aspect[aspect].get(item, {}).get(rater) for rater in raters)
            for item in items
        ]
        matrices[aspect] = stats.LabelMatrix.from_rows(rows)
    return matrices


def cmd_iaa(args) -> int:
    matrices = _load_label_matrix_csv(args.ratings)

    def row(name, fn):
        cells = [name]
        for aspect in ASPECTS:
            try:
                cells.append(f"{fn(matrices[aspect]):.3f}")
            except VidevalError:
                cells.append("undef")
        return cells

    header = ["metric", *ASPECTS]
    rows = [
        row("match_ratio", stats.match_ratio),
        row("fleiss_kappa", stats.fleiss_kappa),
        row(f"kripp_alpha[{args.level}]", lambda m: stats.kripp_alpha(m, args.level)),
    ]
    text = report.render_table(header, rows, "aligned_text")
    sys.stdout.write(text)
    if args.out:
        _write(args.out + ".txt", text)
        _write(args.out + ".csv", report.render_table(header, rows, "csv"))
    return 0


def cmd_discretize(args) -> int:
    cfg = _load_config(args)
    rules, _ = _rules_for(cfg)
    if args.metric is not None and args.value is not None:
        rule = rules.get(args.metric)
        if rule is None:
            raise SchemaError(f"no rule for metric {args.metric!r}")
        label = disc.discretize(MetricValue(args.metric, rule.direction, args.value), rule)
        sys.stdout.write(f"{label.value}\n")
        return 0
    if not args.input:
        raise SchemaError("discretize needs either --metric/--value or --input CSV")
    out_rows = []
    with open(args.input, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"metric", "value"} <= set(reader.fieldnames):
            raise SchemaError(f"{args.input}: expected columns metric,value")
        for row in reader:
            name = row["metric"].strip()
            rule = rules.get(name)
            if rule is None:
                raise SchemaError(f"no rule for metric {name!r}")
            value = MetricValue(name, rule.direction, float(row["value"]))
            out_rows.append([name, row["value"], str(disc.discretize(value, rule).value)])
    buf = [",".join(["metric", "value", "label"])]
    buf += [",".join(r) for r in out_rows]
    text = "\n".join(buf) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(args.out + ".csv", text)
    return 0


def cmd_best_of_k(args) -> int:
    cfg = _load_config(args)
    rules, _ = _rules_for(cfg)
    backend = build_backend(cfg.backend, rules=rules, providers=cfg.providers)
    cache = ScoreCache(cfg.cache_path) if cfg.cache_path else None
    dataset = load_records_jsonl(args.dataset)
    frame_source = _frame_source(cfg, args.dataset) if backend.needs_frames else None

    groups: dict[str, list] = {}
    for rec in dataset:
        groups.setdefault(rec.prompt, []).append(rec)
    selected = []
    for prompt in groups:
        candidates = groups[prompt][: cfg.k]
        pairs = [(r, frame_source(r) if frame_source else None) for r in candidates]
        selected.append(best_of_k(pairs, backend, cache=cache))
    text = dump_records_jsonl(selected)
    sys.stdout.write(text)
    if args.out:
        _write(args.out + ".jsonl", text)
    return 0


def cmd_leaderboard(args) -> int:
    dataset = load_labeled_dataset(args.dataset)
    rows = leaderboard(dataset)
    text = report.leaderboard_report(rows, "aligned_text")
    sys.stdout.write(text)
    if args.out:
        _write(args.out + ".txt", text)
        _write(args.out + ".csv", report.leaderboard_report(rows, "csv"))
    return 0


def cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    pipe_cfg = PipelineConfig(target_fps=cfg.target_fps)
    dataset = load_records_jsonl(args.dataset)
    decoder = ImageDirDecoder(root=os.path.dirname(os.path.abspath(args.dataset)))
    crop = None
    if args.crop:
        try:
            w, h = (int(x) for x in args.crop.lower().split("x"))
        except ValueError as exc:
            raise SchemaError(f"--crop must look like 768x480, got {args.crop!r}") from exc
        crop = (w, h)

    lines = []
    for rec in dataset:
        entry: dict[str, object] = {"id": rec.id}
        verdict = filter_prompt(rec.prompt, pipe_cfg)
        entry["prompt_accepted"] = verdict.accepted
        if not verdict.accepted:
            entry["prompt_reason"] = verdict.reason
        try:
            frames = extract_frames(rec, pipe_cfg, decoder)
            if crop is not None:
                from videval.pipeline import crop_center

                frames = crop_center(frames, crop[0], crop[1])
            entry["frames"] = len(frames)
            entry["fps"] = frames.fps
            if args.check_static:
                entry["static"] = is_static(frames, pipe_cfg)
        except VidevalError as exc:
            entry["error"] = str(exc)
        lines.append(json.dumps(entry, sort_keys=True))
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(args.out + ".jsonl", text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="videval", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-correlation", help="per-aspect Spearman correlation run")
    p.add_argument("--dataset", required=True, help="JSONL dataset with human scores")
    p.add_argument("--aspects", help="comma-separated aspect subset (default: all five)")
    p.add_argument("--evalcrafter", help="EvalCrafter ratings CSV (restricts aspects to vq,tc,tva)")
    p.add_argument("--benchmark", default="correlation")
    _add_common(p)
    p.set_defaults(fn=cmd_eval_correlation)

    p = sub.add_parser("eval-preference", help="pairwise preference accuracy run")
    p.add_argument("--dataset", required=True)
    p.add_argument("--pairs", required=True, help="JSONL preference pairs {left, right, verdict}")
    p.add_argument(
        "--subsample-prompts", type=int, nargs="?", const=-1,
        help="keep only N seeded unique prompts (bare flag: the config's vbench_subsample)",
    )
    p.add_argument("--benchmark", default="preference")
    _add_common(p)
    p.set_defaults(fn=cmd_eval_preference)

    p = sub.add_parser("iaa", help="inter-annotator agreement table")
    p.add_argument("--ratings", required=True, help="CSV with columns item, rater, vq..fc")
    p.add_argument("--level", default="ordinal", choices=["nominal", "ordinal", "interval"])
    p.add_argument("--out")
    p.set_defaults(fn=cmd_iaa)

    p = sub.add_parser("discretize", help="map metric values onto 1-4 labels")
    p.add_argument("--metric", help="metric name for single-value mode")
    p.add_argument("--value", type=float, help="raw value for single-value mode")
    p.add_argument("--input", help="CSV with columns metric,value")
    _add_common(p)
    p.set_defaults(fn=cmd_discretize)

    p = sub.add_parser("best-of-k", help="select the best candidate per prompt")
    p.add_argument("--dataset", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_best_of_k)

    p = sub.add_parser("leaderboard", help="rank models by mean aspect scores")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_leaderboard)

    p = sub.add_parser("pipeline", help="frame preprocessing and filtering report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--crop", help="center-crop target, e.g. 768x480")
    p.add_argument("--check-static", action="store_true")
    _add_common(p)
    p.set_defaults(fn=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ProviderError, AllParsesFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except VidevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
