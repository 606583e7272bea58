"""The `artaug` command line: one entry point wiring all pipeline stages.

Subcommands: validate, augment, sample, embed-stats, eval-captions,
eval-retrieval. Logs go to stderr, data goes to files. Exit codes: 0 success,
1 error, 2 partial generation failure, 64 usage error. A single --seed drives
every stochastic stream, and `--config file.json` supplies defaults that
explicit flags override.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import augment as aug
from . import backends, capmetrics, corpus, embedstore, reports, retrieval, sampler
from .errors import ArtaugError, UsageError
from .seeds import stable_u64

log = logging.getLogger("artaug")


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the toolkit contract is 64
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, got {text!r}")


def build_parser() -> _Parser:
    parser = _Parser(prog="artaug", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file with default values for flags")
        return p

    p = add("validate", "check a manifest and print a summary")
    p.add_argument("--manifest", required=True)
    p.add_argument("--lax", action="store_true", help="warn on unknown fields instead of rejecting")

    p = add("augment", "plan and run variation generation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--variations", type=int, default=4, help="variations per image (M)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=("mock", "remote"), default="mock")
    p.add_argument("--endpoint", default=None, help="generation service URL (remote backend)")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--strength", type=float, default=aug.DEFAULT_STRENGTH)
    p.add_argument("--guidance-scale", type=float, default=aug.DEFAULT_GUIDANCE_SCALE)
    p.add_argument("--size", type=_size, default="512x512")
    p.add_argument("--joiner", default=" ")
    p.add_argument("--jobs", type=int, default=1)

    p = add("sample", "emit mixed real/synthetic training batches")
    p.add_argument("--manifest", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--out", required=True)

    p = add("embed-stats", "cosine-similarity quality report for an augmented dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--image-emb", required=True)
    p.add_argument("--text-emb", required=True)
    p.add_argument("--report", required=True)

    p = add("eval-captions", "score candidate captions against references")
    p.add_argument("--pairs", required=True, help="JSONL of {id, candidate, references}")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=reports.FORMATS, default="json")
    p.add_argument("--metrics", default=None, help="comma list from: " + ",".join(capmetrics.ALL_METRICS))
    p.add_argument("--cand-token-emb", default=None, help="EMB1 of candidate token embeddings ({id}#{i})")
    p.add_argument("--ref-token-emb", default=None, help="EMB1 of reference token embeddings ({id}#{i})")

    p = add("eval-retrieval", "recall@k in both retrieval directions")
    p.add_argument("--image-emb", required=True)
    p.add_argument("--text-emb", required=True)
    p.add_argument("--pairs", required=True, help="JSONL of {image_id, text_id}")
    p.add_argument("--k", type=_int_list, default="1,5,10")
    p.add_argument("--pool", type=int, default=None, help="pool size for fixed-pool recall")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--direction", choices=("im2t", "t2im", "both"), default="both")
    p.add_argument("--format", choices=reports.FORMATS, default="json")
    p.add_argument("--out", required=True)

    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> None:
    """Install config-file values as parser defaults so explicit flags win."""
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None:
        return
    try:
        values = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}")
    if not isinstance(values, dict):
        raise UsageError(f"config {path!r} must hold a JSON object")
    subparsers = [
        sub
        for action in parser._subparsers._group_actions  # noqa: SLF001
        for sub in action.choices.values()
    ]
    known = set()
    for sub in subparsers:
        known.update(a.dest for a in sub._actions)  # noqa: SLF001
    mapped = {}
    for key, value in values.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"config {path!r}: unknown option {key!r}")
        mapped[dest] = value
    # subcommands parse into a fresh namespace, so defaults must land on the
    # subparser owning each option, not on the root parser
    for sub in subparsers:
        dests = {a.dest for a in sub._actions}  # noqa: SLF001
        fitting = {k: v for k, v in mapped.items() if k in dests}
        if fitting:
            sub.set_defaults(**fitting)


def _config_dict(args: argparse.Namespace) -> dict:
    skip = {"config"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _cmd_validate(args) -> int:
    dataset = corpus.load_manifest(args.manifest, strict=not args.lax)
    counts = dataset.split_counts()
    print(
        f"manifest OK: {len(dataset)} records "
        f"(train={counts['train']} val={counts['val']} test={counts['test']})",
        file=sys.stderr,
    )
    return 0


def _cmd_augment(args) -> int:
    dataset = corpus.load_manifest(args.manifest)
    plan = aug.plan_variations(
        dataset,
        args.variations,
        args.seed,
        strength=args.strength,
        guidance_scale=args.guidance_scale,
        output_size=tuple(args.size),
        joiner=args.joiner,
    )
    if args.backend == "remote":
        if not args.endpoint:
            raise UsageError("--backend remote requires --endpoint")
        backend = backends.RemoteBackend(
            args.endpoint, timeout=args.timeout, retries=args.retries
        )
    else:
        backend = backends.MockBackend()
    report = aug.execute_plan(
        plan,
        backend,
        args.out_dir,
        jobs=args.jobs,
        parent_manifest=str(args.manifest),
    )
    payload = {
        "config": _config_dict(args),
        "planned": len(plan),
        "generated": report.generated,
        "skipped": report.skipped,
        "failed": len(report.failures),
        "failures": [
            {
                "parent_id": f.parent_id,
                "variation_index": f.variation_index,
                "cause": f.cause,
            }
            for f in report.failures
        ],
    }
    _write(
        str(Path(args.out_dir) / "run_report.json"),
        json.dumps(payload, indent=2, sort_keys=True) + "\n",
    )
    log.info(
        "augment: %d planned, %d generated, %d skipped, %d failed",
        len(plan),
        report.generated,
        report.skipped,
        len(report.failures),
    )
    return 2 if report.failures else 0


def _cmd_sample(args) -> int:
    dataset = corpus.load_manifest(args.manifest)
    synthetic = aug.load_synthetic_manifest(args.synthetic)
    mixer = sampler.MixedSampler(dataset, synthetic)
    items_written = 0
    with Path(args.out).open("w", encoding="utf-8") as fh:
        for epoch in range(args.epochs):
            config = sampler.SamplerConfig(
                alpha=args.alpha,
                batch_size=args.batch_size,
                epoch_seed=stable_u64("epoch", args.seed, epoch),
                shuffle=not args.no_shuffle,
            )
            position = 0
            for batch_no, batch in enumerate(mixer.epoch(config)):
                for item in batch:
                    fh.write(
                        json.dumps(
                            {
                                "epoch": epoch,
                                "batch": batch_no,
                                "position": position,
                                "parent_id": item.parent_id,
                                "origin": item.origin,
                                "variation_index": item.variation_index,
                                "image": item.image_ref,
                            }
                        )
                        + "\n"
                    )
                    position += 1
                    items_written += 1
    report = {"config": _config_dict(args), "items": items_written}
    _write(args.out + ".report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    log.info("sample: wrote %d items to %s", items_written, args.out)
    return 0


def _cmd_embed_stats(args) -> int:
    dataset = corpus.load_manifest(args.manifest)
    synthetic = aug.load_synthetic_manifest(args.synthetic)
    images = embedstore.load_embeddings(args.image_emb)
    texts = embedstore.load_embeddings(args.text_emb)
    report = embedstore.similarity_report(dataset, synthetic, images, texts)
    payload = {"config": _config_dict(args)}
    for name in ("real_vs_caption", "synthetic_vs_caption", "real_vs_variation"):
        stats = getattr(report, name)
        payload[name] = {
            "mean": stats.mean,
            "stddev": stats.stddev,
            "count": stats.count,
        }
    _write(args.report, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    log.info("embed-stats: report written to %s", args.report)
    return 0


def _load_caption_pairs(path: str) -> list[capmetrics.CaptionPair]:
    pairs = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                pairs.append(
                    capmetrics.CaptionPair(
                        item_id=obj["id"],
                        candidate=obj["candidate"],
                        references=list(obj["references"]),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise UsageError(f"{path}:{line_no}: bad caption pair ({exc})")
    return pairs


def _cmd_eval_captions(args) -> int:
    pairs = _load_caption_pairs(args.pairs)
    metrics = args.metrics.split(",") if args.metrics else None
    cand_table = (
        embedstore.load_embeddings(args.cand_token_emb) if args.cand_token_emb else None
    )
    ref_table = (
        embedstore.load_embeddings(args.ref_token_emb) if args.ref_token_emb else None
    )
    report = capmetrics.evaluate_captions(
        pairs,
        metrics,
        candidate_token_table=cand_table,
        reference_token_table=ref_table,
    )
    _write(
        args.out,
        reports.render_caption_report(report, args.format, config=_config_dict(args)),
    )
    log.info("eval-captions: %d items scored, report at %s", len(pairs), args.out)
    return 0


def _cmd_eval_retrieval(args) -> int:
    images = embedstore.load_embeddings(args.image_emb)
    texts = embedstore.load_embeddings(args.text_emb)
    pairs = []
    with Path(args.pairs).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            pairs.append((obj["image_id"], obj["text_id"]))
    matrix = retrieval.similarity_matrix(images, texts, pairs)
    directions = ("im2t", "t2im") if args.direction == "both" else (args.direction,)
    results = []
    for direction in directions:
        if args.pool is not None:
            results.append(
                retrieval.pooled_recall(
                    matrix, args.pool, args.trials, args.seed, args.k, direction
                )
            )
        else:
            results.append(retrieval.recall_at_k(matrix, args.k, direction))
    _write(
        args.out,
        reports.render_retrieval_report(results, args.format, config=_config_dict(args)),
    )
    log.info("eval-retrieval: report at %s", args.out)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "augment": _cmd_augment,
    "sample": _cmd_sample,
    "embed-stats": _cmd_embed_stats,
    "eval-captions": _cmd_eval_captions,
    "eval-retrieval": _cmd_eval_retrieval,
}


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        _apply_config(parser, list(argv))
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 64
    except (ArtaugError, OSError) as exc:
        log.error("%s", exc)
        return 1


def entrypoint() -> None:
    sys.exit(main())
