"""Score generated code, repairs and summaries with an ensemble of LLM judge prompts.

Exit codes: 0 success, 2 dataset/validation error, 3 backend failure, 4 usage error.
Data goes to standard output; progress and call statistics to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path

from . import __version__
from .backend import (
    BACKEND_KINDS,
    DEFAULT_ENDPOINT,
    DEFAULT_MODEL,
    BackendConfig,
    BackendError,
    DiskCache,
    JudgeBackend,
    MockScript,
    perfect_judge_script,
)
from .baselines import METRICS, TOKENIZERS, score_pair
from .core import DatasetError, TaskKind, load_dataset
from .ensemble import Team, enumerate_teams
from .pipeline import PipelineInterrupted, load_report, run_pipeline
from .stats import cohen_kappa, correlations, discretize

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BACKEND = 3
EXIT_USAGE = 4

log = logging.getLogger("swejudge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _team_arg(text: str) -> Team:
    try:
        return Team.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _fmt(value) -> str:
    if value is None:
        return "undefined"
    return f"{value:.4f}"


def _stderr(message: str) -> None:
    print(message, file=sys.stderr)


def _emit_json(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_validate(args) -> int:
    manifest, samples = load_dataset(args.manifest)
    annotated = sum(1 for s in samples if s.human_score is not None)
    kinds = sorted({(s.task_kind or manifest.task_kind).value for s in samples})
    print(f"{manifest.name}: {len(samples)} samples, {annotated} annotated")
    print(f"task kind: {manifest.task_kind.value}"
          + (f" (per-sample: {', '.join(kinds)})" if kinds != [manifest.task_kind.value] else ""))
    print(f"scale: {manifest.scale.min:g}-{manifest.scale.max:g} step {manifest.scale.step:g}")
    return EXIT_OK


def _build_backend(args, samples=None, scale=None) -> JudgeBackend:
    cache_dir = Path(args.cache_dir) if args.cache_dir else None
    config = BackendConfig(
        kind=args.backend,
        model_name=args.model,
        endpoint_url=args.endpoint,
        max_concurrency=args.max_concurrency,
        timeout=args.timeout,
        max_retries=args.max_retries,
        cache_dir=cache_dir,
    )
    script = None
    if args.backend == "mock":
        if args.mock_script:
            script = MockScript.load(args.mock_script)
        else:
            log.info("no --mock-script given; using the perfect judge built from human scores")
            script = perfect_judge_script(samples, scale)
    return JudgeBackend(config, script=script)


def cmd_judge(args) -> int:
    manifest, samples = load_dataset(args.manifest)
    if args.backend == "replay" and not args.cache_dir:
        raise UsageError("--backend replay needs --cache-dir")
    backend = _build_backend(args, samples, manifest.scale)
    out = Path(args.out)
    _stderr(f"judging {len(samples)} samples from {manifest.name} with {args.backend} backend "
            f"({args.model})")
    try:
        report = run_pipeline(
            manifest, samples, backend,
            trial_size=args.trial_size, seed=args.seed, team=args.team,
            max_workers=args.max_concurrency,
        )
    except PipelineInterrupted as exc:
        partial = out.with_name(out.stem + ".partial.json")
        partial.write_text(json.dumps({
            "dataset": manifest.name,
            "records": [
                {"id": sid, "strategy": strategy.value, "raw_score": rec.raw_score,
                 "parse_note": rec.parse_note}
                for (sid, strategy), rec in sorted(exc.records.items(), key=lambda kv: (kv[0][0], kv[0][1].value))
            ],
            "call_stats": backend.stats.to_dict(),
        }, indent=2) + "\n", encoding="utf-8")
        _stderr(f"interrupted; partial results written to {partial}")
        return 130
    finally:
        backend.close()
    report.write(out)
    result = report.selected_trial_result
    print(f"selected team: {report.selected_team}"
          + (f" (trial avg_cor {result.avg_cor:.4f} on {len(report.trial_ids)} samples)"
             if result else " (fixed by --team)"))
    if report.statistics:
        st = report.statistics
        print(f"dataset: n={st['n']} tau={_fmt(st['kendall_tau'])} spearman={_fmt(st['spearman'])} "
              f"pearson={_fmt(st['pearson'])} avg_cor={_fmt(st['avg_cor'])} kappa={_fmt(st['cohen_kappa'])}")
    print(f"report: {out}")
    cs = report.call_stats
    _stderr(f"calls: {cs['live_calls']} live, {cs['cache_hits']} cached; "
            f"{cs['prompt_chars']} prompt chars, {cs['reply_chars']} reply chars")
    return EXIT_OK


def _joined(report: dict, samples):
    predicted = {row["id"]: row["mapped"] for row in report["per_sample"]}
    pairs = [(predicted[s.id], s.human_score, s.id) for s in samples
             if s.human_score is not None and s.id in predicted and predicted[s.id] is not None]
    if not pairs:
        raise DatasetError("report and dataset share no annotated samples")
    return pairs


def cmd_correlate(args) -> int:
    manifest, samples = load_dataset(args.manifest)
    pairs = _joined(load_report(args.report), samples)
    if len(pairs) < 2:
        raise DatasetError("need at least 2 overlapping annotated samples for correlations")
    summary = correlations([p for p, _, _ in pairs], [t for _, t, _ in pairs]).to_dict()
    if args.json:
        _emit_json(summary)
    else:
        print(f"{'statistic':<14}{'value':>10}")
        for name in ("kendall_tau", "spearman", "pearson", "avg_cor"):
            print(f"{name:<14}{_fmt(summary[name]):>10}")
        print(f"{'n':<14}{summary['n']:>10}")
    return EXIT_OK


def cmd_agreement(args) -> int:
    manifest, samples = load_dataset(args.manifest)
    pairs = _joined(load_report(args.report), samples)
    scale = manifest.scale
    tool = [discretize(p, scale) for p, _, _ in pairs]
    human = [discretize(t, scale) for _, t, _ in pairs]
    kappa = cohen_kappa(tool, human, scale)
    exact = sum(a == b for a, b in zip(tool, human)) / len(pairs)
    result = {"n": len(pairs), "cohen_kappa": kappa, "observed_agreement": exact}
    if args.json:
        _emit_json(result)
    else:
        print(f"{'statistic':<20}{'value':>10}")
        print(f"{'cohen_kappa':<20}{_fmt(kappa):>10}")
        print(f"{'observed_agreement':<20}{_fmt(exact):>10}")
        print(f"{'n':<20}{len(pairs):>10}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    manifest, samples = load_dataset(args.manifest)
    rows = []
    for s in samples:
        tokenizer = args.tokenizer
        if tokenizer == "auto":
            kind = s.task_kind or manifest.task_kind
            tokenizer = "whitespace" if kind is TaskKind.CODE_SUMMARIZATION else "code_punct"
        rows.append({"id": s.id, "score": score_pair(args.metric, s.candidate, s.reference, tokenizer),
                     "tokenizer": tokenizer})
    annotated = [(r["score"], s.human_score) for r, s in zip(rows, samples) if s.human_score is not None]
    summary = correlations(*zip(*annotated)).to_dict() if len(annotated) >= 2 else None
    result = {"metric": args.metric, "dataset": manifest.name, "per_sample": rows, "statistics": summary}
    if args.json:
        _emit_json(result)
        return EXIT_OK
    for row in rows:
        print(f"{row['id']}\t{row['score']:.4f}")
    if summary:
        print()
        for name in ("kendall_tau", "spearman", "pearson", "avg_cor"):
            print(f"{name:<14}{_fmt(summary[name]):>10}")
    return EXIT_OK


def cmd_teams(args) -> int:
    for i, team in enumerate(enumerate_teams(), start=1):
        print(f"T{i}\t{team}")
    return EXIT_OK


def cmd_cache(args) -> int:
    root = Path(args.cache_dir)
    cache = DiskCache(root)
    if args.action == "info":
        keys = list(cache.keys())
        size = sum(cache.path(k).stat().st_size for k in keys)
        print(f"{root}: {len(keys)} entries, {size} reply bytes")
        return EXIT_OK
    if not args.yes:
        raise UsageError("refusing to clear the cache without --yes")
    if root.is_dir():
        for sub in root.glob("??"):
            if sub.is_dir():
                shutil.rmtree(sub)
    print(f"cleared {root}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swejudge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a dataset manifest and its samples")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("judge", help="select a team and score a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--backend", choices=BACKEND_KINDS, default="live")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--endpoint", default=DEFAULT_ENDPOINT)
    p.add_argument("--trial-size", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--team", type=_team_arg, help="fixed team such as P1b,P3; skips selection")
    p.add_argument("--out", default="report.json")
    p.add_argument("--cache-dir")
    p.add_argument("--max-concurrency", type=_positive_int, default=4)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--max-retries", type=int, default=3)
    p.add_argument("--mock-script", help="JSON list of scripted replies for --backend mock")
    p.set_defaults(func=cmd_judge)

    for name, func, help_ in (("correlate", cmd_correlate, "tau, spearman, pearson vs human scores"),
                              ("agreement", cmd_agreement, "Cohen's kappa vs human scores")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--report", required=True)
        p.add_argument("--manifest", required=True)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=func)

    p = sub.add_parser("baseline", help="match-based baseline metric on a dataset")
    p.add_argument("--metric", choices=METRICS, required=True)
    p.add_argument("--manifest", "--dataset", dest="manifest", required=True)
    p.add_argument("--tokenizer", choices=("auto", *TOKENIZERS), default="auto")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("teams", help="list the candidate teams")
    p.set_defaults(func=cmd_teams)

    p = sub.add_parser("cache", help="inspect or clear a response cache")
    p.add_argument("action", choices=("info", "clear"))
    p.add_argument("--cache-dir", required=True)
    p.add_argument("--yes", action="store_true")
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors, --help and --version: hand back the code instead of exiting
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as exc:
        _stderr(f"swejudge: error: {exc}")
        return EXIT_USAGE
    except DatasetError as exc:
        _stderr(f"swejudge: invalid dataset: {exc}")
        return EXIT_VALIDATION
    except BackendError as exc:
        _stderr(f"swejudge: backend failure: {exc}")
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
