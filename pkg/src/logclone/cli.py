"""``logclone`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .clones import CloneParams, all_clone_pairs, build_index, find_clones
from .experiment import PipelineConfig, SplitSpec, format_summary, load_corpus, macro_over_projects, run_pipeline
from .ingest import DEFAULT_LOGGER_PATTERNS, CorpusError, IngestConfig, load_source, extract_methods, write_corpus
from .levels import predict_level, predict_variables
from .location import ANY_LOGGED, MAJORITY, NEEDS_LOG, EvaluationError, consistency_report, evaluate_location, verdict_from_pairs
from .lsd import HybridParams, suggest_all, train_lsd_lm

EXIT_OK, EXIT_USAGE, EXIT_CORPUS, EXIT_EVAL = 0, 1, 2, 3

log = logging.getLogger("logclone")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_ingest_opts(p):
    p.add_argument("--min-method-lines", type=int, default=3)
    p.add_argument("--logger-pattern", action="append", dest="logger_patterns", metavar="P",
                   help="receiver-name regex (case-insensitive); repeatable")
    p.add_argument("--exclude", action="append", default=[], metavar="GLOB")


def _add_clone_opts(p):
    p.add_argument("--theta", type=float, default=0.7)
    p.add_argument("--mode", choices=["log-aware", "log-unaware", "log_aware", "log_unaware"], default="log-aware")
    p.add_argument("--min-bag-size", type=int, default=10)


def _add_hybrid_opts(p):
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("--max-len", type=int, default=32)


def _ingest_config(args) -> IngestConfig:
    return IngestConfig(
        min_method_lines=getattr(args, "min_method_lines", 3),
        logger_patterns=tuple(getattr(args, "logger_patterns", None) or DEFAULT_LOGGER_PATTERNS),
        exclude=tuple(getattr(args, "exclude", ()) or ()),
        jobs=getattr(args, "jobs", 1),
    )


def _clone_params(args) -> CloneParams:
    return CloneParams(theta=args.theta, mode=args.mode, min_bag_size=args.min_bag_size)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logclone", description="Clone-based logging statement suggestion.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="extract methods and logging calls into a JSONL corpus")
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_ingest_opts(p)

    p = sub.add_parser("clones", help="detect clone pairs in a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_clone_opts(p)

    for name in ("predict", "suggest"):
        p = sub.add_parser(name, help="location verdict" if name == "predict" else "full logging suggestion")
        p.add_argument("--corpus", required=True)
        p.add_argument("--target-file", required=True)
        p.add_argument("--rule", choices=[ANY_LOGGED, MAJORITY], default=ANY_LOGGED)
        _add_clone_opts(p)
        _add_ingest_opts(p)
        if name == "suggest":
            _add_hybrid_opts(p)

    p = sub.add_parser("consistency", help="logging consistency statistics over all clone pairs")
    p.add_argument("--corpus", required=True, help="JSONL corpus or Java source directory")
    p.add_argument("--out")
    _add_clone_opts(p)
    _add_ingest_opts(p)

    p = sub.add_parser("lm", help="train and save the description language model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--add-k", type=float, default=0.01)
    p.add_argument("--backoff", type=float, default=0.4)

    ev = sub.add_parser("evaluate", help="evaluation runs")
    evsub = ev.add_subparsers(dest="what", required=True, parser_class=_Parser)
    for name in ("location", "all"):
        p = evsub.add_parser(name)
        p.add_argument("--corpus", required=True, action="append", help="repeat for several projects")
        p.add_argument("--split", type=float, default=0.8)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--rule", choices=[ANY_LOGGED, MAJORITY], default=ANY_LOGGED)
        p.add_argument("--out")
        _add_clone_opts(p)
        if name == "all":
            _add_hybrid_opts(p)
            p.add_argument("--order", type=int, default=3)
            p.add_argument("--summary", action="store_true", help="print the text table")
    return parser


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_ingest(args) -> int:
    from .ingest import scan_corpus

    corpus = scan_corpus(args.root, _ingest_config(args))
    write_corpus(corpus, args.out)
    logged = sum(m.is_logged for m in corpus.methods)
    print(f"{len(corpus.files)} files, {len(corpus.methods)} methods ({logged} logged), "
          f"{len(corpus.skipped)} skipped, {len(corpus.warnings)} warnings -> {args.out}")
    return EXIT_OK


def cmd_clones(args) -> int:
    corpus = load_corpus(args.corpus)
    pairs = sorted(all_clone_pairs(build_index(corpus, _clone_params(args))), key=lambda p: p.key())
    with open(args.out, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_json(), sort_keys=True) + "\n")
    print(f"{len(pairs)} clone pairs -> {args.out}")
    return EXIT_OK


def _targets(args):
    path = Path(args.target_file)
    source = load_source(path, f"target/{path.name}")
    return extract_methods(source, _ingest_config(args))


def cmd_predict(args, suggest: bool = False) -> int:
    corpus = load_corpus(args.corpus)
    by_id = {m.method_id: m for m in corpus.methods}
    index = build_index(corpus, _clone_params(args))
    targets = _targets(args)
    if not targets:
        print(f"no methods found in {args.target_file}", file=sys.stderr)
        return EXIT_EVAL
    model = None
    if suggest:
        model = train_lsd_lm((p.lsd_tokens for m in corpus.methods for p in m.lps_list))
        hybrid = HybridParams(lam=args.lam, k=args.k, tau=args.tau, max_len=args.max_len)
    for target in targets:
        pairs = find_clones(target, index)
        verdict = verdict_from_pairs(target.method_id, pairs, by_id, args.rule)
        record = {"target": target.method_id, "method": target.qualified_name, "line": target.start_line,
                  **verdict.to_json()}
        line = f"{target.qualified_name} (line {target.start_line}): {verdict.verdict}"
        if verdict.evidence:
            clone = by_id[verdict.evidence[0]]
            line += f" [clone {clone.qualified_name} in {clone.file_id}, similarity {verdict.evidence[1]:.3f}]"
        print(line)
        if suggest and verdict.verdict == NEEDS_LOG:
            clone = by_id[verdict.evidence[0]]
            logged = [p for p in pairs if by_id[p.other(target.method_id)].is_logged]
            level = predict_level([(p, lps) for p in logged for lps in by_id[p.other(target.method_id)].lps_list],
                                  target.method_id)
            suggestions = []
            for base, hyb in suggest_all(target.method_id, clone, model, hybrid):
                lps = next(p for p in clone.lps_list if p.lps_id == base.seed_lps)
                variables = predict_variables(target, lps)
                suggestions.append({"clone_only": base.tokens, "hybrid": hyb.tokens,
                                    "level": lps.level, "variables": variables.to_json()})
                print(f"    lsd (hybrid):     {' '.join(hyb.tokens)}")
                print(f"    lsd (clone-only): {' '.join(base.tokens)}")
                print(f"    variables:        {', '.join(variables.variables) or '-'}")
            print(f"    level:            {level.level} (support {level.support:.2f}, {level.rule})")
            record.update(level=level.level, level_support=level.support, suggestions=suggestions)
        print(json.dumps(record, sort_keys=True))
    return EXIT_OK


def cmd_consistency(args) -> int:
    corpus = load_corpus(args.corpus, _ingest_config(args))
    pairs = all_clone_pairs(build_index(corpus, _clone_params(args)))
    report = consistency_report(corpus, pairs)
    report["methods"] = len(corpus.methods)
    report["logged_methods"] = sum(m.is_logged for m in corpus.methods)
    _emit(report, args.out)
    return EXIT_OK


def cmd_lm(args) -> int:
    corpus = load_corpus(args.corpus)
    model = train_lsd_lm((p.lsd_tokens for m in corpus.methods for p in m.lps_list),
                         order=args.order, k=args.add_k, backoff_weight=args.backoff)
    model.save(args.out)
    print(f"vocabulary {len(model.vocabulary)}, contexts {len(model.counts)} -> {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    split = SplitSpec(train_fraction=args.split, seed=args.seed)
    params = _clone_params(args)
    if args.what == "location":
        results = {}
        for path in args.corpus:
            ev = evaluate_location(load_corpus(path), split, params, args.rule)
            results[path] = ev.to_json()
        _emit(results[args.corpus[0]] if len(args.corpus) == 1 else {"projects": results}, args.out)
        return EXIT_OK

    reports = []
    for path in args.corpus:
        config = PipelineConfig(
            corpus=path, split=split, clone=params, rule=args.rule, lm_order=args.order,
            hybrid=HybridParams(lam=args.lam, k=args.k, tau=args.tau, max_len=args.max_len),
        )
        reports.append(run_pipeline(config))
    if len(reports) == 1:
        payload = reports[0].to_json()
    else:
        payload = {"schema": reports[0].schema, "projects": [r.to_json() for r in reports],
                   "macro": macro_over_projects(reports)}
    _emit(payload, args.out)
    if args.summary or args.out:
        for r in reports:
            print(format_summary(r))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {
        "ingest": cmd_ingest,
        "clones": cmd_clones,
        "predict": cmd_predict,
        "suggest": lambda a: cmd_predict(a, suggest=True),
        "consistency": cmd_consistency,
        "lm": cmd_lm,
        "evaluate": cmd_evaluate,
    }
    try:
        return handlers[args.command](args)
    except CorpusError as exc:
        print(f"logclone: corpus error: {exc}", file=sys.stderr)
        return EXIT_CORPUS
    except EvaluationError as exc:
        print(f"logclone: evaluation impossible: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except ValueError as exc:
        print(f"logclone: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
