"""Command-line front end: ``lonelytext <command> [options]``.

Every command that writes files also writes ``resolved-config.json`` into
its output directory; passing that file back through ``--config`` reruns
the command. Flags given on the command line override the config file.

Exit codes: 0 success, 1 usage or contract error, 2 bad input data or a
missing file, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .errors import (ContractError, DataError, LengthMismatch, LonelyTextError,
                     MalformedRecord, NumericalFailure)
from .evaluation import (METRICS, PipelineConfig, fit_pipeline, make_folds, paired_t_test,
                         run_cv, sweep_topics)
from .features import Vocabulary
from .ingest import load_dataset, parse_ema, parse_messages, window_by_day
from .lda import LdaModel, topic_top_words
from .preprocess import JargonMap, PreprocessConfig, load_stopwords, preprocess_dataset
from .seeding import derive_seed
from .svm import SvmModel, rank_words_by_weight
from .synth import SynthSpec, corpus_to_dataset, generate_corpus, save_corpus


class UsageError(ContractError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _folds_arg(value):
    k = int(value)
    if k < 2:
        raise argparse.ArgumentTypeError("need at least 2 folds")
    return k


def _positive_int(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _nonneg_int(value):
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def _cost_factor(value):
    if value == "auto":
        return value
    x = float(value)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive or 'auto'")
    return x


def default_threads():
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


# ---------------------------------------------------------------- parser


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run config; flags override its values")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help="worker cap (default: available CPUs); never changes results")

    seeded = _Parser(add_help=False)
    seeded.add_argument("--seed", type=int)

    pipeline = _Parser(add_help=False)
    pipeline.add_argument("--dataset", help="dataset JSON, corpus.mtx, or a directory")
    pipeline.add_argument("--folds", type=_folds_arg)
    pipeline.add_argument("--group-by-participant", action="store_true", default=None)
    pipeline.add_argument("--min-df", type=_positive_int)
    pipeline.add_argument("--max-df", type=float)
    pipeline.add_argument("--weighting", choices=("tfidf", "count"))
    pipeline.add_argument("--alpha", type=float, help="LDA document-topic prior")
    pipeline.add_argument("--eta", type=float, help="LDA topic-word prior")
    pipeline.add_argument("--lda-max-iter", type=_positive_int)
    pipeline.add_argument("--lda-restarts", type=_positive_int)
    pipeline.add_argument("--C", type=float, dest="C")
    pipeline.add_argument("--cost-factor", type=_cost_factor)
    pipeline.add_argument("--out", help="output directory")

    parser = _Parser(prog="lonelytext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", parents=[common],
                       help="window messages by day and attach EMA labels")
    p.add_argument("--messages")
    p.add_argument("--ema")
    p.add_argument("--kind", type=str.upper, choices=("RT", "EOD"))
    p.add_argument("--threshold", type=float)
    p.add_argument("--tz-offset-hours", type=float)
    p.add_argument("--sent-only", action="store_true", default=None)
    p.add_argument("--messages-format", choices=("jsonl", "csv"))
    p.add_argument("--stemmer", choices=("porter", "none"))
    p.add_argument("--min-token-len", type=_positive_int)
    p.add_argument("--jargon", help="jargon TSV, or 'none' to disable normalization")
    p.add_argument("--stopwords", help="stopword list file")
    p.add_argument("--out", help="dataset JSON to write")

    p = sub.add_parser("evaluate", parents=[common, seeded, pipeline],
                       help="cross-validate one feature set against the majority baseline")
    p.add_argument("--features", choices=("unigram", "bigram", "topics"))
    p.add_argument("--topics", type=_positive_int, dest="n_topics")

    p = sub.add_parser("sweep", parents=[common, seeded, pipeline],
                       help="cross-validated F1 of topic features over a range of topic counts")
    p.add_argument("--t-min", type=_positive_int)
    p.add_argument("--t-max", type=_positive_int)
    p.add_argument("--t-step", type=_positive_int)

    p = sub.add_parser("ttest", parents=[common], help="paired t-test of two number files")
    p.add_argument("--a")
    p.add_argument("--b")

    p = sub.add_parser("topics", parents=[common], help="top words per LDA topic as TSV")
    p.add_argument("--model")
    p.add_argument("--top-n", type=_nonneg_int,
                   help="terms per topic (default 10)")
    p.add_argument("--out", help="write the TSV here instead of stdout")

    p = sub.add_parser("rank-words", parents=[common],
                       help="n-gram terms by SVM weight as TSV")
    p.add_argument("--model")
    p.add_argument("--vocab", help="vocabulary TSV (default: beside the model)")
    p.add_argument("--top-n", type=_nonneg_int,
                   help="terms to list (default 20)")
    p.add_argument("--out", help="write the TSV here instead of stdout")

    p = sub.add_parser("synth", parents=[common, seeded],
                       help="sample a synthetic corpus with ground truth")
    p.add_argument("--spec")
    p.add_argument("--out", help="output directory")
    return parser


# ---------------------------------------------------------------- config merge


_SECTION_FLAGS = {
    "ingest": {"kind": "kind", "threshold": "threshold", "tz_offset_hours": "tz_offset_hours",
               "sent_only": "sent_only", "messages_format": "messages_format"},
    "preprocess": {"stemmer": "stemmer", "min_token_len": "min_token_len", "min_df": "min_df",
                   "max_df": "max_df", "jargon": "jargon", "stopwords": "stopwords"},
    "features": {"features": "kind", "weighting": "weighting", "n_topics": "n_topics"},
    "lda": {"alpha": "alpha", "eta": "eta", "lda_max_iter": "max_iter",
            "lda_restarts": "restarts"},
    "svm": {"C": "C", "cost_factor": "cost_factor"},
    "eval": {"folds": "folds", "group_by_participant": "group_by_participant"},
    "sweep": {"t_min": "t_min", "t_max": "t_max", "t_step": "t_step"},
}

_INPUT_FLAGS = ("messages", "ema", "dataset", "a", "b", "model", "vocab", "spec", "out")


def resolve_config(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if cfg.command is not None and cfg.command != args.command:
        raise UsageError(f"config is for {cfg.command!r}, not {args.command!r}")
    cfg.command = args.command
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    for section, mapping in _SECTION_FLAGS.items():
        target = getattr(cfg, section)
        for flag, key in mapping.items():
            value = getattr(args, flag, None)
            if value is not None:
                setattr(target, key, value)
    inputs = dict(cfg.inputs)
    for name in _INPUT_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            inputs[name] = value
    if getattr(args, "top_n", None) is not None:
        inputs["top_n"] = args.top_n
    cfg.inputs = inputs
    return cfg


def _require(cfg, *names):
    missing = [n for n in names if cfg.inputs.get(n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"{cfg.command}: missing required {flags}")
    return [cfg.inputs[n] for n in names]


def _existing(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(str(p))
    return p


def pipeline_config(cfg):
    return PipelineConfig(
        features=cfg.features.kind,
        weighting=cfg.features.weighting,
        n_topics=int(cfg.features.n_topics),
        min_df=int(cfg.preprocess.min_df),
        max_df_fraction=float(cfg.preprocess.max_df),
        lda_alpha=cfg.lda.alpha,
        lda_eta=cfg.lda.eta,
        lda_max_iter=int(cfg.lda.max_iter),
        lda_tol=float(cfg.lda.tol),
        lda_restarts=int(cfg.lda.restarts),
        C=float(cfg.svm.C),
        cost_factor=cfg.svm.cost_factor,
        svm_max_epochs=int(cfg.svm.max_epochs),
        svm_tol=float(cfg.svm.tol),
        confidence=float(cfg.eval.confidence),
    )


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _out_dir(cfg):
    (out,) = _require(cfg, "out")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _folds_for(cfg, dataset):
    return make_folds(dataset, int(cfg.eval.folds), bool(cfg.eval.stratified),
                      bool(cfg.eval.group_by_participant), seed=derive_seed(cfg.seed, "folds"))


# ---------------------------------------------------------------- commands


def cmd_ingest(cfg, threads):
    messages, ema, out = _require(cfg, "messages", "ema", "out")
    msgs = parse_messages(_existing(messages), cfg.ingest.messages_format)
    responses = parse_ema(_existing(ema))
    pp = cfg.preprocess
    stop = load_stopwords(_existing(pp.stopwords) if pp.stopwords else None)
    config = PreprocessConfig(stopword_list=stop, stemmer=pp.stemmer,
                              min_token_len=int(pp.min_token_len), min_df=int(pp.min_df),
                              max_df_fraction=float(pp.max_df))
    if pp.jargon == "none":
        jargon = None
    else:
        jargon = JargonMap.load(_existing(pp.jargon) if pp.jargon else None,
                                max_repeat=int(pp.max_repeat))
    ing = cfg.ingest
    dataset = window_by_day(msgs, responses, ing.kind, float(ing.threshold),
                            float(ing.tz_offset_hours), bool(ing.sent_only))
    dataset = preprocess_dataset(dataset, config, jargon)
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.save(out)
    cfg.write(out.parent)
    print(json.dumps({"documents": len(dataset), "positive_rate": dataset.positive_rate}))


def _table_row(label, mean, cl):
    row = [label]
    for m in METRICS:
        row += [repr(mean[m]), repr(cl[m])]
    return row


def cmd_evaluate(cfg, threads):
    (path,) = _require(cfg, "dataset")
    out = _out_dir(cfg)
    dataset = load_dataset(path)
    pcfg = pipeline_config(cfg)
    folds = _folds_for(cfg, dataset)
    report = run_cv(dataset, pcfg, folds, seed=cfg.seed, threads=threads)
    _write_json(out / "report.json", report.to_dict())
    header = ["features"] + [f"{m}_{s}" for m in METRICS for s in ("M", "CL")]
    _write_csv(out / "table.csv", header, [
        _table_row(pcfg.features, report.mean(), report.cl()),
        _table_row("baseline", report.mean(report.baseline), report.cl(report.baseline)),
    ])
    # final model on all documents, for the topics and rank-words reports
    full = fit_pipeline(dataset.tokens, np.asarray(dataset.labels), pcfg,
                        derive_seed(cfg.seed, "full"))
    full.vocabulary.to_tsv(out / "vocabulary.tsv")
    full.svm.save(out / "svm-model.json")
    if full.lda is not None:
        full.lda.save(out / "lda-model.json")
    cfg.write(out)
    t = report.ttest
    print(json.dumps({"f1": report.mean()["f1"], "baseline_f1": report.mean(report.baseline)["f1"],
                      "t": t.t, "p": t.p}))


def cmd_sweep(cfg, threads):
    (path,) = _require(cfg, "dataset")
    out = _out_dir(cfg)
    dataset = load_dataset(path)
    pcfg = replace(pipeline_config(cfg), features="topics")
    folds = _folds_for(cfg, dataset)
    sw = cfg.sweep
    if int(sw.t_max) < int(sw.t_min):
        raise UsageError("--t-max must be >= --t-min")
    result = sweep_topics(dataset, pcfg, folds, int(sw.t_min), int(sw.t_max), int(sw.t_step),
                          seed=cfg.seed, threads=threads)
    rows = []
    for T, f1 in result.rows:
        rep = result.reports[T]
        rows.append([T, repr(f1), repr(rep.cl()["f1"]), repr(rep.ttest.p)])
    _write_csv(out / "sweep.csv", ["n_topics", "f1_mean", "f1_cl", "p_vs_baseline"], rows)
    best = result.reports[result.best]
    _write_json(out / "best.json", {"n_topics": result.best, **best.to_dict()})
    cfg.write(out)
    print(json.dumps({"best_n_topics": result.best, "f1": best.mean()["f1"]}))


_NUMBER_SPLIT = re.compile(r"[\s,;]+")


def read_numbers(path):
    text = _existing(path).read_text(encoding="utf-8")
    values = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for tok in _NUMBER_SPLIT.split(line.strip()):
            if not tok:
                continue
            try:
                values.append(float(tok))
            except ValueError:
                raise MalformedRecord(lineno, f"{path}: {tok!r} is not a number") from None
    return values


def cmd_ttest(cfg, threads):
    a_path, b_path = _require(cfg, "a", "b")
    a, b = read_numbers(a_path), read_numbers(b_path)
    if len(a) != len(b):
        raise LengthMismatch(f"--a has {len(a)} values, --b has {len(b)}")
    print(json.dumps(paired_t_test(a, b).as_dict()))


def _load_model(path, loader, what):
    try:
        return loader(_existing(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: not a valid {what} file ({exc})") from None


def cmd_topics(cfg, threads):
    (path,) = _require(cfg, "model")
    model = _load_model(path, LdaModel.load, "LDA model")
    lines = ["topic\trank\tterm\tprobability"]
    for t, words in enumerate(topic_top_words(model, int(cfg.inputs.get("top_n", 10)))):
        for r, (term, p) in enumerate(words, start=1):
            lines.append(f"{t}\t{r}\t{term}\t{p!r}")
    _emit("\n".join(lines) + "\n", cfg.inputs.get("out"))


def cmd_rank_words(cfg, threads):
    (path,) = _require(cfg, "model")
    model = _load_model(path, SvmModel.load, "SVM model")
    top_n = int(cfg.inputs.get("top_n", 20))
    vocab = None
    if model.feature_kind != "topic":
        vpath = cfg.inputs.get("vocab") or Path(path).with_name("vocabulary.tsv")
        vocab = Vocabulary.from_tsv(_existing(vpath))
    ranked = rank_words_by_weight(model, vocab)
    lines = ["rank\tterm\tweight"]
    lines += [f"{r}\t{term}\t{w!r}" for r, (term, w) in enumerate(ranked[:top_n], start=1)]
    _emit("\n".join(lines) + "\n", cfg.inputs.get("out"))


def cmd_synth(cfg, threads):
    (spec_path,) = _require(cfg, "spec")
    out = _out_dir(cfg)
    try:
        raw = json.loads(_existing(spec_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{spec_path}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise UsageError(f"{spec_path}: spec must be a JSON object")
    spec = SynthSpec.from_dict(raw)
    if cfg.seed is None:
        cfg.seed = spec.seed
    else:
        spec = replace(spec, seed=int(cfg.seed))
    corpus = generate_corpus(spec)
    save_corpus(corpus, spec, out)
    if corpus.labels is not None:
        corpus_to_dataset(corpus).save(out / "dataset.json")
    cfg.write(out)
    print(json.dumps({"documents": spec.n_docs, "terms": spec.n_terms,
                      "positive_rate": None if corpus.labels is None
                      else float(np.mean(corpus.labels))}))


COMMANDS = {
    "ingest": cmd_ingest,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "ttest": cmd_ttest,
    "topics": cmd_topics,
    "rank-words": cmd_rank_words,
    "synth": cmd_synth,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    threads = args.threads or default_threads()
    try:
        cfg = resolve_config(args)
        if args.command == "synth" and args.seed is None and args.config is None:
            # without --seed the spec's own seed stands
            cfg.seed = None
        COMMANDS[args.command](cfg, threads)
    except FileNotFoundError as exc:
        print(f"lonelytext: error: file not found: {exc.filename or exc.args[0]}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"lonelytext: numerical failure: {exc}", file=sys.stderr)
        return 3
    except LonelyTextError as exc:
        print(f"lonelytext: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"lonelytext: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
