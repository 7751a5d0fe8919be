"""Command line entry point: ``ganitha <subcommand> ...``.

Exit status is 0 on success, 1 when input data or model files are bad and 2
for usage errors (argparse's own convention).
"""
import argparse
import math
import os
import sys

from . import corpus_io, synth
from .crf import CRFConfig, train_crf
from .errors import GanithaError
from .lang import LanguageConfig
from .nb_tagger import TagSet, train_nb
from .pipeline import (DEFAULT_TEMPLATE, evaluate_dataset, gold_polarity_oracle, load_bundle,
                       solve_problem, train_polarity_from_items)
from .polarity import PolarityConfig

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


def _read(path):
    if path == "-":
        return sys.stdin.buffer.read().decode("utf-8")
    return corpus_io.read_text(path)


def _positive(kind):
    def conv(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _sigma(text):
    if text.lower() in ("inf", "none"):
        return math.inf
    return _positive(float)(text)


# -- subcommands -------------------------------------------------------------

def cmd_train_tagger(args):
    data = corpus_io.parse_sequence_file(_read(args.data))
    tagset = None
    if args.config:
        tagset = TagSet(LanguageConfig.from_text(_read(args.config)).tags)
    model = train_nb(data, args.alpha, tagset)
    corpus_io.save_model(model, args.out)
    print(f"tagger: {len(data)} sentences, {len(model.vocabulary)} words -> {args.out}")


def cmd_train_crf(args):
    data = corpus_io.parse_sequence_file(_read(args.data))
    templates = corpus_io.parse_template_file(
        _read(args.template) if args.template else DEFAULT_TEMPLATE)
    config = CRFConfig(iterations=args.iters, step_size=args.step, l2_sigma=args.l2, seed=args.seed)
    log = None
    if args.verbose:
        def log(it, f):
            print(f"iter {it}\tobjective {f:.6f}", file=sys.stderr)
    model = train_crf(data, templates, None, config, log)
    corpus_io.save_model(model, args.out)
    print(f"crf: {len(data)} sequences, {len(model.index)} features, "
          f"objective {model.history[-1]:.6f} -> {args.out}")


def cmd_train_polarity(args):
    items = corpus_io.parse_polarity_file(_read(args.data))
    nb = corpus_io.load_model(args.tagger, "nb")
    config = PolarityConfig(hidden=args.hidden, epochs=args.epochs,
                            learning_rate=args.lr, seed=args.seed)
    model = train_polarity_from_items(nb, items, config)
    corpus_io.save_model(model, args.out)
    print(f"polarity: {len(items)} sentences, final loss {model.final_loss:.6f} -> {args.out}")


def cmd_gen_corpus(args):
    corpus = synth.generate(args.train, args.test, args.seed)
    os.makedirs(args.out, exist_ok=True)
    j = lambda name: os.path.join(args.out, name)  # noqa: E731
    files = {
        "train.txt": corpus_io.serialize_problems(p.record() for p in corpus.train),
        "test.txt": corpus_io.serialize_problems(p.record() for p in corpus.test),
        "train.gold.jsonl": corpus_io.serialize_gold(p.to_json() for p in corpus.train),
        "test.gold.jsonl": corpus_io.serialize_gold(p.to_json() for p in corpus.test),
        "tags.tsv": corpus_io.serialize_sequences(synth.tag_sequences(corpus.train)),
        "crf.tsv": corpus_io.serialize_sequences(synth.crf_sequences(corpus.train)),
        "polarity.tsv": corpus_io.serialize_polarity(synth.polarity_items(corpus.train)),
        "verbs.tsv": corpus_io.serialize_lexicon(synth.verb_lexicon()),
        "template.txt": DEFAULT_TEMPLATE,
        "pipeline.cfg": LanguageConfig().to_text(),
    }
    for name, text in files.items():
        corpus_io.write_text(j(name), text)
    print(f"corpus: {args.train} train / {args.test} test problems (seed {args.seed}) -> {args.out}")


def cmd_solve(args):
    bundle = load_bundle(args.models)
    if args.problems:
        texts = [r.text for r in corpus_io.parse_problem_file(_read(args.problems))]
    else:
        text = _read("-").strip()
        if not text:
            raise GanithaError("no problem text on standard input")
        texts = [text]
    for text in texts:
        answer, trace = solve_problem(bundle, text)
        print(answer if answer is not None else f"unanswerable: {trace.reason}")
        if args.trace:
            sys.stdout.write(trace.format())


def cmd_eval(args):
    bundle = load_bundle(args.models)
    problems = corpus_io.parse_problem_file(_read(args.dataset))
    gold = corpus_io.parse_gold_file(_read(args.gold)) if args.gold else None
    oracle = None
    if args.oracle_polarity:
        if gold is None:
            raise GanithaError("--oracle-polarity needs --gold")
        oracle = gold_polarity_oracle(gold)
    report = evaluate_dataset(bundle, problems, gold, oracle)
    sys.stdout.write(report.format_machine() if args.machine else report.format_table())


# -- argument parsing --------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="ganitha",
                                description="Sinhala addition/subtraction word-problem solver")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    t = sub.add_parser("train-tagger", help="train the naive Bayes word-category tagger")
    t.add_argument("--data", required=True, help="TSV, one 'word TAB tag' row per token")
    t.add_argument("--out", required=True)
    t.add_argument("--alpha", type=_positive(float), default=1.0)
    t.add_argument("--config", help="pipeline.cfg whose tag list fixes the tag set")
    t.set_defaults(func=cmd_train_tagger)

    c = sub.add_parser("train-crf", help="train the question-focus CRF")
    c.add_argument("--data", required=True, help="TSV, 'word TAB tag TAB label' rows")
    c.add_argument("--template", help="template file (default: the built-in set)")
    c.add_argument("--out", required=True)
    c.add_argument("--l2", type=_sigma, default=1.0, help="prior sigma; 'inf' disables it")
    c.add_argument("--iters", type=int, default=100)
    c.add_argument("--step", type=_positive(float), default=None,
                   help="fixed step size (default: backtracking line search)")
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--verbose", action="store_true")
    c.set_defaults(func=cmd_train_crf)

    q = sub.add_parser("train-polarity", help="train the sentence polarity network")
    q.add_argument("--data", required=True, help="'sentence TAB POSITIVE|NEGATIVE' lines")
    q.add_argument("--tagger", required=True, help="tagger model used to tag the sentences")
    q.add_argument("--out", required=True)
    q.add_argument("--hidden", type=_positive(int), default=16)
    q.add_argument("--epochs", type=int, default=2000)
    q.add_argument("--lr", type=_positive(float), default=0.05)
    q.add_argument("--seed", type=int, default=42)
    q.set_defaults(func=cmd_train_polarity)

    g = sub.add_parser("gen-corpus", help="write a seeded synthetic training/test corpus")
    g.add_argument("--train", type=int, default=100)
    g.add_argument("--test", type=int, default=100)
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--out", default="corpus")
    g.set_defaults(func=cmd_gen_corpus)

    s = sub.add_parser("solve", help="solve a problem read from standard input")
    s.add_argument("--models", required=True)
    s.add_argument("--trace", action="store_true")
    s.add_argument("--problems", help="problem file to solve line by line instead of stdin")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eval", help="evaluate on a problem file with gold answers")
    e.add_argument("--models", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--gold", help="JSON-lines stage annotations for per-stage metrics")
    e.add_argument("--machine", action="store_true", help="key TAB value output")
    e.add_argument("--oracle-polarity", action="store_true",
                   help="replace the polarity classifier with the gold labels")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (GanithaError, ValueError, OSError, UnicodeDecodeError) as exc:
        print(f"ganitha {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
