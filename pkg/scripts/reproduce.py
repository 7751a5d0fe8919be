"""Train on a fresh synthetic corpus and report held-out and sample-set results.

    python3 scripts/reproduce.py [--seed 42] [--train 100] [--test 100]

Prints the held-out metrics table, the oracle-polarity ablation and the
verdicts on data/samples.txt (the last sample is expected to fail: it needs a
stated-shortfall reading the solver does not attempt).
"""
import argparse
import os
import sys
import tempfile
import time

from ganitha import corpus_io
from ganitha.pipeline import evaluate_dataset, gold_polarity_oracle, load_bundle, solve_problem

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from build_models import ROOT, build  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--train", type=int, default=100)
    ap.add_argument("--test", type=int, default=100)
    ap.add_argument("--trace", action="store_true", help="print traces for the sample set")
    args = ap.parse_args()

    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as out:
        build(out, args.seed, args.train, args.test)
        t_train = time.perf_counter() - t0
        bundle = load_bundle(out)
        corpus = os.path.join(out, "corpus")
        test = corpus_io.parse_problem_file(corpus_io.read_text(os.path.join(corpus, "test.txt")))
        gold = corpus_io.parse_gold_file(corpus_io.read_text(os.path.join(corpus, "test.gold.jsonl")))
        report = evaluate_dataset(bundle, test, gold)
        ablation = evaluate_dataset(bundle, test, gold, gold_polarity_oracle(gold))
        t_all = time.perf_counter() - t0

        print("== held-out synthetic test set ==")
        print("\n".join(report.format_table().splitlines()[:6]))
        print(f"answer accuracy with gold polarity: {ablation.answer_accuracy:.4f}")
        print(f"train {t_train:.1f}s, train+eval {t_all:.1f}s")

        print("\n== sample problems ==")
        samples = corpus_io.parse_problem_file(corpus_io.read_text(os.path.join(ROOT, "data", "samples.txt")))
        for k, rec in enumerate(samples, 1):
            answer, trace = solve_problem(bundle, rec.text)
            verdict = "ok" if answer == rec.gold_answer else "FAIL"
            print(f"Q{k}: gold {rec.gold_answer}, got {answer if answer is not None else '-'}  {verdict}")
            if args.trace:
                print(trace.format())


if __name__ == "__main__":
    main()
