"""Regenerate the shipped seed models in models/ from the synthetic corpus.

    python3 scripts/build_models.py [--out models] [--seed 42]

Runs the same CLI steps a user would: gen-corpus, then the three trainers.
The corpus files are written next to the models so the directory is a
self-contained bundle (verbs.tsv and pipeline.cfg come from gen-corpus).
"""
import argparse
import os
import sys

from ganitha.cli import main as ganitha

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run(*argv):
    status = ganitha(list(argv))
    if status:
        sys.exit(f"step failed ({status}): ganitha {' '.join(argv)}")


def build(out, seed=42, train=100, test=100):
    corpus = os.path.join(out, "corpus")
    run("gen-corpus", "--train", str(train), "--test", str(test), "--seed", str(seed), "--out", corpus)
    run("train-tagger", "--data", os.path.join(corpus, "tags.tsv"),
        "--config", os.path.join(corpus, "pipeline.cfg"), "--out", os.path.join(out, "nb.model"))
    run("train-crf", "--data", os.path.join(corpus, "crf.tsv"),
        "--template", os.path.join(corpus, "template.txt"), "--seed", str(seed),
        "--out", os.path.join(out, "crf.model"))
    run("train-polarity", "--data", os.path.join(corpus, "polarity.tsv"),
        "--tagger", os.path.join(out, "nb.model"), "--seed", str(seed),
        "--out", os.path.join(out, "polarity.model"))
    for name in ("verbs.tsv", "pipeline.cfg"):
        with open(os.path.join(corpus, name), encoding="utf-8") as src, \
                open(os.path.join(out, name), "w", encoding="utf-8", newline="\n") as dst:
            dst.write(src.read())
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(ROOT, "models"))
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    build(args.out, args.seed)
