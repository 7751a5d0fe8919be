"""Acceptance criteria, one check per criterion at its stated tolerance.

Run under pytest (each criterion is a test and prints a PASS/FAIL line) or
directly with ``python3 tests/test_acceptance.py`` for just the summary.
"""
import atexit
import itertools
import math
import os
import shutil
import sys
import tempfile
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from ganitha import cli, corpus_io  # noqa: E402
from ganitha.crf import (CRFModel, build_index, log_likelihood_and_gradient, log_partition,  # noqa: E402
                         score_labeling, viterbi_decode)
from ganitha.nb_tagger import TagSet, classify_word, posterior, train_nb  # noqa: E402
from ganitha.pipeline import evaluate_dataset, load_bundle, solve_problem  # noqa: E402
from ganitha.polarity import (PolarityConfig, PolarityModel, accuracy, loss_and_gradients,  # noqa: E402
                              train_polarity_vectors)

import helpers  # noqa: E402
import test_roundtrip  # noqa: E402
from conftest import MODELS, SAMPLES  # noqa: E402


def _line(number, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"


# 1 ------------------------------------------------------------------------

def crf_oracle_equivalence(count=200, seed=2024):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    mismatches, worst = 0, 0.0
    for _ in range(count):
        n, L = int(rng.integers(1, 7)), int(rng.integers(1, 5))
        model, seq = helpers.random_crf(rng, n, L, scale=1.5)
        best, best_score, scores = None, -math.inf, []
        for lab in itertools.product(model.labels, repeat=n):
            s = score_labeling(model, seq, lab)
            scores.append(s)
            if s > best_score:
                best, best_score = list(lab), s
        mismatches += viterbi_decode(model, seq) != best
        # probability(l) = exp(score(l) - log Z); log Z computed once per model
        log_z = log_partition(model, seq)
        total = math.fsum(math.exp(s - log_z) for s in scores)
        worst = max(worst, abs(total - 1.0))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and worst <= 1e-9 and elapsed < 10.0
    return ok, (f"{count} models, {mismatches} Viterbi mismatches, max |sum p - 1| = {worst:.1e}, "
                f"{elapsed:.1f}s")


# 2 ------------------------------------------------------------------------

def crf_gradient_check(seed=7, h=1e-5):
    rng = np.random.default_rng(seed)
    data = []
    for _ in range(4):
        n = int(rng.integers(2, 5))
        data.append(helpers.labeled([helpers.WORDS[rng.integers(3)] for _ in range(n)],
                                    ["NN"] * n, [["A", "B", "C"][rng.integers(3)] for _ in range(n)]))
    templates = corpus_io.parse_template_file("U00:%x[0,0]\nU01:%x[-1,0]\nB\n")
    index = build_index(data, templates, ("A", "B", "C"))
    model = CRFModel(("A", "B", "C"), templates, index, rng.normal(0, 0.5, len(index)))
    _, grad = log_likelihood_and_gradient(model, data, 1.0)
    f = lambda w: log_likelihood_and_gradient(model.with_weights(w), data, 1.0)[0]  # noqa: E731
    fd = helpers.central_difference(f, model.weights, h)
    err = helpers.relative_error(grad, fd, floor=1e-6).max()
    ok = len(index) <= 50 and err <= 1e-4
    return ok, f"{len(index)} features, max componentwise relative error {err:.1e}"


# 3 ------------------------------------------------------------------------

def polarity_gradient_and_xor(seed=3, h=1e-5):
    rng = np.random.default_rng(seed)
    D, H = 8, 3
    model = helpers.random_polarity(rng, D, H)
    X = rng.normal(size=(10, D))
    y = rng.integers(0, 2, 10).astype(float)
    _, g = loss_and_gradients(model, X, y)
    flat = np.concatenate([model.w1.ravel(), model.b1, model.w2, [model.b2]])

    def loss_at(v):
        m = PolarityModel(v[:H * D].reshape(H, D), v[H * D:H * D + H], v[H * D + H:-1], v[-1])
        return loss_and_gradients(m, X, y)[0]

    fd = helpers.central_difference(loss_at, flat, h)
    analytic = np.concatenate([g[0].ravel(), g[1], g[2], [g[3]]])
    err = helpers.relative_error(analytic, fd, floor=1e-7).max()

    Xx = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    yx = np.array([0, 1, 1, 0], dtype=float)
    xor = train_polarity_vectors(Xx, yx, PolarityConfig(hidden=4, epochs=5000, learning_rate=2.0,
                                                        seed=0, input_dim=2))
    acc = accuracy(xor, Xx, yx)
    return err <= 1e-4 and acc >= 0.95, f"max relative error {err:.1e}, XOR accuracy {acc:.2f}"


# 4 ------------------------------------------------------------------------

def nb_oracle():
    tags = TagSet(("NN", "VB", "ADJ", "PRO", "PP", "CD"))
    data = helpers.TOY
    n_tokens = sum(len(ws) for ws, _ in data)
    model = train_nb([helpers.labeled(ws, ws, ts) for ws, ts in data], 1.0, tags)
    queries = [("අඹ", "ලෙ"), ("අඹ", "මම"), ("අඹ", None), ("ගෙඩි", "අඹ"), ("කෑවා", "අඹ"), ("ඇත", "ගෙඩි")]
    agree, worst = 0, 0.0
    for word, prev in queries:
        expect = helpers.oracle_posterior(data, word, prev, 1.0, tags.tags)
        best = max(tags.tags, key=lambda t: (expect[t], -tags.tags.index(t)))
        agree += classify_word(model, word, prev).tag == best
        probs = posterior(model, word, prev)
        worst = max(worst, abs(math.fsum(probs) - 1.0),
                    max(abs(p - expect[t]) for t, p in zip(tags.tags, probs)))
    ok = n_tokens == 10 and agree == len(queries) and worst <= 1e-9
    return ok, f"{agree}/{len(queries)} argmax agree on a {n_tokens}-token corpus, max deviation {worst:.1e}"


# 5, 6 --------------------------------------------------------------------

def _samples():
    return corpus_io.parse_problem_file(corpus_io.read_text(SAMPLES))


def worked_example():
    bundle = load_bundle(MODELS)
    answer, trace = solve_problem(bundle, _samples()[1].text)
    head = trace.focus.head if trace.focus else None
    terms = [(t.sign, t.value) for t in trace.equation.terms] if trace.equation else []
    ok = answer == 32 and head == "පිරිමි" and terms == [(1, 20), (1, 12)]
    return ok, f"answer {answer}, focus {head}, terms {terms}"


def sample_set():
    bundle = load_bundle(MODELS)
    got = []
    for rec in _samples():
        answer, _ = solve_problem(bundle, rec.text)
        got.append((rec.gold_answer, answer))
    required = sum(g == a for g, a in got[:4])
    q5 = "ok" if got[4][0] == got[4][1] else f"fails (got {got[4][1]}, allowed)"
    detail = ", ".join(f"Q{k + 1} {a}" for k, (_, a) in enumerate(got[:4]))
    return required == 4, f"{required}/4 required ({detail}); Q5 {q5}"


# 7, 8 --------------------------------------------------------------------

_WORK = {}


def _workdir():
    """gen-corpus + the three trainers, run once and shared by criteria 7 and 8."""
    if "dir" not in _WORK:
        tmp = tempfile.mkdtemp(prefix="ganitha-acceptance-")
        atexit.register(shutil.rmtree, tmp, True)
        t0 = time.perf_counter()
        runs = [
            ["gen-corpus", "--train", "100", "--test", "100", "--seed", "42", "--out", tmp],
            ["train-tagger", "--data", f"{tmp}/tags.tsv", "--out", f"{tmp}/nb.model"],
            ["train-crf", "--data", f"{tmp}/crf.tsv", "--template", f"{tmp}/template.txt",
             "--out", f"{tmp}/crf.model", "--l2", "1.0", "--iters", "100", "--seed", "42"],
            ["train-polarity", "--data", f"{tmp}/polarity.tsv", "--tagger", f"{tmp}/nb.model",
             "--out", f"{tmp}/polarity.model", "--seed", "42"],
        ]
        for argv in runs:
            assert cli.main(argv) == 0, argv
        _WORK.update(dir=tmp, runs=runs, train_seconds=time.perf_counter() - t0)
    return _WORK


def synthetic_reproduction():
    work = _workdir()
    d = work["dir"]
    t0 = time.perf_counter()
    report = evaluate_dataset(load_bundle(d),
                              corpus_io.parse_problem_file(corpus_io.read_text(f"{d}/test.txt")),
                              corpus_io.parse_gold_file(corpus_io.read_text(f"{d}/test.gold.jsonl")))
    total = work["train_seconds"] + time.perf_counter() - t0
    ok = (report.answer_accuracy >= 0.76 and report.token_tag_accuracy >= 0.74
          and report.polarity_accuracy >= 0.72 and total < 300)
    return ok, (f"answer {report.answer_accuracy:.2f} (>= 0.76), tags {report.token_tag_accuracy:.4f} "
                f"(>= 0.74), polarity {report.polarity_accuracy:.4f} (>= 0.72), train+eval {total:.1f}s")


def determinism():
    work = _workdir()
    d = work["dir"]
    identical = []
    for argv in work["runs"][1:]:
        out = argv[argv.index("--out") + 1]
        again = out + ".again"
        argv2 = list(argv)
        argv2[argv2.index("--out") + 1] = again
        assert cli.main(argv2) == 0
        with open(out, "rb") as a, open(again, "rb") as b:
            identical.append(a.read() == b.read())
    bundle = load_bundle(d)
    traces_equal = all(
        solve_problem(bundle, r.text)[1].format() == solve_problem(bundle, r.text)[1].format()
        for r in _samples())
    ok = all(identical) and traces_equal
    return ok, (f"train-tagger/crf/polarity byte-identical: {identical}, "
                f"solve traces identical: {traces_equal}")


# 9 ------------------------------------------------------------------------

ROUND_TRIPS = [test_roundtrip.test_sequence_file_fixpoint, test_roundtrip.test_template_file_fixpoint,
               test_roundtrip.test_problem_file_fixpoint, test_roundtrip.test_polarity_file_fixpoint,
               test_roundtrip.test_lexicon_file_fixpoint, test_roundtrip.test_gold_file_fixpoint,
               test_roundtrip.test_model_file_fixpoint, test_roundtrip.test_polarity_model_bits_survive,
               test_roundtrip.test_language_config_fixpoint]


def round_trip():
    failed = []
    for prop in ROUND_TRIPS:
        try:
            prop()
        except Exception as exc:  # a falsifying example
            failed.append(f"{prop.__name__}: {type(exc).__name__}")
    ok = not failed
    return ok, f"{len(ROUND_TRIPS)} formats x {test_roundtrip.N} cases" + (f"; failed {failed}" if failed else "")


CRITERIA = [
    (1, "CRF oracle equivalence", crf_oracle_equivalence),
    (2, "CRF gradient check", crf_gradient_check),
    (3, "Polarity gradient check and XOR", polarity_gradient_and_xor),
    (4, "NB oracle", nb_oracle),
    (5, "Worked bus-stop example", worked_example),
    (6, "Sample question set", sample_set),
    (7, "Synthetic-corpus reproduction", synthetic_reproduction),
    (8, "Determinism", determinism),
    (9, "Round trip", round_trip),
]


@pytest.mark.parametrize("number,title,check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for number, title, check in CRITERIA:
        ok, detail = check()
        results.append(ok)
        print(_line(number, title, ok, detail), flush=True)
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
