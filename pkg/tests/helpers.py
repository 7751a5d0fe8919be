"""Shared builders for randomized models and brute-force oracles."""
import itertools
import math
from collections import Counter

import numpy as np
import regex

from ganitha.corpus_io import LabeledSequence, parse_template_file
from ganitha.crf import CRFModel, build_index, score_labeling
from ganitha.polarity import PolarityModel

SMALL_TEMPLATES = parse_template_file("U00:%x[0,0]\nU01:%x[-1,0]\nU02:%x[0,0]/%x[0,1]\nB\nB01:%x[0,1]\n")
WORDS = ["අ", "බ", "ක", "ම", "ල"]
COLS = ["NN", "VB", "PP"]


def random_sequence(rng, n):
    return [(WORDS[rng.integers(len(WORDS))], COLS[rng.integers(len(COLS))]) for _ in range(n)]


def random_crf(rng, n, n_labels, scale=1.0, templates=SMALL_TEMPLATES):
    """A model whose index covers every feature the sequence can fire, random weights."""
    labels = tuple(f"L{k}" for k in range(n_labels))
    seq = random_sequence(rng, n)
    index = build_index([seq], templates, labels)
    return CRFModel(labels, templates, index, rng.normal(0, scale, len(index))), seq


def enumerate_log_z(model, seq):
    scores = [score_labeling(model, seq, lab)
              for lab in itertools.product(model.labels, repeat=len(seq))]
    top = max(scores)
    return top + math.log(math.fsum(math.exp(s - top) for s in scores))


def labeled(words, tags, labels):
    return LabeledSequence.from_columns(labels, words, tags)


def central_difference(f, x, h):
    g = np.empty_like(x)
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def relative_error(a, b, floor=1e-8):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a - b) / np.maximum(floor, np.maximum(np.abs(a), np.abs(b)))


def random_polarity(rng, D, H):
    return PolarityModel(rng.normal(0, 0.5, (H, D)), rng.normal(0, 0.5, H),
                         rng.normal(0, 0.5, H), rng.normal(0, 0.5))


TOY = [  # ten tokens: "අඹ" 3x ADJ before "ගෙඩි", 1x NN elsewhere
    (["අඹ", "ගෙඩි", "ඇත"], ["ADJ", "NN", "VB"]),
    (["අඹ", "ගෙඩි"], ["ADJ", "NN"]),
    (["අඹ", "ගෙඩි"], ["ADJ", "NN"]),
    (["මම", "අඹ", "කෑවා"], ["PRO", "NN", "VB"]),
]


def _clusters(word):
    return regex.findall(r"\X", word)


def oracle_posterior(data, word, prev, alpha, tags):
    """Smoothed Bayes rule written out from raw counts, independent of NBModel."""
    prior = Counter(t for _, ts in data for t in ts)
    n = sum(prior.values())
    occurrences = []  # (tag, {kind: value})
    for ws, ts in data:
        for i, (w, t) in enumerate(zip(ws, ts)):
            cl = _clusters(w)
            f = {"w": w, "p": ws[i - 1] if i else "_BOS"}
            for k in range(1, min(3, len(cl)) + 1):
                f[f"s{k}"] = "".join(cl[-k:])
            occurrences.append((t, f))
    cl = _clusters(word)
    query = {"w": word, "p": prev or "_BOS"}
    for k in range(1, min(3, len(cl)) + 1):
        query[f"s{k}"] = "".join(cl[-k:])
    scores = {}
    for tag in tags:
        if not prior[tag]:
            scores[tag] = 0.0
            continue
        p = prior[tag] / n
        for kind, value in query.items():
            vocab = {f[kind] for _, f in occurrences if kind in f}
            count = sum(1 for t, f in occurrences if t == tag and f.get(kind) == value)
            total = sum(1 for t, f in occurrences if t == tag and kind in f)
            p *= (count + alpha) / (total + alpha * (len(vocab) + 1))
        scores[tag] = p
    z = sum(scores.values())
    return {t: s / z for t, s in scores.items()}
