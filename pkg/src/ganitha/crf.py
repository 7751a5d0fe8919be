"""Linear-chain CRF with CRF++-style feature templates.

A labeling ``l`` of an n-token sequence ``s`` is scored as::

    score(l | s) = sum_j sum_i  lambda_j * f_j(s, i, l_i, l_{i-1})

where every f_j is the indicator that template expansion at position i yields
feature string j. ``p(l | s)`` normalizes ``exp(score)`` over all labelings;
the partition function comes from the forward algorithm in log space.

Feature strings look like ``U00:<expanded>/<label>`` for unigram templates and
``B:<prev>/<label>`` (or ``B01:<expanded>/<prev>/<label>``) for bigram ones.
The previous label at position 0 is ``_BOS``.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .corpus_io import FeatureTemplate, LabeledSequence, ModelFile, format_float
from .errors import ConfigurationError, ContractError, DataError, NoFocusError, TrainingError
from .lang import DEFAULT_LANGUAGE, split_question_clause

BOS = "_BOS"
FOCUS_LABELS = ("QF-B", "QF-I", "O")


class FeatureIndex:
    """Dense bijection between feature strings and ids, in first-seen order."""

    def __init__(self, strings=()):
        self._ids = {}
        self.strings = []
        for s in strings:
            self.add(s)

    def add(self, s):
        fid = self._ids.get(s)
        if fid is None:
            fid = self._ids[s] = len(self.strings)
            self.strings.append(s)
        return fid

    def get(self, s):
        return self._ids.get(s)

    def __contains__(self, s):
        return s in self._ids

    def __len__(self):
        return len(self.strings)

    def __eq__(self, other):
        return isinstance(other, FeatureIndex) and self.strings == other.strings


@dataclass(eq=False)
class CRFModel:
    labels: tuple
    templates: tuple
    index: FeatureIndex
    weights: np.ndarray
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.templates = tuple(self.templates)
        self.weights = np.asarray(self.weights, dtype=float)
        if not self.labels:
            raise ConfigurationError("CRF needs at least one label")
        if self.weights.shape != (len(self.index),):
            raise ConfigurationError(
                f"{len(self.weights)} weights for {len(self.index)} features")

    def with_weights(self, weights):
        return CRFModel(self.labels, self.templates, self.index, np.array(weights, dtype=float))

    def weight_of(self, feature):
        fid = self.index.get(feature)
        return 0.0 if fid is None else float(self.weights[fid])

    def to_model_file(self):
        return ModelFile("crf", {
            "labels": [[lab] for lab in self.labels],
            "templates": [[t.text] for t in self.templates],
            "features": [[s, format_float(w)] for s, w in zip(self.index.strings, self.weights)],
        })

    @classmethod
    def from_model_file(cls, mf):
        feats = mf.section("features")
        return cls(tuple(r[0] for r in mf.section("labels")),
                   tuple(FeatureTemplate.parse(r[0]) for r in mf.section("templates")),
                   FeatureIndex(r[0] for r in feats),
                   np.array([float(r[1]) for r in feats]))

    def __eq__(self, other):
        if not isinstance(other, CRFModel):
            return NotImplemented
        return (self.labels == other.labels and self.templates == other.templates
                and self.index == other.index and np.array_equal(self.weights, other.weights))


# -- template expansion ------------------------------------------------------

def _cells(sequence):
    if isinstance(sequence, LabeledSequence):
        return [row.cells for row in sequence.rows]
    return [tuple(r) if isinstance(r, (tuple, list)) else (r,) for r in sequence]


def _sentinel(pos, n):
    return f"_B{pos}" if pos < 0 else f"_B+{pos - n + 1}"


def observation(template, cells, i):
    """The template's pattern with every %x[row,col] macro substituted at position i."""
    n = len(cells)
    parts = [template.literal_parts[0]]
    for (row, col), lit in zip(template.macros, template.literal_parts[1:]):
        pos = i + row
        if 0 <= pos < n:
            if col >= len(cells[pos]):
                raise ConfigurationError(
                    f"template {template.text!r} reads column {col} but rows have {len(cells[pos])}")
            parts.append(cells[pos][col])
        else:
            parts.append(_sentinel(pos, n))
        parts.append(lit)
    return "".join(parts)


def _feature(template, obs, label, prev):
    if not template.is_bigram:
        return f"{obs}/{label}"
    sep = "/" if ":" in obs else ":"
    return f"{obs}{sep}{prev}/{label}"


def expand_template(template, sequence, i, label, prev_label=None):
    cells = _cells(sequence)
    if not 0 <= i < len(cells):
        raise ContractError(f"position {i} outside sequence of length {len(cells)}")
    if i == 0:
        prev_label = BOS
    return _feature(template, observation(template, cells, i), label, prev_label)


def score_labeling(model, sequence, labeling):
    """Direct sum of the weights of every feature the labeling fires."""
    cells = _cells(sequence)
    labeling = list(labeling)
    if len(labeling) != len(cells):
        raise ContractError(f"labeling has {len(labeling)} labels for {len(cells)} tokens")
    total = 0.0
    for i, lab in enumerate(labeling):
        prev = labeling[i - 1] if i else BOS
        for t in model.templates:
            total += model.weight_of(_feature(t, observation(t, cells, i), lab, prev))
    return total


# -- compiled potentials -----------------------------------------------------

@dataclass
class _Compiled:
    n: int
    unary: tuple  # (pos, label, fid) arrays
    start: tuple  # (label, fid)
    trans: tuple  # (pos, prev, cur, fid)
    gold: np.ndarray | None = None


def _compile(labels, templates, index, cells, grow=False, gold=None):
    L = len(labels)
    lookup = index.add if grow else index.get
    u, s, tr = [], [], []
    for i in range(len(cells)):
        for t in templates:
            obs = observation(t, cells, i)
            if not t.is_bigram:
                for y, lab in enumerate(labels):
                    fid = lookup(_feature(t, obs, lab, None))
                    if fid is not None:
                        u.append((i, y, fid))
            elif i == 0:
                for y, lab in enumerate(labels):
                    fid = lookup(_feature(t, obs, lab, BOS))
                    if fid is not None:
                        s.append((y, fid))
            else:
                for yp in range(L):
                    for y in range(L):
                        fid = lookup(_feature(t, obs, labels[y], labels[yp]))
                        if fid is not None:
                            tr.append((i, yp, y, fid))

    def cols(rows, k):
        arr = np.array(rows, dtype=np.int64).reshape(-1, k)
        return tuple(arr[:, c] for c in range(k))

    return _Compiled(len(cells), cols(u, 3), cols(s, 2), cols(tr, 4),
                     None if gold is None else np.asarray(gold, dtype=np.int64))


class _Batch:
    """Sequences padded to a common length so forward-backward runs once for all.

    Padded positions carry identity transitions and zero unary scores, which
    leaves alpha and beta unchanged across them.
    """

    def __init__(self, compiled, L, m):
        self.B, self.L, self.m = len(compiled), L, m
        self.N = N = max(c.n for c in compiled)
        self.lengths = np.array([c.n for c in compiled])
        u_flat, u_fid, s_flat, s_fid, t_flat, t_fid = [], [], [], [], [], []
        for b, c in enumerate(compiled):
            pos, lab, fid = c.unary
            u_flat.append((b * N + pos) * L + lab)
            u_fid.append(fid)
            lab, fid = c.start
            s_flat.append(b * L + lab)
            s_fid.append(fid)
            pos, prev, cur, fid = c.trans
            t_flat.append(((b * N + pos) * L + prev) * L + cur)
            t_fid.append(fid)
        cat = lambda parts: np.concatenate(parts).astype(np.int64)  # noqa: E731
        self.u_flat, self.u_fid = cat(u_flat), cat(u_fid)
        self.s_flat, self.s_fid = cat(s_flat), cat(s_fid)
        self.t_flat, self.t_fid = cat(t_flat), cat(t_fid)
        pad = np.arange(N)[None, :] >= self.lengths[:, None]  # (B, N)
        eye = np.where(np.eye(L, dtype=bool), 0.0, -np.inf)
        self.t_pad = np.where(pad[:, :, None, None], eye[None, None], 0.0)
        self.observed = None
        if all(c.gold is not None for c in compiled):
            obs = np.zeros(m)
            for c in compiled:
                y = c.gold
                np.add.at(obs, c.unary[2][y[c.unary[0]] == c.unary[1]], 1.0)
                np.add.at(obs, c.start[1][c.start[0] == y[0]], 1.0)
                hit = (y[c.trans[0]] == c.trans[2]) & (y[c.trans[0] - 1] == c.trans[1])
                np.add.at(obs, c.trans[3][hit], 1.0)
            self.observed = obs

    def potentials(self, w):
        B, N, L = self.B, self.N, self.L
        U = np.bincount(self.u_flat, w[self.u_fid], B * N * L).reshape(B, N, L)
        S = np.bincount(self.s_flat, w[self.s_fid], B * L).reshape(B, L)
        T = np.bincount(self.t_flat, w[self.t_fid], B * N * L * L).reshape(B, N, L, L)
        return S, U, T + self.t_pad


def _forward(S, U, T):
    B, N, L = U.shape
    alpha = np.empty((B, N, L))
    alpha[:, 0] = S + U[:, 0]
    for i in range(1, N):
        alpha[:, i] = logsumexp(alpha[:, i - 1, :, None] + T[:, i], axis=1) + U[:, i]
    return alpha


def _backward(U, T):
    B, N, L = U.shape
    beta = np.zeros((B, N, L))
    for i in range(N - 2, -1, -1):
        beta[:, i] = logsumexp(T[:, i + 1] + (U[:, i + 1] + beta[:, i + 1])[:, None, :], axis=2)
    return beta


def _label_ids(model, labeling, where=""):
    ids = []
    for pos, lab in enumerate(labeling):
        try:
            ids.append(model.labels.index(lab))
        except ValueError:
            raise DataError(f"label {lab!r} at position {pos}{where} is not in {model.labels}") from None
    return ids


def _single(model, sequence):
    cells = _cells(sequence)
    if not cells:
        raise ContractError("empty sequence")
    c = _compile(model.labels, model.templates, model.index, cells)
    return _Batch([c], len(model.labels), len(model.index)).potentials(model.weights)


def log_partition(model, sequence):
    S, U, T = _single(model, sequence)
    return float(logsumexp(_forward(S, U, T)[0, -1]))


def probability(model, sequence, labeling):
    return math.exp(score_labeling(model, sequence, labeling) - log_partition(model, sequence))


def viterbi_decode(model, sequence):
    if not _cells(sequence):
        raise ContractError("cannot decode an empty sequence")
    S, U, T = (a[0] for a in _single(model, sequence))
    n, L = U.shape
    delta = S + U[0]
    back = np.zeros((n, L), dtype=np.int64)
    for i in range(1, n):
        cand = delta[:, None] + T[i]
        back[i] = np.argmax(cand, axis=0)  # first maximum = earliest label
        delta = cand[back[i], np.arange(L)] + U[i]
    path = [int(np.argmax(delta))]
    for i in range(n - 1, 0, -1):
        path.append(int(back[i][path[-1]]))
    return [model.labels[y] for y in reversed(path)]


def exhaustive_argmax(model, sequence):
    """Brute-force argmax over every labeling; first in product order wins ties."""
    n = len(_cells(sequence))
    best, best_score = None, -math.inf
    for labeling in itertools.product(model.labels, repeat=n):
        sc = score_labeling(model, sequence, labeling)
        if sc > best_score:
            best, best_score = list(labeling), sc
    return best


# -- likelihood and training -------------------------------------------------

def _objective(w, batch, l2_sigma):
    # overflow shows up as a non-finite objective, which train_crf reports
    with np.errstate(over="ignore", invalid="ignore"):
        return _objective_unchecked(w, batch, l2_sigma)


def _objective_unchecked(w, batch, l2_sigma):
    S, U, T = batch.potentials(w)
    alpha = _forward(S, U, T)
    beta = _backward(U, T)
    logz = logsumexp(alpha[:, -1], axis=1)  # (B,)
    ll = float(w @ batch.observed - logz.sum())

    marg = np.exp(alpha + beta - logz[:, None, None])
    expected = np.bincount(batch.u_fid, marg.reshape(-1)[batch.u_flat], batch.m)
    expected += np.bincount(batch.s_fid, marg[:, 0].reshape(-1)[batch.s_flat], batch.m)
    if batch.N > 1:
        pair = np.zeros(T.shape)
        pair[:, 1:] = np.exp(alpha[:, :-1, :, None] + T[:, 1:]
                             + (U[:, 1:] + beta[:, 1:])[:, :, None, :] - logz[:, None, None, None])
        expected += np.bincount(batch.t_fid, pair.reshape(-1)[batch.t_flat], batch.m)
    grad = batch.observed - expected
    if math.isfinite(l2_sigma):
        ll -= float(w @ w) / (2 * l2_sigma**2)
        grad -= w / l2_sigma**2
    return ll, grad


def _batch_data(model, data):
    compiled = []
    for k, seq in enumerate(data):
        gold = _label_ids(model, seq.labels, f" of sequence {k}")
        compiled.append(_compile(model.labels, model.templates, model.index, _cells(seq), gold=gold))
    return _Batch(compiled, len(model.labels), len(model.index))


def log_likelihood_and_gradient(model, data, l2_sigma=1.0):
    """Regularized conditional log-likelihood and its gradient.

    ``l2_sigma=math.inf`` drops the Gaussian prior.
    """
    data = list(data)
    if not data:
        raise DataError("no training sequences")
    if not l2_sigma > 0:
        raise ConfigurationError("l2_sigma must be positive")
    return _objective(model.weights, _batch_data(model, data), l2_sigma)


@dataclass(frozen=True)
class CRFConfig:
    iterations: int = 100
    step_size: float | None = None  # None selects backtracking line search
    l2_sigma: float = 1.0
    seed: int = 42
    initial_step: float = 1.0
    tolerance: float = 1e-10


def build_index(data, templates, labels):
    """Every feature any label (unigram) or label pair (bigram) could fire on the data."""
    index = FeatureIndex()
    for seq in data:
        _compile(tuple(labels), tuple(templates), index, _cells(seq), grow=True)
    return index


def train_crf(data, templates, labels=None, config=CRFConfig(), log=None):
    """Fit weights by full-batch gradient ascent on the regularized likelihood.

    With ``config.step_size`` unset every step is chosen by backtracking so the
    objective never decreases. Weights start at zero, so the result is a
    deterministic function of the data; ``seed`` is recorded for provenance.
    """
    data = list(data)
    if not data:
        raise TrainingError("cannot train a CRF without data")
    if labels is None:
        labels = []
        for seq in data:
            labels.extend(lab for lab in seq.labels if lab not in labels)
    labels, templates = tuple(labels), tuple(templates)
    index = build_index(data, templates, labels)
    model = CRFModel(labels, templates, index, np.zeros(len(index)))
    batch = _batch_data(model, data)

    w = model.weights
    f, g = _objective(w, batch, config.l2_sigma)
    history = [f]
    step = config.initial_step
    for it in range(config.iterations):
        gg = float(g @ g)
        if gg <= config.tolerance:
            break
        if config.step_size is not None:
            w = w + config.step_size * g
            f, g = _objective(w, batch, config.l2_sigma)
            if not (math.isfinite(f) and np.all(np.isfinite(g))):
                raise TrainingError(
                    f"objective diverged at iteration {it}; use a smaller step size")
        else:
            while True:
                w_new = w + step * g
                f_new, g_new = _objective(w_new, batch, config.l2_sigma)
                if math.isfinite(f_new) and f_new >= f + 1e-4 * step * gg:
                    break
                step *= 0.5
                if step < 1e-14:
                    w_new = None
                    break
            if w_new is None:
                break
            w, f, g = w_new, f_new, g_new
            step *= 2.0
        history.append(f)
        if log is not None:
            log(it, f)
    model = model.with_weights(w)
    model.history = history
    return model


# -- question identification ------------------------------------------------

@dataclass(frozen=True)
class QuestionFocus:
    head: str
    span: tuple  # [start, end) token indices
    attributes: frozenset = frozenset()
    totality: bool = False
    source: str = "crf"


def _is_candidate(tok, lang):
    return (tok.tag in ("NN", "ADJ") and tok.surface not in lang.count_nouns
            and tok.surface not in lang.focus_ignored)


def _focus_from_span(tokens, start, end, lang, totality, source):
    cands = [i for i in range(start, end) if _is_candidate(tokens[i], lang)]
    nouns = [i for i in cands if tokens[i].tag == "NN"]
    if not cands:
        return None
    h = (nouns or cands)[-1]
    attrs = frozenset(tokens[i].surface for i in range(start, h)
                      if tokens[i].tag == "ADJ" and _is_candidate(tokens[i], lang))
    return QuestionFocus(tokens[h].surface, (start, end), attrs, totality, source)


def identify_question(model, sentence, lang=DEFAULT_LANGUAGE):
    """Find the entity a question sentence asks about.

    ``sentence`` is a tagged question sentence. The CRF labels it with
    QF-B/QF-I/O over (surface, tag) columns; the first QF run is the focus
    span. Without one, the last noun or adjective of the interrogative
    clause before the question word is used.
    """
    if not sentence.is_question:
        raise ContractError("identify_question needs a question sentence")
    tokens = list(sentence.tokens)
    if not tokens:
        raise NoFocusError("empty question")
    _, rest = split_question_clause(tokens)
    clause_start = len(tokens) - len(rest)
    totality = any(t.surface in lang.totality_words for t in rest)

    labels = viterbi_decode(model, [(t.surface, t.tag) for t in tokens])
    qf = [i for i, lab in enumerate(labels) if lab.startswith("QF")]
    if qf:
        start = end = qf[0]
        end += 1
        while end < len(labels) and labels[end] == "QF-I":
            end += 1
        focus = _focus_from_span(tokens, start, end, lang, totality, "crf")
        if focus is not None:
            return focus

    stop = next((i for i in range(clause_start, len(tokens))
                 if tokens[i].surface in lang.interrogatives or tokens[i].tag == "QW"), len(tokens))
    for h in range(stop - 1, clause_start - 1, -1):
        if _is_candidate(tokens[h], lang):
            start = h
            while start > clause_start and tokens[start - 1].tag == "ADJ":
                start -= 1
            return _focus_from_span(tokens, start, h + 1, lang, totality, "fallback")
    raise NoFocusError("no focus entity in the question")
