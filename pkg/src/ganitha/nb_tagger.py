"""Naive Bayes word-category tagger.

Each token is described by five feature types: its surface form (``w``), the
previous surface form (``p``, ``_BOS`` at sentence start) and its last one,
two and three grapheme clusters (``s1``..``s3``; only the lengths the word
actually has). For a tag t and a feature of type k with value v::

    P(v | t) = (count(t, k=v) + alpha) / (count(t, k) + alpha * (V_k + 1))

where ``count(t, k)`` is the number of type-k features seen under t and
``V_k`` the number of distinct type-k values in training (the +1 reserves
mass for unseen values). The prior is the unsmoothed tag frequency.

Numerals are tagged CD unconditionally. An unknown surface form borrows the
surface feature of its nearest vocabulary word (grapheme edit distance).
"""
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .corpus_io import ModelFile, format_float
from .errors import ConfigurationError, NoModelError, TrainingError
from .lang import DEFAULT_TAGS
from .segmenter import graphemes, parse_numeral

BOS = "_BOS"
REQUIRED_TAGS = ("NN", "VB", "ADJ", "PRO", "PP", "CD")


@dataclass(frozen=True)
class TagSet:
    tags: tuple = DEFAULT_TAGS

    def __post_init__(self):
        tags = tuple(self.tags)
        if len(set(tags)) != len(tags):
            raise ConfigurationError("tag names must be unique")
        missing = [t for t in REQUIRED_TAGS if t not in tags]
        if missing:
            raise ConfigurationError(f"tag set lacks required tags {missing}")
        object.__setattr__(self, "tags", tags)

    def __iter__(self):
        return iter(self.tags)

    def __len__(self):
        return len(self.tags)


@dataclass(frozen=True)
class TaggedToken:
    surface: str
    tag: str
    posterior: float = 1.0


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple
    terminator: str | None = None
    is_question: bool = False

    @property
    def surfaces(self):
        return [t.surface for t in self.tokens]

    @property
    def tags(self):
        return [t.tag for t in self.tokens]

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self):
        return len(self.tokens)


def token_features(token, prev):
    feats = [("w", token), ("p", prev if prev is not None else BOS)]
    clusters = graphemes(token)
    for k in range(1, min(3, len(clusters)) + 1):
        feats.append((f"s{k}", "".join(clusters[-k:])))
    return feats


def _feature_key(kind, value):
    return f"{kind}={value}"


@lru_cache(maxsize=65536)
def _clusters(word):
    return tuple(graphemes(word))


def grapheme_edit_distance(a, b):
    a, b = _clusters(a), _clusters(b)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def common_suffix_clusters(a, b):
    a, b = _clusters(a), _clusters(b)
    n = 0
    while n < min(len(a), len(b)) and a[-1 - n] == b[-1 - n]:
        n += 1
    return n


@dataclass(eq=False)
class NBModel:
    tagset: TagSet
    prior_counts: dict
    emission_counts: dict  # (tag, "kind=value") -> int
    vocabulary: frozenset
    smoothing_alpha: float = 1.0
    _similar_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.smoothing_alpha > 0:
            raise ConfigurationError("smoothing_alpha must be positive")

    @cached_property
    def _type_totals(self):
        totals = Counter()
        for (tag, key), c in self.emission_counts.items():
            totals[tag, key.split("=", 1)[0]] += c
        return totals

    @cached_property
    def _type_sizes(self):
        values = defaultdict(set)
        for _, key in self.emission_counts:
            kind, value = key.split("=", 1)
            values[kind].add(value)
        return {kind: len(v) for kind, v in values.items()}

    @cached_property
    def _n_tokens(self):
        return sum(self.prior_counts.values())

    def log_scores(self, features):
        """Unnormalized log P(tag) + sum log P(feature | tag), one per tag in order."""
        alpha = self.smoothing_alpha
        scores = []
        for tag in self.tagset:
            prior = self.prior_counts.get(tag, 0)
            if prior == 0:
                scores.append(-math.inf)
                continue
            s = math.log(prior / self._n_tokens)
            for kind, value in features:
                num = self.emission_counts.get((tag, _feature_key(kind, value)), 0) + alpha
                den = self._type_totals.get((tag, kind), 0) + alpha * (self._type_sizes.get(kind, 0) + 1)
                s += math.log(num / den)
            scores.append(s)
        return scores

    def to_model_file(self):
        return ModelFile("nb", {
            "meta": [["alpha", format_float(self.smoothing_alpha)]],
            "tags": [[t] for t in self.tagset],
            "priors": [[t, str(c)] for t, c in self.prior_counts.items()],
            "emissions": [[t, k, str(c)] for (t, k), c in self.emission_counts.items()],
            "vocabulary": [[w] for w in sorted(self.vocabulary)],
        })

    @classmethod
    def from_model_file(cls, mf):
        return cls(
            TagSet(tuple(r[0] for r in mf.section("tags"))),
            {t: int(c) for t, c in mf.section("priors")},
            {(t, k): int(c) for t, k, c in mf.section("emissions")},
            frozenset(r[0] for r in mf.section("vocabulary")),
            float(mf.scalar("alpha")),
        )

    def __eq__(self, other):
        if not isinstance(other, NBModel):
            return NotImplemented
        return (self.tagset == other.tagset and self.prior_counts == other.prior_counts
                and self.emission_counts == other.emission_counts
                and self.vocabulary == other.vocabulary
                and self.smoothing_alpha == other.smoothing_alpha)


def train_nb(corpus, alpha=1.0, tagset=None):
    """Count priors and emissions from sequences whose column 0 is the surface form."""
    corpus = list(corpus)
    if not corpus:
        raise TrainingError("cannot train a tagger on an empty corpus")
    if tagset is None:
        seen = []
        for seq in corpus:
            seen.extend(lab for lab in seq.labels if lab not in seen)
        tagset = TagSet(DEFAULT_TAGS + tuple(t for t in seen if t not in DEFAULT_TAGS))
    priors, emissions = Counter(), Counter()
    for seq in corpus:
        prev = None
        for word, tag in zip(seq.column(0), seq.labels):
            if tag not in tagset.tags:
                raise TrainingError(f"label {tag!r} not in tag set")
            priors[tag] += 1
            for kind, value in token_features(word, prev):
                emissions[tag, _feature_key(kind, value)] += 1
            prev = word
    vocab = frozenset(w for seq in corpus for w in seq.column(0))
    return NBModel(tagset, dict(priors), dict(emissions), vocab, alpha)


def most_similar_word(model, token):
    """Nearest vocabulary word by grapheme edit distance.

    Ties go to the longer shared suffix, then to lexicographic order.
    """
    if not model.vocabulary:
        raise NoModelError("tagger vocabulary is empty")
    hit = model._similar_cache.get(token)
    if hit is None:
        hit = min(model.vocabulary, key=lambda w: (grapheme_edit_distance(token, w),
                                                    -common_suffix_clusters(token, w), w))
        model._similar_cache[token] = hit
    return hit


def posterior(model, token, prev_token=None):
    """Tag posteriors (in tag-set order) for one token, numerals excluded."""
    feats = token_features(token, prev_token)
    if token not in model.vocabulary:
        feats[0] = ("w", most_similar_word(model, token))
    scores = model.log_scores(feats)
    top = max(scores)
    exps = [math.exp(s - top) for s in scores]
    z = sum(exps)
    return [e / z for e in exps]


def classify_word(model, token, prev_token=None):
    if parse_numeral(token) is not None:
        return TaggedToken(token, "CD", 1.0)
    probs = posterior(model, token, prev_token)
    best = max(range(len(probs)), key=lambda i: (probs[i], -i))
    return TaggedToken(token, model.tagset.tags[best], probs[best])


def tag_sentence(model, tokens):
    out, prev = [], None
    for tok in tokens:
        out.append(classify_word(model, tok, prev))
        prev = tok
    return out


def tag_segmented(model, sentence):
    """Tag a segmenter ``Sentence`` and keep its terminator/question flag."""
    return TaggedSentence(tuple(tag_sentence(model, sentence.tokens)),
                          sentence.terminator, sentence.is_question)
