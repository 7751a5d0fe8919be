"""End-to-end solving: segment -> tag -> question focus -> polarity -> states -> equation.

The three learned subsystems feed one deterministic combiner: each
quantity-bearing clause contributes its tags, polarity score, verb category
and quantities to the state progression, and the focus picks which
container's history becomes the equation.
"""
import os
from dataclasses import dataclass, field

from . import corpus_io
from .crf import CRFConfig, identify_question, train_crf
from .errors import DataError, GanithaError, NoFocusError, NoVerbError, UnanswerableError
from .lang import LanguageConfig, split_question_clause
from .nb_tagger import TaggedSentence, TagSet, tag_segmented, tag_sentence, train_nb
from .polarity import PolarityConfig, classify_polarity, train_polarity
from .segmenter import split_sentences, tokenize
from .solver import (VerbCategory, VerbLexicon, WorldState, categorize_verb, evaluate_equation,
                     extract_mentions, form_equation, main_verb, progress_state)

DEFAULT_TEMPLATE = """\
# word and POS-tag features: current, previous, next
U00:%x[0,0]
U01:%x[-1,0]
U02:%x[1,0]
U03:%x[0,1]
U04:%x[-1,1]
U05:%x[0,0]/%x[0,1]

B
"""

BUNDLE_FILES = {"nb": "nb.model", "crf": "crf.model", "polarity": "polarity.model",
                "verbs": "verbs.tsv", "config": "pipeline.cfg"}


@dataclass
class ModelBundle:
    nb: object
    crf: object
    polarity: object
    verbs: VerbLexicon
    config: LanguageConfig = field(default_factory=LanguageConfig)


def load_bundle(directory):
    paths = {k: os.path.join(directory, v) for k, v in BUNDLE_FILES.items()}
    missing = [p for p in paths.values() if not os.path.exists(p)]
    if missing:
        raise DataError(f"model directory lacks {', '.join(os.path.basename(p) for p in missing)}")
    categories = {c.value for c in VerbCategory}
    return ModelBundle(
        corpus_io.load_model(paths["nb"], "nb"),
        corpus_io.load_model(paths["crf"], "crf"),
        corpus_io.load_model(paths["polarity"], "polarity"),
        VerbLexicon.from_mapping(corpus_io.parse_lexicon_file(corpus_io.read_text(paths["verbs"]),
                                                              categories)),
        LanguageConfig.from_text(corpus_io.read_text(paths["config"])),
    )


def save_bundle(bundle, directory):
    os.makedirs(directory, exist_ok=True)
    j = lambda k: os.path.join(directory, BUNDLE_FILES[k])  # noqa: E731
    corpus_io.save_model(bundle.nb, j("nb"))
    corpus_io.save_model(bundle.crf, j("crf"))
    corpus_io.save_model(bundle.polarity, j("polarity"))
    corpus_io.write_text(j("verbs"), corpus_io.serialize_lexicon(bundle.verbs.to_mapping()))
    corpus_io.write_text(j("config"), bundle.config.to_text())


# -- tracing -----------------------------------------------------------------

@dataclass
class SentenceRecord:
    index: int
    tagged: TaggedSentence
    role: str  # "statement" | "question"
    clause: list = field(default_factory=list)
    polarity: object = None
    verb: str | None = None
    category: VerbCategory | None = None
    lexicon_hit: bool | None = None
    mentions: list = field(default_factory=list)
    events: tuple = ()


@dataclass
class SolveTrace:
    sentences: list = field(default_factory=list)
    focus: object = None
    focus_note: str | None = None
    states: list = field(default_factory=list)
    equation: object = None
    answer: int | None = None
    warnings: list = field(default_factory=list)
    reason: str | None = None

    def format(self):
        out = []
        for r in self.sentences:
            tags = " ".join(f"{t.surface}_{t.tag}" for t in r.tagged)
            out.append(f"[{r.index}] {r.role}: {tags}")
            if r.polarity is not None:
                out.append(f"    polarity: {r.polarity.label} ({r.polarity.confidence:.6f})")
            if r.verb is not None:
                src = "lexicon" if r.lexicon_hit else "polarity fallback"
                out.append(f"    verb: {r.verb} -> {r.category.value} [{src}]")
            for m in r.mentions:
                who = m.container.describe().split("=")[0] if m.container else "<anaphor>"
                out.append(f"    mention: {who} {m.value}")
            for e in r.events:
                out.append(f"    state: {e}")
        if self.focus is not None:
            attrs = ",".join(sorted(self.focus.attributes))
            out.append(f"focus: {self.focus.head} {{{attrs}}} span={list(self.focus.span)}"
                       f" totality={self.focus.totality} via {self.focus.source}")
        elif self.focus_note:
            out.append(f"focus: none ({self.focus_note})")
        if self.states:
            final = self.states[-1]
            out.append("final state: " + "; ".join(c.describe() for c in final.containers))
        if self.equation is not None:
            out.append(f"equation: {self.equation} ({self.equation.operation.value})")
        for w in self.warnings:
            out.append(f"warning: {w}")
        out.append(f"answer: {self.answer}" if self.answer is not None
                   else f"unanswerable: {self.reason}")
        return "\n".join(out) + "\n"


# -- solving -----------------------------------------------------------------

def solve_problem(bundle, text, polarity_oracle=None):
    """Returns (answer or None, trace). Never raises on well-formed text.

    ``polarity_oracle(sentence_index, clause)`` may return a label that
    replaces the classifier's, for stage-isolation experiments.
    """
    lang = bundle.config
    trace = SolveTrace()
    try:
        _solve(bundle, text, lang, trace, polarity_oracle)
    except GanithaError as exc:
        trace.answer = None
        trace.reason = f"{type(exc).__name__}: {exc}"
    return trace.answer, trace


def _solve(bundle, text, lang, trace, polarity_oracle):
    sentences = split_sentences(text, lang.interrogatives)
    tagged = [tag_segmented(bundle.nb, s) for s in sentences]
    questions = [i for i, t in enumerate(tagged) if t.is_question]
    if not questions:
        raise UnanswerableError("no question sentence found")
    qi = questions[-1]

    state = WorldState()
    trace.states.append(state)
    for i, ts in enumerate(tagged):
        role = "question" if i in questions else "statement"
        clause = list(ts.tokens)
        if role == "question":
            clause, _ = split_question_clause(clause)
        rec = SentenceRecord(i, ts, role, clause)
        trace.sentences.append(rec)
        if not any(t.tag == "CD" for t in clause):
            continue
        pol = classify_polarity(bundle.polarity, clause)
        if polarity_oracle is not None:
            forced = polarity_oracle(i, clause)
            if forced is not None:
                pol = type(pol)(forced, 1.0)
        rec.polarity = pol
        try:
            rec.verb = main_verb(clause)
            rec.lexicon_hit = rec.verb in bundle.verbs
            category = categorize_verb(bundle.verbs, clause, pol)
        except NoVerbError:
            trace.warnings.append(f"sentence {i} has no verb; using polarity only")
            category = VerbCategory.POSITIVE
        if rec.verb is not None and not rec.lexicon_hit:
            trace.warnings.append(f"verb {rec.verb!r} not in lexicon; category from polarity")
        rec.category = category
        rec.mentions = extract_mentions(clause, lang)
        state = progress_state(state, clause, pol, category, i, lang, rec.mentions)
        rec.events = state.events
        trace.warnings.extend(e[len("warning: "):] for e in state.events if e.startswith("warning: "))
        trace.states.append(state)

    try:
        trace.focus = identify_question(bundle.crf, tagged[qi], lang)
    except NoFocusError:
        trace.focus_note = "question names no entity; using the last container counted"
    eq = form_equation(trace.states, trace.focus, lang)
    trace.equation = eq
    trace.answer = evaluate_equation(eq)
    # internal consistency: a matched focus container must agree with the equation
    if trace.focus is not None:
        hit = trace.states[-1].find((trace.focus.head, frozenset(trace.focus.attributes)))
        if hit is not None and hit.quantity != trace.answer:
            raise UnanswerableError("equation disagrees with the focus container")


# -- evaluation --------------------------------------------------------------

@dataclass
class Verdict:
    index: int
    gold: int
    predicted: int | None
    correct: bool
    reason: str | None = None


@dataclass
class EvalReport:
    n_problems: int
    solved_correct: int
    answer_accuracy: float
    token_tag_accuracy: float | None = None
    focus_exact_match: float | None = None
    polarity_accuracy: float | None = None
    verdicts: list = field(default_factory=list)

    def metrics(self):
        return [("n_problems", self.n_problems), ("solved_correct", self.solved_correct),
                ("answer_accuracy", self.answer_accuracy),
                ("token_tag_accuracy", self.token_tag_accuracy),
                ("focus_exact_match", self.focus_exact_match),
                ("polarity_accuracy", self.polarity_accuracy)]

    @staticmethod
    def _fmt(v):
        if v is None:
            return "absent"
        return f"{v:.4f}" if isinstance(v, float) else str(v)

    def format_machine(self):
        lines = [f"{k}\t{self._fmt(v)}" for k, v in self.metrics()]
        for v in self.verdicts:
            lines.append(f"problem.{v.index}\t{'ok' if v.correct else 'wrong'}\t{v.gold}\t"
                         f"{v.predicted if v.predicted is not None else '-'}")
        return "\n".join(lines) + "\n"

    def format_table(self):
        rows = [(k, self._fmt(v)) for k, v in self.metrics()]
        width = max(len(k) for k, _ in rows)
        lines = [f"{k.ljust(width)}  {v}" for k, v in rows]
        lines.append("")
        lines.append(f"{'#':>4}  {'gold':>8}  {'predicted':>9}  verdict")
        for v in self.verdicts:
            pred = "-" if v.predicted is None else str(v.predicted)
            note = "ok" if v.correct else "WRONG" + (f" ({v.reason})" if v.reason else "")
            lines.append(f"{v.index:>4}  {v.gold:>8}  {pred:>9}  {note}")
        return "\n".join(lines) + "\n"


def _rate(hits, total):
    return hits / total if total else None


def evaluate_dataset(bundle, problems, gold=None, polarity_oracle=None):
    """Exact-match answer accuracy plus per-stage metrics where gold annotations exist.

    ``gold`` is a list (aligned with ``problems``) of annotation dicts as
    written by the corpus generator, or None.
    """
    problems = list(problems)
    if gold is not None and len(gold) != len(problems):
        raise DataError(f"{len(gold)} gold annotations for {len(problems)} problems")
    tag_hit = tag_n = foc_hit = foc_n = pol_hit = pol_n = 0
    verdicts, correct = [], 0
    for k, rec in enumerate(problems):
        if rec.gold_answer is None:
            raise DataError(f"problem {k} has no gold answer")
        oracle = None
        if polarity_oracle is not None:
            oracle = polarity_oracle(k)
        answer, trace = solve_problem(bundle, rec.text, oracle)
        ok = answer == rec.gold_answer
        correct += ok
        verdicts.append(Verdict(k, rec.gold_answer, answer, ok, None if ok else trace.reason))
        if gold is None:
            continue
        g_sents = gold[k]["sentences"]
        aligned = len(g_sents) == len(trace.sentences) and all(
            g["tokens"] == r.tagged.surfaces for g, r in zip(g_sents, trace.sentences))
        for j, g in enumerate(g_sents):
            tag_n += len(g["tags"])
            if g["polarity"] is not None:
                pol_n += 1
            if g["terminator"] == "?":
                foc_n += 1
            if not aligned:
                continue
            r = trace.sentences[j]
            tag_hit += sum(a == b for a, b in zip(g["tags"], r.tagged.tags))
            if g["polarity"] is not None and r.polarity is not None:
                pol_hit += r.polarity.label == g["polarity"]
            if g["terminator"] == "?":
                pred = list(trace.focus.span) if trace.focus is not None else None
                foc_hit += pred == g["focus"]
    n = len(problems)
    return EvalReport(n, correct, correct / n if n else 0.0,
                      _rate(tag_hit, tag_n), _rate(foc_hit, foc_n), _rate(pol_hit, pol_n),
                      verdicts)


def gold_polarity_oracle(gold):
    """Per-problem oracle factory returning gold clause labels (for evaluate_dataset)."""
    def for_problem(k):
        labels = [s["polarity"] for s in gold[k]["sentences"]]
        return lambda i, clause: labels[i] if i < len(labels) else None
    return for_problem


# -- training ----------------------------------------------------------------

def tag_text(nb, text):
    """Tag pre-segmented sentence text (no terminator handling)."""
    return tag_sentence(nb, tokenize(text))


def train_polarity_from_items(nb, items, config=PolarityConfig()):
    return train_polarity([(tag_text(nb, s), lab) for s, lab in items], config)


def train_bundle(tag_data, crf_data, polarity_items, verbs, templates=None, lang=None,
                 alpha=1.0, crf_config=CRFConfig(), polarity_config=PolarityConfig()):
    lang = lang or LanguageConfig()
    templates = templates or corpus_io.parse_template_file(DEFAULT_TEMPLATE)
    nb = train_nb(tag_data, alpha, TagSet(lang.tags))
    crf = train_crf(crf_data, templates, ("QF-B", "QF-I", "O"), crf_config)
    pol = train_polarity_from_items(nb, polarity_items, polarity_config)
    return ModelBundle(nb, crf, pol, VerbLexicon.from_mapping(verbs), lang)
