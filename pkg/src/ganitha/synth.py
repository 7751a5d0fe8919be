"""Templated Sinhala addition/subtraction problems with gold stage annotations.

Every generated problem carries its gold tags, the gold question-focus span,
the gold polarity of each quantity-bearing clause and the gold answer, all
computed by the generator itself (never by the solver). The sentence
patterns follow Grade-5 textbook problems: observation, accumulation,
removal, bus-stop arrivals, compound questions and totals.
"""
import random
from dataclasses import dataclass, field

from .corpus_io import LabeledSequence, ProblemRecord
from .lang import nfc, split_question_clause
from .nb_tagger import TaggedToken

POS, NEG = "POSITIVE", "NEGATIVE"


@dataclass
class Domain:
    head: str
    attributes: tuple
    places: tuple
    animate: bool = False


DOMAINS = (
    Domain("මල්", ("සුදු", "රතු", "කහ", "නිල්", "රෝස"), ("වට්ටියක", "මල්බඳුනක", "ගෙවත්තේ")),
    Domain("මාළු", ("රතු", "කළු", "ලොකු", "පුංචි"), ("ෆැකියක", "පොකුණේ", "ටැංකියක"), True),
    Domain("ගස්", ("අඹ", "ජම්බු", "කොස්", "පොල්", "දෙහි"), ("ගෙවත්තේ", "වත්තේ", "ඉඩමේ")),
    Domain("ගෙඩි", ("අඹ", "දොඩම්", "පේර", "දෙල්"), ("වට්ටියක", "පෙට්ටියක", "කූඩයක")),
    Domain("පොත්", ("අලුත්", "පරණ", "ලොකු"), ("පෙට්ටියක", "පුස්තකාලයේ", "පන්තියේ")),
    Domain("පැන්සල්", ("රතු", "කළු", "නිල්", "කොළ"), ("පෙට්ටියක", "බෑගයේ")),
    Domain("බෝල", ("රතු", "කහ", "ලොකු", "පුංචි"), ("පෙට්ටියක", "කාමරයේ")),
    Domain("බිත්තර", ("තාරා", "කුකුළු"), ("කූඩයක", "පෙට්ටියක")),
    Domain("කුරුල්ලන්", ("සුදු", "කළු"), ("ගසේ", "කූඩුවේ"), True),
    Domain("කෝප්ප", ("සුදු", "නිල්"), ("කඩයේ", "කුස්සියේ")),
    Domain("පුටු", ("ලී", "ප්ලාස්ටික්"), ("කාමරයේ", "පන්තියේ")),
    Domain("අඹගෙඩි", (), ("කූඩයක", "වට්ටියක")),
)
PEOPLE = ("ගැහැණු", "පිරිමි", "ළමයි", "ගුරුවරු", "මගීන්")
PEOPLE_PLACES = (("බස්නැවතුම්පොලක", "බස්නැවතුම්පොලේ"), ("ශාලාවක", "ශාලාවේ"),
                 ("පන්තියක", "පන්තියේ"))
OWNERS = ("මා", "මම", "ඔහු", "ඇය", "අක්කා", "අයියා")
RECIPIENTS = ("මල්ලිට", "නංගිට", "අයියාට", "යාළුවාට", "ගුරුතුමාට", "අම්මාට")
QWORDS = ("කොපමණද", "කීයද")

# verb -> (lexicon category, which problems use it)
OBSERVE = ("ඇත", "තිබේ")
OBSERVE_ANIMATE = ("සිටි", "සිටියි", "ඇත")
OBSERVE_COUNT = ("කි", "වේ")
ADD = {"දැමුවා": "POSITIVE", "දැමුවේය": "POSITIVE", "ගෙනාවා": "POSITIVE",
       "එකතුකළා": "POSITIVE", "ලැබුණා": "POSITIVE_TRANSFER", "ගත්තා": "POSITIVE_TRANSFER",
       "මිලදීගත්තා": "POSITIVE_TRANSFER", "හැදුවා": "CONSTRUCT"}
ADD_ANIMATE = {"ආවා": "POSITIVE", "පැමිණියා": "POSITIVE", "එක්වුණා": "POSITIVE",
               "ඉපදුණා": "CONSTRUCT"}
REMOVE = {"දුන්නා": "NEGATIVE_TRANSFER", "දුන්නේය": "NEGATIVE_TRANSFER",
          "විකුණුවා": "NEGATIVE_TRANSFER", "කෑවා": "NEGATIVE", "නැතිවුණා": "NEGATIVE",
          "කැඩුණා": "DESTROY", "ඉවත්කළා": "NEGATIVE"}
REMOVE_ANIMATE = {"ගියා": "NEGATIVE", "පිටත්වුණා": "NEGATIVE", "මැරුණා": "DESTROY"}
ADD_WHEN = {"දැමුවිට": "POSITIVE", "ගෙනාවිට": "POSITIVE", "එකතුකළවිට": "POSITIVE"}
ADD_WHEN_ANIMATE = {"ආවිට": "POSITIVE", "දැමුවිට": "POSITIVE"}
REMOVE_WHEN = {"දුන්": "NEGATIVE_TRANSFER", "විකුණූ": "NEGATIVE_TRANSFER", "කෑ": "NEGATIVE"}
# the stop's point of view: getting off a bus adds people, boarding removes them
STOP_ARRIVE = {"බැස්සේය": "NEGATIVE_TRANSFER", "බැස්සෝය": "NEGATIVE_TRANSFER",
               "පැමිණියා": "POSITIVE"}
STOP_LEAVE = {"නැග්ගා": "NEGATIVE_TRANSFER", "පිටත්වුණා": "NEGATIVE"}
FIXED_VERBS = {"සිටින": "OBSERVATION", "ඇති": "OBSERVATION", "පැමිණ": "POSITIVE", "විය": "OBSERVATION"}


def verb_lexicon():
    lex = {}
    for v in OBSERVE + OBSERVE_ANIMATE + OBSERVE_COUNT:
        lex[v] = "OBSERVATION"
    for table in (ADD, ADD_ANIMATE, REMOVE, REMOVE_ANIMATE, ADD_WHEN, ADD_WHEN_ANIMATE,
                  REMOVE_WHEN, STOP_ARRIVE, STOP_LEAVE, FIXED_VERBS):
        lex.update(table)
    return {nfc(k): v for k, v in lex.items()}


@dataclass
class GoldSentence:
    tokens: list
    tags: list
    terminator: str = "."
    polarity: str | None = None
    focus: tuple | None = None  # [start, end)

    @property
    def is_question(self):
        return self.terminator == "?"

    def text(self):
        return " ".join(self.tokens) + " " + self.terminator

    def tagged(self):
        return [TaggedToken(w, t) for w, t in zip(self.tokens, self.tags)]

    def focus_labels(self):
        labels = ["O"] * len(self.tokens)
        if self.focus is not None:
            s, e = self.focus
            labels[s] = "QF-B"
            for i in range(s + 1, e):
                labels[i] = "QF-I"
        return labels

    def to_json(self):
        return {"tokens": self.tokens, "tags": self.tags, "terminator": self.terminator,
                "polarity": self.polarity, "focus": list(self.focus) if self.focus else None}


@dataclass
class GoldProblem:
    sentences: list
    answer: int
    kind: str = ""

    @property
    def text(self):
        return " ".join(s.text() for s in self.sentences)

    def record(self):
        return ProblemRecord(self.text, self.answer)

    def to_json(self):
        return {"text": self.text, "answer": self.answer, "kind": self.kind,
                "sentences": [s.to_json() for s in self.sentences]}


class _S:
    """Sentence builder: ``add(token, tag)``; ``mark()`` brackets the focus span."""

    def __init__(self):
        self.tokens, self.tags = [], []
        self._focus_start = None
        self.focus = None

    def add(self, token, tag):
        self.tokens.append(nfc(token))
        self.tags.append(tag)
        return self

    def num(self, n):
        return self.add(str(n), "CD")

    def begin_focus(self):
        self._focus_start = len(self.tokens)
        return self

    def end_focus(self):
        self.focus = (self._focus_start, len(self.tokens))
        return self

    def done(self, terminator=".", polarity=None):
        return GoldSentence(self.tokens, self.tags, terminator, polarity, self.focus)


def _entity(s, attrs, head):
    for a in attrs:
        s.add(a, "ADJ")
    return s.add(head, "NN")


class Generator:
    def __init__(self, seed=42):
        self.rng = random.Random(seed)

    def n(self, lo=2, hi=50):
        return self.rng.randint(lo, hi)

    def pick(self, seq):
        return self.rng.choice(list(seq))

    def domain(self, with_attrs=False):
        pool = [d for d in DOMAINS if d.attributes or not with_attrs]
        return self.pick(pool)

    def attrs(self, d, k=1):
        if not d.attributes or self.rng.random() < 0.3 and k == 1:
            return ()
        return tuple(self.rng.sample(d.attributes, k))

    def observe(self, d):
        return self.pick(OBSERVE_ANIMATE if d.animate else OBSERVE)

    def add_verb(self, d):
        return self.pick(list(ADD) + (list(ADD_ANIMATE) if d.animate else []))

    def remove_verb(self, d):
        return self.pick(list(REMOVE) + (list(REMOVE_ANIMATE) if d.animate else []))

    def question(self, attrs, head, lead=None, opener=()):
        s = _S()
        for tok, tag in opener:
            s.add(tok, tag)
        s.begin_focus()
        if lead:
            s.add(lead, "ADJ")
        _entity(s, attrs, head).end_focus()
        s.add("ගණන", "NN").add(self.pick(QWORDS), "QW")
        return s.done("?")

    def opening(self, d, attrs, n1):
        s = _S()
        r = self.rng.random()
        if r < 0.4:
            s.add(self.pick(d.places), "NN")
        elif r < 0.6:
            s.add(self.pick(OWNERS), "PRO").add("ලඟ", "PP")
        _entity(s, attrs, d.head).num(n1).add("ක්", "PP").add(self.observe(d), "VB")
        return s.done(polarity=POS)

    # -- problem kinds -------------------------------------------------------

    def accumulate(self):
        d = self.domain()
        a1 = self.attrs(d)
        n1, n3 = self.n(), self.n()
        sents = [self.opening(d, a1, n1)]
        if a1 and self.rng.random() < 0.6:
            a2 = (self.pick([a for a in d.attributes if a not in a1]),)
            s = _S()
            _entity(s, a2, d.head).num(self.n()).add("ක්", "PP").add(self.observe(d), "VB")
            sents.append(s.done(polarity=POS))
        s = _S().add(self.pick(("තවත්", "තව")), "ADV")
        _entity(s, a1, d.head).num(n3).add("ක්", "PP")
        if self.rng.random() < 0.5:
            s.add("එයට", "PRO")
        s.add(self.add_verb(d), "VB")
        sents.append(s.done(polarity=POS))
        lead = self.pick(("මුළු", "මුලු")) if self.rng.random() < 0.3 else None
        sents.append(self.question(a1, d.head, lead))
        return GoldProblem(sents, n1 + n3, "accumulate")

    def remove(self):
        d = self.domain()
        a1 = self.attrs(d)
        n1 = self.n(5, 60)
        n2 = self.n(1, n1 - 1)
        sents = [self.opening(d, a1, n1)]
        s = _S()
        if self.rng.random() < 0.5:
            s.add(self.pick(("ඉන්", "එයින්")), "PRO").num(n2).add("ක්", "PP")
            if self.rng.random() < 0.6:
                s.add(self.pick(RECIPIENTS), "NN")
        else:
            _entity(s, a1, d.head).num(n2).add("ක්", "PP")
        s.add(self.remove_verb(d), "VB")
        sents.append(s.done(polarity=NEG))
        sents.append(self.question(a1, d.head, "ඉතිරි"))
        return GoldProblem(sents, n1 - n2, "remove")

    def mixed(self):
        d = self.domain()
        a1 = self.attrs(d)
        n1, n2 = self.n(), self.n()
        n3 = self.n(1, n1 + n2 - 1)
        sents = [self.opening(d, a1, n1)]
        s = _S().add("තවත්", "ADV")
        _entity(s, a1, d.head).num(n2).add("ක්", "PP").add(self.add_verb(d), "VB")
        sents.append(s.done(polarity=POS))
        s = _S()
        _entity(s, a1, d.head).num(n3).add("ක්", "PP").add(self.remove_verb(d), "VB")
        sents.append(s.done(polarity=NEG))
        sents.append(self.question(a1, d.head, "ඉතිරි" if self.rng.random() < 0.5 else None))
        return GoldProblem(sents, n1 + n2 - n3, "mixed")

    def bus_stop(self):
        p1, p2 = self.rng.sample(PEOPLE, 2)
        place, place_at = self.pick(PEOPLE_PLACES)
        counts = {p1: self.n(), p2: self.n()}
        s = _S().add(place, "NN").add("සිටින", "VB").add(p1, "NN").add("ගණන", "NN")
        sents = [s.num(counts[p1]).add(self.pick(OBSERVE_COUNT), "VB").done(polarity=POS)]
        s = _S().add(p2, "NN").add("ගණන", "NN").num(counts[p2]).add(self.pick(OBSERVE_COUNT), "VB")
        sents.append(s.done(polarity=POS))
        for k, p in enumerate(self.rng.sample((p1, p2), self.rng.randint(1, 2))):
            s = _S()
            if k == 0 and self.rng.random() < 0.6:
                s.add("තවත්", "ADV").add("බසයකින්", "NN").add("පැමිණ", "VB")
            if self.rng.random() < 0.7:
                m = self.n()
                counts[p] += m
                s.add(p, "NN").num(m).add("ක්", "PP").add(self.pick(STOP_ARRIVE), "VB")
                sents.append(s.done(polarity=POS))
            else:
                m = self.n(1, counts[p])
                counts[p] -= m
                s.add(p, "NN").num(m).add("ක්", "PP").add("බසයට", "NN").add(self.pick(STOP_LEAVE), "VB")
                sents.append(s.done(polarity=NEG))
        target = self.pick((p1, p2))
        opener = ((place_at, "NN"), ("සිටින", "VB"))
        sents.append(self.question((), target, self.pick(("මුළු", "මුලු")), opener))
        return GoldProblem(sents, counts[target], "bus_stop")

    def compound_add(self):
        d = self.domain()
        a1 = self.attrs(d)
        n1, n2 = self.n(), self.n()
        sents = [self.opening(d, a1, n1)]
        s = _S().add("එයට", "PRO").add("තවත්", "ADV")
        _entity(s, a1, d.head).num(n2).add("ක්", "PP")
        table = ADD_WHEN_ANIMATE if d.animate else ADD_WHEN
        s.add(self.pick(table), "VB").begin_focus().add(self.pick(("මුළු", "මුලු")), "ADJ")
        _entity(s, a1, d.head).end_focus().add("ගණන", "NN").add(self.pick(QWORDS), "QW")
        sents.append(s.done("?", polarity=POS))
        return GoldProblem(sents, n1 + n2, "compound_add")

    def compound_remove(self):
        d = self.domain()
        a1 = self.attrs(d)
        n1 = self.n(5, 60)
        n2 = self.n(1, n1 - 1)
        s = _S().add(self.pick(OWNERS), "PRO").add("ලඟ", "PP")
        _entity(s, a1, d.head).num(n1).add("ක්", "PP").add("ඇත", "VB")
        sents = [s.done(polarity=POS)]
        s = _S().add("ඉන්", "PRO").num(n2).add("ක්", "PP")
        verb = self.pick(REMOVE_WHEN)
        if verb != "කෑ":
            s.add(self.pick(RECIPIENTS), "NN")
        s.add(verb, "VB").add("විට", "PP")
        if self.rng.random() < 0.5:
            s.add("තව", "ADV").add("කොපමණ", "QW").add("ඉතුරුද", "QW")
        else:
            s.begin_focus().add("ඉතිරි", "ADJ")
            _entity(s, a1, d.head).end_focus().add("ගණන", "NN").add(self.pick(QWORDS), "QW")
        sents.append(s.done("?", polarity=NEG))
        return GoldProblem(sents, n1 - n2, "compound_remove")

    def total(self):
        d = self.domain(with_attrs=True)
        k = min(len(d.attributes), self.rng.randint(2, 3))
        attrs = self.rng.sample(d.attributes, k)
        place = self.pick(d.places)
        sents, answer = [], 0
        for j, a in enumerate(attrs):
            m = self.n(1, 30)
            answer += m
            s = _S()
            if j == 0:
                s.add(place, "NN")
            elif j == len(attrs) - 1 and self.rng.random() < 0.5:
                s.add("සහ", "PP")
            _entity(s, (a,), d.head).num(m).add("ක්", "PP")
            if j > 0 and self.rng.random() < 0.5:
                s.add("ද", "PP")
            sents.append(s.add(self.observe(d), "VB").done(polarity=POS))
        opener = ((place, "NN"), ("ඇති", "VB")) if self.rng.random() < 0.6 else ()
        sents.append(self.question((), d.head, self.pick(("මුළු", "මුලු")), opener))
        return GoldProblem(sents, answer, "total")

    KINDS = (("accumulate", 0.2), ("remove", 0.15), ("mixed", 0.1), ("bus_stop", 0.15),
             ("compound_add", 0.12), ("compound_remove", 0.1), ("total", 0.18))

    def problem(self):
        names, weights = zip(*self.KINDS)
        return getattr(self, self.rng.choices(names, weights)[0])()

    def problems(self, count):
        return [self.problem() for _ in range(count)]


# -- derived training files --------------------------------------------------

def tag_sequences(problems):
    return [LabeledSequence.from_columns(s.tags, s.tokens)
            for p in problems for s in p.sentences]


def crf_sequences(problems):
    return [LabeledSequence.from_columns(s.focus_labels(), s.tokens, s.tags)
            for p in problems for s in p.sentences if s.is_question]


def polarity_items(problems):
    """(clause text, label) for every quantity-bearing clause."""
    items = []
    for p in problems:
        for s in p.sentences:
            if s.polarity is None:
                continue
            tagged = s.tagged()
            if s.is_question:
                tagged, _ = split_question_clause(tagged)
            items.append((" ".join(t.surface for t in tagged), s.polarity))
    return items


@dataclass
class Corpus:
    train: list = field(default_factory=list)
    test: list = field(default_factory=list)


def generate(train=100, test=100, seed=42):
    gen = Generator(seed)
    return Corpus(gen.problems(train), gen.problems(test))
