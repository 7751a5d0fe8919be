"""World-state progression over tagged sentences and equation formation.

Each sentence's quantities are bound to containers (head noun + attribute
set). The verb category says how a container changes; the polarity
classifier has the final word on the sign. Containers remember the signed
terms that produced their quantity, so the equation for the asked-about
container is read straight off its history.
"""
import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple

from .errors import NoVerbError, OutOfRangeError, UnanswerableError
from .lang import DEFAULT_LANGUAGE
from .polarity import NEGATIVE, POSITIVE
from .segmenter import MAX_NUMERAL, parse_numeral


class VerbCategory(enum.Enum):
    OBSERVATION = "OBSERVATION"
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"
    POSITIVE_TRANSFER = "POSITIVE_TRANSFER"
    NEGATIVE_TRANSFER = "NEGATIVE_TRANSFER"
    CONSTRUCT = "CONSTRUCT"
    DESTROY = "DESTROY"

    @property
    def sign(self):
        return -1 if self in _NEGATIVE_SIDE else 1


_NEGATIVE_SIDE = {VerbCategory.NEGATIVE, VerbCategory.NEGATIVE_TRANSFER, VerbCategory.DESTROY}
_FLIP = {
    VerbCategory.POSITIVE: VerbCategory.NEGATIVE,
    VerbCategory.NEGATIVE: VerbCategory.POSITIVE,
    VerbCategory.POSITIVE_TRANSFER: VerbCategory.NEGATIVE_TRANSFER,
    VerbCategory.NEGATIVE_TRANSFER: VerbCategory.POSITIVE_TRANSFER,
    VerbCategory.CONSTRUCT: VerbCategory.DESTROY,
    VerbCategory.DESTROY: VerbCategory.CONSTRUCT,
    VerbCategory.OBSERVATION: VerbCategory.NEGATIVE,
}
_TRANSFERS = {VerbCategory.POSITIVE_TRANSFER, VerbCategory.NEGATIVE_TRANSFER}


class VerbLexicon(dict):
    """verb surface -> VerbCategory. Missing verbs are misses, never defaults."""

    @classmethod
    def from_mapping(cls, mapping):
        return cls({verb: VerbCategory(cat) for verb, cat in mapping.items()})

    def to_mapping(self):
        return {verb: cat.value for verb, cat in self.items()}


@dataclass(frozen=True)
class Term:
    sign: int
    value: int
    sentence: int

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.value}"


@dataclass(frozen=True)
class Container:
    entity_head: str
    attributes: frozenset = frozenset()
    quantity: int = 0
    owner: str | None = None
    terms: tuple = ()

    @property
    def key(self):
        return self.entity_head, self.attributes

    def describe(self):
        attrs = ",".join(sorted(self.attributes))
        owner = f" owner={self.owner}" if self.owner else ""
        return f"{self.entity_head}{{{attrs}}}={self.quantity}{owner}"


class Mention(NamedTuple):
    container: Container | None  # None: anaphoric, resolved against the state
    value: int
    token_index: int
    counterparty: str | None = None


@dataclass(frozen=True)
class WorldState:
    containers: tuple = ()
    index: int = 0
    last_touched: tuple | None = None
    holdings: tuple = ()  # ((party, head), quantity) for the other side of transfers
    events: tuple = ()

    def find(self, key):
        for c in self.containers:
            if c.key == key:
                return c
        return None

    @property
    def total(self):
        return sum(c.quantity for c in self.containers)


class Operation(enum.Enum):
    ADD = "ADD"
    SUBTRACT = "SUBTRACT"
    MIXED = "MIXED"


@dataclass(frozen=True)
class Equation:
    terms: tuple
    operation: Operation

    def __post_init__(self):
        if not self.terms:
            raise ValueError("an equation needs at least one term")

    def __str__(self):
        body = " ".join(str(t) for t in self.terms).lstrip("+")
        return f"{body} = {evaluate_equation(self)}"


def _tok(t):
    return (t[0], t[1]) if isinstance(t, tuple) else (t.surface, t.tag)


# -- verbs -------------------------------------------------------------------

def main_verb(sentence):
    verbs = [s for s, tag in map(_tok, sentence) if tag == "VB"]
    if not verbs:
        raise NoVerbError("sentence has no verb")
    return verbs[-1]  # Sinhala is verb-final


def categorize_verb(lexicon, sentence, polarity=None):
    """Category of the last verb; an unknown verb falls back to the polarity label."""
    verb = main_verb(sentence)
    if verb in lexicon:
        return lexicon[verb]
    if polarity is None:
        raise NoVerbError(f"verb {verb!r} is not in the lexicon and no polarity was given")
    label = getattr(polarity, "label", polarity)
    return VerbCategory.NEGATIVE if label == NEGATIVE else VerbCategory.POSITIVE


def reconcile(category, polarity):
    """Let the polarity label decide the sign; returns the effective category."""
    if polarity is None:
        return category
    label = getattr(polarity, "label", polarity)
    wanted = -1 if label == NEGATIVE else 1
    if category.sign == wanted:
        return category
    return _FLIP[category]


# -- mentions ----------------------------------------------------------------

def extract_mentions(sentence, lang=DEFAULT_LANGUAGE):
    """Bind each numeral to the entity it counts.

    The entity is the nearest preceding noun (count words like "ගණන" are
    skipped), with the adjectives right before it as attributes and the
    nearest earlier pronoun as owner. A numeral right after an anaphor
    ("ඉන් 2 ක්") refers back to the last container in play; otherwise a
    numeral with no noun before it takes the following noun.
    """
    toks = [_tok(t) for t in sentence]
    mentions = []
    for q, (surface, tag) in enumerate(toks):
        value = parse_numeral(surface)
        if tag != "CD" or value is None:
            continue
        head = None
        for i in range(q - 1, -1, -1):
            if toks[i][1] == "CD":
                break
            if toks[i][1] == "NN" and toks[i][0] not in lang.count_nouns:
                head = i
                break
        anaphoric = head is None and any(
            toks[i][0] in lang.anaphors for i in range(q - 1, -1, -1))
        if head is None and not anaphoric:
            head = next((i for i in range(q + 1, len(toks))
                         if toks[i][1] == "NN" and toks[i][0] not in lang.count_nouns), None)
        counterparty = next((toks[i][0] for i in range(q + 1, len(toks))
                             if toks[i][1] in ("NN", "PRO") and i != head
                             and toks[i][0] not in lang.count_nouns), None)
        if anaphoric:
            mentions.append(Mention(None, value, q, counterparty))
            continue
        if head is None:
            continue
        a = head
        while a > 0 and toks[a - 1][1] == "ADJ" and toks[a - 1][0] not in lang.focus_ignored:
            a -= 1
        attrs = frozenset(toks[i][0] for i in range(a, head))
        owner = next((toks[i][0] for i in range(a - 1, -1, -1)
                      if toks[i][1] == "PRO" and toks[i][0] not in lang.anaphors), None)
        mentions.append(Mention(Container(toks[head][0], attrs, 0, owner), value, q,
                                counterparty if head < q else None))
    return mentions


def match_container(state, prototype):
    """Same head word and same attribute set, or None."""
    return state.find(prototype.key)


# -- state progression -------------------------------------------------------

def _checked(value):
    if abs(value) > MAX_NUMERAL:
        raise OutOfRangeError(f"quantity {value} exceeds the 64-bit range")
    return value


def progress_state(state, sentence, polarity, category, sentence_index=None, lang=DEFAULT_LANGUAGE,
                   mentions=None):
    """Apply one sentence to ``state`` and return the next state."""
    if sentence_index is None:
        sentence_index = state.index
    effective = reconcile(category, polarity)
    events = []
    if effective is not category:
        events.append(f"sign: verb says {category.value}, polarity says "
                      f"{getattr(polarity, 'label', polarity)}; using {effective.value}")
    containers = list(state.containers)
    holdings = dict(state.holdings)
    last = state.last_touched
    if mentions is None:
        mentions = extract_mentions(sentence, lang)

    for m in mentions:
        proto = m.container
        if proto is None:
            if last is None:
                events.append(f"anaphoric quantity {m.value} has no antecedent; dropped")
                continue
            proto = next(c for c in containers if c.key == last)
        pos = next((k for k, c in enumerate(containers) if c.key == proto.key), None)
        current = containers[pos] if pos is not None else None
        if effective is VerbCategory.OBSERVATION:
            new = Container(proto.entity_head, proto.attributes, m.value,
                            proto.owner or (current.owner if current else None),
                            (Term(1, m.value, sentence_index),))
            events.append(("overwrite " if current else "create ") + new.describe())
        else:
            sign = effective.sign
            base = current or Container(proto.entity_head, proto.attributes, 0, proto.owner)
            qty = _checked(base.quantity + sign * m.value)
            new = replace(base, quantity=qty,
                          terms=base.terms + (Term(sign, m.value, sentence_index),))
            events.append(f"{effective.value.lower()} {'+' if sign > 0 else '-'}{m.value} -> "
                          + new.describe())
            if qty < 0:
                events.append(f"warning: {new.entity_head} went negative ({qty})")
            if effective in _TRANSFERS and new.owner and m.counterparty:
                party = (m.counterparty, new.entity_head)
                holdings[party] = holdings.get(party, 0) - sign * m.value
                events.append(f"transfer: {m.counterparty} holds {holdings[party]} {new.entity_head}")
        if pos is None:
            containers.append(new)
        else:
            containers[pos] = new
        last = new.key

    return WorldState(tuple(containers), state.index + 1, last,
                      tuple(sorted(holdings.items())), tuple(events))


# -- equations ---------------------------------------------------------------

def _operation(terms):
    signs = [t.sign for t in terms]
    if all(s > 0 for s in signs):
        return Operation.ADD
    if signs[0] > 0 and all(s < 0 for s in signs[1:]):
        return Operation.SUBTRACT
    return Operation.MIXED


def form_equation(states, focus, lang=DEFAULT_LANGUAGE):
    """Read the equation for the focus off the final state.

    ``focus`` None means the question names no entity; the last container
    touched is the one asked about.
    """
    final = states[-1] if isinstance(states, (list, tuple)) else states
    if focus is None:
        if final.last_touched is None:
            raise UnanswerableError("question names no entity and nothing was counted")
        chosen = [final.find(final.last_touched)]
    else:
        hit = final.find((focus.head, frozenset(focus.attributes)))
        if hit is not None:
            chosen = [hit]
        else:
            same_head = [c for c in final.containers if c.entity_head == focus.head]
            if same_head and (focus.totality or not focus.attributes):
                chosen = same_head
            elif focus.totality and final.containers:
                chosen = list(final.containers)
            else:
                raise UnanswerableError(f"no container matches the focus {focus.head!r}")
    terms = tuple(t for c in chosen for t in c.terms)
    if not terms:
        raise UnanswerableError("focus container has no quantity")
    return Equation(terms, _operation(terms))


def evaluate_equation(eq):
    total = 0
    for t in eq.terms:
        total = _checked(total + t.sign * t.value)
    return total
