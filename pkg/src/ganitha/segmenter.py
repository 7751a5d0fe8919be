"""Sentence and word segmentation for Sinhala problem text.

Sentences end at "." or "?"; words are whitespace-separated. A token that
starts with ASCII digits and continues with letters ("10ක්") is split at the
digit boundary.
"""
import re
from dataclasses import dataclass
from typing import NamedTuple

import regex

from .errors import OutOfRangeError
from .lang import INTERROGATIVES, nfc

TERMINATORS = ".?"
MAX_NUMERAL = 2**63 - 1

_DIGIT_PREFIX = re.compile(r"^([0-9]+)(\D.*)$", re.S)
_ASCII_DIGITS = re.compile(r"^[0-9]+$")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple
    terminator: str | None
    is_question: bool

    @property
    def text(self):
        return " ".join(self.tokens)


class Quantity(NamedTuple):
    value: int
    token_index: int


_JOINER = "\u0dca\u200d"  # virama + ZWJ: the next consonant belongs to this cluster


def graphemes(text):
    """Extended grapheme clusters with Sinhala ZWJ conjuncts kept whole.

    Unicode's default segmentation breaks after virama + ZWJ, which would
    split conjuncts like "ශ්‍රී" and "ක්‍ෂ" in two.
    """
    out = []
    for cl in regex.findall(r"\X", text):
        if out and out[-1].endswith(_JOINER):
            out[-1] += cl
        else:
            out.append(cl)
    return out


def tokenize(text):
    tokens = []
    for tok in nfc(text).split():
        m = _DIGIT_PREFIX.match(tok)
        if m:
            tokens.extend(m.groups())
        else:
            tokens.append(tok)
    return tokens


def split_sentences(text, interrogatives=INTERROGATIVES):
    text = nfc(text)
    qwords = {nfc(w) for w in interrogatives}
    sentences, buf = [], []

    def close(term):
        tokens = tuple(tokenize("".join(buf)))
        buf.clear()
        if tokens:
            is_q = term == "?" or any(t in qwords for t in tokens)
            sentences.append(Sentence(tokens, term, is_q))

    for ch in text:
        if ch in TERMINATORS:
            close(ch)
        else:
            buf.append(ch)
    close(None)
    return sentences


def parse_numeral(token):
    if not _ASCII_DIGITS.match(token):
        return None
    value = int(token)
    if value > MAX_NUMERAL:
        raise OutOfRangeError(f"numeral {token} exceeds the 64-bit range")
    return value


def quantities(tokens):
    out = []
    for i, tok in enumerate(tokens):
        value = parse_numeral(tok)
        if value is not None:
            out.append(Quantity(value, i))
    return out
