"""Sinhala word lists the solver keys on, and the clause split for question sentences.

All lists are overridable through ``pipeline.cfg`` (see :class:`LanguageConfig`).
"""
import configparser
import unicodedata
from dataclasses import dataclass, field, fields

INTERROGATIVES = ("කොපමණද", "කීයද", "ඉතුරුද")
# "total"; both spellings occur in textbook problems
TOTALITY_WORDS = ("මුළු", "මුලු")
# "remaining"
REMAINDER_WORDS = ("ඉතිරි", "ඉතුරු")
# "count/number of"; never an entity head
COUNT_NOUNS = ("ගණන",)
# "of those", "from it"
ANAPHORS = ("ඉන්", "එයින්", "ඒවායින්")

DEFAULT_TAGS = ("NN", "VB", "ADJ", "PRO", "PP", "CD", "ADV", "QW")


def nfc(text):
    return unicodedata.normalize("NFC", text)


def _words(values):
    return tuple(nfc(v) for v in values)


@dataclass(frozen=True)
class LanguageConfig:
    interrogatives: tuple = INTERROGATIVES
    totality_words: tuple = TOTALITY_WORDS
    remainder_words: tuple = REMAINDER_WORDS
    count_nouns: tuple = COUNT_NOUNS
    anaphors: tuple = ANAPHORS
    tags: tuple = DEFAULT_TAGS
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for f in fields(self):
            if f.name != "extra":
                object.__setattr__(self, f.name, _words(getattr(self, f.name)))

    @property
    def focus_ignored(self):
        """Words dropped from a question focus' attribute set."""
        return frozenset(self.totality_words) | frozenset(self.remainder_words)

    def to_text(self):
        cp = configparser.ConfigParser(interpolation=None)
        cp["language"] = {f.name: " ".join(getattr(self, f.name))
                          for f in fields(self) if f.name != "extra"}
        if self.extra:
            cp["pipeline"] = {k: str(v) for k, v in sorted(self.extra.items())}
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            for key, value in cp[section].items():
                lines.append(f"{key} = {value}")
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text):
        cp = configparser.ConfigParser(interpolation=None)
        cp.read_string(text)
        kwargs = {}
        if cp.has_section("language"):
            for f in fields(cls):
                if f.name != "extra" and cp.has_option("language", f.name):
                    kwargs[f.name] = tuple(cp.get("language", f.name).split())
        if cp.has_section("pipeline"):
            kwargs["extra"] = dict(cp["pipeline"])
        return cls(**kwargs)


DEFAULT_LANGUAGE = LanguageConfig()


def split_question_clause(tagged):
    """Split a tagged question sentence into (quantity clause, interrogative clause).

    The quantity clause runs through the verb that governs the last numeral,
    plus any trailing particles ("දුන් විට"). A question without a numeral
    has an empty quantity clause.
    """
    tagged = list(tagged)
    cds = [i for i, t in enumerate(tagged) if t.tag == "CD"]
    if not cds:
        return [], tagged
    end = cds[-1] + 1
    for j in range(end, len(tagged)):
        if tagged[j].tag == "VB":
            end = j + 1
            break
    while end < len(tagged) and tagged[end].tag == "PP":
        end += 1
    return tagged[:end], tagged[end:]
