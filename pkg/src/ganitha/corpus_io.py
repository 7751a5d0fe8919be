"""Readers and writers for every on-disk artifact.

Sequence files are CRF++-style: one token per line, TAB-separated cells with
the label last, a blank line between sequences. Model files are plain text
with a one-line header ``ganitha-model v1 <kind>`` followed by counted
sections so truncation is always detected.
"""
import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import DataError, FormatError, UnsupportedVersionError
from .lang import nfc

MODEL_FORMAT = "ganitha-model"
MODEL_VERSION = 1


def _lines(text):
    return nfc(text).replace("\r\n", "\n").replace("\r", "\n").split("\n")


def _check_cell(cell):
    if "\t" in cell or "\n" in cell or "\r" in cell:
        raise ValueError(f"cell may not contain TAB or newline: {cell!r}")
    return cell


# -- sequences ---------------------------------------------------------------

class Row(NamedTuple):
    cells: tuple
    label: str


@dataclass(frozen=True)
class LabeledSequence:
    rows: tuple

    def __post_init__(self):
        rows = tuple(Row(tuple(r[0]), r[1]) for r in self.rows)
        if not rows:
            raise ValueError("sequence must be non-empty")
        width = len(rows[0].cells)
        if width < 1 or any(len(r.cells) != width for r in rows):
            raise ValueError("all rows need the same number (>= 1) of columns")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_columns(cls, labels, *columns):
        return cls(tuple(Row(tuple(c), lab) for *c, lab in zip(*columns, labels)))

    def __len__(self):
        return len(self.rows)

    @property
    def width(self):
        return len(self.rows[0].cells)

    @property
    def labels(self):
        return [r.label for r in self.rows]

    def column(self, c):
        return [r.cells[c] for r in self.rows]


def parse_sequence_file(text):
    sequences, rows, width, start = [], [], None, None
    for lineno, line in enumerate(_lines(text), 1):
        if not line.strip():
            if rows:
                sequences.append(LabeledSequence(tuple(rows)))
            rows, width = [], None
            continue
        cells = line.split("\t")
        if len(cells) < 2:
            raise FormatError("expected at least one column and a label", lineno)
        if width is None:
            width, start = len(cells), lineno
        elif len(cells) != width:
            raise FormatError(
                f"ragged row: {len(cells)} cells, sequence starting at line {start} has {width}",
                lineno)
        rows.append(Row(tuple(cells[:-1]), cells[-1]))
    if rows:
        sequences.append(LabeledSequence(tuple(rows)))
    return sequences


def serialize_sequences(sequences):
    blocks = []
    for seq in sequences:
        blocks.append("".join(
            "\t".join(_check_cell(c) for c in (*row.cells, row.label)) + "\n"
            for row in seq.rows))
    return "\n".join(blocks)


# -- feature templates -------------------------------------------------------

_MACRO = re.compile(r"%x\[([+-]?\d+),(\d+)\]")


@dataclass(frozen=True)
class FeatureTemplate:
    id: str
    kind: str  # "unigram" | "bigram"
    macros: tuple
    literal_parts: tuple  # len(macros) + 1 strings
    text: str

    @property
    def is_bigram(self):
        return self.kind == "bigram"

    @classmethod
    def parse(cls, line, lineno=None):
        line = line.strip()
        if not line or line[0] not in "UB":
            raise FormatError(f"template must start with U or B: {line!r}", lineno)
        tid = line.split(":", 1)[0]
        macros, literals, pos = [], [], 0
        for m in _MACRO.finditer(line):
            literals.append(line[pos:m.start()])
            macros.append((int(m.group(1)), int(m.group(2))))
            pos = m.end()
        literals.append(line[pos:])
        if any("%x" in part for part in literals):
            raise FormatError(f"malformed macro in {line!r}", lineno)
        return cls(tid, "bigram" if line[0] == "B" else "unigram",
                   tuple(macros), tuple(literals), line)


def parse_template_file(text):
    templates, seen = [], set()
    for lineno, line in enumerate(_lines(text), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        t = FeatureTemplate.parse(line, lineno)
        if t.id in seen:
            raise FormatError(f"duplicate template id {t.id!r}", lineno)
        seen.add(t.id)
        templates.append(t)
    return templates


def serialize_templates(templates):
    return "".join(t.text + "\n" for t in templates)


# -- problems ----------------------------------------------------------------

@dataclass(frozen=True)
class ProblemRecord:
    text: str
    gold_answer: int | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("problem text must be non-empty")


def parse_problem_file(text):
    records = []
    for lineno, line in enumerate(_lines(text), 1):
        if not line.strip():
            continue
        body, tab, answer = line.rpartition("\t") if "\t" in line else (line, "", "")
        gold = None
        if tab:
            try:
                gold = int(answer.strip())
            except ValueError:
                raise FormatError(f"answer is not an integer: {answer!r}", lineno) from None
        if not body.strip():
            raise FormatError("empty problem text", lineno)
        records.append(ProblemRecord(body, gold))
    return records


def serialize_problems(records):
    out = []
    for r in records:
        if "\t" in r.text or "\n" in r.text:
            raise ValueError("problem text may not contain TAB or newline")
        out.append(r.text if r.gold_answer is None else f"{r.text}\t{r.gold_answer}")
    return "".join(line + "\n" for line in out)


# -- polarity and verb lexicon ------------------------------------------------

POLARITY_LABELS = ("POSITIVE", "NEGATIVE")


def parse_polarity_file(text):
    """``sentence TAB POSITIVE|NEGATIVE`` lines -> list of (sentence, label)."""
    items = []
    for lineno, line in enumerate(_lines(text), 1):
        if not line.strip():
            continue
        sentence, tab, label = line.rpartition("\t")
        if not tab or label not in POLARITY_LABELS:
            raise FormatError(f"expected 'sentence TAB POSITIVE|NEGATIVE', got {line!r}", lineno)
        items.append((sentence, label))
    return items


def serialize_polarity(items):
    return "".join(f"{_check_cell(s)}\t{lab}\n" for s, lab in items)


def parse_lexicon_file(text, categories=None):
    """``verb TAB CATEGORY`` lines -> dict. ``categories`` restricts valid names."""
    lexicon = {}
    for lineno, line in enumerate(_lines(text), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != 2:
            raise FormatError("expected 'verb TAB CATEGORY'", lineno)
        verb, cat = cells[0].strip(), cells[1].strip()
        if categories is not None and cat not in categories:
            raise FormatError(f"unknown verb category {cat!r}", lineno)
        lexicon[verb] = cat
    return lexicon


def serialize_lexicon(lexicon):
    return "".join(f"{_check_cell(v)}\t{c}\n" for v, c in lexicon.items())


# -- gold stage annotations (JSON lines) --------------------------------------

def parse_gold_file(text):
    out = []
    for lineno, line in enumerate(_lines(text), 1):
        if line.strip():
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FormatError(f"bad JSON: {exc.msg}", lineno) from None
    return out


def serialize_gold(items):
    return "".join(json.dumps(item, ensure_ascii=False, sort_keys=True) + "\n" for item in items)


# -- model files -------------------------------------------------------------

def format_float(x):
    """Shortest decimal text that round-trips the binary value."""
    return repr(float(x))


@dataclass
class ModelFile:
    kind: str
    sections: dict = field(default_factory=dict)  # name -> list of rows (list of str)
    version: int = MODEL_VERSION

    def section(self, name):
        try:
            return self.sections[name]
        except KeyError:
            raise FormatError(f"{self.kind} model is missing section {name!r}") from None

    def scalar(self, name):
        return dict(self.section("meta"))[name]


def dumps_model(mf):
    out = [f"{MODEL_FORMAT} v{mf.version} {mf.kind}\n"]
    for name, rows in mf.sections.items():
        out.append(f"@section {name} {len(rows)}\n")
        for row in rows:
            out.append("\t".join(_check_cell(str(c)) for c in row) + "\n")
    out.append("@end\n")
    return "".join(out)


def loads_model(text):
    lines = text.split("\n")
    header = lines[0].split(" ") if lines else []
    if len(header) != 3 or header[0] != MODEL_FORMAT or not header[1].startswith("v"):
        raise FormatError(f"not a {MODEL_FORMAT} file", 1)
    try:
        version = int(header[1][1:])
    except ValueError:
        raise FormatError(f"bad version field {header[1]!r}", 1) from None
    if version != MODEL_VERSION:
        raise UnsupportedVersionError(f"unsupported model version {version} (expected {MODEL_VERSION})", 1)
    mf = ModelFile(header[2], {}, version)
    i = 1
    while True:
        if i >= len(lines):
            raise FormatError("truncated model file: missing @end", i)
        line = lines[i]
        if line == "@end":
            break
        parts = line.split(" ")
        if len(parts) != 3 or parts[0] != "@section":
            raise FormatError(f"expected '@section NAME COUNT', got {line!r}", i + 1)
        try:
            count = int(parts[2])
        except ValueError:
            raise FormatError(f"bad section count {parts[2]!r}", i + 1) from None
        body = lines[i + 1:i + 1 + count]
        if len(body) < count:
            raise FormatError(f"truncated section {parts[1]!r}", i + 1)
        if parts[1] in mf.sections:
            raise FormatError(f"duplicate section {parts[1]!r}", i + 1)
        mf.sections[parts[1]] = [row.split("\t") for row in body]
        i += 1 + count
    return mf


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)  # mkstemp creates 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path, text):
    _atomic_write(path, text)


def read_text(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _model_classes():
    from .crf import CRFModel
    from .nb_tagger import NBModel
    from .polarity import PolarityModel
    return {"crf": CRFModel, "nb": NBModel, "polarity": PolarityModel}


def model_to_text(model):
    return dumps_model(model.to_model_file())


def model_from_text(text, kind=None):
    mf = loads_model(text)
    classes = _model_classes()
    if mf.kind not in classes:
        raise FormatError(f"unknown model kind {mf.kind!r}", 1)
    if kind is not None and mf.kind != kind:
        raise DataError(f"expected a {kind} model, found {mf.kind}")
    try:
        return classes[mf.kind].from_model_file(mf)
    except (KeyError, IndexError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"corrupt {mf.kind} model: {exc}") from None


def save_model(model, path):
    _atomic_write(path, model_to_text(model))


def load_model(path, kind=None):
    return model_from_text(read_text(path), kind)
