"""BIO encoding of targets, subword projection, and decoding back to spans.

Tags are plain strings: ``"O"``, ``"I"`` or ``"B-<label>"``. Only the B tag
carries a label. Positions are 0-based indices into the token (or subword)
sequence.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from .conllulex import Construal, Sentence, extract_targets
from .inventory import LabelInventory

OUTSIDE = "O"
INSIDE = "I"
BEGIN = "B"

Segmenter = Callable[[str], list[str]]


class BioError(ValueError):
    pass


def b_tag(label: str) -> str:
    return f"{BEGIN}-{label}"


def is_begin(tag: str) -> bool:
    return tag.startswith("B-")


def tag_label(tag: str) -> str | None:
    return tag[2:] if is_begin(tag) else None


def is_valid(tags: Sequence[str]) -> bool:
    prev = OUTSIDE
    for tag in tags:
        if tag == INSIDE and prev == OUTSIDE:
            return False
        if tag != INSIDE and tag != OUTSIDE and not is_begin(tag):
            return False
        prev = tag
    return True


@dataclass(frozen=True)
class TagSequence:
    tags: tuple[str, ...]
    unit: str = "token"
    alignment: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.unit not in ("token", "subword"):
            raise BioError(f"unknown unit {self.unit!r}")
        if self.unit == "subword":
            if self.alignment is None or len(self.alignment) != len(self.tags):
                raise BioError("subword sequence needs one alignment entry per tag")
            if any(b < a for a, b in zip(self.alignment, self.alignment[1:])):
                raise BioError("alignment must be non-decreasing")

    def __len__(self):
        return len(self.tags)

    @property
    def n_tokens(self) -> int:
        if self.unit == "token":
            return len(self.tags)
        return self.alignment[-1] + 1 if self.alignment else 0


def encode_bio(sent: Sentence, inventory: LabelInventory | None = None,
               dimension: str = "construal") -> TagSequence:
    tags = [OUTSIDE] * len(sent.tokens)
    for target in extract_targets(sent, inventory):
        idx = [i - 1 for i in target.span]
        if any(tags[i] != OUTSIDE for i in idx):
            raise BioError(f"overlapping targets in sentence {sent.sent_id}")
        tags[idx[0]] = b_tag(target.construal.get(dimension))
        for i in idx[1:]:
            tags[i] = INSIDE
    return TagSequence(tuple(tags))


def project_subwords(seq: TagSequence,
                     segmentation: Sequence[tuple[int, Sequence[str]]]) -> TagSequence:
    """Spread token tags over subwords.

    ``segmentation`` lists ``(token index, subwords)`` for every token in order.
    Non-initial subwords of a target token are tagged I; those of an O token
    stay O.
    """
    if seq.unit != "token":
        raise BioError("projection expects a token-unit sequence")
    if [i for i, _ in segmentation] != list(range(len(seq.tags))):
        raise BioError("segmentation must list every token index once, in order")
    tags, alignment = [], []
    for (i, pieces), tag in zip(segmentation, seq.tags):
        if not pieces:
            raise BioError(f"token {i} has no subwords")
        tags.append(tag)
        rest = OUTSIDE if tag == OUTSIDE else INSIDE
        tags.extend([rest] * (len(pieces) - 1))
        alignment.extend([i] * len(pieces))
    return TagSequence(tuple(tags), "subword", tuple(alignment))


def segment(forms: Iterable[str], segmenter: Segmenter) -> list[tuple[int, list[str]]]:
    return [(i, list(segmenter(form))) for i, form in enumerate(forms)]


def bigram_segmenter(form: str) -> list[str]:
    """Deterministic stand-in for a subword tokenizer: 2-character chunks."""
    if not form:
        return [form]
    return [form[i:i + 2] for i in range(0, len(form), 2)]


def collapse_subwords(seq: TagSequence) -> TagSequence:
    """Token-unit view of a subword sequence: each token takes its first subword's tag."""
    if seq.unit == "token":
        return seq
    tags, last = [], None
    for tag, tok in zip(seq.tags, seq.alignment):
        if tok != last:
            tags.append(tag)
            last = tok
    return TagSequence(tuple(tags))


@dataclass(frozen=True)
class Decoded:
    spans: list[tuple[tuple[int, ...], str]]
    repairs: int


def decode_bio(seq: TagSequence | Sequence[str]) -> Decoded:
    """Labelled spans from a possibly invalid tag sequence.

    An I with no open span (at the start or after O) is read as O and
    counted as a repair. Unrecognised tags are read as O as well.
    """
    if not isinstance(seq, TagSequence):
        seq = TagSequence(tuple(seq))
    tags = collapse_subwords(seq).tags
    spans = []
    current: list[int] | None = None
    label = None
    repairs = 0
    for i, tag in enumerate(tags):
        if is_begin(tag):
            if current is not None:
                spans.append((tuple(current), label))
            current, label = [i], tag[2:]
        elif tag == INSIDE and current is not None:
            current.append(i)
        else:
            if tag != OUTSIDE:
                repairs += 1
            if current is not None:
                spans.append((tuple(current), label))
            current = None
    if current is not None:
        spans.append((tuple(current), label))
    return Decoded(spans, repairs)


def spans_from_targets(sent: Sentence, inventory: LabelInventory | None = None,
                       dimension: str = "construal") -> list[tuple[tuple[int, ...], str]]:
    return [(tuple(i - 1 for i in t.span), t.construal.get(dimension))
            for t in extract_targets(sent, inventory)]


def label_in_dimension(label: str, dimension: str) -> str:
    """Project a B label (a construal text or a single supersense) onto a dimension."""
    return Construal.from_text(label).get(dimension)


# --- interchange format ------------------------------------------------------

def write_tagged(sentences: Iterable[tuple[Sequence[str], TagSequence | Sequence[str]]]) -> str:
    """``FORM<TAB>TAG`` lines, one blank line after each sentence."""
    out = []
    for forms, seq in sentences:
        tags = seq.tags if isinstance(seq, TagSequence) else tuple(seq)
        if len(forms) != len(tags):
            raise BioError("forms and tags differ in length")
        out.extend(f"{f}\t{t}" for f, t in zip(forms, tags))
        out.append("")
    return "\n".join(out) + "\n" if out else ""


def read_tagged(text: str) -> list[tuple[list[str], list[str]]]:
    sentences, forms, tags = [], [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            if forms:
                sentences.append((forms, tags))
                forms, tags = [], []
            continue
        form, sep, tag = line.rpartition("\t")
        if not sep:
            raise BioError(f"line {lineno}: expected FORM<TAB>TAG")
        forms.append(form)
        tags.append(tag)
    if forms:
        sentences.append((forms, tags))
    return sentences


def read_tagged_file(path) -> list[tuple[list[str], list[str]]]:
    return read_tagged(Path(path).read_text(encoding="utf-8"))
