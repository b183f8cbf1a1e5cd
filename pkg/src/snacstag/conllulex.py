"""Reading, writing and validating CoNLL-U-Lex corpora.

A token line has the 10 UD columns followed by 9 lexical-semantic ones::

    ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC
    SMWE LEXCAT LEXLEMMA SS SS2 WMWE WCAT WLEMMA LEXTAG

Sentences are separated by a blank line and may be preceded by ``#``
comments, of which ``# sent_id = ...`` and ``# text = ...`` are interpreted.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from .inventory import LabelInventory, default_inventory

N_COLUMNS = 19
EMPTY = "_"
CONSTRUAL_SEP = "~>"


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str = ""
    line: int | None = None
    sent_id: str | None = None
    token_id: int | None = None
    severity: str = "error"

    def __str__(self):
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.sent_id is not None:
            where.append(f"sent {self.sent_id}")
        if self.token_id is not None:
            where.append(f"token {self.token_id}")
        loc = ", ".join(where)
        msg = f"{self.rule}: {self.message}" if self.message else self.rule
        return f"{loc}: {msg}" if loc else msg


class CorpusParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        head = "; ".join(str(d) for d in self.diagnostics[:5])
        more = f" (+{len(self.diagnostics) - 5} more)" if len(self.diagnostics) > 5 else ""
        super().__init__(head + more)


def strip_label(label: str) -> str:
    return label[2:] if label.startswith("p.") else label


@dataclass(frozen=True, order=True)
class Construal:
    scene: str
    function: str

    @property
    def text(self) -> str:
        if self.scene == self.function:
            return self.scene
        return f"{self.scene}{CONSTRUAL_SEP}{self.function}"

    def __str__(self):
        return self.text

    @classmethod
    def from_text(cls, text: str) -> Construal:
        """Parse ``Scene`` or ``Scene~>Function``; ``p.`` prefixes are dropped."""
        if CONSTRUAL_SEP in text:
            scene, function = text.split(CONSTRUAL_SEP, 1)
        else:
            scene = function = text
        return cls(strip_label(scene.strip()), strip_label(function.strip()))

    def get(self, dimension: str) -> str:
        if dimension == "scene":
            return self.scene
        if dimension == "function":
            return self.function
        if dimension == "construal":
            return self.text
        raise ValueError(f"unknown label dimension {dimension!r}")


DIMENSIONS = ("scene", "function", "construal")


def _opt(value: str) -> str | None:
    return None if value == EMPTY else value


def _col(value) -> str:
    return EMPTY if value is None else str(value)


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str = EMPTY
    upos: str = EMPTY
    xpos: str = EMPTY
    feats: str = EMPTY
    head: int = 0
    deprel: str = EMPTY
    deps: str = EMPTY
    misc: str = EMPTY
    smwe: tuple[int, int] | None = None
    lexcat: str | None = None
    lexlemma: str | None = None
    ss: str | None = None
    ss2: str | None = None
    wmwe: str | None = None
    wcat: str | None = None
    wlemma: str | None = None
    lextag: str = EMPTY

    @property
    def construal(self) -> Construal | None:
        """The (scene, function) pair; None for unlabeled tokens.

        A special label such as ```d`` may appear in ``ss`` alone, in which
        case it fills both members.
        """
        if self.ss is None:
            return None
        scene = strip_label(self.ss)
        function = strip_label(self.ss2) if self.ss2 is not None else scene
        return Construal(scene, function)

    def to_line(self) -> str:
        smwe = None if self.smwe is None else f"{self.smwe[0]}:{self.smwe[1]}"
        cols = [
            str(self.id), self.form, self.lemma, self.upos, self.xpos, self.feats,
            str(self.head), self.deprel, self.deps, self.misc,
            _col(smwe), _col(self.lexcat), _col(self.lexlemma), _col(self.ss),
            _col(self.ss2), _col(self.wmwe), _col(self.wcat), _col(self.wlemma),
            self.lextag,
        ]
        return "\t".join(cols)


@dataclass(frozen=True)
class Sentence:
    sent_id: str
    text: str
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()
    line: int | None = field(default=None, compare=False)

    def __len__(self):
        return len(self.tokens)

    def token_line(self, token_id: int) -> int | None:
        if self.line is None:
            return None
        return self.line + len(self.comments) + token_id - 1

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...]
    inventory: LabelInventory | None = field(default=None, compare=False, repr=False)
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False, repr=False)

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def subset(self, sent_ids: Iterable[str]) -> Corpus:
        keep = set(sent_ids)
        return Corpus(tuple(s for s in self.sentences if s.sent_id in keep),
                      self.inventory)


@dataclass(frozen=True)
class Target:
    sent_id: str
    span: tuple[int, ...]
    lemma: str
    klass: str
    construal: Construal


# --- parsing ---------------------------------------------------------------

def _parse_int(value: str) -> int | None:
    try:
        return int(value)
    except ValueError:
        return None


def _parse_token(fields: list[str], lineno: int, diags: list[Diagnostic]) -> Token | None:
    tid = _parse_int(fields[0])
    if tid is None or tid < 1:
        diags.append(Diagnostic("bad token id", f"{fields[0]!r} is not a positive integer", lineno))
        return None
    head = _parse_int(fields[6])
    if head is None or head < 0:
        diags.append(Diagnostic("bad head", f"{fields[6]!r}", lineno, token_id=tid))
        return None
    smwe = None
    if fields[10] != EMPTY:
        group, _, pos = fields[10].partition(":")
        g, p = _parse_int(group), _parse_int(pos)
        if g is None or p is None or g < 1 or p < 1:
            diags.append(Diagnostic("bad smwe", f"{fields[10]!r}", lineno, token_id=tid))
            return None
        smwe = (g, p)
    return Token(
        id=tid, form=fields[1], lemma=fields[2], upos=fields[3], xpos=fields[4],
        feats=fields[5], head=head, deprel=fields[7], deps=fields[8], misc=fields[9],
        smwe=smwe, lexcat=_opt(fields[11]), lexlemma=_opt(fields[12]),
        ss=_opt(fields[13]), ss2=_opt(fields[14]), wmwe=_opt(fields[15]),
        wcat=_opt(fields[16]), wlemma=_opt(fields[17]), lextag=fields[18],
    )


def _comment_value(comment: str, key: str) -> str | None:
    body = comment[1:].strip()
    k, sep, v = body.partition("=")
    if sep and k.strip() == key:
        return v.strip()
    return None


def _parse_block(block: list[tuple[int, str]], index: int,
                 diags: list[Diagnostic]) -> Sentence | None:
    comments, tokens = [], []
    ok = True
    first_line = block[0][0]
    for lineno, line in block:
        if line.startswith("#"):
            if tokens:
                diags.append(Diagnostic("misplaced comment", "comment after token lines", lineno))
                ok = False
            comments.append(line)
            continue
        fields = line.split("\t")
        if len(fields) != N_COLUMNS:
            diags.append(Diagnostic("wrong column count",
                                    f"expected {N_COLUMNS} fields, got {len(fields)}", lineno))
            ok = False
            continue
        tok = _parse_token(fields, lineno, diags)
        if tok is None:
            ok = False
        else:
            tokens.append(tok)
    sent_id = text = None
    for c in comments:
        sent_id = sent_id if sent_id is not None else _comment_value(c, "sent_id")
        text = text if text is not None else _comment_value(c, "text")
    if sent_id is None:
        sent_id = f"#{index + 1}"
    if not tokens and ok:
        diags.append(Diagnostic("empty sentence", "no token lines", first_line, sent_id))
        return None
    for i, tok in enumerate(tokens, 1):
        if tok.id != i:
            diags.append(Diagnostic("non-consecutive ids", f"expected id {i}, found {tok.id}",
                                    first_line + len(comments) + i - 1, sent_id, tok.id))
            ok = False
            break
    if not ok:
        return None
    if text is None:
        text = " ".join(t.form for t in tokens)
    return Sentence(sent_id, text, tuple(tokens), tuple(comments), first_line)


def _blocks(text: str):
    block: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip() == "":
            if block:
                yield block
                block = []
        else:
            block.append((lineno, line.rstrip("\r")))
    if block:
        yield block


def parse_corpus(text: str, inventory: LabelInventory | None = None,
                 strict: bool = True) -> Corpus:
    """Parse CoNLL-U-Lex text.

    In strict mode any error-level diagnostic raises :class:`CorpusParseError`.
    In lenient mode sentences with errors are dropped and the diagnostics are
    kept on ``Corpus.diagnostics``.
    """
    inventory = inventory or default_inventory()
    diags: list[Diagnostic] = []
    sentences: list[Sentence] = []
    seen: set[str] = set()
    for index, block in enumerate(_blocks(text)):
        local: list[Diagnostic] = []
        sent = _parse_block(block, index, local)
        if sent is not None:
            local.extend(sentence_diagnostics(sent, inventory))
            if sent.sent_id in seen:
                local.append(Diagnostic("duplicate sent_id", sent.sent_id, sent.line, sent.sent_id))
            seen.add(sent.sent_id)
        diags.extend(local)
        if sent is not None and not any(d.severity == "error" for d in local):
            sentences.append(sent)
    if strict and any(d.severity == "error" for d in diags):
        raise CorpusParseError([d for d in diags if d.severity == "error"])
    return Corpus(tuple(sentences), inventory, tuple(diags))


def read_corpus(path, inventory: LabelInventory | None = None, strict: bool = True) -> Corpus:
    return parse_corpus(Path(path).read_text(encoding="utf-8"), inventory, strict)


def write_corpus(corpus: Corpus | Iterable[Sentence]) -> str:
    sentences = corpus.sentences if isinstance(corpus, Corpus) else corpus
    out = []
    for sent in sentences:
        out.extend(sent.comments)
        out.extend(tok.to_line() for tok in sent.tokens)
        out.append("")
    return "\n".join(out) + "\n" if out else ""


# --- invariants and targets --------------------------------------------------

def sentence_diagnostics(sent: Sentence, inventory: LabelInventory) -> list[Diagnostic]:
    """Invariant violations within one sentence."""
    out = []

    def diag(rule, msg, tok=None):
        tid = tok.id if tok is not None else None
        line = sent.token_line(tid) if tid is not None else sent.line
        out.append(Diagnostic(rule, msg, line, sent.sent_id, tid))

    for i, tok in enumerate(sent.tokens, 1):
        if tok.id != i:
            diag("non-consecutive ids", f"expected id {i}, found {tok.id}", tok)
    groups: dict[int, list[Token]] = {}
    for tok in sent.tokens:
        if tok.smwe is not None:
            groups.setdefault(tok.smwe[0], []).append(tok)
        if tok.ss is None and tok.ss2 is None:
            continue
        if tok.ss is None:
            diag("unpaired construal", f"ss2={tok.ss2} without ss", tok)
            continue
        scene = strip_label(tok.ss)
        if tok.ss2 is None and scene not in inventory.specials:
            diag("unpaired construal", f"ss={tok.ss} without ss2", tok)
            continue
        if tok.smwe is not None and tok.smwe[1] > 1:
            diag("label on non-initial MWE member", f"smwe={tok.smwe[0]}:{tok.smwe[1]}", tok)
        cons = tok.construal
        for label in dict.fromkeys((cons.scene, cons.function)):
            if not inventory.is_label(label):
                diag("unknown label", label, tok)
        if cons.scene in inventory.specials and cons.function != cons.scene:
            diag("special label mismatch", f"{cons.scene} paired with {cons.function}", tok)
    for gid, members in groups.items():
        positions = sorted(t.smwe[1] for t in members)
        if positions != list(range(1, len(members) + 1)):
            diag("bad MWE numbering", f"group {gid} positions {positions}", members[0])
        ids = [t.id for t in members]
        if ids != list(range(ids[0], ids[0] + len(ids))):
            diag("non-contiguous MWE", f"group {gid} spans ids {ids}", members[0])
    return out


def validate(corpus: Corpus, inventory: LabelInventory | None = None) -> list[Diagnostic]:
    """All invariant violations in ``corpus``; empty when it is well formed."""
    inventory = inventory or corpus.inventory or default_inventory()
    out = []
    seen = set()
    for sent in corpus.sentences:
        if sent.sent_id in seen:
            out.append(Diagnostic("duplicate sent_id", sent.sent_id, sent.line, sent.sent_id))
        seen.add(sent.sent_id)
        out.extend(sentence_diagnostics(sent, inventory))
    return out


def target_lemma(tokens: list[Token]) -> str:
    head = tokens[0]
    if head.lexlemma is not None:
        return head.lexlemma
    return " ".join(t.lemma for t in tokens)


def extract_targets(sent: Sentence, inventory: LabelInventory | None = None,
                    diagnostics: list[Diagnostic] | None = None) -> list[Target]:
    """One target per labelled token or labelled strong-MWE group, in order.

    Lemmas missing from the lexicon are classed ``adposition`` and reported
    as warnings into ``diagnostics`` when a list is given.
    """
    inventory = inventory or default_inventory()
    groups: dict[int, list[Token]] = {}
    for tok in sent.tokens:
        if tok.smwe is not None:
            groups.setdefault(tok.smwe[0], []).append(tok)
    targets = []
    for tok in sent.tokens:
        cons = tok.construal
        if cons is None:
            continue
        if tok.smwe is None:
            members = [tok]
        elif tok.smwe[1] == 1:
            members = sorted(groups[tok.smwe[0]], key=lambda t: t.smwe[1])
        else:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(
                    "label on non-initial MWE member", f"smwe={tok.smwe[0]}:{tok.smwe[1]}",
                    sent.token_line(tok.id), sent.sent_id, tok.id))
            continue
        lemma = target_lemma(members)
        klass = inventory.classify(lemma)
        if klass is None:
            klass = "adposition"
            if diagnostics is not None:
                diagnostics.append(Diagnostic(
                    "unknown target lemma", f"{lemma!r} classed as adposition",
                    sent.token_line(tok.id), sent.sent_id, tok.id, severity="warning"))
        targets.append(Target(sent.sent_id, tuple(t.id for t in members), lemma, klass, cons))
    return targets


def corpus_targets(corpus: Corpus, inventory: LabelInventory | None = None,
                   diagnostics: list[Diagnostic] | None = None) -> list[Target]:
    inventory = inventory or corpus.inventory or default_inventory()
    out = []
    for sent in corpus.sentences:
        out.extend(extract_targets(sent, inventory, diagnostics))
    return out
