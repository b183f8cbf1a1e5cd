"""Inter-annotator agreement between two annotation versions of a corpus."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .conllulex import Construal, Corpus, corpus_targets, extract_targets


class AgreementError(ValueError):
    pass


@dataclass(frozen=True)
class AlignedPair:
    sent_id: str
    span: tuple[int, ...]
    lemma: str
    a: Construal
    b: Construal

    def agrees(self, dimension: str) -> bool:
        return self.a.get(dimension) == self.b.get(dimension)


def align_double_annotations(a: Corpus, b: Corpus) -> list[AlignedPair]:
    """Targets labelled in both versions, matched by sentence and token span.

    Sentences present in only one version are ignored. Shared sentences must
    have the same token forms.
    """
    b_by_id = {s.sent_id: s for s in b.sentences}
    pairs = []
    for sa in a.sentences:
        sb = b_by_id.get(sa.sent_id)
        if sb is None:
            continue
        if sa.forms != sb.forms:
            raise AgreementError(f"tokenization differs in sentence {sa.sent_id}")
        tb = {t.span: t for t in extract_targets(sb, b.inventory)}
        for ta in extract_targets(sa, a.inventory):
            other = tb.get(ta.span)
            if other is not None:
                pairs.append(AlignedPair(sa.sent_id, ta.span, ta.lemma, ta.construal,
                                         other.construal))
    return pairs


def raw_agreement(pairs: list[AlignedPair], dimension: str = "construal") -> float:
    if not pairs:
        raise AgreementError("no aligned pairs")
    return sum(p.agrees(dimension) for p in pairs) / len(pairs)


def cohens_kappa(pairs: list[AlignedPair], dimension: str = "construal") -> float:
    """Cohen's kappa over the union of labels used by either annotator."""
    if not pairs:
        raise AgreementError("no aligned pairs")
    n = len(pairs)
    p_o = raw_agreement(pairs, dimension)
    ca = Counter(p.a.get(dimension) for p in pairs)
    cb = Counter(p.b.get(dimension) for p in pairs)
    p_e = sum(ca[k] * cb[k] for k in ca.keys() | cb.keys()) / (n * n)
    if p_e >= 1.0:
        if p_o == 1.0:
            return 1.0
        raise AgreementError("degenerate marginals")
    return (p_o - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class LemmaAgreement:
    lemma: str
    n: int
    scene: float
    function: float
    construal: float


def per_lemma_agreement(pairs: list[AlignedPair], min_n: int = 20) -> list[LemmaAgreement]:
    """Raw agreement per target lemma, for lemmas with at least ``min_n`` pairs.

    Sorted by construal agreement, descending.
    """
    groups: dict[str, list[AlignedPair]] = {}
    for p in pairs:
        groups.setdefault(p.lemma, []).append(p)
    rows = [
        LemmaAgreement(lemma, len(ps), raw_agreement(ps, "scene"),
                       raw_agreement(ps, "function"), raw_agreement(ps, "construal"))
        for lemma, ps in groups.items() if len(ps) >= min_n
    ]
    rows.sort(key=lambda r: (-r.construal, -r.n, r.lemma))
    return rows


def annotated_share(pairs: list[AlignedPair], reference: Corpus) -> float:
    """Fraction of the reference corpus's targets that were doubly annotated."""
    total = len(corpus_targets(reference))
    return len(pairs) / total if total else 0.0
