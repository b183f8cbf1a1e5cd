"""Seeded train/dev/test splitting and B-tag precision/recall/F1."""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .bio import TagSequence, collapse_subwords, decode_bio, is_begin, label_in_dimension
from .conllulex import Corpus

BUCKETS = ("train", "dev", "test")
DEFAULT_RATIOS = (0.8, 0.1, 0.1)


class EvalError(ValueError):
    pass


def bucket_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of ``n`` items; ties go to the earlier bucket."""
    fr = [Fraction(r).limit_denominator(10**6) for r in ratios]
    total = sum(fr)
    quotas = [n * r / total for r in fr]
    sizes = [int(q) for q in quotas]
    order = sorted(range(len(fr)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


@dataclass(frozen=True)
class Split:
    seed: int
    ratios: tuple[float, float, float]
    membership: dict[str, str]

    def ids(self, bucket: str) -> list[str]:
        return [k for k, v in self.membership.items() if v == bucket]

    def sizes(self) -> dict[str, int]:
        return {b: len(self.ids(b)) for b in BUCKETS}

    def apply(self, corpus: Corpus) -> dict[str, Corpus]:
        return {b: corpus.subset(self.ids(b)) for b in BUCKETS}

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "ratios": list(self.ratios),
                           "membership": self.membership}, ensure_ascii=False, indent=1)

    @classmethod
    def from_json(cls, text: str) -> Split:
        d = json.loads(text)
        return cls(d["seed"], tuple(d["ratios"]), d["membership"])


def split_corpus(corpus: Corpus, ratios: Sequence[float] = DEFAULT_RATIOS,
                 seed: int = 42) -> Split:
    """Shuffle sentences with a seeded generator and cut contiguous buckets."""
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise EvalError("need three positive ratios")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise EvalError("ratios must sum to 1")
    n = len(corpus.sentences)
    if n < 3:
        raise EvalError("corpus needs at least 3 sentences to split")
    ids = [s.sent_id for s in corpus.sentences]
    if len(set(ids)) != n:
        raise EvalError("sent_id values must be unique")
    order = np.random.default_rng(seed).permutation(n)
    sizes = bucket_sizes(n, ratios)
    membership = {}
    pos = 0
    for bucket, size in zip(BUCKETS, sizes):
        for j in order[pos:pos + size]:
            membership[ids[j]] = bucket
        pos += size
    membership = {sid: membership[sid] for sid in ids}
    return Split(seed, tuple(float(r) for r in ratios), membership)


@dataclass(frozen=True)
class EvalReport:
    dimension: str
    precision: float
    recall: float
    f1: float
    n_gold: int
    n_pred: int
    n_match: int
    repairs: int
    precision_undefined: bool

    def as_dict(self) -> dict:
        return asdict(self)


def f1_score(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _tags(seq) -> tuple[str, ...]:
    if isinstance(seq, TagSequence):
        return collapse_subwords(seq).tags
    return tuple(seq)


def evaluate(gold: Sequence, pred: Sequence, dimension: str = "scene") -> EvalReport:
    """Micro-averaged scores over B positions.

    A match is a position where both sequences have a B tag whose label agrees
    in ``dimension``.
    """
    if len(gold) != len(pred):
        raise EvalError(f"{len(gold)} gold sentences but {len(pred)} predicted")
    n_gold = n_pred = n_match = repairs = 0
    for k, (g, p) in enumerate(zip(gold, pred)):
        gt, pt = _tags(g), _tags(p)
        if len(gt) != len(pt):
            raise EvalError(f"sentence {k}: {len(gt)} gold tags but {len(pt)} predicted")
        repairs += decode_bio(pt).repairs
        for a, b in zip(gt, pt):
            ga, pb = is_begin(a), is_begin(b)
            n_gold += ga
            n_pred += pb
            if ga and pb and (label_in_dimension(a[2:], dimension)
                              == label_in_dimension(b[2:], dimension)):
                n_match += 1
    precision = n_match / n_pred if n_pred else 0.0
    recall = n_match / n_gold if n_gold else 0.0
    return EvalReport(dimension, precision, recall, f1_score(precision, recall),
                      n_gold, n_pred, n_match, repairs, n_pred == 0)
