"""Corpus summary counts, label distributions and semantic-range entropy."""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass

from .conllulex import Corpus, Target, corpus_targets
from .inventory import TARGET_CLASSES


class EntropyError(ValueError):
    pass


def _pct(count: int, total: int) -> float:
    return 100.0 * count / total if total else 0.0


@dataclass(frozen=True)
class SummaryStats:
    n_sentences: int
    n_tokens: int
    n_targets: int
    class_counts: dict[str, int]
    n_types: int
    class_types: dict[str, int]
    role_equals_function: int
    role_differs: int
    n_construal_types: int
    equal_construal_types: int
    differing_construal_types: int

    def class_percent(self, klass: str) -> float:
        return _pct(self.class_counts[klass], self.n_targets)

    @property
    def role_equals_function_percent(self) -> float:
        return _pct(self.role_equals_function, self.n_targets)

    @property
    def role_differs_percent(self) -> float:
        return _pct(self.role_differs, self.n_targets)

    def rows(self) -> list[tuple[str, int, float | None, int | None]]:
        """(name, count, percent, types) rows in summary-table order."""
        rows = [
            ("Sentences", self.n_sentences, None, None),
            ("Tokens", self.n_tokens, None, None),
            ("Targets", self.n_targets, None, self.n_types),
        ]
        for klass in TARGET_CLASSES:
            rows.append((klass, self.class_counts[klass], self.class_percent(klass),
                         self.class_types[klass]))
        rows += [
            ("Construals", self.n_targets, None, self.n_construal_types),
            ("role=function", self.role_equals_function,
             self.role_equals_function_percent, self.equal_construal_types),
            ("role!=function", self.role_differs,
             self.role_differs_percent, self.differing_construal_types),
        ]
        return rows


def corpus_summary(corpus: Corpus, targets: list[Target] | None = None) -> SummaryStats:
    if targets is None:
        targets = corpus_targets(corpus)
    class_counts = Counter(t.klass for t in targets)
    class_lemmas = {k: {t.lemma for t in targets if t.klass == k} for k in TARGET_CLASSES}
    equal = [t for t in targets if t.construal.scene == t.construal.function]
    differ = [t for t in targets if t.construal.scene != t.construal.function]
    return SummaryStats(
        n_sentences=len(corpus.sentences),
        n_tokens=corpus.n_tokens,
        n_targets=len(targets),
        class_counts={k: class_counts.get(k, 0) for k in TARGET_CLASSES},
        n_types=len({t.lemma for t in targets}),
        class_types={k: len(v) for k, v in class_lemmas.items()},
        role_equals_function=len(equal),
        role_differs=len(differ),
        n_construal_types=len({t.construal for t in targets}),
        equal_construal_types=len({t.construal for t in equal}),
        differing_construal_types=len({t.construal for t in differ}),
    )


@dataclass(frozen=True)
class CountDistribution:
    labels: tuple[tuple[str, int], ...]

    def __post_init__(self):
        keys = [k for k, _ in self.labels]
        if len(set(keys)) != len(keys):
            raise ValueError("distribution keys must be unique")
        if any(c < 0 for _, c in self.labels):
            raise ValueError("counts must be non-negative")

    @classmethod
    def from_counts(cls, counts) -> CountDistribution:
        """Build from a mapping or iterable of keys, sorted by count then key."""
        if not hasattr(counts, "items"):
            counts = Counter(counts)
        return cls(tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))))

    @property
    def total(self) -> int:
        return sum(c for _, c in self.labels)

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.labels]

    def __len__(self):
        return len(self.labels)

    def percentages(self, denominator: int | None = None) -> list[tuple[str, int, float]]:
        denominator = self.total if denominator is None else denominator
        return [(k, c, _pct(c, denominator)) for k, c in self.labels]


def target_dimension_value(target: Target, dimension: str) -> str:
    if dimension == "lemma":
        return target.lemma
    return target.construal.get(dimension)


def label_distribution(corpus: Corpus, klass: str | None = None, dimension: str = "scene",
                       targets: list[Target] | None = None) -> CountDistribution:
    """Counts of ``dimension`` values over targets of ``klass`` (all when None).

    Use ``percentages(n_targets)`` for shares of all targets in the corpus.
    """
    if targets is None:
        targets = corpus_targets(corpus)
    return CountDistribution.from_counts(
        target_dimension_value(t, dimension) for t in targets
        if klass is None or t.klass == klass)


def _check_nonempty(counts: list[int]) -> int:
    n = sum(counts)
    if n <= 0:
        raise EntropyError("undefined entropy: empty distribution")
    return n


def shannon_entropy(dist: CountDistribution | list[int]) -> float:
    """Plug-in Shannon entropy in bits."""
    counts = dist.counts if isinstance(dist, CountDistribution) else list(dist)
    n = _check_nonempty(counts)
    h = 0.0
    for c in counts:
        if c:
            p = c / n
            h -= p * math.log2(p)
    return max(h, 0.0)


def chao_shen_entropy(dist: CountDistribution | list[int]) -> float:
    """Coverage-adjusted Horvitz-Thompson entropy estimate in bits.

    When every observation is a singleton the Good-Turing coverage is zero;
    coverage is then taken as ``1 - f1 / (n + 1)`` and a warning is issued.
    """
    counts = [c for c in (dist.counts if isinstance(dist, CountDistribution) else dist) if c]
    n = _check_nonempty(counts)
    if len(counts) == 1:
        return 0.0
    f1 = sum(1 for c in counts if c == 1)
    coverage = 1.0 - f1 / n
    if coverage <= 0.0:
        coverage = 1.0 - f1 / (n + 1)
        warnings.warn("sample coverage is zero (all singletons); using f1/(n+1) correction",
                      RuntimeWarning, stacklevel=2)
    h = 0.0
    for c in counts:
        pa = coverage * c / n
        h -= pa * math.log2(pa) / (1.0 - (1.0 - pa) ** n)
    return h


@dataclass(frozen=True)
class EntropyRow:
    lemma: str
    entropy: float
    n: int
    klass: str


def target_entropy_table(corpus: Corpus, min_n: int = 20, dimension: str = "scene",
                         include_specials: bool = True,
                         targets: list[Target] | None = None) -> list[EntropyRow]:
    """Chao-Shen entropy of each target lemma's label distribution.

    Rows are sorted by descending entropy, then lemma.
    """
    if targets is None:
        targets = corpus_targets(corpus)
    specials = corpus.inventory.specials if corpus.inventory is not None else frozenset()
    by_lemma: dict[str, Counter] = {}
    klass_of: dict[str, str] = {}
    for t in targets:
        if not include_specials and t.construal.scene in specials:
            continue
        by_lemma.setdefault(t.lemma, Counter())[t.construal.get(dimension)] += 1
        klass_of.setdefault(t.lemma, t.klass)
    rows = []
    for lemma, counts in by_lemma.items():
        n = sum(counts.values())
        if n >= min_n:
            rows.append(EntropyRow(lemma, chao_shen_entropy(list(counts.values())), n,
                                   klass_of[lemma]))
    rows.sort(key=lambda r: (-r.entropy, r.lemma))
    return rows
