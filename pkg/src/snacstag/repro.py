"""End-to-end reproduction of the corpus tables and the baseline tagging scores."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .bio import encode_bio
from .conllulex import Corpus, corpus_targets
from .evaluation import EvalReport, Split, evaluate, split_corpus
from .stats import EntropyRow, SummaryStats, corpus_summary, label_distribution, target_entropy_table
from .tagger.baseline import BaselineModel, baseline_tag, train_baseline
from .tagger.crf import CrfConfig, train_crf

SCORED_DIMENSIONS = ("scene", "function")


def score_baseline(model: BaselineModel, corpus: Corpus, targets_known: bool
                   ) -> dict[str, EvalReport]:
    out = {}
    for dim in SCORED_DIMENSIONS:
        gold = [encode_bio(s, corpus.inventory, dim) for s in corpus.sentences]
        pred = [baseline_tag(model, s, targets_known, dim, corpus.inventory)
                for s in corpus.sentences]
        out[dim] = evaluate(gold, pred, dim)
    return out


@dataclass
class BaselineRun:
    seed: int
    sizes: dict[str, int]
    scores: dict[str, EvalReport]


def baseline_runs(corpus: Corpus, seed: int = 42, n_splits: int = 10,
                  targets_known: bool = False, bucket: str = "test") -> list[BaselineRun]:
    """Train and score the baseline on ``n_splits`` splits seeded seed, seed+1, ..."""
    runs = []
    for k in range(n_splits):
        split = split_corpus(corpus, seed=seed + k)
        parts = split.apply(corpus)
        model = train_baseline(parts["train"])
        runs.append(BaselineRun(seed + k, split.sizes(),
                                score_baseline(model, parts[bucket], targets_known)))
    return runs


def mean_f1(runs: list[BaselineRun], dimension: str) -> float:
    return sum(r.scores[dimension].f1 for r in runs) / len(runs) if runs else 0.0


@dataclass
class CrfComparison:
    dimension: str
    crf_dev_f1: float
    baseline_dev_f1: float
    best_epoch: int


def compare_crf_to_baseline(corpus: Corpus, split: Split, config: CrfConfig | None = None,
                            targets_known: bool = False) -> list[CrfComparison]:
    parts = split.apply(corpus)
    base = score_baseline(train_baseline(parts["train"]), parts["dev"], targets_known)
    out = []
    for dim in SCORED_DIMENSIONS:
        cfg = replace(config or CrfConfig(), dimension=dim)
        model = train_crf(parts["train"], parts["dev"], cfg)
        gold = [encode_bio(s, corpus.inventory, dim) for s in parts["dev"].sentences]
        pred = [model.tag(s) for s in parts["dev"].sentences]
        out.append(CrfComparison(dim, evaluate(gold, pred, dim).f1, base[dim].f1,
                                 model.meta["best_epoch"]))
    return out


@dataclass
class ReproResult:
    summary: SummaryStats
    lemma_shares: list[tuple[str, str, int, float]]
    entropy: list[EntropyRow]
    runs: dict[str, list[BaselineRun]] = field(default_factory=dict)
    crf: list[CrfComparison] = field(default_factory=list)


def reproduce(corpus: Corpus, seed: int = 42, n_splits: int = 10, min_n: int = 20,
              modes: tuple[str, ...] = ("unknown", "known"),
              crf_config: CrfConfig | None = None) -> ReproResult:
    targets = corpus_targets(corpus)
    summary = corpus_summary(corpus, targets)
    shares = []
    for klass in ("case", "emphatic", "adposition"):
        dist = label_distribution(corpus, klass, "lemma", targets)
        shares.extend((klass, k, c, p) for k, c, p in dist.percentages(len(targets)))
    entropy = target_entropy_table(corpus, min_n, targets=targets)
    runs = {mode: baseline_runs(corpus, seed, n_splits, mode == "known") for mode in modes}
    crf = []
    if crf_config is not None:
        crf = compare_crf_to_baseline(corpus, split_corpus(corpus, seed=seed), crf_config)
    return ReproResult(summary, shares, entropy, runs, crf)
