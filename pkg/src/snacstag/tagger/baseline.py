"""Most-frequent-label baseline: each target lemma gets its commonest label."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..bio import INSIDE, OUTSIDE, TagSequence, b_tag
from ..conllulex import Construal, Corpus, Sentence, corpus_targets, extract_targets
from ..inventory import LabelInventory, default_inventory

FORMAT_VERSION = 1


def most_common(counts: Counter) -> str | None:
    """Highest count; ties go to the lexicographically smallest label."""
    if not counts:
        return None
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


@dataclass
class BaselineModel:
    lemma_counts: dict[str, Counter] = field(default_factory=dict)
    inventory: LabelInventory | None = field(default=None, repr=False)

    @property
    def global_counts(self) -> Counter:
        total = Counter()
        for c in self.lemma_counts.values():
            total.update(c)
        return total

    def counts_for(self, lemma: str | None, dimension: str) -> Counter:
        """Label counts of ``lemma`` (all lemmas when None) projected to ``dimension``."""
        source = self.global_counts if lemma is None else self.lemma_counts.get(lemma, Counter())
        out = Counter()
        for text, n in source.items():
            out[Construal.from_text(text).get(dimension)] += n
        return out

    def predict(self, lemma: str, dimension: str) -> str | None:
        label = most_common(self.counts_for(lemma, dimension))
        if label is None:
            label = most_common(self.counts_for(None, dimension))
        return label

    @property
    def lexicon(self) -> dict[tuple[str, ...], str]:
        """Training target lemmas keyed by their token sequence."""
        return {tuple(lemma.split(" ")): lemma for lemma in self.lemma_counts}

    def to_json(self) -> str:
        data = {"format": FORMAT_VERSION, "kind": "baseline",
                "lemma_counts": {k: dict(sorted(v.items()))
                                 for k, v in sorted(self.lemma_counts.items())}}
        return json.dumps(data, ensure_ascii=False, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> BaselineModel:
        data = json.loads(text)
        if data.get("format") != FORMAT_VERSION or data.get("kind") != "baseline":
            raise ValueError("not a baseline model file")
        return cls({k: Counter(v) for k, v in data["lemma_counts"].items()})

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> BaselineModel:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def train_baseline(train: Corpus) -> BaselineModel:
    counts: dict[str, Counter] = {}
    for t in corpus_targets(train):
        counts.setdefault(t.lemma, Counter())[t.construal.text] += 1
    return BaselineModel(counts, train.inventory)


def find_lexicon_spans(sent: Sentence, lexicon: dict[tuple[str, ...], str]
                       ) -> list[tuple[list[int], str]]:
    """Greedy left-to-right longest match of training lemmas against lemmas or forms."""
    max_len = max((len(k) for k in lexicon), default=0)
    lemmas = [t.lemma for t in sent.tokens]
    forms = [t.form for t in sent.tokens]
    n = len(lemmas)
    out = []
    i = 0
    while i < n:
        hit = None
        for k in range(min(max_len, n - i), 0, -1):
            for seq in (lemmas, forms):
                key = tuple(seq[i:i + k])
                if key in lexicon:
                    hit = (list(range(i, i + k)), lexicon[key])
                    break
            if hit:
                break
        if hit:
            out.append(hit)
            i += len(hit[0])
        else:
            i += 1
    return out


def baseline_tag(model: BaselineModel, sent: Sentence, targets_known: bool = False,
                 dimension: str = "scene",
                 inventory: LabelInventory | None = None) -> TagSequence:
    """Tag ``sent`` with each target's most frequent training label.

    With ``targets_known`` the gold target spans are used; otherwise spans are
    found by longest match against the lemmas seen as targets in training.
    """
    tags = [OUTSIDE] * len(sent.tokens)
    if targets_known:
        inventory = inventory or model.inventory or default_inventory()
        spans = [([i - 1 for i in t.span], t.lemma) for t in extract_targets(sent, inventory)]
    else:
        spans = find_lexicon_spans(sent, model.lexicon)
    for idx, lemma in spans:
        label = model.predict(lemma, dimension)
        if label is None:
            continue
        tags[idx[0]] = b_tag(label)
        for i in idx[1:]:
            tags[i] = INSIDE
    return TagSequence(tuple(tags))
