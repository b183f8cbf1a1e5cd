"""Emission feature providers for the CRF tagger.

A provider maps ``(sentence, token_id)`` to a list of ``(name, value)``
pairs; ``token_id`` is 1-based like ``Token.id``. Indicator features have
value 1.0. Dense per-token vectors (e.g. from a pretrained encoder) enter
through :class:`EmbeddingFeatures` as real-valued features, so the CRF does
not need to know where a feature came from.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Protocol

import numpy as np

from ..conllulex import Sentence
from ..inventory import LabelInventory, default_inventory

FeatureVector = list[tuple[str, float]]

BOS = "<s>"
EOS = "</s>"
MAX_NGRAM = 4


class FeatureProvider(Protocol):
    def __call__(self, sent: Sentence, token_id: int) -> FeatureVector: ...


class TemplateFeatures:
    """Fixed indicator templates over forms, lemmas, POS and the target lexicon."""

    def __init__(self, inventory: LabelInventory | None = None):
        self.inventory = inventory or default_inventory()

    def _class_of(self, lemmas: Sequence[str]) -> str | None:
        return self.inventory.classify(" ".join(lemmas))

    def __call__(self, sent: Sentence, token_id: int) -> FeatureVector:
        toks = sent.tokens
        n = len(toks)
        if not 1 <= token_id <= n:
            raise IndexError(f"token id {token_id} outside 1..{n}")
        i = token_id - 1
        tok = toks[i]
        forms = [t.form for t in toks]
        lemmas = [t.lemma for t in toks]

        def at(seq, j):
            if j < 0:
                return BOS
            if j >= n:
                return EOS
            return seq[j]

        names = [
            "bias",
            f"form={tok.form}",
            f"lemma={tok.lemma}",
            f"upos={tok.upos}",
            f"upos|lemma={tok.upos}|{tok.lemma}",
        ]
        for off in (-2, -1, 1, 2):
            names.append(f"form[{off:+d}]={at(forms, i + off)}")
            names.append(f"lemma[{off:+d}]={at(lemmas, i + off)}")
        names.append(f"upos[-1]={toks[i - 1].upos if i > 0 else BOS}")
        names.append(f"upos[+1]={toks[i + 1].upos if i + 1 < n else EOS}")
        names.append(f"lemma[-1]|lemma={at(lemmas, i - 1)}|{tok.lemma}")
        names.append(f"lemma|lemma[+1]={tok.lemma}|{at(lemmas, i + 1)}")
        klass = self.inventory.classify(tok.lemma)
        if klass is not None:
            names.append(f"class={klass}")
            names.append(f"class|lemma={klass}|{tok.lemma}")
        # multiword lexicon entries starting at, or covering, this token
        for k in range(2, MAX_NGRAM + 1):
            for s in range(i - k + 1, i + 1):
                if s < 0 or s + k > n:
                    continue
                # inflected members (के for का) match on surface forms
                for seq in (lemmas, forms):
                    mwe_class = self._class_of(seq[s:s + k])
                    if mwe_class is not None:
                        where = "start" if s == i else "inside"
                        names.append(f"mwe_{where}={mwe_class}")
                        names.append(f"mwe_{where}_lemma={' '.join(seq[s:s + k])}")
                        break
        for k in (1, 2, 3):
            if len(tok.form) >= k:
                names.append(f"prefix{k}={tok.form[:k]}")
                names.append(f"suffix{k}={tok.form[-k:]}")
        if i == 0:
            names.append("BOS")
        if i == n - 1:
            names.append("EOS")
        return [(name, 1.0) for name in dict.fromkeys(names)]


class EmbeddingFeatures:
    """Real-valued features ``emb[k]`` from a token-to-vector function."""

    def __init__(self, embed: Callable[[str], np.ndarray], prefix: str = "emb"):
        self.embed = embed
        self.prefix = prefix

    def __call__(self, sent: Sentence, token_id: int) -> FeatureVector:
        vec = np.asarray(self.embed(sent.tokens[token_id - 1].form), dtype=float)
        return [(f"{self.prefix}[{k}]", float(v)) for k, v in enumerate(vec) if v != 0.0]


class CombinedFeatures:
    def __init__(self, *providers: FeatureProvider):
        self.providers = providers

    def __call__(self, sent: Sentence, token_id: int) -> FeatureVector:
        out = []
        for p in self.providers:
            out.extend(p(sent, token_id))
        return out


def extract_features(sent: Sentence, token_id: int,
                     inventory: LabelInventory | None = None) -> FeatureVector:
    return TemplateFeatures(inventory)(sent, token_id)
