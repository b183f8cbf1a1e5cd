"""Linear-chain CRF over BIO tags with sparse emission features.

Label alphabet is ``["O", "I", "B-<label>", ...]``. Transitions O->I and
start->I are fixed at -inf, so every decoded sequence is valid BIO.
"""

from __future__ import annotations

import io
import json
import logging
import math
import struct
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..bio import INSIDE, OUTSIDE, TagSequence, encode_bio
from ..conllulex import Corpus, Sentence
from ..evaluation import evaluate
from . import _kernels
from .features import FeatureProvider, TemplateFeatures

log = logging.getLogger(__name__)

MAGIC = b"SNACSCRF"
FORMAT_VERSION = 1
LEARNING_RATES = (0.0001, 0.0002, 0.0005, 0.001)


class CrfError(ValueError):
    pass


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class CrfConfig:
    learning_rate: float = 0.001
    epochs: int = 30
    l2: float = 1e-4
    batch_size: int = 1
    seed: int = 42
    min_feature_count: int = 1
    dimension: str = "scene"


@dataclass
class FeatureSeq:
    """CSR-style sparse features of one sentence: token t owns ids[offsets[t]:offsets[t+1]]."""
    ids: np.ndarray
    vals: np.ndarray
    offsets: np.ndarray

    def __len__(self):
        return len(self.offsets) - 1

    @classmethod
    def from_lists(cls, rows: list[list[tuple[int, float]]]) -> FeatureSeq:
        offsets = np.zeros(len(rows) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([len(r) for r in rows])
        ids = np.array([f for r in rows for f, _ in r], dtype=np.int64)
        vals = np.array([v for r in rows for _, v in r], dtype=np.float64)
        return cls(ids, vals, offsets)


def transition_mask(labels: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Allowed (prev, next) transitions and allowed start labels."""
    L = len(labels)
    allowed = np.ones((L, L), dtype=bool)
    start = np.ones(L, dtype=bool)
    if INSIDE in labels:
        i = labels.index(INSIDE)
        start[i] = False
        if OUTSIDE in labels:
            allowed[labels.index(OUTSIDE), i] = False
    return allowed, start


@dataclass
class Gradient:
    W: np.ndarray
    trans: np.ndarray
    start: np.ndarray
    end: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.W.ravel(), self.trans.ravel(), self.start, self.end])


@dataclass
class CrfModel:
    labels: list[str]
    features: list[str]
    W: np.ndarray
    trans: np.ndarray
    start: np.ndarray
    end: np.ndarray
    config: CrfConfig = field(default_factory=CrfConfig)
    meta: dict = field(default_factory=dict)
    provider: FeatureProvider | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.allowed, self.start_allowed = transition_mask(self.labels)
        self._label_index = {l: i for i, l in enumerate(self.labels)}
        self._feature_index = {f: i for i, f in enumerate(self.features)}

    @classmethod
    def zeros(cls, labels, features, config: CrfConfig | None = None) -> CrfModel:
        L, F = len(labels), len(features)
        return cls(list(labels), list(features), np.zeros((L, F)), np.zeros((L, L)),
                   np.zeros(L), np.zeros(L), config or CrfConfig())

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def effective_transitions(self):
        trans = np.where(self.allowed, self.trans, -np.inf)
        start = np.where(self.start_allowed, self.start, -np.inf)
        return trans, start, self.end

    def label_ids(self, tags) -> np.ndarray:
        tags = tags.tags if isinstance(tags, TagSequence) else tags
        try:
            return np.array([self._label_index[t] for t in tags], dtype=np.int64)
        except KeyError as e:
            raise CrfError(f"tag {e.args[0]!r} not in label alphabet") from None

    def check_features(self, fs: FeatureSeq):
        if len(fs.ids) and (fs.ids.min() < 0 or fs.ids.max() >= len(self.features)):
            raise CrfError("feature id outside alphabet")

    def emissions(self, fs: FeatureSeq) -> np.ndarray:
        self.check_features(fs)
        return _kernels.emissions(self.W, fs.ids, fs.vals, fs.offsets)

    def sequence_score(self, fs: FeatureSeq, y) -> float:
        y = np.asarray(y)
        emit = self.emissions(fs)
        trans, start, end = self.effective_transitions()
        s = start[y[0]] + end[y[-1]] + emit[np.arange(len(y)), y].sum()
        if len(y) > 1:
            s += trans[y[:-1], y[1:]].sum()
        return float(s)

    def featurize(self, sent: Sentence) -> FeatureSeq:
        """Sparse features for ``sent``; names outside the alphabet are dropped."""
        provider = self.provider or TemplateFeatures()
        rows = []
        for tok in sent.tokens:
            row = [(self._feature_index[n], v) for n, v in provider(sent, tok.id)
                   if n in self._feature_index]
            rows.append(row)
        return FeatureSeq.from_lists(rows)

    def decode_ids(self, fs: FeatureSeq) -> tuple[np.ndarray, float]:
        trans, start, end = self.effective_transitions()
        return _kernels.viterbi(self.emissions(fs), trans, start, end)

    def viterbi_decode(self, fs: FeatureSeq | Sentence) -> TagSequence:
        if isinstance(fs, Sentence):
            fs = self.featurize(fs)
        if len(fs) == 0:
            return TagSequence(())
        path, _ = self.decode_ids(fs)
        return TagSequence(tuple(self.labels[i] for i in path))

    def tag(self, sent: Sentence) -> TagSequence:
        return self.viterbi_decode(sent)

    # --- serialization ---

    def to_bytes(self) -> bytes:
        header = {
            "format": FORMAT_VERSION,
            "kind": "crf",
            "config": asdict(self.config),
            "labels": self.labels,
            "features": self.features,
            "meta": self.meta,
        }
        head = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
        buf = io.BytesIO()
        buf.write(MAGIC)
        buf.write(struct.pack("<Q", len(head)))
        buf.write(head)
        for arr in (self.W, self.trans, self.start, self.end):
            np.save(buf, np.ascontiguousarray(arr, dtype="<f8"), allow_pickle=False)
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> CrfModel:
        if not data.startswith(MAGIC):
            raise CrfError("not a CRF model file")
        buf = io.BytesIO(data)
        buf.read(len(MAGIC))
        (n,) = struct.unpack("<Q", buf.read(8))
        header = json.loads(buf.read(n).decode("utf-8"))
        if header.get("format") != FORMAT_VERSION:
            raise CrfError(f"unsupported model format {header.get('format')!r}")
        arrays = [np.load(buf, allow_pickle=False) for _ in range(4)]
        return cls(header["labels"], header["features"], *arrays,
                   config=CrfConfig(**header["config"]), meta=header["meta"])

    def save(self, path):
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> CrfModel:
        return cls.from_bytes(Path(path).read_bytes())


def crf_loglik_grad(model: CrfModel, batch, l2: float | None = None
                    ) -> tuple[float, Gradient]:
    """Summed negative log-likelihood of ``batch`` and its gradient.

    ``batch`` holds ``(FeatureSeq, gold)`` pairs, gold being label ids or a
    TagSequence. The L2 penalty ``l2/2 * ||theta||^2`` is added once.
    Sentences are reduced in batch order, so the result is deterministic.
    """
    l2 = model.config.l2 if l2 is None else l2
    L = model.n_labels
    trans, start, end = model.effective_transitions()
    gW = np.zeros_like(model.W)
    gT = np.zeros((L, L))
    gS = np.zeros(L)
    gE = np.zeros(L)
    nll = 0.0
    for fs, gold in batch:
        y = gold if isinstance(gold, np.ndarray) else model.label_ids(gold)
        if len(y) != len(fs):
            raise CrfError("gold length differs from feature sequence length")
        if len(y) == 0:
            continue
        emit = model.emissions(fs)
        log_z, marg, pair = _kernels.forward_backward(emit, trans, start, end)
        gold_score = start[y[0]] + end[y[-1]] + emit[np.arange(len(y)), y].sum()
        if len(y) > 1:
            gold_score += trans[y[:-1], y[1:]].sum()
        nll += log_z - gold_score
        coef = marg.copy()
        coef[np.arange(len(y)), y] -= 1.0
        _kernels.scatter_grad(gW, fs.ids, fs.vals, fs.offsets, coef)
        gT += pair
        np.add.at(gT, (y[:-1], y[1:]), -1.0)
        gS += marg[0]
        gS[y[0]] -= 1.0
        gE += marg[-1]
        gE[y[-1]] -= 1.0
    if l2:
        nll += 0.5 * l2 * (np.sum(model.W ** 2) + np.sum(model.trans[model.allowed] ** 2)
                           + np.sum(model.start[model.start_allowed] ** 2)
                           + np.sum(model.end ** 2))
        gW += l2 * model.W
        gT += l2 * model.trans
        gS += l2 * model.start
        gE += l2 * model.end
    gT[~model.allowed] = 0.0
    gS[~model.start_allowed] = 0.0
    return float(nll), Gradient(gW, gT, gS, gE)


# --- training ----------------------------------------------------------------

def build_alphabets(sentences: list[Sentence], gold: list[TagSequence],
                    provider: FeatureProvider, min_count: int = 1):
    label_set = {t for seq in gold for t in seq.tags}
    b_labels = sorted(t for t in label_set if t not in (OUTSIDE, INSIDE))
    labels = [OUTSIDE, INSIDE] + b_labels
    counts = Counter()
    for sent in sentences:
        for tok in sent.tokens:
            counts.update(name for name, _ in provider(sent, tok.id))
    features = sorted((n for n, c in counts.items() if c >= min_count))
    return labels, features


def train_crf(train: Corpus, dev: Corpus | None = None, config: CrfConfig | None = None,
              provider: FeatureProvider | None = None, history: list | None = None
              ) -> CrfModel:
    """Mini-batch gradient descent with L2; keeps the weights of the best dev epoch.

    ``history`` receives one dict per epoch (train nll, dev F1) when given.
    """
    config = config or CrfConfig()
    provider = provider or TemplateFeatures(train.inventory)
    sentences = [s for s in train.sentences if len(s.tokens)]
    if not sentences:
        raise TrainingError("empty training corpus")
    gold = [encode_bio(s, train.inventory, config.dimension) for s in sentences]
    labels, features = build_alphabets(sentences, gold, provider, config.min_feature_count)
    model = CrfModel.zeros(labels, features, config)
    model.provider = provider
    data = [(model.featurize(s), model.label_ids(g)) for s, g in zip(sentences, gold)]

    dev_sents = list(dev.sentences) if dev is not None else []
    dev_gold = [encode_bio(s, dev.inventory, config.dimension) for s in dev_sents]
    dev_feats = [model.featurize(s) for s in dev_sents]

    rng = np.random.default_rng(config.seed)
    best = None
    best_f1 = -1.0
    best_epoch = 0
    epochs_log = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(data))
        total = 0.0
        for a in range(0, len(order), config.batch_size):
            batch = [data[j] for j in order[a:a + config.batch_size]]
            nll, grad = crf_loglik_grad(model, batch)
            if not math.isfinite(nll) or not np.all(np.isfinite(grad.W)):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            total += nll
            lr = config.learning_rate
            model.W -= lr * grad.W
            model.trans -= lr * grad.trans
            model.start -= lr * grad.start
            model.end -= lr * grad.end
        record = {"epoch": epoch, "train_nll": total}
        if dev_sents:
            pred = [model.viterbi_decode(f) for f in dev_feats]
            f1 = evaluate(dev_gold, pred, config.dimension).f1
            record["dev_f1"] = f1
            if f1 > best_f1:
                best_f1, best_epoch = f1, epoch
                best = (model.W.copy(), model.trans.copy(), model.start.copy(), model.end.copy())
            log.info("epoch %d nll %.4f dev F1 %.4f", epoch, total, f1)
        else:
            log.info("epoch %d nll %.4f", epoch, total)
        epochs_log.append(record)
        if history is not None:
            history.append(record)
    if best is not None:
        model.W, model.trans, model.start, model.end = best
    model.meta = {"best_epoch": best_epoch if best is not None else config.epochs,
                  "best_dev_f1": best_f1 if best is not None else None,
                  "n_train_sentences": len(sentences),
                  "history": epochs_log}
    return model
