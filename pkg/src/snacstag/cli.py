"""Command-line entry point: ``snacstag <subcommand> ...``.

Exit status is 0 on success, 1 on bad input or usage, 2 on internal errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .agreement import (
    AgreementError,
    align_double_annotations,
    cohens_kappa,
    per_lemma_agreement,
    raw_agreement,
)
from .bio import BioError, bigram_segmenter, encode_bio, project_subwords, read_tagged_file, segment, write_tagged
from .conllulex import DIMENSIONS, Corpus, CorpusParseError, corpus_targets, read_corpus, validate
from .evaluation import DEFAULT_RATIOS, EvalError, Split, evaluate, split_corpus
from .inventory import InventoryError, load_inventory
from .repro import mean_f1, reproduce
from .stats import EntropyError, corpus_summary, label_distribution, target_entropy_table
from .tagger.baseline import BaselineModel, baseline_tag, train_baseline
from .tagger.crf import MAGIC, CrfConfig, CrfError, CrfModel, TrainingError, train_crf

INPUT_ERRORS = (OSError, CorpusParseError, InventoryError, AgreementError, BioError,
                EvalError, EntropyError, CrfError, TrainingError, json.JSONDecodeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --- output --------------------------------------------------------------

def _fmt_cell(v):
    if isinstance(v, float):
        return f"{v:.2f}"
    return "" if v is None else str(v)


def emit_table(name: str, columns: list[str], rows: list[list], fmt: str, out) -> None:
    """Aligned text, or one JSON document per table in ``records`` mode."""
    if fmt == "records":
        doc = {"table": name, "columns": columns, "rows": [list(r) for r in rows]}
        out.write(json.dumps(doc, ensure_ascii=False, sort_keys=True) + "\n")
        return
    cells = [columns] + [[_fmt_cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    out.write(f"## {name}\n")
    for r in cells:
        line = "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                         for i, (c, w) in enumerate(zip(r, widths)))
        out.write(line.rstrip() + "\n")
    out.write("\n")


def _load(args, path) -> Corpus:
    return read_corpus(path, load_inventory(args.inventory), strict=not args.lenient)


def _write(text: str, path: str | None, out) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def _subset(args, corpus: Corpus) -> Corpus:
    if getattr(args, "split", None):
        split = Split.from_json(Path(args.split).read_text(encoding="utf-8"))
        return corpus.subset(split.ids(args.bucket))
    return corpus


# --- subcommands -------------------------------------------------------------

def cmd_validate(args, out):
    inventory = load_inventory(args.inventory)
    corpus = read_corpus(args.corpus, inventory, strict=False)
    diags = list(corpus.diagnostics) + validate(corpus, inventory)
    warnings = []
    corpus_targets(corpus, inventory, warnings)
    diags += warnings
    rows = [[d.severity, d.line, d.sent_id, d.token_id, d.rule, d.message] for d in diags]
    emit_table("diagnostics", ["severity", "line", "sent_id", "token", "rule", "message"],
               rows, args.format, out)
    return 1 if any(d.severity == "error" for d in diags) else 0


def cmd_stats(args, out):
    corpus = _load(args, args.corpus)
    targets = corpus_targets(corpus)
    summary = corpus_summary(corpus, targets)
    emit_table("summary", ["row", "count", "percent", "types"],
               [list(r) for r in summary.rows()], args.format, out)
    if args.distributions:
        for dim in ("lemma", "scene", "function", "construal"):
            rows = []
            for klass in ("case", "emphatic", "adposition"):
                dist = label_distribution(corpus, klass, dim, targets)
                top = dist.percentages(len(targets))[: args.top]
                rows.extend([klass, k, c, p] for k, c, p in top)
            emit_table(f"distribution:{dim}", ["class", dim, "count", "percent_of_targets"],
                       rows, args.format, out)
    return 0


def cmd_entropy(args, out):
    corpus = _load(args, args.corpus)
    rows = target_entropy_table(corpus, args.min_n, args.dimension,
                                include_specials=not args.exclude_specials)
    emit_table("entropy", ["lemma", "class", "entropy", "n"],
               [[r.lemma, r.klass, r.entropy, r.n] for r in rows], args.format, out)
    return 0


def cmd_agree(args, out):
    pairs = align_double_annotations(_load(args, args.a), _load(args, args.b))
    dims = [args.dimension] if args.dimension else list(DIMENSIONS)
    emit_table("agreement", ["dimension", "pairs", "raw", "kappa"],
               [[d, len(pairs), raw_agreement(pairs, d), cohens_kappa(pairs, d)] for d in dims],
               args.format, out)
    if args.per_target:
        rows = per_lemma_agreement(pairs, args.min_n)
        emit_table("agreement_per_target", ["lemma", "n", "scene", "function", "construal"],
                   [[r.lemma, r.n, r.scene, r.function, r.construal] for r in rows],
                   args.format, out)
    return 0


def cmd_bio(args, out):
    corpus = _load(args, args.corpus)
    items = []
    for sent in corpus.sentences:
        seq = encode_bio(sent, corpus.inventory, args.dimension)
        forms = sent.forms
        if args.subwords:
            seg = segment(forms, bigram_segmenter)
            seq = project_subwords(seq, seg)
            forms = [p for _, pieces in seg for p in pieces]
        items.append((forms, seq))
    _write(write_tagged(items), args.out, out)
    return 0


def cmd_split(args, out):
    corpus = _load(args, args.corpus)
    split = split_corpus(corpus, tuple(args.ratios), args.seed)
    if args.out:
        Path(args.out).write_text(split.to_json() + "\n", encoding="utf-8")
    sizes = split.sizes()
    emit_table("split", ["bucket", "sentences"], [[b, n] for b, n in sizes.items()],
               args.format, out)
    return 0


def cmd_train_baseline(args, out):
    corpus = _subset(args, _load(args, args.corpus))
    model = train_baseline(corpus)
    _write(model.to_json() + "\n", args.out, out)
    return 0


def cmd_train_crf(args, out):
    corpus = _load(args, args.corpus)
    if args.split:
        split = Split.from_json(Path(args.split).read_text(encoding="utf-8"))
        parts = split.apply(corpus)
        train, dev = parts["train"], parts["dev"]
    else:
        train, dev = corpus, None
    config = CrfConfig(learning_rate=args.lr, epochs=args.epochs, l2=args.l2,
                       batch_size=args.batch_size, seed=args.seed, dimension=args.dimension)
    model = train_crf(train, dev, config)
    model.save(args.out)
    rows = [[h["epoch"], h["train_nll"], h.get("dev_f1")] for h in model.meta["history"]]
    emit_table("training", ["epoch", "train_nll", "dev_f1"], rows, args.format, out)
    return 0


def _load_model(path):
    data = Path(path).read_bytes()
    if data.startswith(MAGIC):
        return CrfModel.from_bytes(data)
    return BaselineModel.from_json(data.decode("utf-8"))


def cmd_tag(args, out):
    corpus = _subset(args, _load(args, args.corpus))
    model = _load_model(args.model)
    items = []
    for sent in corpus.sentences:
        if isinstance(model, CrfModel):
            seq = model.tag(sent)
        else:
            seq = baseline_tag(model, sent, args.targets_known, args.dimension, corpus.inventory)
        items.append((sent.forms, seq))
    _write(write_tagged(items), args.out, out)
    return 0


def cmd_eval(args, out):
    gold = read_tagged_file(args.gold)
    pred = read_tagged_file(args.pred)
    for k, ((gf, _), (pf, _)) in enumerate(zip(gold, pred)):
        if gf != pf:
            raise EvalError(f"sentence {k}: gold and predicted forms differ")
    dims = args.dimension or ["scene", "function"]
    rows = []
    for dim in dims:
        r = evaluate([t for _, t in gold], [t for _, t in pred], dim)
        rows.append([dim, r.precision, r.recall, r.f1, r.n_gold, r.n_pred, r.n_match, r.repairs])
    emit_table("evaluation", ["dimension", "precision", "recall", "f1", "gold_B", "pred_B",
                              "matches", "repairs"], rows, args.format, out)
    return 0


def cmd_repro(args, out):
    corpus = _load(args, args.corpus)
    modes = ("unknown", "known") if args.targets == "both" else (args.targets,)
    crf_config = CrfConfig(epochs=args.crf_epochs, learning_rate=args.crf_lr,
                           seed=args.seed) if args.crf else None
    res = reproduce(corpus, args.seed, args.splits, args.min_n, modes, crf_config)
    emit_table("summary", ["row", "count", "percent", "types"],
               [list(r) for r in res.summary.rows()], args.format, out)
    emit_table("lemma_shares", ["class", "lemma", "count", "percent_of_targets"],
               [list(r) for r in res.lemma_shares], args.format, out)
    emit_table("entropy", ["lemma", "class", "entropy", "n"],
               [[r.lemma, r.klass, r.entropy, r.n] for r in res.entropy], args.format, out)
    rows = []
    for mode, runs in res.runs.items():
        for run in runs:
            rows.append([mode, run.seed, run.sizes["test"], 100 * run.scores["scene"].f1,
                         100 * run.scores["function"].f1])
        rows.append([mode, "mean", None, 100 * mean_f1(runs, "scene"),
                     100 * mean_f1(runs, "function")])
    emit_table("baseline_test_f1", ["targets", "seed", "test_sentences", "scene_f1",
                                    "function_f1"], rows, args.format, out)
    if res.crf:
        emit_table("crf_vs_baseline_dev_f1", ["dimension", "crf", "baseline", "best_epoch"],
                   [[c.dimension, 100 * c.crf_dev_f1, 100 * c.baseline_dev_f1, c.best_epoch]
                    for c in res.crf], args.format, out)
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--inventory", help="label inventory YAML (default: $SNACSTAG_INVENTORY "
                        "or the bundled one)")
    common.add_argument("--format", choices=("text", "records"), default="text")
    common.add_argument("--lenient", action="store_true",
                        help="drop malformed sentences instead of failing")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="snacstag", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "check a corpus file")
    sp.add_argument("corpus")

    sp = add("stats", cmd_stats, "corpus summary counts")
    sp.add_argument("corpus")
    sp.add_argument("--distributions", action="store_true", help="also print label breakdowns")
    sp.add_argument("--top", type=int, default=7)

    sp = add("entropy", cmd_entropy, "per-target label entropy")
    sp.add_argument("corpus")
    sp.add_argument("--min-n", type=int, default=20)
    sp.add_argument("--dimension", choices=DIMENSIONS, default="scene")
    sp.add_argument("--exclude-specials", action="store_true")

    sp = add("agree", cmd_agree, "inter-annotator agreement")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--dimension", choices=DIMENSIONS)
    sp.add_argument("--per-target", action="store_true")
    sp.add_argument("--min-n", type=int, default=20)

    sp = add("bio", cmd_bio, "write BIO-tagged sentences")
    sp.add_argument("corpus")
    sp.add_argument("--dimension", choices=DIMENSIONS, default="construal")
    sp.add_argument("--subwords", action="store_true", help="project onto bigram subwords")
    sp.add_argument("--out")

    sp = add("split", cmd_split, "seeded train/dev/test split")
    sp.add_argument("corpus")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--ratios", type=float, nargs=3, default=list(DEFAULT_RATIOS))
    sp.add_argument("--out")

    for name, func, help in (("train-baseline", cmd_train_baseline, "most-frequent-label model"),
                             ("tag", cmd_tag, "tag a corpus with a saved model")):
        sp = add(name, func, help)
        sp.add_argument("corpus")
        sp.add_argument("--split", help="split JSON; restricts to --bucket")
        sp.add_argument("--bucket", choices=("train", "dev", "test"),
                        default="train" if name == "train-baseline" else "test")
        sp.add_argument("--out")
        if name == "tag":
            sp.add_argument("--model", required=True)
            sp.add_argument("--dimension", choices=DIMENSIONS, default="scene")
            sp.add_argument("--targets-known", action="store_true")

    sp = add("train-crf", cmd_train_crf, "train the CRF tagger")
    sp.add_argument("corpus")
    sp.add_argument("--split", help="split JSON; trains on train, selects on dev")
    sp.add_argument("--out", required=True)
    sp.add_argument("--dimension", choices=DIMENSIONS, default="scene")
    sp.add_argument("--lr", type=float, default=0.001)
    sp.add_argument("--epochs", type=int, default=30)
    sp.add_argument("--l2", type=float, default=1e-4)
    sp.add_argument("--batch-size", type=int, default=1)
    sp.add_argument("--seed", type=int, default=42)

    sp = add("eval", cmd_eval, "score predicted tags against gold")
    sp.add_argument("--gold", required=True)
    sp.add_argument("--pred", required=True)
    sp.add_argument("--dimension", choices=("scene", "function", "construal"), action="append")

    sp = add("repro", cmd_repro, "summary, entropy and baseline scores in one run")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--splits", type=int, default=10)
    sp.add_argument("--min-n", type=int, default=20)
    sp.add_argument("--targets", choices=("unknown", "known", "both"), default="both")
    sp.add_argument("--crf", action="store_true", help="also compare a CRF to the baseline on dev")
    sp.add_argument("--crf-epochs", type=int, default=30)
    sp.add_argument("--crf-lr", type=float, default=0.05,
                    help="step size for the CRF comparison (default 0.05)")
    return p


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    if not args.command:
        parser.print_help(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
