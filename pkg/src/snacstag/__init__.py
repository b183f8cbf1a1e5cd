"""Toolkit for adposition and case supersense (SNACS) corpora in CoNLL-U-Lex format."""

from .conllulex import (
    Construal,
    Corpus,
    CorpusParseError,
    Diagnostic,
    Sentence,
    Target,
    Token,
    corpus_targets,
    extract_targets,
    parse_corpus,
    read_corpus,
    validate,
    write_corpus,
)
from .inventory import LabelInventory, default_inventory, load_inventory

__version__ = "0.1.0"

__all__ = [
    "Construal",
    "Corpus",
    "CorpusParseError",
    "Diagnostic",
    "Sentence",
    "Target",
    "Token",
    "corpus_targets",
    "extract_targets",
    "parse_corpus",
    "read_corpus",
    "validate",
    "write_corpus",
    "LabelInventory",
    "default_inventory",
    "load_inventory",
]
