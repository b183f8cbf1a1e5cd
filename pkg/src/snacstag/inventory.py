"""Label inventory and target lexicon, loaded from a versioned YAML config."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

TARGET_CLASSES = ("case", "emphatic", "adposition")
SUPPORTED_FORMATS = (1,)
INVENTORY_ENV = "SNACSTAG_INVENTORY"


class InventoryError(ValueError):
    pass


@dataclass(frozen=True)
class LabelInventory:
    supersenses: frozenset[str]
    specials: frozenset[str]
    target_lexicon: dict[str, str] = field(hash=False)
    version: str = ""

    def __post_init__(self):
        overlap = self.supersenses & self.specials
        if overlap:
            raise InventoryError(f"labels are both supersense and special: {sorted(overlap)}")
        bad = {k for k in self.target_lexicon.values() if k not in TARGET_CLASSES}
        if bad:
            raise InventoryError(f"unknown target classes: {sorted(bad)}")

    @property
    def labels(self) -> frozenset[str]:
        return self.supersenses | self.specials

    def is_label(self, label: str) -> bool:
        return label in self.supersenses or label in self.specials

    def classify(self, lemma: str) -> str | None:
        """Return the target class of ``lemma`` or None when it is not listed."""
        return self.target_lexicon.get(lemma)


def inventory_from_mapping(data: dict) -> LabelInventory:
    fmt = data.get("format")
    if fmt not in SUPPORTED_FORMATS:
        raise InventoryError(f"unsupported inventory format: {fmt!r}")
    lexicon = {}
    for klass, lemmas in (data.get("target_lexicon") or {}).items():
        if klass not in TARGET_CLASSES:
            raise InventoryError(f"unknown target class {klass!r}")
        for lemma in lemmas or ():
            if lemma in lexicon and lexicon[lemma] != klass:
                raise InventoryError(f"lemma {lemma!r} listed under two classes")
            lexicon[lemma] = klass
    return LabelInventory(
        supersenses=frozenset(data.get("supersenses") or ()),
        specials=frozenset(data.get("specials") or ()),
        target_lexicon=lexicon,
        version=str(data.get("version", "")),
    )


def load_inventory(path: str | os.PathLike | None = None) -> LabelInventory:
    """Load an inventory file.

    With no path, ``$SNACSTAG_INVENTORY`` is used if set, otherwise the
    bundled default.
    """
    if path is None:
        path = os.environ.get(INVENTORY_ENV) or None
    if path is None:
        text = resources.files("snacstag").joinpath("data/inventory.yaml").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return inventory_from_mapping(yaml.safe_load(text))


_default: LabelInventory | None = None


def default_inventory() -> LabelInventory:
    global _default
    if _default is None:
        text = resources.files("snacstag").joinpath("data/inventory.yaml").read_text("utf-8")
        _default = inventory_from_mapping(yaml.safe_load(text))
    return _default
