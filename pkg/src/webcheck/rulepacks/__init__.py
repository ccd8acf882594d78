"""Built-in rule packs shipped as plain ``.evl`` files.

Each pack is a directory next to this module; ``PACKS`` lists its files
in evaluation order. Copy the files out to adapt them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from webcheck.constraint_dsl import RuleFile, parse_rules
from webcheck.errors import WebcheckError

PACKS: dict[str, tuple[str, ...]] = {
    "bootstrap": (
        "grid.evl",
        "buttons.evl",
        "alerts.evl",
        "button_groups.evl",
        "badges.evl",
        "images.evl",
    ),
}


class UnknownPack(WebcheckError):
    pass


@dataclass(frozen=True)
class RulePack:
    name: str
    rules_text: str
    rule_names: tuple[str, ...]

    def parse(self) -> RuleFile:
        return parse_rules(self.rules_text, f"<rulepack:{self.name}>")


def pack_files(name: str) -> list[tuple[str, str]]:
    """``(filename, text)`` for every file of pack ``name``."""
    if name not in PACKS:
        raise UnknownPack(f"unknown rule pack {name!r}; available: {', '.join(sorted(PACKS))}")
    root = resources.files(__name__).joinpath(name)
    return [(f, root.joinpath(f).read_text(encoding="utf-8")) for f in PACKS[name]]


@lru_cache(maxsize=None)
def get_rulepack(name: str) -> RulePack:
    texts = [text if text.endswith("\n") else text + "\n" for _, text in pack_files(name)]
    rules_text = "\n".join(texts)
    parsed = parse_rules(rules_text, f"<rulepack:{name}>")
    return RulePack(name, rules_text, tuple(c.name for c in parsed.constraints))


def available_packs() -> list[str]:
    return sorted(PACKS)
