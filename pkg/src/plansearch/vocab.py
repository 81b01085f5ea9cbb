"""Fixed token tables used to canonicalize and classify plan literals."""

from __future__ import annotations

NUMBER_WORDS = {
    "one": 1,
    "two": 2,
    "three": 3,
    "four": 4,
    "five": 5,
    "six": 6,
    "seven": 7,
    "eight": 8,
    "nine": 9,
    "ten": 10,
}

SYNONYMS = {
    "tiny": "small",
    "big": "large",
    "matte": "rubber",
    "shiny": "metal",
    "metallic": "metal",
    "ball": "sphere",
    "block": "cube",
}

COLORS = frozenset({"gray", "red", "blue", "green", "brown", "purple", "cyan", "yellow"})
SIZES = frozenset({"small", "large"})
MATERIALS = frozenset({"rubber", "metal"})

SLOT_COUNT = "count"
SLOT_COLOR = "color"
SLOT_SIZE = "size"
SLOT_MATERIAL = "material"
SLOT_NAME = "name"


def canonical(token: str) -> str:
    """Lowercase, collapse whitespace and map synonyms onto the stored scene form."""
    text = " ".join(token.lower().split())
    return SYNONYMS.get(text, text)


def classify(token: str) -> tuple[str, str | int]:
    """Return ``(slot, canonical value)`` for one descriptor token.

    Number words become integer counts; anything not found in the fixed tables is
    taken as a part or shape name.
    """
    text = canonical(token)
    if text in NUMBER_WORDS:
        return SLOT_COUNT, NUMBER_WORDS[text]
    if text in COLORS:
        return SLOT_COLOR, text
    if text in SIZES:
        return SLOT_SIZE, text
    if text in MATERIALS:
        return SLOT_MATERIAL, text
    return SLOT_NAME, text
