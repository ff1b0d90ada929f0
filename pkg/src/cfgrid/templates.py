"""Answer-template normalization and top-k coverage.

An answer string becomes a template by lowercasing, collapsing
whitespace, stripping terminal punctuation, and replacing common
entities with bracketed placeholders like [COLOR] or [NUMBER]. The
coverage of the k most frequent templates over a corpus measures how
formulaic the corpus is: low coverage means diverse answers.

Placeholders are protected text: rules never match inside an existing
placeholder and lowercasing leaves them intact, so normalization is
idempotent and templates can be re-normalized safely.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyCorpusError, InputError, NumericValidationError

_PLACEHOLDER = re.compile(r"\[[A-Z][A-Z0-9_-]*\]")
_CATEGORY = re.compile(r"^\[[A-Z][A-Z0-9_-]*\]$")
_TERMINAL_PUNCT = re.compile(r"[.!?]+$")

DEFAULT_COLOR_WORDS = (
    "black", "blue", "beige", "brown", "cyan", "golden", "gray", "green",
    "grey", "magenta", "maroon", "orange", "pink", "purple", "red",
    "silver", "tan", "teal", "turquoise", "violet", "white", "yellow",
    "dark blue", "dark brown", "dark gray", "dark green", "dark grey",
    "light blue", "light brown", "light gray", "light green", "light grey",
)

DEFAULT_NUMBER_WORDS = (
    "zero", "one", "two", "three", "four", "five", "six", "seven",
    "eight", "nine", "ten", "eleven", "twelve", "thirteen", "fourteen",
    "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
)


@dataclass(frozen=True)
class TemplateRule:
    """One placeholder category with its matcher.

    Word lists compile to an alternation ordered longest-first so a
    multi-word entity ("light blue") wins over its suffix ("blue").
    Patterns are applied as written; greedy quantifiers give the
    longest match at each position.
    """

    category: str
    regex: re.Pattern

    @classmethod
    def from_words(cls, category: str, words: tuple[str, ...]) -> "TemplateRule":
        _check_category(category)
        if not words:
            raise InputError(f"rule {category} has an empty word list")
        ordered = sorted({w.lower() for w in words}, key=lambda w: (-len(w), w))
        pattern = r"\b(?:" + "|".join(re.escape(w) for w in ordered) + r")\b"
        return cls(category, re.compile(pattern))

    @classmethod
    def from_pattern(cls, category: str, pattern: str) -> "TemplateRule":
        _check_category(category)
        try:
            return cls(category, re.compile(pattern))
        except re.error as exc:
            raise InputError(f"rule {category} has an invalid pattern: {exc}") from exc


def _check_category(category: str) -> None:
    if not _CATEGORY.match(category):
        raise InputError(
            f"category must be an uppercase bracketed name like [COLOR], got {category!r}"
        )


@dataclass(frozen=True)
class TemplateRules:
    """Ordered rule list; application order is part of the identity."""

    rules: tuple[TemplateRule, ...]

    @classmethod
    def default(cls) -> "TemplateRules":
        return cls(
            (
                TemplateRule.from_words("[COLOR]", DEFAULT_COLOR_WORDS),
                TemplateRule.from_pattern("[NUMBER]", r"\b\d+(?:\.\d+)?\b"),
                TemplateRule.from_words("[NUMBER]", DEFAULT_NUMBER_WORDS),
            )
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "TemplateRules":
        """Load rules from a JSON list of {category, words | pattern}."""
        path = Path(path)
        try:
            entries = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read rules file {path}: {exc}") from exc
        if not isinstance(entries, list):
            raise InputError(f"rules file {path} must hold a JSON list")
        rules = []
        for pos, entry in enumerate(entries):
            if not isinstance(entry, dict) or "category" not in entry:
                raise InputError(f"rules file {path} entry {pos} lacks a category")
            category = entry["category"]
            if "words" in entry:
                rules.append(TemplateRule.from_words(category, tuple(entry["words"])))
            elif "pattern" in entry:
                rules.append(TemplateRule.from_pattern(category, entry["pattern"]))
            else:
                raise InputError(
                    f"rules file {path} entry {pos} needs either words or a pattern"
                )
        return cls(tuple(rules))


@dataclass(frozen=True)
class TemplateReport:
    """Frequency table (descending count, ties lexicographic) plus
    the top-k coverage of the corpus."""

    frequencies: tuple[tuple[str, int], ...]
    top_k: int
    coverage: float
    corpus_size: int


def _map_outside_placeholders(text: str, fn) -> str:
    """Apply fn to the spans between placeholders, leaving them intact."""
    parts = []
    last = 0
    for match in _PLACEHOLDER.finditer(text):
        parts.append(fn(text[last:match.start()]))
        parts.append(match.group())
        last = match.end()
    parts.append(fn(text[last:]))
    return "".join(parts)


def normalize_answer(answer: str, rules: TemplateRules | None = None) -> str:
    """Reduce an answer to its template form.

    Case-normalizes, collapses whitespace, strips terminal punctuation,
    then applies each rule in order, replacing matches with the rule's
    placeholder. Idempotent on its own outputs.
    """
    if rules is None:
        rules = TemplateRules.default()
    text = _map_outside_placeholders(answer, str.lower)
    text = " ".join(text.split())
    text = _TERMINAL_PUNCT.sub("", text).rstrip()
    for rule in rules.rules:
        text = _map_outside_placeholders(text, lambda seg: rule.regex.sub(rule.category, seg))
    return text


def top_k_coverage(
    corpus: list[str], rules: TemplateRules | None = None, k: int = 15
) -> TemplateReport:
    """Share of the corpus captured by the k most frequent templates.

    Templates are ranked by descending frequency with lexicographic
    tie-breaks, so the report is independent of corpus order.
    """
    if k < 1:
        raise NumericValidationError(f"k must be >= 1, got {k}")
    if not corpus:
        raise EmptyCorpusError("corpus contains no answers")
    if rules is None:
        rules = TemplateRules.default()
    counts = Counter(normalize_answer(answer, rules) for answer in corpus)
    table = tuple(sorted(counts.items(), key=lambda item: (-item[1], item[0])))
    covered = sum(count for _, count in table[:k])
    return TemplateReport(
        frequencies=table,
        top_k=k,
        coverage=covered / len(corpus),
        corpus_size=len(corpus),
    )
