"""Tokenization, sentence splitting and span arithmetic.

Every stage of the pipeline works on a :class:`Document`: the raw text plus
character-offset tokens. Offsets are character based (not bytes) so spans
survive non-ASCII news text, and case is preserved in tokens.
"""

from __future__ import annotations

import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

# A word is a run of word characters, optionally joined by intra-word hyphens
# or apostrophes ("Don't", "pseudo-scientific"). Anything else that is not
# whitespace becomes a single-character token.
TOKEN_PATTERN = re.compile(r"\w+(?:['’\-]\w+)*|[^\w\s]")

ABBREVIATIONS = frozenset(
    {
        "mr",
        "mrs",
        "ms",
        "dr",
        "prof",
        "sr",
        "jr",
        "st",
        "gen",
        "gov",
        "sen",
        "rep",
        "lt",
        "col",
        "sgt",
        "capt",
        "vs",
        "etc",
        "inc",
        "ltd",
        "co",
        "corp",
        "no",
        "jan",
        "feb",
        "mar",
        "apr",
        "jun",
        "jul",
        "aug",
        "sep",
        "sept",
        "oct",
        "nov",
        "dec",
        "u.s",
        "u.k",
        "u.n",
        "e.g",
        "i.e",
    }
)

_TERMINALS = ".!?"
_CLOSERS = "\"')]”’"


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError(f"empty token at {self.start}")

    @property
    def is_word(self) -> bool:
        return self.surface[0].isalnum() or self.surface[0] == "_"


@dataclass(frozen=True)
class Span:
    """Inclusive token range inside one document."""

    first_token: int
    last_token: int
    surface: str

    def __post_init__(self) -> None:
        if not 0 <= self.first_token <= self.last_token:
            raise ValueError(f"invalid span [{self.first_token}, {self.last_token}]")

    def __len__(self) -> int:
        return self.last_token - self.first_token + 1

    def overlaps(self, other: Span) -> bool:
        return self.first_token <= other.last_token and other.first_token <= self.last_token


@dataclass(frozen=True)
class Document:
    raw_text: str
    tokens: tuple[Token, ...] = ()
    sentence_bounds: tuple[tuple[int, int], ...] = ()
    id: str = ""

    def span(self, first: int, last: int | None = None) -> Span:
        """Build a span over tokens ``first..last`` (inclusive)."""
        if last is None:
            last = first
        if not 0 <= first <= last < len(self.tokens):
            raise IndexError(f"span [{first}, {last}] outside {len(self.tokens)} tokens")
        return Span(first, last, self.raw_text[self.tokens[first].start : self.tokens[last].end])

    def char_range(self, span: Span) -> tuple[int, int]:
        if span.last_token >= len(self.tokens):
            raise IndexError(f"span ends at token {span.last_token}, document has {len(self.tokens)}")
        return self.tokens[span.first_token].start, self.tokens[span.last_token].end

    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass(frozen=True)
class SentenceSplit:
    """Sentences plus the separators around them.

    ``separators`` has one more element than ``sentences``: leading text,
    the gaps between sentences, and trailing text. Interleaving them gives
    back the input exactly (see :meth:`join`).
    """

    sentences: list[str]
    separators: list[str] = field(default_factory=list)
    offsets: list[tuple[int, int]] = field(default_factory=list)

    def join(self, sentences: Sequence[str] | None = None) -> str:
        parts = [self.separators[0]]
        for sent, sep in zip(sentences if sentences is not None else self.sentences, self.separators[1:]):
            parts.append(sent)
            parts.append(sep)
        return "".join(parts)


def tokenize(text: str, doc_id: str = "") -> Document:
    tokens = tuple(Token(m.group(), m.start(), m.end()) for m in TOKEN_PATTERN.finditer(text))
    bounds: list[tuple[int, int]] = []
    if tokens:
        i = 0
        for _, end in _sentence_offsets(text, guard=True):
            first = i
            while i < len(tokens) and tokens[i].start < end:
                i += 1
            if i > first:
                bounds.append((first, i - 1))
        if i < len(tokens):
            bounds.append((i, len(tokens) - 1))
    return Document(raw_text=text, tokens=tokens, sentence_bounds=tuple(bounds), id=doc_id)


def check_disjoint(spans: Sequence[Span]) -> list[Span]:
    """Return ``spans`` sorted by position; raise if any two overlap."""
    ordered = sorted(spans, key=lambda s: (s.first_token, s.last_token))
    for a, b in zip(ordered, ordered[1:]):
        if a.overlaps(b):
            raise ValueError(f"overlapping spans {a.surface!r} and {b.surface!r}")
    return ordered


def detokenize(document: Document, replacements: Mapping[Span, str] | None = None) -> str:
    """Splice replacement strings into the raw text at each span's character range."""
    if not replacements:
        return document.raw_text
    ordered = check_disjoint(list(replacements))
    text = document.raw_text
    parts = []
    cursor = 0
    for span in ordered:
        start, end = document.char_range(span)
        parts.append(text[cursor:start])
        parts.append(replacements[span])
        cursor = end
    parts.append(text[cursor:])
    return "".join(parts)


def _is_boundary(text: str, i: int, guard: bool) -> int | None:
    """If a sentence ends at terminal ``text[i]``, return the end offset."""
    end = i + 1
    while end < len(text) and text[end] in _TERMINALS:
        end += 1
    while end < len(text) and text[end] in _CLOSERS:
        end += 1
    j = end
    if j >= len(text) or not text[j].isspace():
        return None
    while j < len(text) and text[j].isspace():
        j += 1
    if j >= len(text):
        return None
    nxt = text[j]
    if nxt in "\"'“‘(" and j + 1 < len(text):
        nxt = text[j + 1]
    if not (nxt.isupper() or nxt.isdigit()):
        return None
    if guard and text[i] == ".":
        k = i
        while k > 0 and not text[k - 1].isspace():
            k -= 1
        word = text[k:i].lower().lstrip("\"'(“‘")
        if word in ABBREVIATIONS or (len(word) == 1 and word.isalpha()):
            return None
    return end


def _sentence_offsets(text: str, guard: bool) -> list[tuple[int, int]]:
    offsets = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            end = _is_boundary(text, i, guard)
            if end is not None:
                offsets.append((start, end))
                start = end
                i = end
                continue
        i += 1
    if start < n:
        offsets.append((start, n))
    # Trim whitespace off each sentence; drop whitespace-only pieces.
    trimmed = []
    for s, e in offsets:
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            trimmed.append((s, e))
    return trimmed


def split_sentences_with_separators(text: str, guard: bool = True) -> SentenceSplit:
    offsets = _sentence_offsets(text, guard)
    sentences = [text[s:e] for s, e in offsets]
    separators = []
    cursor = 0
    for s, e in offsets:
        separators.append(text[cursor:s])
        cursor = e
    separators.append(text[cursor:])
    return SentenceSplit(sentences=sentences, separators=separators, offsets=offsets)


def split_sentences(text: str, guard: bool = True) -> list[str]:
    """Split on terminal punctuation followed by whitespace and a capital.

    With ``guard`` on, common abbreviations ("Dr.", "U.S.") and single-letter
    initials do not end a sentence.
    """
    return split_sentences_with_separators(text, guard).sentences


def normalize_phrase(text: str) -> str:
    """Lowercased, single-space-joined token form used as a lexicon key."""
    return " ".join(t.surface.lower() for t in tokenize(text).tokens)
