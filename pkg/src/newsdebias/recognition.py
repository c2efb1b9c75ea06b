"""Locate bias-bearing spans inside sentences flagged as biased.

The built-in recognizer is a lexicon tagger: a greedy left-to-right,
longest-match scan (3 tokens down to 1) against biased-word phrases mined
from annotated records. Spans are exchanged with tagging models as BIO
sequences.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .text import Document, Span, check_disjoint, tokenize

MAX_TERM_TOKENS = 3

BIO_TAGS = ("B", "I", "O")


@dataclass(frozen=True)
class LexiconEntry:
    count_in_biased: int
    count_total: int

    @property
    def score(self) -> float:
        return self.count_in_biased / self.count_total if self.count_total else 0.0


@dataclass(frozen=True)
class BiasSpan:
    span: Span
    score: float


class Recognizer(Protocol):
    def recognize(self, document: Document) -> list[BiasSpan]: ...


def term_tokens(phrase: str) -> tuple[str, ...] | None:
    """Normalize a biased-word phrase to lowercase word tokens.

    Leading/trailing punctuation is stripped. Phrases with inner
    punctuation, or longer than three tokens, cannot be matched and give None.
    """
    toks = list(tokenize(phrase).tokens)
    while toks and not toks[0].is_word:
        toks.pop(0)
    while toks and not toks[-1].is_word:
        toks.pop()
    if not toks or len(toks) > MAX_TERM_TOKENS or not all(t.is_word for t in toks):
        return None
    return tuple(t.surface.lower() for t in toks)


class Lexicon:
    def __init__(self, entries: Mapping[str, LexiconEntry] | None = None):
        self.entries: dict[str, LexiconEntry] = dict(entries or {})
        for term, entry in self.entries.items():
            if not term:
                raise ValueError("empty lexicon term")
            if not 0 <= entry.count_in_biased <= entry.count_total:
                raise ValueError(f"bad counts for {term!r}: {entry}")

    def __contains__(self, term: str) -> bool:
        return term in self.entries

    def __getitem__(self, term: str) -> LexiconEntry:
        return self.entries[term]

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Lexicon) and self.entries == other.entries

    def terms(self) -> list[str]:
        return sorted(self.entries)

    def save(self, path: str | Path) -> None:
        lines = [f"{t}\t{e.count_in_biased}\t{e.count_total}\n" for t, e in sorted(self.entries.items())]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> Lexicon:
        entries = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected term<TAB>biased<TAB>total")
            entries[parts[0]] = LexiconEntry(int(parts[1]), int(parts[2]))
        return cls(entries)

    def recognize(self, document: Document, min_score: float = 0.0) -> list[BiasSpan]:
        return recognize(self, document, min_score)


class LexiconRecognizer:
    """Adapter so a :class:`Lexicon` plugs into the :class:`Recognizer` slot with a score cutoff."""

    def __init__(self, lexicon: Lexicon, min_score: float = 0.0):
        self.lexicon = lexicon
        self.min_score = min_score

    def recognize(self, document: Document) -> list[BiasSpan]:
        return recognize(self.lexicon, document, self.min_score)


def _sentence_grams(words: Sequence[str]) -> set[str]:
    grams = set()
    for n in range(1, MAX_TERM_TOKENS + 1):
        for i in range(len(words) - n + 1):
            grams.add(" ".join(words[i : i + n]))
    return grams


def build_lexicon(records: Iterable) -> Lexicon:
    """Count every listed biased-word phrase over the corpus.

    ``records`` need ``sentence``, ``biased_words`` and ``is_biased``
    attributes (see :class:`newsdebias.dataset.MbicRecord`). A phrase is
    counted once per sentence that lists it or contains it as a run of word
    tokens; ``count_in_biased`` restricts that to biased-labelled sentences.
    """
    records = list(records)
    listed: list[set[str]] = []
    vocab: set[str] = set()
    for rec in records:
        terms = set()
        for phrase in rec.biased_words:
            toks = term_tokens(phrase)
            if toks:
                terms.add(" ".join(toks))
        listed.append(terms)
        vocab |= terms

    biased = dict.fromkeys(vocab, 0)
    total = dict.fromkeys(vocab, 0)
    for rec, terms in zip(records, listed):
        words = [t.surface.lower() for t in tokenize(rec.sentence).tokens if t.is_word]
        present = terms | (_sentence_grams(words) & vocab)
        for term in present:
            total[term] += 1
            if rec.is_biased:
                biased[term] += 1
    return Lexicon({t: LexiconEntry(biased[t], total[t]) for t in vocab})


def recognize(lexicon: Lexicon, document: Document, min_score: float = 0.0) -> list[BiasSpan]:
    tokens = document.tokens
    found: list[BiasSpan] = []
    i = 0
    while i < len(tokens):
        for n in range(min(MAX_TERM_TOKENS, len(tokens) - i), 0, -1):
            window = tokens[i : i + n]
            if not all(t.is_word for t in window):
                continue
            term = " ".join(t.surface.lower() for t in window)
            entry = lexicon.entries.get(term)
            if entry is not None and entry.score >= min_score:
                found.append(BiasSpan(document.span(i, i + n - 1), entry.score))
                i += n
                break
        else:
            i += 1
    return found


def spans_to_bio(n_tokens: int | Document, spans: Sequence[Span | BiasSpan]) -> list[str]:
    if isinstance(n_tokens, Document):
        n_tokens = len(n_tokens.tokens)
    plain = [s.span if isinstance(s, BiasSpan) else s for s in spans]
    tags = ["O"] * n_tokens
    for span in check_disjoint(plain):
        if span.last_token >= n_tokens:
            raise IndexError(f"span ends at token {span.last_token} of {n_tokens}")
        tags[span.first_token] = "B"
        for k in range(span.first_token + 1, span.last_token + 1):
            tags[k] = "I"
    return tags


def validate_bio(tags: Sequence[str]) -> None:
    prev = "O"
    for i, tag in enumerate(tags):
        if tag not in BIO_TAGS:
            raise ValueError(f"unknown tag {tag!r} at {i}")
        if tag == "I" and prev == "O":
            raise ValueError(f"I tag at {i} does not continue a span")
        prev = tag


def bio_to_ranges(tags: Sequence[str]) -> list[tuple[int, int]]:
    """Inclusive ``(first, last)`` token ranges encoded by a valid BIO sequence."""
    validate_bio(tags)
    ranges = []
    start = None
    for i, tag in enumerate(tags):
        if tag in ("B", "O") and start is not None:
            ranges.append((start, i - 1))
            start = None
        if tag == "B":
            start = i
    if start is not None:
        ranges.append((start, len(tags) - 1))
    return ranges


def bio_to_spans(document: Document, tags: Sequence[str]) -> list[Span]:
    if len(tags) != len(document.tokens):
        raise ValueError("tag sequence length differs from token count")
    return [document.span(a, b) for a, b in bio_to_ranges(tags)]
