"""Mask recognized bias spans, infill substitutes, and keep the least biased rewrite.

One round per sentence: detect, recognize, mask every span, decompose the
multi-mask text into one-mask instances (mask shifting), ask an infiller for
top-k substitutes per mask, pair the rank-j substitutes of every mask into
candidate j, and re-score all candidates with the detector.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .detection import Detector, Label
from .recognition import BiasSpan, Recognizer
from .text import Document, Span, check_disjoint, detokenize, tokenize

MASK = "[MASK]"

NEUTRAL_WORDS = ("information", "statement", "report", "people", "group")

BOS = "<s>"
EOS = "</s>"

# debias() status values
NON_BIASED = "non_biased"
DEBIASED = "debiased"
NO_ACCEPTABLE_CANDIDATE = "no_acceptable_candidate"
UNLOCATABLE_BIAS = "unlocatable_bias"


@dataclass(frozen=True)
class MaskedText:
    original: Document
    masked_spans: tuple[Span, ...]
    rendering: str


@dataclass(frozen=True)
class MaskedInstance:
    text: str
    target_span: Span
    index: int = 0


@dataclass
class Candidate:
    text: str
    fills: dict[Span, str]
    probability: float | None = None
    accepted: bool = False
    rank: int = 0


@dataclass(frozen=True)
class DebiasConfig:
    top_k: int = 5
    accept_threshold: float = 0.5
    max_candidates_returned: int | None = None

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not 0.0 < self.accept_threshold < 1.0:
            raise ValueError("accept_threshold must lie in (0, 1)")
        if self.max_candidates_returned is not None and self.max_candidates_returned < 1:
            raise ValueError("max_candidates_returned must be >= 1")


@dataclass
class DebiasResult:
    original: str
    original_probability: float
    label: Label
    status: str
    spans: list[BiasSpan] = field(default_factory=list)
    candidates: list[Candidate] = field(default_factory=list)
    chosen: Candidate | None = None
    document: Document | None = field(default=None, repr=False, compare=False)

    @property
    def output(self) -> str:
        return self.chosen.text if self.chosen is not None else self.original

    @property
    def output_probability(self) -> float:
        if self.chosen is not None and self.chosen.probability is not None:
            return self.chosen.probability
        return self.original_probability

    def to_record(self) -> dict:
        doc = self.document or tokenize(self.original)
        spans = []
        for b in self.spans:
            start, end = doc.char_range(b.span)
            spans.append({"start": start, "end": end, "surface": b.span.surface, "score": b.score})
        return {
            "original": self.original,
            "original_probability": self.original_probability,
            "label": self.label.value,
            "status": self.status,
            "spans": spans,
            "candidates": [
                {"text": c.text, "probability": c.probability, "accepted": c.accepted} for c in self.candidates
            ],
            "chosen": self.chosen.text if self.chosen is not None else None,
            "chosen_probability": self.chosen.probability if self.chosen is not None else None,
        }


class Infiller(Protocol):
    def suggest(self, instance: MaskedInstance, k: int) -> list[str]: ...


def mask_context(text: str) -> tuple[str, str]:
    """Lowercased tokens immediately left and right of the single mask."""
    at = text.index(MASK)
    left = tokenize(text[:at]).tokens
    right = tokenize(text[at + len(MASK) :]).tokens
    return (
        left[-1].surface.lower() if left else BOS,
        right[0].surface.lower() if right else EOS,
    )


def _fillable(word: str) -> bool:
    return word.replace("-", "").replace("'", "").isalpha()


class NgramInfiller:
    """Bidirectional bigram suggester.

    A vocabulary word is scored by how often it follows the left context word
    and precedes the right context word in the fitted corpus. Words seen in
    both positions rank first (by the product of the counts), then by the sum.
    """

    def __init__(
        self,
        follows: dict[str, dict[str, int]] | None = None,
        precedes: dict[str, dict[str, int]] | None = None,
        blocklist: Iterable[str] = (),
    ):
        self.follows = follows or {}
        self.precedes = precedes or {}
        self.blocklist = frozenset(w.lower() for w in blocklist)

    @classmethod
    def fit(cls, texts: Iterable[str], blocklist: Iterable[str] = ()) -> NgramInfiller:
        blocked = frozenset(w.lower() for w in blocklist)
        follows: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
        precedes: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
        for text in texts:
            words = [BOS] + [t.surface.lower() for t in tokenize(text).tokens] + [EOS]
            for a, w, b in zip(words, words[1:], words[2:]):
                if w in blocked or not _fillable(w):
                    continue
                follows[a][w] += 1
                precedes[b][w] += 1
        return cls(
            {k: dict(v) for k, v in follows.items()},
            {k: dict(v) for k, v in precedes.items()},
            blocked,
        )

    def suggest(self, instance: MaskedInstance, k: int) -> list[str]:
        left, right = mask_context(instance.text)
        after_left = self.follows.get(left, {})
        before_right = self.precedes.get(right, {})
        scored = []
        for word in set(after_left) | set(before_right):
            if word in self.blocklist:
                continue
            cl = after_left.get(word, 0)
            cr = before_right.get(word, 0)
            scored.append((-(cl * cr), -(cl + cr), word))
        scored.sort()
        return [w for _, _, w in scored[:k]]

    def to_dict(self) -> dict:
        return {"follows": self.follows, "precedes": self.precedes, "blocklist": sorted(self.blocklist)}

    @classmethod
    def from_dict(cls, data: dict) -> NgramInfiller:
        return cls(data["follows"], data["precedes"], data.get("blocklist", ()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> NgramInfiller:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def mask_spans(document: Document, spans: Sequence[Span]) -> MaskedText:
    ordered = check_disjoint(spans)
    rendering = detokenize(document, {s: MASK for s in ordered})
    return MaskedText(document, tuple(ordered), rendering)


def shift_decompose(masked: MaskedText) -> list[MaskedInstance]:
    """One single-mask instance per masked span, other spans left as written."""
    return [
        MaskedInstance(detokenize(masked.original, {span: MASK}), span, i) for i, span in enumerate(masked.masked_spans)
    ]


def suggest_topk(
    infiller: Infiller, instance: MaskedInstance, k: int, fallback: Sequence[str] = NEUTRAL_WORDS
) -> list[str]:
    """Up to ``k`` ranked substitutes, never the masked word itself and never empty."""
    original = " ".join(t.surface.lower() for t in tokenize(instance.target_span.surface).tokens)
    out: list[str] = []
    seen = {original}
    for word in infiller.suggest(instance, k + 1):
        key = word.lower()
        if key in seen:
            continue
        seen.add(key)
        out.append(word)
        if len(out) == k:
            return out
    if out:
        return out
    return [w for w in fallback if w.lower() != original][:k]


def assemble_candidates(
    masked: MaskedText, per_span_suggestions: Sequence[Sequence[str]], config: DebiasConfig
) -> list[Candidate]:
    """Candidate j takes the rank-j suggestion of every span (clamped to the list's end)."""
    if len(per_span_suggestions) != len(masked.masked_spans):
        raise ValueError("need one suggestion list per masked span")
    if any(not lst for lst in per_span_suggestions):
        raise ValueError("empty suggestion list")
    if not per_span_suggestions:
        return []
    n = min(config.top_k, max(len(lst) for lst in per_span_suggestions))
    out = []
    for j in range(n):
        fills = {span: lst[min(j, len(lst) - 1)] for span, lst in zip(masked.masked_spans, per_span_suggestions)}
        out.append(Candidate(detokenize(masked.original, fills), fills, rank=j))
    return out


def mask_random(document: Document, fraction: float, p: float, seed: int | Sequence[int]) -> MaskedText:
    """Random single-token masking for the masking ablation.

    A subset of ``ceil(fraction * n_tokens)`` tokens is drawn uniformly, then
    each is masked independently with probability ``p``.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    n = len(document.tokens)
    rng = np.random.default_rng(seed)
    size = min(n, math.ceil(fraction * n - 1e-9))
    chosen = rng.choice(n, size=size, replace=False) if size else np.array([], dtype=int)
    keep = rng.random(size) < p
    positions = sorted(int(i) for i in chosen[keep])
    return mask_spans(document, [document.span(i) for i in positions])


Masker = Callable[[Document, Sequence[Span]], MaskedText]


def _infill(masked: MaskedText, infiller: Infiller, k: int) -> list[list[str]]:
    # Left to right; each mask's top fill is committed before the next
    # instance is built, so later masks see the rewritten context.
    committed: dict[Span, str] = {}
    per_span = []
    for inst in shift_decompose(masked):
        if committed:
            inst = MaskedInstance(
                detokenize(masked.original, {**committed, inst.target_span: MASK}), inst.target_span, inst.index
            )
        words = suggest_topk(infiller, inst, k)
        per_span.append(words)
        committed[inst.target_span] = words[0]
    return per_span


def debias(
    detector: Detector,
    recognizer: Recognizer,
    infiller: Infiller,
    text: str,
    config: DebiasConfig = DebiasConfig(),
    masker: Masker | None = None,
) -> DebiasResult:
    """Run one detect / recognize / mask / infill / re-score round on ``text``.

    A candidate is accepted when its detector probability is below
    ``config.accept_threshold`` or below the original's probability. The
    chosen output is the lowest-probability accepted candidate; if none is
    accepted ``chosen`` is None and the original stands.
    """
    if not text.strip():
        raise ValueError("text must be non-empty")
    doc = tokenize(text)
    p0 = detector.predict_proba(text)
    if p0 < detector.threshold:
        keep = Candidate(text, {}, p0, accepted=True)
        return DebiasResult(text, p0, Label.NON_BIASED, NON_BIASED, chosen=keep, document=doc)

    spans = recognizer.recognize(doc)
    masked = (masker or mask_spans)(doc, [b.span for b in spans])
    if not masked.masked_spans:
        return DebiasResult(text, p0, Label.BIASED, UNLOCATABLE_BIAS, spans=list(spans), document=doc)

    candidates = assemble_candidates(masked, _infill(masked, infiller, config.top_k), config)
    for cand in candidates:
        cand.probability = detector.predict_proba(cand.text)
        cand.accepted = cand.probability < config.accept_threshold or cand.probability < p0
    candidates.sort(key=lambda c: (c.probability, c.rank))
    chosen = next((c for c in candidates if c.accepted), None)
    limit = config.max_candidates_returned or config.top_k
    return DebiasResult(
        text,
        p0,
        Label.BIASED,
        DEBIASED if chosen is not None else NO_ACCEPTABLE_CANDIDATE,
        spans=list(spans),
        candidates=candidates[:limit],
        chosen=chosen,
        document=doc,
    )
