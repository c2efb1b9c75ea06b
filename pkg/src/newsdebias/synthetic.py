"""Synthetic news sentences with a planted biased vocabulary.

Each sentence comes from a template with one slot. Neutral sentences fill
the slot from a neutral word list, biased ones from a planted biased list,
and the planted word is recorded in ``biased_words``. Subjects carry
identity mentions ("She", "He") so group metrics have something to measure.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .dataset import MbicRecord
from .detection import Label

# (template, slot kind); {s} subject, {t} topic, {w} slot word
TEMPLATES = (
    ("{s} said the {w} about {t} was released on Monday.", "noun"),
    ("{s} described the {t} plan as {w}.", "adj"),
    ("Critics {w} the {t} proposal from {s_lower}.", "verb"),
    ("{s} called the {t} debate {w} in an interview.", "adj"),
    ("Reporters asked {s_lower} about the {w} on {t}.", "noun"),
)

NEUTRAL = {
    "noun": ("report", "statement", "information", "study", "data", "update"),
    "adj": ("reasonable", "detailed", "ambitious", "costly", "complex", "new"),
    "verb": ("reviewed", "discussed", "examined", "questioned", "analyzed", "debated"),
}

PLANTED = {
    "noun": ("hype", "propaganda", "lies", "pseudo-scientific hype", "smear campaign"),
    "adj": ("disgraceful", "idiotic", "insane", "outrageous", "shameful"),
    "verb": ("slammed", "trashed", "blasted", "ridiculed", "mocked"),
}

# Biased vocabulary that is never listed in biased_words, so a lexicon
# built from the records cannot find it.
UNLISTED = {
    "noun": ("drivel", "garbage"),
    "adj": ("moronic", "pathetic"),
    "verb": ("savaged", "gutted"),
}

TOPICS = ("taxes", "immigration", "healthcare", "climate", "education", "trade", "housing", "energy")

SUBJECTS = {
    "female": ("She", "her"),
    "male": ("He", "him"),
    "none": ("The senator", "the senator"),
}


@dataclass(frozen=True)
class SyntheticConfig:
    n_sentences: int = 500
    seed: int = 0
    # P(planted listed bias) by subject group
    bias_rate: Mapping[str, float] = field(default_factory=lambda: {"female": 0.5, "male": 0.5, "none": 0.5})
    # P(unlisted bias), applied before bias_rate, same for every group
    unlisted_rate: float = 0.0
    group_weights: Mapping[str, float] = field(default_factory=lambda: {"female": 1 / 3, "male": 1 / 3, "none": 1 / 3})
    article_size: int = 5


def planted_terms() -> list[str]:
    return sorted({w for words in PLANTED.values() for w in words})


def generate(config: SyntheticConfig = SyntheticConfig()) -> list[MbicRecord]:
    rng = np.random.default_rng(config.seed)
    groups = sorted(config.group_weights)
    gw = np.array([config.group_weights[g] for g in groups], dtype=float)
    gw /= gw.sum()
    records = []
    for i in range(config.n_sentences):
        group = groups[rng.choice(len(groups), p=gw)]
        template, kind = TEMPLATES[rng.integers(len(TEMPLATES))]
        topic = TOPICS[rng.integers(len(TOPICS))]
        subj, subj_lower = SUBJECTS[group]
        listed: tuple[str, ...] = ()
        if rng.random() < config.unlisted_rate:
            pool = UNLISTED[kind]
            label = Label.BIASED
        elif rng.random() < config.bias_rate[group]:
            pool = PLANTED[kind]
            label = Label.BIASED
        else:
            pool = NEUTRAL[kind]
            label = Label.NON_BIASED
        word = pool[rng.integers(len(pool))]
        if pool is PLANTED[kind]:
            listed = (word,)
        sentence = template.format(s=subj, s_lower=subj_lower, t=topic, w=word)
        records.append(
            MbicRecord(
                sentence=sentence,
                label=label,
                news_link=f"synthetic://article/{i // config.article_size}",
                outlet="synthetic",
                topic=topic,
                biased_words=listed,
            )
        )
    return records


def articles(records: list[MbicRecord]) -> list[tuple[str, str]]:
    """Group consecutive sentences sharing a news link into ``(id, text)`` articles."""
    out: list[tuple[str, list[str]]] = []
    for r in records:
        if out and out[-1][0] == r.news_link:
            out[-1][1].append(r.sentence)
        else:
            out.append((r.news_link, [r.sentence]))
    return [(link, " ".join(sents)) for link, sents in out]
