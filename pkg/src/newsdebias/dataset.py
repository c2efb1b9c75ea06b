"""MBIC-style records: loading, bucketing, and identity-group outcomes.

CSV dialect: comma separated, quoted, UTF-8, header row. The biased-words
cell is either a ``;``-delimited list or a Python list literal
(``['hype', 'lies']``), which is how MBIC releases usually store it.
Column names are resolved through a :class:`ColumnMapping`; a sidecar file
``<csv>.columns.json`` next to the data overrides the default.
"""

from __future__ import annotations

import ast
import csv
import dataclasses
import json
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .detection import Label
from .metrics import GroupOutcome
from .text import tokenize

FIELDS = (
    "sentence",
    "news_link",
    "outlet",
    "topic",
    "annotator_age",
    "annotator_gender",
    "annotator_education",
    "biased_words",
    "label",
)

DEFAULT_ALIASES = {
    "sentence": ("sentence", "text", "Sentence"),
    "news_link": ("news_link", "link", "News Link"),
    "outlet": ("outlet", "News Outlet"),
    "topic": ("topic", "Topic"),
    "annotator_age": ("annotator_age", "age", "Age"),
    "annotator_gender": ("annotator_gender", "gender", "Gender"),
    "annotator_education": ("annotator_education", "education", "Education"),
    "biased_words": ("biased_words", "biased_words4", "Biased words"),
    "label": ("label", "Label_bias", "Label"),
}

BIASED_LABELS = {"biased", "bias", "1", "true", "yes"}
NON_BIASED_LABELS = {"non-biased", "nonbiased", "non biased", "unbiased", "not biased", "0", "false", "no"}


class MissingColumnError(ValueError):
    pass


@dataclass(frozen=True)
class MbicRecord:
    sentence: str
    label: Label
    news_link: str = ""
    outlet: str = ""
    topic: str = ""
    annotator_age: int | str | None = None
    annotator_gender: str = ""
    annotator_education: str = ""
    biased_words: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.sentence.strip():
            raise ValueError("empty sentence")

    @property
    def is_biased(self) -> bool:
        return self.label is Label.BIASED

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["label"] = self.label.value
        d["biased_words"] = list(self.biased_words)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> MbicRecord:
        return cls(
            sentence=d["sentence"],
            label=Label(d["label"]),
            news_link=d.get("news_link", ""),
            outlet=d.get("outlet", ""),
            topic=d.get("topic", ""),
            annotator_age=d.get("annotator_age"),
            annotator_gender=d.get("annotator_gender", ""),
            annotator_education=d.get("annotator_education", ""),
            biased_words=tuple(d.get("biased_words", ())),
        )


@dataclass(frozen=True)
class ColumnMapping:
    aliases: Mapping[str, Sequence[str]] = field(default_factory=lambda: dict(DEFAULT_ALIASES))
    biased_words_delimiter: str = ";"
    required: tuple[str, ...] = ("sentence", "label")
    # field separator of the CSV itself
    delimiter: str = ","

    @classmethod
    def from_file(cls, path: str | Path) -> ColumnMapping:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        aliases = dict(DEFAULT_ALIASES)
        for name, cols in data.get("columns", {}).items():
            if name not in FIELDS:
                raise ValueError(f"{path}: unknown field {name!r}")
            aliases[name] = (cols,) if isinstance(cols, str) else tuple(cols)
        return cls(
            aliases=aliases,
            biased_words_delimiter=data.get("biased_words_delimiter", ";"),
            required=tuple(data.get("required", ("sentence", "label"))),
            delimiter=data.get("delimiter", ","),
        )

    def resolve(self, header: Sequence[str]) -> dict[str, str]:
        present = set(header)
        out = {}
        for name in FIELDS:
            col = next((c for c in self.aliases.get(name, ()) if c in present), None)
            if col is not None:
                out[name] = col
            elif name in self.required:
                raise MissingColumnError(f"missing required column {name!r} (accepted: {list(self.aliases[name])})")
        return out


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass
class LoadResult:
    records: list[MbicRecord]
    errors: list[RowError]

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def parse_label(value: str) -> Label:
    v = value.strip().lower()
    if v in BIASED_LABELS:
        return Label.BIASED
    if v in NON_BIASED_LABELS:
        return Label.NON_BIASED
    raise ValueError(f"unrecognized label {value!r}")


def parse_biased_words(cell: str, delimiter: str = ";") -> tuple[str, ...]:
    cell = (cell or "").strip()
    if not cell:
        return ()
    if cell.startswith("["):
        parsed = ast.literal_eval(cell)
        if not isinstance(parsed, (list, tuple)):
            raise ValueError(f"biased words literal is not a list: {cell!r}")
        words = [str(w) for w in parsed]
    else:
        words = cell.split(delimiter)
    return tuple(w.strip() for w in words if w.strip())


def parse_age(value: str) -> int | str | None:
    v = (value or "").strip()
    if not v:
        return None
    if re.fullmatch(r"-?\d+", v):
        return int(v)
    return v


def load_mbic(path: str | Path, mapping: ColumnMapping | None = None) -> LoadResult:
    """Read one record per row; bad rows go to ``errors`` instead of vanishing."""
    path = Path(path)
    if mapping is None:
        sidecar = path.with_name(path.name + ".columns.json")
        mapping = ColumnMapping.from_file(sidecar) if sidecar.exists() else ColumnMapping()
    records: list[MbicRecord] = []
    errors: list[RowError] = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh, delimiter=mapping.delimiter)
        cols = mapping.resolve(reader.fieldnames or [])

        def get(row, name):
            col = cols.get(name)
            return (row.get(col) or "") if col else ""

        for row in reader:
            line = reader.line_num
            try:
                records.append(
                    MbicRecord(
                        sentence=get(row, "sentence").strip(),
                        label=parse_label(get(row, "label")),
                        news_link=get(row, "news_link"),
                        outlet=get(row, "outlet"),
                        topic=get(row, "topic"),
                        annotator_age=parse_age(get(row, "annotator_age")),
                        annotator_gender=get(row, "annotator_gender"),
                        annotator_education=get(row, "annotator_education"),
                        biased_words=parse_biased_words(get(row, "biased_words"), mapping.biased_words_delimiter),
                    )
                )
            except (ValueError, SyntaxError) as exc:
                errors.append(RowError(line, str(exc)))
    return LoadResult(records, errors)


def write_csv(records: Iterable[MbicRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(FIELDS)
        for r in records:
            writer.writerow(
                [
                    r.sentence,
                    r.news_link,
                    r.outlet,
                    r.topic,
                    "" if r.annotator_age is None else r.annotator_age,
                    r.annotator_gender,
                    r.annotator_education,
                    ";".join(r.biased_words),
                    r.label.value,
                ]
            )


def write_jsonl(records: Iterable[MbicRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")


def read_jsonl(path: str | Path) -> list[MbicRecord]:
    with open(path, encoding="utf-8") as fh:
        return [MbicRecord.from_dict(json.loads(line)) for line in fh if line.strip()]


def load_records(path: str | Path) -> LoadResult:
    """CSV or canonical JSONL, by extension."""
    if str(path).endswith(".jsonl"):
        return LoadResult(read_jsonl(path), [])
    return load_mbic(path)


# --- bucketing ------------------------------------------------------------


@dataclass(frozen=True)
class BucketConfig:
    young_below: int = 30
    elder_above: int = 60
    # Checked in order: "undergraduate" must be tried before "graduate".
    education_keywords: tuple[tuple[str, tuple[str, ...]], ...] = (
        ("high school", ("high school", "secondary", "ged", "diploma")),
        ("undergraduate", ("undergraduate", "bachelor", "college", "associate", "vocational")),
        ("graduate", ("graduate", "master", "phd", "ph.d", "doctor", "mba", "postgraduate")),
    )

    def age_bucket(self, age: int | str | None) -> str:
        value = _age_value(age)
        if value is None:
            text = str(age).strip().lower() if age is not None else ""
            return text if text in ("young", "adult", "elder") else "unknown"
        if value < self.young_below:
            return "young"
        if value > self.elder_above:
            return "elder"
        return "adult"

    def education_bucket(self, education: str) -> str:
        text = (education or "").lower()
        for bucket, keywords in self.education_keywords:
            if text == bucket or any(k in text for k in keywords):
                return bucket
        return "unknown"


def _age_value(age: int | str | None) -> float | None:
    if age is None:
        return None
    if isinstance(age, (int, float)):
        return float(age)
    nums = re.findall(r"\d+", age)
    if not nums:
        return None
    # "25-34" style ranges use the midpoint
    return sum(float(n) for n in nums[:2]) / len(nums[:2])


def bucketize(record: MbicRecord, config: BucketConfig = BucketConfig()) -> MbicRecord:
    return dataclasses.replace(
        record,
        annotator_age=config.age_bucket(record.annotator_age),
        annotator_education=config.education_bucket(record.annotator_education),
    )


# --- identity groups ------------------------------------------------------


@dataclass(frozen=True)
class GroupSpec:
    attribute: str
    privileged_values: frozenset[str]
    unprivileged_values: frozenset[str]
    identity_terms: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        if self.privileged_values & self.unprivileged_values:
            raise ValueError(f"{self.attribute}: privileged and unprivileged values overlap")
        missing = (self.privileged_values | self.unprivileged_values) - set(self.identity_terms)
        if missing:
            raise ValueError(f"{self.attribute}: no identity terms for {sorted(missing)}")

    def terms(self, privileged: bool) -> set[str]:
        values = self.privileged_values if privileged else self.unprivileged_values
        return {_norm(t) for v in values for t in self.identity_terms[v]}


@dataclass(frozen=True)
class GroupConfig:
    groups: tuple[GroupSpec, ...]
    buckets: BucketConfig = BucketConfig()

    def spec(self, attribute: str) -> GroupSpec:
        for g in self.groups:
            if g.attribute == attribute:
                return g
        raise KeyError(attribute)


def _norm(term: str) -> str:
    return " ".join(t.surface.lower() for t in tokenize(term).tokens)


def load_group_config(path: str | Path | None = None) -> GroupConfig:
    """Read a group config JSON; None loads the shipped default."""
    if path is None:
        raw = resources.files("newsdebias").joinpath("data/groups.json").read_text(encoding="utf-8")
    else:
        raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    groups = []
    for g in data["groups"]:
        priv = g["privileged"]
        unpriv = g["unprivileged"]
        groups.append(
            GroupSpec(
                attribute=g["attribute"],
                privileged_values=frozenset(priv),
                unprivileged_values=frozenset(unpriv),
                identity_terms={k: tuple(v) for k, v in {**priv, **unpriv}.items()},
            )
        )
    b = data.get("buckets", {})
    defaults = BucketConfig()
    buckets = BucketConfig(
        young_below=b.get("young_below", defaults.young_below),
        elder_above=b.get("elder_above", defaults.elder_above),
        education_keywords=tuple((k, tuple(v)) for k, v in b["education_keywords"].items())
        if "education_keywords" in b
        else defaults.education_keywords,
    )
    return GroupConfig(tuple(groups), buckets)


def sentence_grams(text: str, max_n: int = 3) -> set[str]:
    words = [t.surface.lower() for t in tokenize(text).tokens]
    return {" ".join(words[i : i + n]) for n in range(1, max_n + 1) for i in range(len(words) - n + 1)}


def mentions(text: str, terms: Iterable[str]) -> bool:
    terms = set(terms)
    if not terms:
        return False
    max_n = max(len(t.split()) for t in terms)
    return not terms.isdisjoint(sentence_grams(text, max_n))


def group_membership(records: Sequence[MbicRecord], spec: GroupSpec) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks (unprivileged, privileged); sentences naming both sides are in neither."""
    unpriv_terms = spec.terms(privileged=False)
    priv_terms = spec.terms(privileged=True)
    u = np.array([mentions(r.sentence, unpriv_terms) for r in records], dtype=bool)
    p = np.array([mentions(r.sentence, priv_terms) for r in records], dtype=bool)
    both = u & p
    return u & ~both, p & ~both


def group_outcomes(
    records: Sequence[MbicRecord], spec: GroupSpec, outcomes: Sequence[bool] | None = None
) -> tuple[GroupOutcome, GroupOutcome]:
    """Positive counts per side; a positive is a Biased label unless ``outcomes`` is given."""
    records = list(records)
    if outcomes is None:
        outcomes = [r.is_biased for r in records]
    y = np.asarray(outcomes, dtype=bool)
    if len(y) != len(records):
        raise ValueError("outcomes length differs from records")
    u, p = group_membership(records, spec)
    if not u.any() or not p.any():
        side = "unprivileged" if not u.any() else "privileged"
        raise ValueError(f"{spec.attribute}: empty {side} group")
    return (
        GroupOutcome(f"{spec.attribute}:unprivileged", False, int(y[u].sum()), int(u.sum())),
        GroupOutcome(f"{spec.attribute}:privileged", True, int(y[p].sum()), int(p.sum())),
    )


def identity_membership(records: Sequence[MbicRecord], specs: Iterable[GroupSpec]) -> dict[str, np.ndarray]:
    """Per identity value, which sentences mention it."""
    out = {}
    for spec in specs:
        for value, terms in spec.identity_terms.items():
            normed = {_norm(t) for t in terms}
            out[value] = np.array([mentions(r.sentence, normed) for r in records], dtype=bool)
    return out


def identity_bias_counts(records: Sequence[MbicRecord], specs: GroupSpec | Iterable[GroupSpec]) -> dict[str, int]:
    """Per identity value, total biased words listed in sentences that mention it."""
    records = list(records)
    if isinstance(specs, GroupSpec):
        specs = [specs]
    if not records:
        return {}
    counts = {}
    for value, mask in identity_membership(records, specs).items():
        counts[value] = sum(len(r.biased_words) for r, m in zip(records, mask) if m)
    return counts


def stratified_split(
    records: Sequence[MbicRecord], seed: int, test_fraction: float = 0.2
) -> tuple[list[MbicRecord], list[MbicRecord]]:
    """Seeded split stratified by label; both halves keep input order."""
    records = list(records)
    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for label in (Label.BIASED, Label.NON_BIASED):
        idx = np.array([i for i, r in enumerate(records) if r.label is label])
        n_test = int(round(len(idx) * test_fraction))
        test_idx.update(int(i) for i in rng.permutation(idx)[:n_test])
    train = [r for i, r in enumerate(records) if i not in test_idx]
    test = [r for i, r in enumerate(records) if i in test_idx]
    for part, name in ((train, "train"), (test, "test")):
        labels = {r.label for r in part}
        if len(labels) < 2:
            raise ValueError(f"degenerate split: {name} split lacks a class")
    return train, test
