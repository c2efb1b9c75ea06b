"""End-to-end orchestration, before/after evaluation, and the masking ablation."""

from __future__ import annotations

import logging
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .dataset import GroupConfig, MbicRecord, group_membership, identity_membership, stratified_split
from .debias import DebiasConfig, DebiasResult, Infiller, Masker, NgramInfiller, debias, mask_random
from .detection import Detector, TrainConfig, train_detector
from .metrics import (
    GaucConfig,
    GroupOutcome,
    UndefinedMetricError,
    confusion,
    disparate_impact,
    generalized_bias_auc,
    prf_acc_lenient,
)
from .recognition import LexiconRecognizer, Recognizer, build_lexicon
from .text import split_sentences_with_separators

log = logging.getLogger(__name__)


@dataclass
class Models:
    detector: Detector
    recognizer: Recognizer
    infiller: Infiller

    def __post_init__(self) -> None:
        for name in ("detector", "recognizer", "infiller"):
            if getattr(self, name) is None:
                raise ValueError(f"missing {name}")


def fit_models(records: Sequence[MbicRecord], train_config: TrainConfig = TrainConfig()) -> Models:
    """Detector, lexicon recognizer and bigram infiller from labelled records.

    The infiller only sees non-biased sentences, and never proposes a
    single-word lexicon term.
    """
    detector = train_detector([(r.sentence, int(r.is_biased)) for r in records], train_config)
    lexicon = build_lexicon(records)
    blocklist = [t for t in lexicon.terms() if " " not in t]
    infiller = NgramInfiller.fit([r.sentence for r in records if not r.is_biased], blocklist)
    return Models(detector, LexiconRecognizer(lexicon), infiller)


@dataclass
class DocumentResult:
    id: str
    text: str
    output: str
    sentences: list[DebiasResult]

    @property
    def probability_before(self) -> float | None:
        if not self.sentences:
            return None
        return float(np.mean([s.original_probability for s in self.sentences]))

    @property
    def probability_after(self) -> float | None:
        if not self.sentences:
            return None
        return float(np.mean([s.output_probability for s in self.sentences]))

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "output": self.output,
            "probability_before": self.probability_before,
            "probability_after": self.probability_after,
            "sentences": [s.to_record() for s in self.sentences],
        }


def debias_document(
    models: Models, text: str, config: DebiasConfig = DebiasConfig(), doc_id: str = "", masker: Masker | None = None
) -> DocumentResult:
    split = split_sentences_with_separators(text)
    results = [
        debias(models.detector, models.recognizer, models.infiller, sent, config, masker) for sent in split.sentences
    ]
    output = split.join([r.output for r in results])
    return DocumentResult(doc_id, text, output, results)


def run_pipeline(
    models: Models,
    texts: Iterable[str | tuple[str, str]],
    config: DebiasConfig = DebiasConfig(),
    masker: Masker | None = None,
) -> list[DocumentResult]:
    """Debias each document sentence by sentence, in input order.

    ``texts`` holds plain strings or ``(id, text)`` pairs. Non-biased
    sentences pass through unchanged.
    """
    if models is None:
        raise ValueError("models not loaded")
    out = []
    for i, item in enumerate(texts):
        doc_id, text = item if isinstance(item, tuple) else (str(i), item)
        out.append(debias_document(models, text, config, doc_id, masker))
    return out


# --- before / after evaluation -------------------------------------------


@dataclass
class MetricBlock:
    precision: float | None
    recall: float | None
    f1: float | None
    accuracy: float | None
    di: dict[str, dict | None]
    g_auc: float | None

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "di": self.di,
            "g_auc": self.g_auc,
        }


@dataclass
class PipelineReport:
    before: MetricBlock
    after: MetricBlock
    dataset_di: dict[str, dict | None]
    per_document: list[dict] = field(default_factory=list)
    n_train: int = 0
    n_test: int = 0
    split_seed: int = 0
    debias_enabled: bool = True

    def to_dict(self) -> dict:
        return {
            "split_seed": self.split_seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "debias_enabled": self.debias_enabled,
            "dataset_di": self.dataset_di,
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "per_document": self.per_document,
        }


def _di_entry(u: GroupOutcome, p: GroupOutcome) -> dict | None:
    try:
        res = disparate_impact(u, p)
    except UndefinedMetricError:
        return None
    return {
        "di": res.di,
        "verdict": res.verdict.value,
        "unprivileged": [u.num_positives, u.num_instances],
        "privileged": [p.num_positives, p.num_instances],
    }


def di_by_attribute(
    records: Sequence[MbicRecord], groups: GroupConfig, outcomes: Sequence[bool] | None = None
) -> dict[str, dict | None]:
    """DI per attribute plus a ``pooled`` entry summing counts across attributes.

    Attributes with an empty side, or a privileged side with no positives,
    report None.
    """
    y = np.asarray([r.is_biased for r in records] if outcomes is None else outcomes, dtype=bool)
    out: dict[str, dict | None] = {}
    pooled = np.zeros(4, dtype=int)
    for spec in groups.groups:
        u, p = group_membership(records, spec)
        if not u.any() or not p.any():
            out[spec.attribute] = None
            continue
        counts = np.array([y[u].sum(), u.sum(), y[p].sum(), p.sum()])
        pooled += counts
        out[spec.attribute] = _di_entry(
            GroupOutcome(f"{spec.attribute}:unprivileged", False, int(counts[0]), int(counts[1])),
            GroupOutcome(f"{spec.attribute}:privileged", True, int(counts[2]), int(counts[3])),
        )
    if pooled[1] and pooled[3]:
        out["pooled"] = _di_entry(
            GroupOutcome("pooled:unprivileged", False, int(pooled[0]), int(pooled[1])),
            GroupOutcome("pooled:privileged", True, int(pooled[2]), int(pooled[3])),
        )
    else:
        out["pooled"] = None
    return out


def _metric_block(
    detector: Detector,
    records: Sequence[MbicRecord],
    texts: Sequence[str],
    groups: GroupConfig,
    gauc_config: GaucConfig,
) -> MetricBlock:
    probs = np.array([detector.predict_proba(t) for t in texts])
    preds = probs >= detector.threshold
    labels = np.array([r.is_biased for r in records])
    scores = prf_acc_lenient(confusion(preds.astype(int), labels.astype(int)))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g_auc = generalized_bias_auc(probs, labels, identity_membership(records, groups.groups), gauc_config)
    except ValueError as exc:
        log.warning("G-AUC undefined: %s", exc)
        g_auc = None
    return MetricBlock(di=di_by_attribute(records, groups, preds), g_auc=g_auc, **scores)


def evaluate_before_after(
    records: Sequence[MbicRecord],
    groups: GroupConfig,
    split_seed: int = 0,
    models: Models | None = None,
    train_config: TrainConfig = TrainConfig(),
    debias_config: DebiasConfig = DebiasConfig(),
    gauc_config: GaucConfig = GaucConfig(),
    debias_enabled: bool = True,
) -> PipelineReport:
    """Score the raw test split and its debiased rewrite with one detector.

    The positive outcome for DI is the detector's Biased prediction on the
    text being scored; group membership always comes from the original
    sentence. Labels stay the original labels on both sides. Models are fit
    on the training split unless given.
    """
    records = list(records)
    train, test = stratified_split(records, split_seed)
    if models is None:
        models = fit_models(train, train_config)
    raw = [r.sentence for r in test]
    per_document: list[dict] = []
    if debias_enabled:
        docs = run_pipeline(models, raw, debias_config)
        transformed = [d.output for d in docs]
        per_document = [
            {
                "original": d.text,
                "output": d.output,
                "status": [s.status for s in d.sentences],
                "probability_before": d.probability_before,
                "probability_after": d.probability_after,
            }
            for d in docs
        ]
    else:
        transformed = list(raw)
    return PipelineReport(
        before=_metric_block(models.detector, test, raw, groups, gauc_config),
        after=_metric_block(models.detector, test, transformed, groups, gauc_config),
        dataset_di=di_by_attribute(records, groups),
        per_document=per_document,
        n_train=len(train),
        n_test=len(test),
        split_seed=split_seed,
        debias_enabled=debias_enabled,
    )


# --- masking ablation -----------------------------------------------------


@dataclass(frozen=True)
class AblationRow:
    masking: str
    p: float | None
    success_rate: float
    n_biased: int
    n_accepted: int

    def to_dict(self) -> dict:
        return {
            "masking": self.masking,
            "p": self.p,
            "success_rate": self.success_rate,
            "n_biased": self.n_biased,
            "n_accepted": self.n_accepted,
        }


def ablation_masking(
    records: Sequence[MbicRecord | str],
    models: Models,
    p_values: Sequence[float] = (0.1, 0.3, 0.5, 0.8, 1.0),
    fraction: float = 0.05,
    seed: int = 0,
    config: DebiasConfig = DebiasConfig(),
) -> list[AblationRow]:
    """Accepted-candidate rate under random masking at each p, then exact span masking.

    Only inputs the detector flags as Biased count. Input ``i`` draws its
    random masks from seed ``(seed, i)``, so every p sees the same token subset.
    """
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p={p} outside [0, 1]")
    texts = [r if isinstance(r, str) else r.sentence for r in records]
    biased = [(i, t) for i, t in enumerate(texts) if models.detector.predict_proba(t) >= models.detector.threshold]

    def rate(masker_for) -> tuple[int, float]:
        accepted = 0
        for i, text in biased:
            res = debias(models.detector, models.recognizer, models.infiller, text, config, masker_for(i))
            accepted += res.chosen is not None
        return accepted, (accepted / len(biased) if biased else 0.0)

    rows = []
    for p in p_values:
        n_acc, r = rate(lambda i, p=p: lambda doc, spans: mask_random(doc, fraction, p, (seed, i)))
        rows.append(AblationRow("random", p, r, len(biased), n_acc))
    n_acc, r = rate(lambda i: None)
    rows.append(AblationRow("exact", None, r, len(biased), n_acc))
    return rows
