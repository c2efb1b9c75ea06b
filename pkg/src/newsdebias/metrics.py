"""Classification and fairness metrics.

Precision / recall / F1 / accuracy from a confusion matrix (Biased is the
positive class), disparate impact with the four-fifths band, rank-based
ROC-AUC, and the generalized (power) mean of bias AUCs over identity
subgroups: Subgroup AUC, BPSN AUC and BNSP AUC.
"""

from __future__ import annotations

import enum
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

DI_LOWER = 0.8
DI_UPPER = 1.25

SUBGROUP_AUC = "subgroup_auc"
BPSN_AUC = "bpsn_auc"
BNSP_AUC = "bnsp_auc"
BIAS_AUCS = (SUBGROUP_AUC, BPSN_AUC, BNSP_AUC)


class UndefinedMetricError(ValueError):
    """A metric's denominator is zero."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class GroupOutcome:
    group_id: str
    privileged: bool
    num_positives: int
    num_instances: int

    def __post_init__(self) -> None:
        if self.num_instances < 1:
            raise ValueError(f"group {self.group_id!r} has no instances")
        if not 0 <= self.num_positives <= self.num_instances:
            raise ValueError(f"group {self.group_id!r}: positives must lie in [0, instances]")

    @property
    def rate(self) -> float:
        return self.num_positives / self.num_instances


class Verdict(str, enum.Enum):
    FAVORS_PRIVILEGED = "FavorsPrivileged"
    ACCEPTABLE = "Acceptable"
    FAVORS_UNPRIVILEGED = "FavorsUnprivileged"


@dataclass(frozen=True)
class DisparateImpact:
    di: float
    verdict: Verdict


@dataclass(frozen=True)
class GaucConfig:
    power: float = -5.0
    submetrics: tuple[str, ...] = BIAS_AUCS
    weights: Mapping[str, float] | None = None
    # Weight of the overall AUC term; 0 keeps it out. 0.25 with equal
    # submetric weights gives the Kaggle-style final score.
    overall_weight: float = 0.0

    def __post_init__(self) -> None:
        if self.power == 0:
            raise ValueError("power must be non-zero")
        if not self.submetrics or set(self.submetrics) - set(BIAS_AUCS):
            raise ValueError(f"submetrics must be a non-empty subset of {BIAS_AUCS}")
        if not 0.0 <= self.overall_weight < 1.0:
            raise ValueError("overall_weight must lie in [0, 1)")
        if self.weights is not None:
            if set(self.weights) != set(self.submetrics) or any(w < 0 for w in self.weights.values()):
                raise ValueError("weights need one non-negative value per submetric")
            if not np.isclose(sum(self.weights.values()), 1.0):
                raise ValueError("submetric weights must sum to 1")

    def weight(self, submetric: str) -> float:
        if self.weights is None:
            return 1.0 / len(self.submetrics)
        return self.weights[submetric]


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    if len(predictions) != len(labels):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(labels)} labels")
    if not len(labels):
        raise ValueError("empty input")
    pred = np.asarray(predictions).astype(bool)
    true = np.asarray(labels).astype(bool)
    return ConfusionMatrix(
        tp=int(np.sum(pred & true)),
        fp=int(np.sum(pred & ~true)),
        fn=int(np.sum(~pred & true)),
        tn=int(np.sum(~pred & ~true)),
    )


def _ratio(name: str, num: int, den: int) -> float:
    if den == 0:
        raise UndefinedMetricError(f"{name} undefined: zero denominator")
    return num / den


def precision(cm: ConfusionMatrix) -> float:
    return _ratio("precision", cm.tp, cm.tp + cm.fp)


def recall(cm: ConfusionMatrix) -> float:
    return _ratio("recall", cm.tp, cm.tp + cm.fn)


def f1(cm: ConfusionMatrix) -> float:
    return _ratio("f1", 2 * cm.tp, 2 * cm.tp + cm.fn + cm.fp)


def accuracy(cm: ConfusionMatrix) -> float:
    return _ratio("accuracy", cm.tp + cm.tn, cm.total)


_PRF = {"precision": precision, "recall": recall, "f1": f1, "accuracy": accuracy}


def prf_acc(cm: ConfusionMatrix, metrics: Sequence[str] = tuple(_PRF)) -> dict[str, float]:
    """Requested metrics by name; raises UndefinedMetricError naming the first undefined one."""
    return {name: _PRF[name](cm) for name in metrics}


def prf_acc_lenient(cm: ConfusionMatrix) -> dict[str, float | None]:
    """Like :func:`prf_acc` but undefined metrics come back as None (for reports)."""
    out: dict[str, float | None] = {}
    for name, fn in _PRF.items():
        try:
            out[name] = fn(cm)
        except UndefinedMetricError:
            out[name] = None
    return out


def di_verdict(di: float) -> Verdict:
    if di < DI_LOWER:
        return Verdict.FAVORS_PRIVILEGED
    if di > DI_UPPER:
        return Verdict.FAVORS_UNPRIVILEGED
    return Verdict.ACCEPTABLE


def disparate_impact(unprivileged: GroupOutcome, privileged: GroupOutcome) -> DisparateImpact:
    """Ratio of positive rates, unprivileged over privileged; band [0.8, 1.25] inclusive."""
    if privileged.num_positives == 0:
        raise UndefinedMetricError("undefined DI: privileged group has no positive outcomes")
    di = unprivileged.rate / privileged.rate
    return DisparateImpact(di, di_verdict(di))


def _check_binary(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D and the same length")
    y = y.astype(bool)
    if y.all() or not y.any():
        raise ValueError("roc_auc needs both classes")
    return s, y


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC with mid-ranks, so ties count one half."""
    s, y = _check_binary(scores, labels)
    ranks = rankdata(s)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def power_mean(values: Sequence[float], p: float) -> float:
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        raise ValueError("power mean of nothing")
    if p == 0:
        raise ValueError("power must be non-zero")
    return float(np.mean(a**p) ** (1.0 / p))


def _bias_auc_partition(kind: str, y: np.ndarray, in_group: np.ndarray) -> np.ndarray:
    if kind == SUBGROUP_AUC:
        return in_group
    if kind == BPSN_AUC:
        return (in_group & y) | (~in_group & ~y)
    if kind == BNSP_AUC:
        return (in_group & ~y) | (~in_group & y)
    raise ValueError(f"unknown submetric {kind!r}")


def bias_auc(kind: str, scores, labels, in_group) -> float:
    """One subgroup's Subgroup / BPSN / BNSP AUC."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    g = np.asarray(in_group).astype(bool)
    keep = _bias_auc_partition(kind, y, g)
    return roc_auc(s[keep], y[keep])


@dataclass
class GaucResult:
    value: float
    per_submetric: dict[str, float]
    per_subgroup: dict[str, dict[str, float]] = field(default_factory=dict)
    excluded: dict[str, list[str]] = field(default_factory=dict)
    overall_auc: float | None = None


def generalized_bias_auc_report(
    scores: Sequence[float],
    labels: Sequence[int],
    subgroup_membership: Mapping[str, Sequence[bool]],
    config: GaucConfig = GaucConfig(),
) -> GaucResult:
    """Power mean over subgroups of each bias AUC, then a weighted sum over submetrics.

    A subgroup whose partition for some submetric lacks a class is left out
    of that submetric with a warning. A submetric left with no subgroups is
    an error.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    per_subgroup: dict[str, dict[str, float]] = {}
    excluded: dict[str, list[str]] = {k: [] for k in config.submetrics}
    per_submetric: dict[str, float] = {}
    for kind in config.submetrics:
        aucs = []
        for name in sorted(subgroup_membership):
            g = np.asarray(subgroup_membership[name]).astype(bool)
            if g.shape != y.shape:
                raise ValueError(f"membership for {name!r} has the wrong length")
            keep = _bias_auc_partition(kind, y, g)
            yk = y[keep]
            if yk.all() or not yk.any():
                excluded[kind].append(name)
                warnings.warn(f"{kind}: subgroup {name!r} lacks a class; excluded", stacklevel=2)
                continue
            auc = roc_auc(s[keep], yk)
            per_subgroup.setdefault(name, {})[kind] = auc
            aucs.append(auc)
        if not aucs:
            raise ValueError(f"{kind}: every subgroup was excluded")
        per_submetric[kind] = power_mean(aucs, config.power)

    value = sum(config.weight(k) * v for k, v in per_submetric.items())
    overall = None
    if config.overall_weight > 0:
        overall = roc_auc(s, y)
        value = config.overall_weight * overall + (1.0 - config.overall_weight) * value
    return GaucResult(value, per_submetric, per_subgroup, excluded, overall)


def generalized_bias_auc(
    scores: Sequence[float],
    labels: Sequence[int],
    subgroup_membership: Mapping[str, Sequence[bool]],
    config: GaucConfig = GaucConfig(),
) -> float:
    return generalized_bias_auc_report(scores, labels, subgroup_membership, config).value
