import itertools
import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from newsdebias.metrics import (
    BNSP_AUC,
    BPSN_AUC,
    SUBGROUP_AUC,
    ConfusionMatrix,
    GaucConfig,
    GroupOutcome,
    UndefinedMetricError,
    Verdict,
    accuracy,
    bias_auc,
    confusion,
    disparate_impact,
    f1,
    generalized_bias_auc,
    generalized_bias_auc_report,
    power_mean,
    precision,
    prf_acc,
    prf_acc_lenient,
    recall,
    roc_auc,
)

# ((0.6**-5 + 0.8**-5) / 2) ** (-1/5)
POWER_MEAN_06_08 = 0.6604834166525314


def brute_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return total / (len(pos) * len(neg))


def test_confusion_examples():
    assert confusion([1, 1, 1], [1, 1, 1]) == ConfusionMatrix(tp=3)
    assert confusion([1, 1, 0, 0], [1, 0, 0, 1]) == ConfusionMatrix(1, 1, 1, 1)
    assert confusion([1, 1], [0, 0]) == ConfusionMatrix(fp=2)


def test_confusion_errors():
    with pytest.raises(ValueError):
        confusion([1], [1, 0])
    with pytest.raises(ValueError):
        confusion([], [])
    with pytest.raises(ValueError):
        ConfusionMatrix(tp=-1)


def test_prf_acc_example():
    out = prf_acc(ConfusionMatrix(tp=3, fp=1, fn=1, tn=5))
    assert out == {"precision": 0.75, "recall": 0.75, "f1": 0.75, "accuracy": 0.8}


def test_perfect_classifier():
    assert set(prf_acc(ConfusionMatrix(tp=4, tn=6)).values()) == {1.0}


def test_undefined_precision():
    cm = ConfusionMatrix(fn=2, tn=3)
    with pytest.raises(UndefinedMetricError, match="precision"):
        precision(cm)
    assert prf_acc(cm, ["recall", "accuracy"]) == {"recall": 0.0, "accuracy": 0.6}
    assert prf_acc_lenient(cm)["precision"] is None
    assert prf_acc_lenient(cm)["f1"] == 0.0


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_f1_is_harmonic_mean(tp, fp, fn, tn):
    cm = ConfusionMatrix(tp, fp, fn, tn)
    assume(tp + fp > 0 and tp + fn > 0 and tp > 0)
    p, r = precision(cm), recall(cm)
    assert f1(cm) == pytest.approx(2 * p * r / (p + r), rel=1e-12)


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_metrics_in_unit_interval(tp, fp, fn, tn):
    assume(tp + fp + fn + tn > 0)
    for v in prf_acc_lenient(ConfusionMatrix(tp, fp, fn, tn)).values():
        assert v is None or 0.0 <= v <= 1.0


def test_di_examples():
    res = disparate_impact(GroupOutcome("u", False, 40, 100), GroupOutcome("p", True, 50, 100))
    assert res.di == pytest.approx(0.8)
    assert res.verdict is Verdict.ACCEPTABLE
    assert disparate_impact(GroupOutcome("u", False, 3, 10), GroupOutcome("p", True, 6, 20)).di == 1.0


def test_di_verdict_band():
    def verdict(u, p):
        return disparate_impact(GroupOutcome("u", False, u, 1000), GroupOutcome("p", True, p, 1000)).verdict

    assert verdict(506, 500) is Verdict.ACCEPTABLE  # 1.012
    assert verdict(625, 500) is Verdict.ACCEPTABLE  # 1.25 inclusive
    assert verdict(626, 500) is Verdict.FAVORS_UNPRIVILEGED
    assert verdict(399, 500) is Verdict.FAVORS_PRIVILEGED
    assert verdict(351, 500) is Verdict.FAVORS_PRIVILEGED  # 0.702


def test_di_undefined():
    with pytest.raises(UndefinedMetricError, match="undefined DI"):
        disparate_impact(GroupOutcome("u", False, 3, 10), GroupOutcome("p", True, 0, 10))
    with pytest.raises(ValueError):
        GroupOutcome("g", True, 5, 4)
    with pytest.raises(ValueError):
        GroupOutcome("g", True, 0, 0)


@given(st.integers(1, 100), st.integers(1, 100), st.integers(1, 100), st.integers(1, 100))
def test_di_reciprocity(a, n, b, m):
    assume(a <= n and b <= m)
    u, p = GroupOutcome("u", False, a, n), GroupOutcome("p", True, b, m)
    assert disparate_impact(p, u).di == pytest.approx(1.0 / disparate_impact(u, p).di, rel=1e-12)


def test_auc_examples():
    assert roc_auc([0.9, 0.8, 0.3], [1, 1, 0]) == 1.0
    assert roc_auc([0.5] * 6, [1, 0, 1, 0, 1, 0]) == 0.5
    assert roc_auc([0.1, 0.9], [1, 0]) == 0.0


def test_auc_single_class_errors():
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [1, 1])


def test_auc_random_50_matches_brute_force():
    rng = np.random.default_rng(50)
    scores = rng.integers(0, 10, 50) / 10
    labels = rng.integers(0, 2, 50)
    assert roc_auc(scores, labels) == pytest.approx(brute_auc(scores, labels), abs=1e-9)


@given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=2, max_size=40))
def test_auc_complement(pairs):
    scores = np.array([s for s, _ in pairs], dtype=float)
    labels = np.array([y for _, y in pairs])
    assume(labels.any() and not labels.all())
    assert roc_auc(scores, labels) == pytest.approx(1 - roc_auc(-scores, labels), abs=1e-12)
    assert roc_auc(scores, labels) == pytest.approx(brute_auc(scores, labels), abs=1e-12)


def test_power_mean_oracle():
    assert power_mean([0.6, 0.8], -5) == pytest.approx(POWER_MEAN_06_08, abs=1e-12)
    assert round(power_mean([0.6, 0.8], -5), 4) == 0.6605
    assert power_mean([0.7, 0.7, 0.7], -5) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        power_mean([0.5], 0)


@given(
    st.lists(st.floats(0.01, 1.0), min_size=1, max_size=10),
    st.floats(-10, 10).filter(lambda p: abs(p) > 1e-3),
)
def test_power_mean_bounds(values, p):
    m = power_mean(values, p)
    assert min(values) - 1e-9 <= m <= max(values) + 1e-9


def _gauc_fixture():
    # two subgroups, every partition has both classes
    scores = np.array([0.9, 0.2, 0.8, 0.4, 0.7, 0.1, 0.6, 0.3, 0.55, 0.45, 0.65, 0.35])
    labels = np.array([1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1])
    g1 = np.zeros(12, bool)
    g1[:4] = True
    g2 = np.zeros(12, bool)
    g2[8:] = True
    return scores, labels, {"g1": g1, "g2": g2}


def test_gauc_matches_manual_composition():
    scores, labels, groups = _gauc_fixture()
    expected = np.mean(
        [
            power_mean([bias_auc(k, scores, labels, groups[g]) for g in ("g1", "g2")], -5)
            for k in (SUBGROUP_AUC, BPSN_AUC, BNSP_AUC)
        ]
    )
    assert generalized_bias_auc(scores, labels, groups) == pytest.approx(expected, abs=1e-12)


def test_gauc_single_submetric_two_subgroups():
    # subgroup AUCs constructed to be exactly 0.6 and 0.8
    s1 = [0.9, 0.7, 0.5, 0.3, 0.1, 0.8, 0.6, 0.4, 0.2, 0.0]
    y1 = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]  # 15/25 = 0.6
    s2 = [0.9, 0.7, 0.5, 0.3, 0.1, 0.0, 0.02, 0.05, 0.2, 0.8]
    y2 = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]  # 20/25 = 0.8
    assert brute_auc(s1, y1) == 0.6
    assert brute_auc(s2, y2) == 0.8
    scores = np.array(s1 + s2)
    labels = np.array(y1 + y2)
    g1 = np.arange(20) < 10
    val = generalized_bias_auc(scores, labels, {"a": g1, "b": ~g1}, GaucConfig(submetrics=(SUBGROUP_AUC,)))
    assert val == pytest.approx(POWER_MEAN_06_08, abs=1e-4)


def test_gauc_all_equal_identity():
    # every subgroup sees the same ranking, so every bias AUC is 1.0
    scores = np.array([0.9, 0.1] * 6)
    labels = np.array([1, 0] * 6)
    groups = {f"g{i}": np.arange(12) // 4 == i for i in range(3)}
    assert generalized_bias_auc(scores, labels, groups) == pytest.approx(1.0)


def test_gauc_excludes_one_class_subgroup():
    scores, labels, groups = _gauc_fixture()
    only_pos = np.zeros(12, bool)
    only_pos[[0, 2]] = True
    with pytest.warns(UserWarning, match="lacks a class"):
        rep = generalized_bias_auc_report(scores, labels, {**groups, "pos": only_pos})
    assert "pos" in rep.excluded[SUBGROUP_AUC]
    assert "pos" not in rep.excluded[BPSN_AUC]


def test_gauc_all_excluded_errors():
    scores = np.array([0.9, 0.1, 0.8, 0.2])
    labels = np.array([1, 0, 1, 0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ValueError, match="excluded"):
            generalized_bias_auc(scores, labels, {"pos": np.array([1, 0, 1, 0], bool)})


def test_gauc_overall_term_and_weights():
    scores, labels, groups = _gauc_fixture()
    base = generalized_bias_auc_report(scores, labels, groups)
    rep = generalized_bias_auc_report(scores, labels, groups, GaucConfig(overall_weight=0.25))
    assert rep.overall_auc == roc_auc(scores, labels)
    assert rep.value == pytest.approx(0.25 * rep.overall_auc + 0.75 * base.value)
    cfg = GaucConfig(weights={SUBGROUP_AUC: 1.0, BPSN_AUC: 0.0, BNSP_AUC: 0.0})
    assert generalized_bias_auc(scores, labels, groups, cfg) == pytest.approx(base.per_submetric[SUBGROUP_AUC])


def test_gauc_config_validation():
    with pytest.raises(ValueError):
        GaucConfig(power=0)
    with pytest.raises(ValueError):
        GaucConfig(submetrics=("nope",))
    with pytest.raises(ValueError):
        GaucConfig(weights={SUBGROUP_AUC: 0.5, BPSN_AUC: 0.2, BNSP_AUC: 0.2})


def test_accuracy_direct():
    assert accuracy(ConfusionMatrix(1, 2, 3, 4)) == 0.5
    assert recall(ConfusionMatrix(1, 2, 3, 4)) == 0.25
