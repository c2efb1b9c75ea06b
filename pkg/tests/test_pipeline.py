import json
import math

import pytest

from newsdebias.dataset import MbicRecord, load_group_config
from newsdebias.debias import DEBIASED, NON_BIASED, DebiasConfig
from newsdebias.detection import Label
from newsdebias.pipeline import (
    Models,
    ablation_masking,
    debias_document,
    di_by_attribute,
    evaluate_before_after,
    run_pipeline,
)
from newsdebias.synthetic import PLANTED, SyntheticConfig, articles, generate


def test_models_must_be_complete(synthetic_models):
    with pytest.raises(ValueError, match="recognizer"):
        Models(synthetic_models.detector, None, synthetic_models.infiller)


def test_empty_input(synthetic_models):
    assert run_pipeline(synthetic_models, []) == []


def test_non_biased_batch_passes_through(synthetic_models, synthetic_records):
    neutral = [r.sentence for r in synthetic_records if not r.is_biased][:30]
    docs = run_pipeline(synthetic_models, neutral)
    for doc, text in zip(docs, neutral):
        assert doc.output == text
        assert all(s.status == NON_BIASED for s in doc.sentences)
        assert doc.sentences[0].chosen.text == text


def test_planted_batch_gets_spans_and_candidates(synthetic_models, synthetic_records):
    planted = [r for r in synthetic_records if r.biased_words][:30]
    for rec, doc in zip(planted, run_pipeline(synthetic_models, [r.sentence for r in planted])):
        (res,) = doc.sentences
        assert res.spans and res.candidates
        assert res.status == DEBIASED
        (word,) = rec.biased_words
        assert word in rec.sentence and word not in doc.output


def test_document_keeps_separators(synthetic_models):
    text = "She said the report about taxes was released on Monday.  Critics slammed the trade proposal from him."
    doc = debias_document(synthetic_models, text, doc_id="d1")
    assert len(doc.sentences) == 2
    assert doc.output.startswith("She said the report about taxes was released on Monday.  Critics ")
    assert "slammed" not in doc.output
    assert doc.probability_after < doc.probability_before
    rec = doc.to_record()
    assert rec["id"] == "d1" and len(rec["sentences"]) == 2


def test_ids_preserved(synthetic_models):
    docs = run_pipeline(synthetic_models, [("a", "He reviewed it."), "She reviewed it."])
    assert [d.id for d in docs] == ["a", "1"]


def test_no_op_evaluation(synthetic_records):
    rep = evaluate_before_after(synthetic_records, load_group_config(), split_seed=3, debias_enabled=False)
    assert rep.before == rep.after
    assert rep.per_document == []
    assert rep.n_train + rep.n_test == len(synthetic_records)


def skewed_corpus(seed=0):
    return generate(
        SyntheticConfig(
            600,
            seed=seed,
            bias_rate={"female": 0.7, "male": 0.2, "none": 0.45},
            unlisted_rate=0.2,
        )
    )


def test_debiasing_lowers_accuracy_and_moves_di_toward_one():
    rep = evaluate_before_after(skewed_corpus(), load_group_config(), split_seed=0)
    assert rep.after.accuracy < rep.before.accuracy
    before, after = rep.before.di["gender"]["di"], rep.after.di["gender"]["di"]
    assert abs(math.log(after)) < abs(math.log(before))
    assert set(rep.before.di) >= {"gender", "race", "pooled"}
    json.dumps(rep.to_dict())


def test_di_by_attribute_pooled():
    groups = load_group_config()
    records = [
        MbicRecord("She won.", Label.BIASED),
        MbicRecord("She lost.", Label.NON_BIASED),
        MbicRecord("He won.", Label.BIASED),
        MbicRecord("The immigrants won.", Label.BIASED),
        MbicRecord("The citizens lost.", Label.BIASED),
        MbicRecord("The citizens won.", Label.NON_BIASED),
    ]
    di = di_by_attribute(records, groups)
    assert di["gender"]["di"] == 0.5
    assert di["language"]["di"] == 2.0
    assert di["race"] is None
    # pooled counts: unprivileged 2/3, privileged 2/3
    assert di["pooled"]["unprivileged"] == [2, 3]
    assert di["pooled"]["privileged"] == [2, 3]
    assert di["pooled"]["di"] == 1.0


def test_ablation_shape_and_zero_p(synthetic_models, synthetic_records):
    rows = ablation_masking(synthetic_records[:120], synthetic_models, p_values=(0.0, 0.5, 1.0), seed=4)
    assert [r.masking for r in rows] == ["random", "random", "random", "exact"]
    assert rows[0].success_rate == 0.0 and rows[0].n_accepted == 0
    assert rows[-1].p is None
    assert all(r.n_biased == rows[0].n_biased > 0 for r in rows)
    assert rows == ablation_masking(synthetic_records[:120], synthetic_models, p_values=(0.0, 0.5, 1.0), seed=4)


def test_ablation_rejects_bad_p(synthetic_models):
    with pytest.raises(ValueError):
        ablation_masking(["x"], synthetic_models, p_values=(1.5,))


def test_synthetic_generator():
    recs = generate(SyntheticConfig(50, seed=1))
    assert recs == generate(SyntheticConfig(50, seed=1))
    planted = {w for ws in PLANTED.values() for w in ws}
    for r in recs:
        assert r.is_biased == bool(r.biased_words)
        for w in r.biased_words:
            assert w in planted and w in r.sentence
    arts = articles(recs)
    assert len(arts) == 10
    assert arts[0][1].count(".") == 5


def test_report_serializes(synthetic_records):
    rep = evaluate_before_after(synthetic_records[:200], load_group_config(), debias_config=DebiasConfig(top_k=3))
    d = rep.to_dict()
    assert set(d) == {
        "split_seed",
        "n_train",
        "n_test",
        "debias_enabled",
        "dataset_di",
        "before",
        "after",
        "per_document",
    }
    assert set(d["before"]) == {"precision", "recall", "f1", "accuracy", "di", "g_auc"}
    assert len(d["per_document"]) == rep.n_test
