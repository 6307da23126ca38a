"""Scikit-learn estimator wrapper around the full pipeline."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hotword_ranker import PhoneticHotwordRanker, make_corpus, make_hotword_pool


@pytest.fixture(scope="module")
def fitted(lexicon):
    pool = make_hotword_pool(lexicon, n=10, seed=9)
    records = make_corpus(pool, 20, lexicon, seed=9)
    est = PhoneticHotwordRanker(
        epochs=2, mining_rounds=1, canvas_rows=12, canvas_cols=48, n=3, seed=9,
    )
    return est.fit(records), pool, records


def test_get_set_params_round_trip():
    est = PhoneticHotwordRanker(epochs=4, seed=3)
    params = est.get_params()
    assert params["epochs"] == 4 and params["seed"] == 3
    est.set_params(epochs=7)
    assert est.get_params()["epochs"] == 7


def test_clone_preserves_params():
    est = PhoneticHotwordRanker(epochs=4, n=5)
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_unfitted_raises():
    est = PhoneticHotwordRanker()
    with pytest.raises(NotFittedError):
        est.predict(["北京"])
    with pytest.raises(NotFittedError):
        est.transform(["北京"])


def test_fit_requires_records():
    with pytest.raises(ValueError):
        PhoneticHotwordRanker().fit([])


def test_fit_builds_bank_from_records(fitted):
    est, pool, _ = fitted
    assert set(est.bank_.surfaces()) == set(pool)
    assert est.model_ is not None
    assert est.report_.rounds


def test_transform_shape_and_range(fitted):
    est, _, records = fitted
    texts = [r.hypothesis for r in records[:4]]
    scores = est.transform(texts)
    assert scores.shape == (4, len(est.bank_))
    assert np.all(scores >= 0.0) and np.all(scores <= 1.0)


def test_transform_unconvertible_text_scores_zero(fitted):
    est, _, _ = fitted
    scores = est.transform(["2024"])
    assert np.all(scores == 0.0)


def test_predict_returns_topn_surfaces(fitted):
    est, _, records = fitted
    preds = est.predict([r.hypothesis for r in records[:3]])
    assert len(preds) == 3
    for top in preds:
        assert len(top) == est.n
        assert all(s in est.bank_.surface_index for s in top)


def test_fit_accepts_dicts(lexicon):
    pool = make_hotword_pool(lexicon, n=5, seed=12)
    records = make_corpus(pool, 8, lexicon, seed=12)
    dicts = [
        {"reference": r.reference, "hotwords": r.hotwords,
         "hypothesis": r.hypothesis, "mer": r.mer}
        for r in records
    ]
    est = PhoneticHotwordRanker(
        epochs=1, mining_rounds=1, canvas_rows=12, canvas_cols=48, seed=12,
    ).fit(dicts)
    assert len(est.bank_) == len({h for r in records for h in r.hotwords})


def test_fit_simulates_missing_hypotheses(lexicon):
    pool = make_hotword_pool(lexicon, n=5, seed=13)
    records = [
        {"reference": f"大家好我说{w}谢谢", "hotwords": [w]} for w in pool
    ]
    est = PhoneticHotwordRanker(
        epochs=1, mining_rounds=1, canvas_rows=12, canvas_cols=48, seed=13,
    ).fit(records)
    assert est.report_.rounds[0]["pairs"] > 0
