import numpy as np
import pytest
from hypothesis import given, strategies as st

from bpdetect.cohort import UserDoc
from bpdetect.errors import DataError
from bpdetect.lexicon import load_demo_lexicon, load_demo_summaries
from bpdetect.textproc import fit_tfidf
from bpdetect.userfeat import (BEHAVIORAL_FIELDS, FeatureMatrix, LexiconModel, assemble, behavioral,
                               interval_stats, user_tokens)

from conftest import rec


def test_interval_examples():
    s = interval_stats([0, 60, 120])
    assert s["interval_mean"] == s["interval_median"] == s["interval_mode"] == 60
    s = interval_stats([0, 60, 180])
    assert (s["interval_mean"], s["interval_median"], s["interval_p10"]) == (90, 90, 66.0)
    s = interval_stats([5])
    assert s["interval_defined"] is False and s["interval_mean"] == 0.0


@given(st.lists(st.integers(0, 10**7), min_size=2, max_size=40))
def test_interval_ordering(ts):
    s = interval_stats(sorted(ts))
    assert s["interval_p10"] <= s["interval_p25"] <= s["interval_median"] <= s["interval_p75"] <= s["interval_p90"]
    gaps = np.diff(sorted(ts))
    assert gaps.min() <= s["interval_mean"] <= gaps.max()


def test_behavioral_examples():
    recs = [rec("a", kind="post", ups=5), rec("a", kind="post", ups=0, downs=1)] + \
           [rec("a", kind="comment") for _ in range(3)]
    b = behavioral(UserDoc("a", "control", recs, 5))
    assert b.post_comment_ratio == 0.5 and b.mean_controversiality == 0.0
    assert b.mean_score_diff == pytest.approx(4 / 5)
    b = behavioral(UserDoc("a", "control", [rec("a", ups=5), rec("a", ups=0, downs=1)], 2))
    assert b.mean_score_diff == 2.0
    with pytest.raises(DataError):
        behavioral(UserDoc("a", "control", [], 0))


def _users():
    return [UserDoc("u2", "bipolar", [rec("u2", body="i feel happy today"), rec("u2", body="sad day")], 6),
            UserDoc("u1", "control", [rec("u1", body="we play games"), rec("u1", body="nice games")], 5)]


def test_assemble_widths_and_order():
    lm = LexiconModel("liwc", load_demo_lexicon(), load_demo_summaries())
    users = _users()
    fm = assemble(users, ["behavioral"])
    assert fm.shape == (2, 12) and fm.user_ids == ["u1", "u2"] and list(fm.labels) == [0, 1]
    assert all(n.startswith("user:") for n in fm.feature_names)
    prof = assemble(users, ["category_profile"], [lm])
    assert prof.shape[1] == len(lm.lexicon.names) + len(lm.summaries)
    tf = fit_tfidf([user_tokens(u) for u in users], min_df=1)
    full = assemble(users, ["category_profile", "tfidf", "behavioral"], [lm], tf)
    assert full.shape[1] == prof.shape[1] + len(tf) + len(BEHAVIORAL_FIELDS)
    # dropping a part leaves the remaining columns untouched
    sub = full.select(prof.feature_names)
    assert np.array_equal(sub.dense(), prof.dense())
    with pytest.raises(DataError):
        assemble(users, ["tfidf"])
    with pytest.raises(DataError):
        assemble([], ["behavioral"])


def test_csv_roundtrip_and_determinism(tmp_path):
    lm = LexiconModel("liwc", load_demo_lexicon(), load_demo_summaries())
    a = assemble(_users(), ["category_profile", "behavioral"], [lm])
    b = assemble(list(reversed(_users())), ["category_profile", "behavioral"], [lm])
    assert a.to_csv_string() == b.to_csv_string()
    a.save_csv(tmp_path / "f.csv")
    c = FeatureMatrix.load_csv(tmp_path / "f.csv")
    assert c.feature_names == a.feature_names and np.array_equal(c.dense(), a.dense())
    assert c.to_csv_string() == a.to_csv_string()


def test_sparse_mask():
    users = _users()
    tf = fit_tfidf([user_tokens(u) for u in users], min_df=1)
    fm = assemble(users, ["tfidf", "behavioral"], tfidf=tf)
    assert fm.sparse_mask.sum() == len(tf)
