import pytest
from hypothesis import given, strategies as st

from bpdetect.cohort import (CohortConfig, UserDoc, assign_topic_categories, build_cohorts,
                             detect_flair, detect_self_report, eligible_subreddits, mentions_any,
                             prune_user, select_control, token_count)
from bpdetect.errors import ConfigError

import cohort_fixture as cf
from conftest import rec, words

CFG = CohortConfig()


@pytest.mark.parametrize("body,expected", [
    ("I am diagnosed with bipolar.", True),
    ("", False),
    ("My mom was diagnosed with bipolar", False),
    ("i've been diagnosed with bipolar 2 for years", True),
    ("I’m diagnosed with bipolar", True),
    ("my doctor diagnosed me with bipolar", True),
    ("Hi am diagnosed with bipolar", False),
])
def test_self_report(body, expected):
    assert detect_self_report(body) is expected


@given(st.text(alphabet="IiAaMm DdgnosEeWwThBbPpLlRr'.", max_size=60))
def test_self_report_case_insensitive(body):
    assert detect_self_report(body) == detect_self_report(body.lower())


def test_flair():
    assert detect_flair("Bipolar II | lamotrigine", ["bipolar"])
    assert not detect_flair(None)
    assert detect_flair("BP2", ["bp"])


def test_mentions():
    assert mentions_any("my BP meds", {"bipolar", "bp"})
    assert not mentions_any("bpm is high", {"bp"})
    assert mentions_any("(bipolar)", {"bipolar"})


def test_prune_example():
    recs = [rec("a", "bipolar", "hello"), rec("a", "gaming", "my BP meds " + words(10)),
            rec("a", "gaming", words(1200))]
    doc = prune_user(recs, CFG)
    assert isinstance(doc, UserDoc) and len(doc.comments) == 1 and doc.token_count == 1200


def test_prune_clean_and_boundary():
    recs = [rec("a", "gaming", words(1000)) for _ in range(5)]
    doc = prune_user(recs, CFG)
    assert doc.comments == recs and doc.token_count == 5000
    assert prune_user([rec("b", "gaming", words(999))], CFG).reason == "below_min_words"


def test_prune_idempotent():
    recs = [rec("a", "bipolar", words(500)), rec("a", "gaming", "bipolar " + words(10)),
            rec("a", "news", words(1100))]
    once = prune_user(recs, CFG)
    twice = prune_user(once.comments, CFG)
    assert twice == once


def test_select_control_examples():
    corpus = {
        "bp": [rec("bp", "gaming", words(50)), rec("bp", "gaming", words(50)), rec("bp", "knitting", "hi"),
               rec("bp", "bipolar", "i am diagnosed with bipolar")],
        "ok": [rec("ok", "gaming", words(2000))],
        "mh": [rec("mh", "mentalhealth", words(1500)), rec("mh", "gaming", words(600))],
        "small": [rec("small", "gaming", words(800))],
        "knit": [rec("knit", "knitting", words(2000))],
    }
    assert eligible_subreddits(corpus, {"bp"}, CFG) == {"gaming"}
    assert select_control(corpus, {"bp"}, CFG) == {"ok"}
    # a lone subreddit sits exactly at the mean share, which does not exceed it
    assert eligible_subreddits({"bp": [rec("bp", "gaming", "x")]}, {"bp"}, CFG) == set()


def test_topic_categories():
    cmap = {"Politics": ["politics", "news"], "Gaming": ["gaming"]}
    u = UserDoc("a", "control", [rec("a", "politics", words(1200))], 1200)
    assert assign_topic_categories(u, cmap) == {"Politics"}
    u = UserDoc("a", "control", [rec("a", "politics", words(999))], 999)
    assert assign_topic_categories(u, cmap) == frozenset()
    u = UserDoc("a", "control", [rec("a", "politics", words(600)), rec("a", "news", words(400)),
                                 rec("a", "gaming", words(1000))], 2000)
    assert assign_topic_categories(u, cmap) == {"Politics", "Gaming"}


def test_fixture_cohorts():
    res = build_cohorts(cf.build(), CFG)
    assert res.detected == cf.EXPECTED_DETECTED
    assert {u.author for u in res.bipolar} == cf.EXPECTED_BIPOLAR
    assert {r.author for r in res.rejected} == cf.EXPECTED_REJECTED
    assert {u.author for u in res.control} == cf.EXPECTED_CONTROL
    bp = {u.author for u in res.bipolar}
    assert not bp & {u.author for u in res.control}
    for u in res.bipolar + res.control:
        assert token_count(u.comments) == u.token_count >= CFG.min_words
    pruned = next(u for u in res.bipolar if u.author == "pruned")
    assert len(pruned.comments) == 1


def test_global_search_option():
    res = build_cohorts(cf.build(), CohortConfig(search_globally=True))
    assert "sr_outside" in res.detected


def test_config_json():
    cfg = CohortConfig.from_json({"min_words": 500, "bipolar_subreddits": ["Bipolar"]})
    assert cfg.bipolar_subreddits == {"bipolar"}
    assert CohortConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ConfigError):
        CohortConfig.from_json({"nope": 1})


def test_reported_class_shares():
    n_b, n_c = 3488, 3931
    assert round(n_b / (n_b + n_c), 4) == 0.4701
    assert round(n_c / (n_b + n_c), 4) == 0.5299
