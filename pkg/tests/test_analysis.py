import calendar
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpdetect.analysis import (emotion_summary, feature_merit, monthly_chunks, t_sf_numeric,
                               variance_analysis, welch_ttest)
from bpdetect.cohort import UserDoc
from bpdetect.errors import DataError
from bpdetect.ingest import CommentRecord
from bpdetect.lexicon import load_demo_lexicon
from bpdetect.stats import betainc, t_sf_two_sided
from bpdetect.userfeat import FeatureMatrix

P_T1_DF8 = 0.34659350708733416  # frozen from an independent t implementation


def test_welch_examples():
    r = welch_ttest([1, 2, 3], [1, 2, 3])
    assert r.t == 0.0 and r.p == 1.0
    r = welch_ttest([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert r.t == -1.0 and r.df == 8.0
    assert abs(r.p - 0.3466) < 1e-4 and abs(r.p - P_T1_DF8) < 1e-12
    with pytest.raises(DataError):
        welch_ttest([2, 2, 2], [2, 2])


def test_betainc_edges():
    assert betainc(2, 3, 0.0) == 0.0 and betainc(2, 3, 1.0) == 1.0
    # I_x(1, 1) = x
    assert abs(betainc(1, 1, 0.3) - 0.3) < 1e-14
    assert t_sf_two_sided(math.inf, 3) == 0.0


def test_oracle_agreement_randomized():
    rng = np.random.default_rng(20180901)
    for _ in range(20):
        t = float(rng.uniform(-8, 8))
        df = float(rng.uniform(1, 200))
        assert abs(t_sf_two_sided(t, df) - t_sf_numeric(t, df)) <= 1e-8


samples = st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=20)


@settings(max_examples=80)
@given(samples, samples, st.floats(-50, 50), st.floats(0.1, 10))
def test_welch_invariances(a, b, shift, scale):
    try:
        r = welch_ttest(a, b)
    except DataError:
        return
    s = welch_ttest(b, a)
    assert s.p == pytest.approx(r.p, abs=1e-12) and s.t == pytest.approx(-r.t, rel=1e-12, abs=1e-12)
    if abs(r.t) > 1e6 or np.ptp(a) < 1e-6 * max(1.0, np.abs(a).max()) or np.ptp(b) < 1e-6 * max(1.0, np.abs(b).max()):
        return  # nearly degenerate variances lose too many digits under affine maps
    sh = welch_ttest([x + shift for x in a], [x + shift for x in b])
    sc = welch_ttest([x * scale for x in a], [x * scale for x in b])
    for o in (sh, sc):
        assert o.t == pytest.approx(r.t, rel=1e-6, abs=1e-9)
        assert o.df == pytest.approx(r.df, rel=1e-6)
        assert o.p == pytest.approx(r.p, rel=1e-6, abs=1e-12)


def _fm(cols, labels, names=None):
    X = np.column_stack(cols)
    names = names or [f"f{i}" for i in range(X.shape[1])]
    return FeatureMatrix(names, X, labels, [f"u{i:04d}" for i in range(len(labels))])


def test_merit_planted_and_skipped():
    rng = np.random.default_rng(3)
    y = np.array([1] * 200 + [0] * 200)
    planted = np.where(y == 1, rng.normal(1, 0.1, 400), rng.normal(0, 0.1, 400))
    noise = [rng.normal(size=400) for _ in range(5)]
    fm = _fm([*noise[:2], planted, *noise[2:], np.ones(400)], y)
    rep = feature_merit(fm)
    assert rep.rows[0][0] == "f2" and rep.rows[0][1].p < 1e-10
    assert rep.skipped == ["f6"]
    # ranking ignores column order
    perm = [6, 3, 0, 5, 2, 1, 4]
    fm2 = _fm([fm.X[:, j] for j in perm], y, [fm.feature_names[j] for j in perm])
    assert [n for n, _ in feature_merit(fm2).rows] == [n for n, _ in rep.rows]


def test_merit_noise_spot_bound():
    passes = 0
    for seed in range(40):
        rng = np.random.default_rng(seed)
        y = np.array([1] * 50 + [0] * 50)
        rep = feature_merit(_fm([rng.normal(size=100) for _ in range(50)], y))
        passes += min(r.p for _, r in rep.rows) > 0.001 / 50
    assert passes >= 0.95 * 40


def test_emotion_summary():
    rng = np.random.default_rng(1)
    y = np.array([1] * 100 + [0] * 100)
    base = rng.normal(3, 0.5, 100)
    same = np.concatenate([base, base])
    shifted = np.concatenate([rng.normal(3.5, 0.5, 100), rng.normal(3, 0.5, 100)])
    fm = _fm([same, shifted], y, ["liwc:negemo", "liwc:posemo"])
    rep = emotion_summary(fm, ["negemo", "posemo"])
    neg, pos = rep.rows
    assert neg.mean_a == neg.mean_b and neg.p == 1.0
    assert pos.p < 0.001
    line = rep.to_tsv().splitlines()[2]
    assert line.startswith("posemo\t") and line.count(" ± ") == 2 and line.endswith("*")


def _ts(y, m, d):
    return calendar.timegm((y, m, d, 12, 0, 0))


def _user(author, label, month_bodies):
    recs = [CommentRecord(f"{author}-{i}", author, "gaming", ts, body)
            for i, (ts, body) in enumerate(month_bodies)]
    return UserDoc(author, label, recs, sum(len(b.split()) for _, b in month_bodies))


def test_monthly_chunks():
    w = " ".join(["cat"] * 120)
    u = _user("a", "control", [(_ts(2017, 1, 5), w), (_ts(2017, 1, 20), w), (_ts(2017, 3, 2), w),
                               (_ts(2017, 4, 2), "few words here")])
    ch = monthly_chunks(u)
    assert list(ch) == [(2017, 1), (2017, 3)] and len(ch[(2017, 1)]) == 240
    assert monthly_chunks(UserDoc("e", "control", [], 0)) == {}
    u = _user("b", "control", [(_ts(2017, 1, 5), " ".join(["cat"] * 50))])
    assert monthly_chunks(u) == {}


def _rate_user(author, label, rates, rng, n=1000):
    bodies = []
    for m, r in enumerate(rates):
        k = rng.binomial(n, r)
        toks = ["happy"] * k + ["cat"] * (n - k)
        bodies.append((_ts(2017, m + 1, 10), " ".join(toks)))
    return _user(author, label, bodies)


def test_variance_oscillator_vs_constant():
    lex = load_demo_lexicon()
    rng = np.random.default_rng(7)
    osc = [_rate_user(f"o{i:03d}", "bipolar", [0.02, 0.06] * 3, rng) for i in range(30)]
    const = [_rate_user(f"c{i:03d}", "control", [0.04] * 6, rng) for i in range(30)]
    rep = variance_analysis(osc, const, lex, ["posemo"], n_sample=30, min_user_tokens=1000, seed=1)
    row = rep.row("posemo")
    assert row.mean_std_a > row.mean_std_b and row.p < 0.001
    # identical constant-rate groups: nothing to find
    a = [_rate_user(f"a{i:03d}", "bipolar", [0.04] * 6, rng) for i in range(30)]
    rep = variance_analysis(a, const, lex, ["posemo"], n_sample=30, min_user_tokens=1000, seed=1)
    assert rep.row("posemo").p > 0.001


def test_variance_needs_three_months():
    lex = load_demo_lexicon()
    rng = np.random.default_rng(8)
    short = _rate_user("s000", "bipolar", [0.02, 0.06], rng)
    full = [_rate_user(f"b{i:03d}", "bipolar", [0.02, 0.06, 0.02], rng) for i in range(3)]
    ctrl = [_rate_user(f"c{i:03d}", "control", [0.04] * 3, rng) for i in range(3)]
    rep = variance_analysis([short] + full, ctrl, lex, ["posemo"], n_sample=3, min_user_tokens=1000, seed=0)
    assert "s000" not in rep.sampled_a and len(rep.sampled_a) == 3
    with pytest.raises(DataError):
        variance_analysis([short] + full[:2], ctrl, lex, ["posemo"], n_sample=3, min_user_tokens=1000)
    with pytest.raises(DataError):
        variance_analysis(full, ctrl, lex, ["posemo"], n_sample=3, min_user_tokens=10**6)
