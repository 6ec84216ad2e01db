"""Group comparisons: feature merit, emotion summaries and month-to-month variability."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from .cohort import UserDoc
from .errors import DataError
from .lexicon import Lexicon, profile
from .stats import TTestResult, welch_ttest
from .textproc import tokenize
from .userfeat import FeatureMatrix

EMOTION_CATEGORIES = ("posemo", "negemo", "anxiety", "anger", "sad", "affect")
SIGNIFICANCE = 0.001

__all__ = ["EMOTION_CATEGORIES", "MeritReport", "EmotionReport", "VarianceReport", "feature_merit",
           "emotion_summary", "monthly_chunks", "variance_analysis", "welch_ttest", "t_sf_numeric"]


def t_sf_numeric(t: float, df: float, n: int = 200_000) -> float:
    """Two-sided t tail by trapezoidal integration of the density over [0, |t|].

    One Richardson step on n and 2n panels. Independent of the incomplete
    beta route in ``stats``; used as a test oracle.
    """
    a = abs(t)
    if a == 0.0:
        return 1.0

    def trap(m):
        x = np.linspace(0.0, a, m + 1)
        logc = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
        f = np.exp(logc - (df + 1) / 2 * np.log1p(x * x / df))
        h = a / m
        return h * (f.sum() - 0.5 * (f[0] + f[-1]))

    t1, t2 = trap(n), trap(2 * n)
    area = t2 + (t2 - t1) / 3.0
    return min(1.0, max(0.0, 1.0 - 2.0 * area))


def _groups(fm: FeatureMatrix):
    y = np.asarray(fm.labels)
    a, b = y == 1, y == 0
    if a.sum() < 2 or b.sum() < 2:
        raise DataError("both labels need at least two users")
    return a, b


def _resolve(fm: FeatureMatrix, name: str, namespace: str | None) -> str:
    if name in fm.feature_names:
        return name
    if namespace and f"{namespace}:{name}" in fm.feature_names:
        return f"{namespace}:{name}"
    raise DataError(f"feature {name!r} not in matrix")


# --- merit ---------------------------------------------------------------

@dataclass
class MeritReport:
    rows: list[tuple[str, TTestResult]]
    skipped: list[str] = field(default_factory=list)

    def top(self, k: int) -> list[tuple[str, TTestResult]]:
        return self.rows[:k]

    def to_json(self) -> dict:
        return {"rows": [{"feature": n, **r.to_json()} for n, r in self.rows], "skipped": self.skipped}

    def to_tsv(self, k: int | None = None) -> str:
        lines = ["feature\tbipolar_mean\tcontrol_mean\tt\tp"]
        for name, r in self.rows[:k]:
            lines.append(f"{name}\t{r.mean_a:.4f}\t{r.mean_b:.4f}\t{r.t:.4f}\t{r.p:.3g}")
        return "\n".join(lines) + "\n"


def feature_merit(fm: FeatureMatrix, features: Sequence[str] | None = None) -> MeritReport:
    """Welch test of bipolar vs control per feature, most significant first.

    Sort key is (p, -|t|, name) so the order does not depend on column order.
    Features with zero variance in both groups are listed as skipped.
    """
    a, b = _groups(fm)
    names = list(fm.feature_names) if features is None else [_resolve(fm, n, None) for n in features]
    rows, skipped = [], []
    for name in names:
        col = fm.column(name)
        try:
            rows.append((name, welch_ttest(col[a], col[b])))
        except DataError:
            skipped.append(name)
    rows.sort(key=lambda r: (r[1].p, -abs(r[1].t), r[0]))
    return MeritReport(rows, sorted(skipped))


# --- emotion summary -------------------------------------------------------

@dataclass
class EmotionRow:
    category: str
    mean_a: float
    std_a: float
    mean_b: float
    std_b: float
    test: TTestResult | None

    @property
    def p(self):
        return None if self.test is None else self.test.p


@dataclass
class EmotionReport:
    rows: list[EmotionRow]

    def to_json(self) -> dict:
        return {"rows": [{"category": r.category, "bipolar_mean": r.mean_a, "bipolar_std": r.std_a,
                          "control_mean": r.mean_b, "control_std": r.std_b, "p": r.p} for r in self.rows]}

    def to_tsv(self) -> str:
        lines = ["category\tbipolar\tcontrol\tp"]
        for r in self.rows:
            p = "n/a" if r.p is None else f"{r.p:.3g}{'*' if r.p < SIGNIFICANCE else ''}"
            lines.append(f"{r.category}\t{r.mean_a:.3f} ± {r.std_a:.2f}\t{r.mean_b:.3f} ± {r.std_b:.2f}\t{p}")
        return "\n".join(lines) + "\n"


def emotion_summary(fm: FeatureMatrix, categories: Sequence[str] = EMOTION_CATEGORIES,
                    namespace: str = "liwc") -> EmotionReport:
    """Per-group mean and sample std of each category, in the order given."""
    a, b = _groups(fm)
    rows = []
    for cat in categories:
        col = fm.column(_resolve(fm, cat, namespace))
        try:
            test = welch_ttest(col[a], col[b])
        except DataError:
            test = None
        rows.append(EmotionRow(cat, float(col[a].mean()), float(col[a].std(ddof=1)),
                               float(col[b].mean()), float(col[b].std(ddof=1)), test))
    return EmotionReport(rows)


# --- monthly variability ---------------------------------------------------

def month_of(ts: int) -> tuple[int, int]:
    d = datetime.fromtimestamp(ts, tz=timezone.utc)
    return d.year, d.month


def monthly_chunks(user: UserDoc, min_month_tokens: int = 100) -> dict[tuple[int, int], list[str]]:
    """Tokens bucketed by UTC calendar month; thin months are dropped."""
    buckets: dict[tuple[int, int], list[str]] = {}
    for rec in user.comments:
        buckets.setdefault(month_of(rec.created_utc), []).extend(tokenize(rec.body))
    return {k: buckets[k] for k in sorted(buckets) if len(buckets[k]) >= min_month_tokens}


@dataclass
class VarianceRow:
    category: str
    mean_std_a: float
    mean_std_b: float
    test: TTestResult | None

    @property
    def p(self):
        return None if self.test is None else self.test.p


@dataclass
class VarianceReport:
    rows: list[VarianceRow]
    sampled_a: list[str]
    sampled_b: list[str]
    months: dict[str, int]
    seed: int

    def row(self, category: str) -> VarianceRow:
        for r in self.rows:
            if r.category == category:
                return r
        raise KeyError(category)

    def to_json(self) -> dict:
        return {"rows": [{"category": r.category, "bipolar_mean_std": r.mean_std_a,
                          "control_mean_std": r.mean_std_b, "p": r.p} for r in self.rows],
                "sampled_bipolar": self.sampled_a, "sampled_control": self.sampled_b,
                "months": self.months, "seed": self.seed}

    def to_tsv(self) -> str:
        lines = ["category\tbipolar\tcontrol\tp"]
        for r in self.rows:
            p = "n/a" if r.p is None else f"{r.p:.3g}{'*' if r.p < SIGNIFICANCE else ''}"
            lines.append(f"{r.category}\t{r.mean_std_a:.5f}\t{r.mean_std_b:.5f}\t{p}")
        return "\n".join(lines) + "\n"


def _user_monthly_std(user, lexicon, categories, min_months, min_month_tokens):
    chunks = monthly_chunks(user, min_month_tokens)
    if len(chunks) < min_months:
        return None, len(chunks)
    pct = np.array([[profile(lexicon, toks).percent[c] for c in categories] for toks in chunks.values()])
    return pct.std(axis=0, ddof=1), len(chunks)


def _sample_group(users, n_sample, min_user_tokens, rng, lexicon, categories, min_months,
                  min_month_tokens, group):
    eligible = sorted((u for u in users if u.token_count >= min_user_tokens), key=lambda u: u.author)
    if len(eligible) < n_sample:
        raise DataError(f"{group}: {len(eligible)} users with >= {min_user_tokens} tokens, need {n_sample}")
    picked, stds, months = [], [], {}
    # walk a seeded shuffle; users short of qualifying months are replaced by the next draw
    for i in rng.permutation(len(eligible)):
        u = eligible[i]
        s, m = _user_monthly_std(u, lexicon, categories, min_months, min_month_tokens)
        if s is None:
            continue
        picked.append(u.author)
        stds.append(s)
        months[u.author] = m
        if len(picked) == n_sample:
            return picked, np.array(stds), months
    raise DataError(f"{group}: only {len(picked)} eligible users have >= {min_months} qualifying months, "
                    f"need {n_sample}")


def variance_analysis(bipolar_users: Sequence[UserDoc], control_users: Sequence[UserDoc],
                      lexicon: Lexicon, categories: Sequence[str] = EMOTION_CATEGORIES,
                      n_sample: int = 100, min_user_tokens: int = 100_000, seed: int = 0,
                      min_months: int = 3, min_month_tokens: int = 100) -> VarianceReport:
    """Mean per-user std of monthly category percentages, compared across groups."""
    for c in categories:
        lexicon.category_id(c)
    pa, sa, ma = _sample_group(bipolar_users, n_sample, min_user_tokens, np.random.default_rng([seed, 0]),
                               lexicon, categories, min_months, min_month_tokens, "bipolar")
    pb, sb, mb = _sample_group(control_users, n_sample, min_user_tokens, np.random.default_rng([seed, 1]),
                               lexicon, categories, min_months, min_month_tokens, "control")
    rows = []
    for j, c in enumerate(categories):
        try:
            test = welch_ttest(sa[:, j], sb[:, j])
        except DataError:
            test = None
        rows.append(VarianceRow(c, float(sa[:, j].mean()), float(sb[:, j].mean()), test))
    return VarianceReport(rows, pa, pb, {**ma, **mb}, seed)
