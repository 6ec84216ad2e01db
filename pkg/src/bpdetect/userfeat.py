"""Behavioral user features and assembly of the per-user feature matrix."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .cohort import UserDoc
from .errors import DataError
from .lexicon import Lexicon, SummaryVariableDef, profile, punctuation_rates
from .textproc import TfidfModel, tokenize

LABELS = {"control": 0, "bipolar": 1}
INTERVAL_FIELDS = ("interval_mean", "interval_median", "interval_p10", "interval_p25",
                   "interval_p75", "interval_p90", "interval_mode")
BEHAVIORAL_FIELDS = ("post_comment_ratio", "gilded_count", "mean_controversiality",
                     "mean_score_diff") + INTERVAL_FIELDS + ("interval_defined",)
PARTS = ("category_profile", "tfidf", "behavioral")


def _quantile(sorted_vals: np.ndarray, q: float) -> float:
    pos = q * (len(sorted_vals) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(sorted_vals) - 1)
    frac = pos - lo
    return float(sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * frac)


def interval_stats(timestamps: Sequence[int]) -> dict[str, float]:
    """Gap statistics between consecutive timestamps (seconds).

    Percentiles interpolate linearly at rank q*(n-1). The mode is taken over
    gaps rounded to whole minutes (ties go to the smaller value).
    """
    if len(timestamps) < 2:
        out = {k: 0.0 for k in INTERVAL_FIELDS}
        out["interval_defined"] = False
        return out
    gaps = np.sort(np.diff(np.asarray(timestamps, dtype=float)))
    minutes = Counter(int(round(g / 60.0)) for g in gaps)
    top = max(minutes.values())
    mode = min(m for m, c in minutes.items() if c == top) * 60.0
    return {
        "interval_mean": float(gaps.mean()),
        "interval_median": _quantile(gaps, 0.5),
        "interval_p10": _quantile(gaps, 0.10),
        "interval_p25": _quantile(gaps, 0.25),
        "interval_p75": _quantile(gaps, 0.75),
        "interval_p90": _quantile(gaps, 0.90),
        "interval_mode": mode,
        "interval_defined": True,
    }


@dataclass
class BehavioralFeatures:
    post_comment_ratio: float
    gilded_count: int
    mean_controversiality: float
    mean_score_diff: float
    interval_mean: float
    interval_median: float
    interval_p10: float
    interval_p25: float
    interval_p75: float
    interval_p90: float
    interval_mode: float
    interval_defined: bool

    def as_vector(self) -> list[float]:
        return [float(getattr(self, f)) for f in BEHAVIORAL_FIELDS]


def behavioral(user: UserDoc) -> BehavioralFeatures:
    recs = user.comments
    if not recs:
        raise DataError(f"user {user.author!r} has no records")
    posts = sum(1 for r in recs if r.kind == "post")
    comments = len(recs) - posts
    stats = interval_stats(sorted(r.created_utc for r in recs))
    return BehavioralFeatures(
        post_comment_ratio=posts / (comments + 1),
        gilded_count=sum(r.gilded for r in recs),
        mean_controversiality=sum(r.controversiality for r in recs) / len(recs),
        mean_score_diff=sum(r.ups - r.downs for r in recs) / len(recs),
        **stats,
    )


# --- feature matrix -------------------------------------------------------

@dataclass
class FeatureMatrix:
    feature_names: list[str]
    X: np.ndarray | sp.csr_matrix
    labels: np.ndarray
    user_ids: list[str]

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int8)
        n = self.X.shape[0]
        if not (n == len(self.labels) == len(self.user_ids)):
            raise DataError("rows, labels and user ids differ in length")
        if self.X.shape[1] != len(self.feature_names):
            raise DataError("feature width does not match names")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("feature names must be unique")

    @property
    def shape(self):
        return self.X.shape

    @property
    def sparse_mask(self) -> np.ndarray:
        """Columns left unstandardized by linear models (tf-idf weights)."""
        return np.array([n.startswith("tfidf:") for n in self.feature_names], dtype=bool)

    def dense(self) -> np.ndarray:
        return self.X.toarray() if sp.issparse(self.X) else np.asarray(self.X)

    def column(self, name: str) -> np.ndarray:
        j = self.feature_names.index(name)
        col = self.X[:, j]
        return np.asarray(col.toarray()).ravel() if sp.issparse(col) else np.asarray(col, dtype=float)

    def select(self, names: Sequence[str]) -> "FeatureMatrix":
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(list(names), self.X[:, idx], self.labels.copy(), list(self.user_ids))

    def with_prefix(self, *prefixes: str) -> "FeatureMatrix":
        return self.select([n for n in self.feature_names if n.startswith(prefixes)])

    def rows(self, index) -> "FeatureMatrix":
        index = np.asarray(index)
        return FeatureMatrix(list(self.feature_names), self.X[index], self.labels[index],
                             [self.user_ids[i] for i in index])

    # --- export ---

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user_id", "label"] + self.feature_names)
        X = self.X.tocsr() if sp.issparse(self.X) else self.X
        for i, uid in enumerate(self.user_ids):
            row = X[i].toarray().ravel() if sp.issparse(X) else X[i]
            writer.writerow([uid, int(self.labels[i])] + [_fmt(v) for v in row])

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            self.to_csv(fh)

    @classmethod
    def load_csv(cls, path) -> "FeatureMatrix":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty feature file") from None
            if header[:2] != ["user_id", "label"]:
                raise DataError(f"{path}: header must start with user_id,label")
            uids, labels, rows = [], [], []
            for lineno, row in enumerate(reader, 2):
                if len(row) != len(header):
                    raise DataError(f"{path}:{lineno}: expected {len(header)} fields")
                uids.append(row[0])
                labels.append(int(row[1]))
                rows.append([float(v) for v in row[2:]])
        names = header[2:]
        X = np.asarray(rows, dtype=float).reshape(len(rows), len(names))
        if any(n.startswith("tfidf:") for n in names):
            X = sp.csr_matrix(X)
        return cls(names, X, np.asarray(labels), uids)

    def to_json(self) -> dict:
        return {
            "feature_names": self.feature_names,
            "user_ids": self.user_ids,
            "labels": [int(v) for v in self.labels],
            "rows": [[float(v) for v in row] for row in self.dense()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureMatrix":
        X = np.asarray(obj["rows"], dtype=float).reshape(len(obj["rows"]), len(obj["feature_names"]))
        return cls(list(obj["feature_names"]), X, np.asarray(obj["labels"]), list(obj["user_ids"]))


def _fmt(v) -> str:
    v = float(v)
    if v == 0.0:
        return "0"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


@dataclass
class LexiconModel:
    """A lexicon plus its namespace and summary variables, e.g. ``liwc`` or ``empath``."""
    namespace: str
    lexicon: Lexicon
    summaries: list[SummaryVariableDef] = field(default_factory=list)
    punctuation: bool = False

    def __post_init__(self):
        for s in self.summaries:
            s.check(self.lexicon)

    @property
    def feature_names(self) -> list[str]:
        names = self.lexicon.names + [s.name for s in self.summaries]
        if self.punctuation:
            names += ["AllPunc"] + list(_PUNCT_NAMES)
        return [f"{self.namespace}:{n}" for n in names]

    def row(self, tokens, text: str | None = None) -> list[float]:
        prof = profile(self.lexicon, tokens, self.summaries)
        out = [prof.percent[n] for n in self.lexicon.names] + [prof.summary[s.name] for s in self.summaries]
        if self.punctuation:
            rates = punctuation_rates(text or "", prof.token_count)
            out += [rates["AllPunc"]] + [rates[k] for k in _PUNCT_NAMES]
        return out


_PUNCT_NAMES = ("Period", "Comma", "Colon", "SemiC", "QMark", "Exclam", "Dash", "Quote",
                "Apostro", "Parenth", "OtherP")


def user_tokens(user: UserDoc) -> list[str]:
    out: list[str] = []
    for rec in user.comments:
        out.extend(tokenize(rec.body))
    return out


def assemble(users: Sequence[UserDoc], parts: Sequence[str],
             lexicons: Sequence[LexiconModel] = (), tfidf: TfidfModel | None = None,
             tokens: dict[str, list[str]] | None = None) -> FeatureMatrix:
    """Concatenate category profiles, tf-idf and behavioral columns for each user.

    Rows are sorted by user id. ``tokens`` may carry precomputed token
    streams keyed by author.
    """
    if not users:
        raise DataError("cannot assemble features for an empty user set")
    parts = set(parts)
    unknown = parts - set(PARTS)
    if unknown:
        raise DataError(f"unknown feature parts {sorted(unknown)}")
    if "category_profile" in parts and not lexicons:
        raise DataError("category_profile requested but no lexicon supplied")
    if "tfidf" in parts and tfidf is None:
        raise DataError("tfidf requested but no fitted tf-idf model supplied")
    users = sorted(users, key=lambda u: u.author)
    toks = [tokens[u.author] if tokens and u.author in tokens else user_tokens(u) for u in users]

    names: list[str] = []
    blocks = []
    if "category_profile" in parts:
        for lm in lexicons:
            names += lm.feature_names
            texts = ["\n".join(r.body for r in u.comments) for u in users] if lm.punctuation else [None] * len(users)
            blocks.append(sp.csr_matrix(np.array([lm.row(t, x) for t, x in zip(toks, texts)], dtype=float)))
    if "tfidf" in parts:
        names += [f"tfidf:{s}" for s in tfidf.vocabulary]
        blocks.append(tfidf.transform_many(toks))
    if "behavioral" in parts:
        names += [f"user:{f}" for f in BEHAVIORAL_FIELDS]
        blocks.append(sp.csr_matrix(np.array([behavioral(u).as_vector() for u in users], dtype=float)))
    X = sp.hstack(blocks, format="csr") if len(blocks) > 1 else blocks[0]
    if "tfidf" not in parts:
        X = X.toarray()
    labels = [LABELS[u.label] for u in users]
    return FeatureMatrix(names, X, np.asarray(labels), [u.author for u in users])
