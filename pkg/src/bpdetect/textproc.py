"""Tokenization, Porter stemming and tf-idf weighting."""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DataError

SENTINEL_BODIES = frozenset({"[deleted]", "[removed]"})

_MD_LINK_TARGET = re.compile(r"\]\([^)\s]*\)")
_URL = re.compile(r"(?:https?://|ftp://|www\.)\S+", re.IGNORECASE)
_TOKEN = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; URLs and markdown link targets are dropped.

    Internal apostrophes stay inside the token (``i'm``). Deleted/removed
    sentinel bodies produce no tokens.
    """
    if not text:
        return []
    if text.strip() in SENTINEL_BODIES:
        return []
    text = text.lower().translate(_APOSTROPHES)
    text = _MD_LINK_TARGET.sub("]", text)
    text = _URL.sub(" ", text)
    return _TOKEN.findall(text)


# --- Porter (1980) -------------------------------------------------------

_VOWELS = frozenset("aeiou")


def _is_cons(w: str, i: int) -> bool:
    ch = w[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(w, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_cons(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(w: str) -> bool:
    return len(w) >= 2 and w[-1] == w[-2] and _is_cons(w, len(w) - 1)


def _ends_cvc(w: str) -> bool:
    if len(w) < 3:
        return False
    return (_is_cons(w, len(w) - 3) and not _is_cons(w, len(w) - 2)
            and _is_cons(w, len(w) - 1) and w[-1] not in "wxy")


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        return w[:-1] if _measure(w[:-3]) > 0 else w
    for suffix in ("ed", "ing"):
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if not _has_vowel(stem):
                return w
            w = stem
            break
    else:
        return w
    if w.endswith(("at", "bl", "iz")):
        return w + "e"
    if _ends_double_cons(w) and w[-1] not in "lsz":
        return w[:-1]
    if _measure(w) == 1 and _ends_cvc(w):
        return w + "e"
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


_STEP2 = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)
_STEP3 = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)
_STEP4 = tuple((s, "") for s in (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment",
    "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
))


def _longest(w: str, rules):
    hits = [r for r in rules if w.endswith(r[0])]
    return max(hits, key=lambda r: len(r[0]), default=None)


def _replace_if_measure(w: str, rules, min_m: int) -> str:
    rule = _longest(w, rules)
    if rule is None:
        return w
    suffix, repl = rule
    stem = w[: -len(suffix)]
    if _measure(stem) > min_m:
        return stem + repl
    return w


def _step4(w: str) -> str:
    rule = _longest(w, _STEP4)
    if rule is None:
        return w
    suffix = rule[0]
    stem = w[: -len(suffix)]
    if _measure(stem) <= 1:
        return w
    if suffix == "ion" and not stem.endswith(("s", "t")):
        return w
    return stem


def _step5(w: str) -> str:
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            w = stem
    if _measure(w) > 1 and _ends_double_cons(w) and w.endswith("l"):
        w = w[:-1]
    return w


@lru_cache(maxsize=1 << 18)
def porter_stem(word: str) -> str:
    """Classic Porter (1980) stem of a lowercase ASCII word.

    Words with characters outside a-z and words of length <= 2 pass through.
    """
    if len(word) <= 2 or not word.isascii() or not word.isalpha() or not word.islower():
        return word
    w = _step1a(word)
    w = _step1b(w)
    w = _step1c(w)
    w = _replace_if_measure(w, _STEP2, 0)
    w = _replace_if_measure(w, _STEP3, 0)
    w = _step4(w)
    w = _step5(w)
    return w


def stem_tokens(tokens: Iterable[str]) -> list[str]:
    return [porter_stem(t) for t in tokens]


# --- tf-idf --------------------------------------------------------------

DEFAULT_MIN_DF = 5
DEFAULT_MAX_FEATURES = 50_000


@dataclass
class TfidfModel:
    vocabulary: list[str]
    idf: np.ndarray
    doc_count: int
    min_df: int = DEFAULT_MIN_DF
    max_features: int | None = DEFAULT_MAX_FEATURES

    def __post_init__(self):
        self.idf = np.asarray(self.idf, dtype=float)
        self.index = {s: i for i, s in enumerate(self.vocabulary)}

    def __len__(self):
        return len(self.vocabulary)

    def _row(self, tokens: Sequence[str]):
        counts = Counter(porter_stem(t) for t in tokens)
        cols = sorted(self.index[s] for s in counts if s in self.index)
        if not cols:
            return np.zeros(0, dtype=np.intp), np.zeros(0)
        vals = np.array([counts[self.vocabulary[c]] * self.idf[c] for c in cols])
        vals /= math.sqrt(float(np.dot(vals, vals)))
        return np.asarray(cols, dtype=np.intp), vals

    def transform(self, tokens: Sequence[str]) -> sp.csr_matrix:
        """L2-normalized tf-idf row (1 x V); out-of-vocabulary stems are ignored."""
        return self.transform_many([tokens])

    def transform_many(self, docs: Sequence[Sequence[str]]) -> sp.csr_matrix:
        indptr = [0]
        indices, data = [], []
        for doc in docs:
            cols, vals = self._row(doc)
            indices.append(cols)
            data.append(vals)
            indptr.append(indptr[-1] + len(cols))
        return sp.csr_matrix(
            (np.concatenate(data) if data else np.zeros(0),
             np.concatenate(indices) if indices else np.zeros(0, dtype=np.intp),
             np.asarray(indptr)),
            shape=(len(docs), len(self.vocabulary)),
        )

    def to_json(self) -> dict:
        return {
            "vocabulary": list(self.vocabulary),
            "idf": [float(x) for x in self.idf],
            "doc_count": self.doc_count,
            "min_df": self.min_df,
            "max_features": self.max_features,
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def from_json(cls, obj: dict) -> "TfidfModel":
        return cls(obj["vocabulary"], obj["idf"], obj["doc_count"],
                   obj.get("min_df", DEFAULT_MIN_DF), obj.get("max_features"))

    @classmethod
    def load(cls, path) -> "TfidfModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def fit_tfidf(docs: Sequence[Sequence[str]], min_df: int = DEFAULT_MIN_DF,
              max_features: int | None = DEFAULT_MAX_FEATURES) -> TfidfModel:
    """Smoothed idf ``ln((1+N)/(1+df)) + 1`` over Porter stems.

    Stems need ``df >= min_df``; at most ``max_features`` of the highest-df
    stems are kept (ties broken lexicographically). Columns are in
    lexicographic stem order.
    """
    if not any(len(d) for d in docs):
        raise DataError("fit_tfidf needs at least one non-empty document")
    df: Counter = Counter()
    for doc in docs:
        df.update({porter_stem(t) for t in doc})
    kept = [(s, c) for s, c in df.items() if c >= min_df]
    if max_features is not None and len(kept) > max_features:
        kept.sort(key=lambda sc: (-sc[1], sc[0]))
        kept = kept[:max_features]
    kept.sort()
    n = len(docs)
    idf = np.array([math.log((1 + n) / (1 + c)) + 1.0 for _, c in kept])
    return TfidfModel([s for s, _ in kept], idf, n, min_df, max_features)
