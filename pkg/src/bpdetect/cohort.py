"""Cohort construction: self-report detection, pruning, control selection, topic categories."""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, DataError
from .ingest import CommentRecord, record_from_json
from .textproc import tokenize

DEFAULT_SELF_REPORT = (
    "i am diagnosed with bipolar",
    "i'm diagnosed with bipolar",
    "i was diagnosed with bipolar",
    "i've been diagnosed with bipolar",
    "i have been diagnosed with bipolar",
    "i got diagnosed with bipolar",
    "diagnosed me with bipolar",
)

# topic categories; the subreddit lists are a judgement call
DEFAULT_CATEGORY_MAP = {
    "Animals": ["aww", "cats", "dogs", "animals"],
    "AskReddit": ["AskReddit", "CasualConversation", "Showerthoughts", "NoStupidQuestions"],
    "Gaming": ["gaming", "pcgaming", "leagueoflegends", "pokemon"],
    "Jobs and finance": ["jobs", "personalfinance", "careerguidance", "financialindependence"],
    "Movies/music/books": ["movies", "Music", "books", "television"],
    "Politics": ["politics", "worldnews", "news", "PoliticalDiscussion"],
    "Religion": ["religion", "Christianity", "atheism", "Buddhism"],
    "Sex and relationships": ["relationships", "sex", "dating_advice", "relationship_advice"],
    "Sports": ["sports", "nba", "soccer", "nfl"],
}


def _lower_set(items) -> frozenset[str]:
    return frozenset(s.lower() for s in items)


@dataclass(frozen=True)
class CohortConfig:
    bipolar_subreddits: frozenset[str] = _lower_set(
        ["bipolar", "bipolar2", "BipolarReddit", "BipolarSOs", "bipolarart"])
    mentalhealth_subreddits: frozenset[str] = _lower_set(
        ["mentalhealth", "depression", "anxiety", "SuicideWatch", "mentalillness"])
    self_report_patterns: tuple[str, ...] = DEFAULT_SELF_REPORT
    flair_keywords: tuple[str, ...] = ("bipolar", "bp")
    mention_words: frozenset[str] = frozenset({"bipolar", "bp"})
    min_words: int = 1000
    control_mh_max_words: int = 1000
    category_min_words: int = 1000
    category_map: Mapping[str, frozenset[str]] = field(
        default_factory=lambda: {k: _lower_set(v) for k, v in DEFAULT_CATEGORY_MAP.items()})
    search_globally: bool = False

    def __post_init__(self):
        if self.min_words <= 0:
            raise ConfigError("min_words must be positive")
        # normalise case so membership tests are case-insensitive
        object.__setattr__(self, "bipolar_subreddits", _lower_set(self.bipolar_subreddits))
        object.__setattr__(self, "mentalhealth_subreddits", _lower_set(self.mentalhealth_subreddits))
        object.__setattr__(self, "mention_words", _lower_set(self.mention_words))
        object.__setattr__(self, "self_report_patterns", tuple(self.self_report_patterns))
        object.__setattr__(self, "flair_keywords", tuple(k.lower() for k in self.flair_keywords))
        object.__setattr__(self, "category_map",
                           {k: _lower_set(v) for k, v in dict(self.category_map).items()})

    @property
    def disorder_subreddits(self) -> frozenset[str]:
        return self.bipolar_subreddits | self.mentalhealth_subreddits

    @classmethod
    def from_json(cls, obj: dict) -> "CohortConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown cohort config keys: {sorted(unknown)}")
        kwargs = dict(obj)
        for key in ("bipolar_subreddits", "mentalhealth_subreddits", "mention_words"):
            if key in kwargs:
                kwargs[key] = frozenset(kwargs[key])
        for key in ("self_report_patterns", "flair_keywords"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def to_json(self) -> dict:
        return {
            "bipolar_subreddits": sorted(self.bipolar_subreddits),
            "mentalhealth_subreddits": sorted(self.mentalhealth_subreddits),
            "self_report_patterns": list(self.self_report_patterns),
            "flair_keywords": list(self.flair_keywords),
            "mention_words": sorted(self.mention_words),
            "min_words": self.min_words,
            "control_mh_max_words": self.control_mh_max_words,
            "category_min_words": self.category_min_words,
            "category_map": {k: sorted(v) for k, v in self.category_map.items()},
            "search_globally": self.search_globally,
        }


@dataclass
class UserDoc:
    author: str
    label: str
    comments: list[CommentRecord]
    token_count: int
    categories: frozenset[str] = frozenset()

    def to_json(self) -> dict:
        return {
            "author": self.author,
            "label": self.label,
            "token_count": self.token_count,
            "categories": sorted(self.categories),
            "comments": [c.to_json() for c in self.comments],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "UserDoc":
        return cls(obj["author"], obj["label"], [record_from_json(c) for c in obj["comments"]],
                   int(obj["token_count"]), frozenset(obj.get("categories", ())))


@dataclass(frozen=True)
class Rejected:
    author: str
    reason: str


# --- matching helpers -----------------------------------------------------

_APOS = str.maketrans({"’": "'", "‘": "'"})


def _phrase_regex(phrase: str) -> re.Pattern:
    words = [re.escape(w) for w in phrase.lower().translate(_APOS).split()]
    return re.compile(r"(?<![\w'])" + r"\s+".join(words) + r"(?![\w])", re.IGNORECASE)


_PATTERN_CACHE: dict[tuple, list[re.Pattern]] = {}


def _compiled(patterns: Sequence[str]) -> list[re.Pattern]:
    key = tuple(patterns)
    if key not in _PATTERN_CACHE:
        _PATTERN_CACHE[key] = [_phrase_regex(p) for p in key]
    return _PATTERN_CACHE[key]


def detect_self_report(body: str, patterns: Sequence[str] = DEFAULT_SELF_REPORT) -> bool:
    if not body:
        return False
    text = body.translate(_APOS)
    return any(rx.search(text) for rx in _compiled(patterns))


def detect_flair(flair_text: str | None, keywords: Sequence[str] = ("bipolar", "bp")) -> bool:
    if not flair_text:
        return False
    low = flair_text.lower()
    return any(k.lower() in low for k in keywords)


@lru_cache(maxsize=64)
def _mention_regex(words: tuple[str, ...]) -> re.Pattern:
    return re.compile(r"(?<![^\W_])(?:" + "|".join(map(re.escape, words)) + r")(?![^\W_])",
                      re.IGNORECASE)


def mentions_any(body: str, words: Iterable[str]) -> bool:
    """Whole-word, case-insensitive; word boundaries are non-alphanumeric characters."""
    words = tuple(sorted(words))
    if not words or not body:
        return False
    return _mention_regex(words).search(body) is not None


@lru_cache(maxsize=1 << 16)
def _ntokens(body: str) -> int:
    return len(tokenize(body))


def token_count(records: Iterable[CommentRecord]) -> int:
    return sum(_ntokens(r.body) for r in records)


# --- cohort operations ----------------------------------------------------

def build_bipolar_cohort(corpus: Mapping[str, Sequence[CommentRecord]], cfg: CohortConfig) -> set[str]:
    """Authors with a self-report statement or a matching flair.

    Only comments on disorder-related subreddits are searched unless
    ``cfg.search_globally`` is set.
    """
    scope = cfg.disorder_subreddits
    authors = set()
    for author, recs in corpus.items():
        for rec in recs:
            if not cfg.search_globally and rec.subreddit.lower() not in scope:
                continue
            if detect_flair(rec.flair_text, cfg.flair_keywords) or \
                    detect_self_report(rec.body, cfg.self_report_patterns):
                authors.add(author)
                break
    return authors


def prune_user(records: Sequence[CommentRecord], cfg: CohortConfig) -> UserDoc | Rejected:
    """Drop disorder-subreddit comments and comments mentioning the disorder."""
    if not records:
        return Rejected("", "below_min_words")
    author = records[0].author
    scope = cfg.disorder_subreddits
    kept = [r for r in records
            if r.subreddit.lower() not in scope and not mentions_any(r.body, cfg.mention_words)]
    n = token_count(kept)
    if n < cfg.min_words:
        return Rejected(author, "below_min_words")
    return UserDoc(author, "bipolar", kept, n)


def eligible_subreddits(corpus: Mapping[str, Sequence[CommentRecord]], bipolar_authors: Iterable[str],
                        cfg: CohortConfig) -> set[str]:
    """Subreddits whose share of bipolar-group comments exceeds the mean share."""
    counts: Counter = Counter()
    for author in bipolar_authors:
        for rec in corpus.get(author, ()):
            sub = rec.subreddit.lower()
            if sub not in cfg.disorder_subreddits:
                counts[sub] += 1
    total = sum(counts.values())
    if not total:
        return set()
    shares = {s: c / total for s, c in counts.items()}
    mean = sum(shares.values()) / len(shares)
    return {s for s, f in shares.items() if f > mean}


def select_control(corpus: Mapping[str, Sequence[CommentRecord]], bipolar_authors: Iterable[str],
                   cfg: CohortConfig) -> set[str]:
    bipolar_authors = set(bipolar_authors)
    eligible = eligible_subreddits(corpus, bipolar_authors, cfg)
    scope = cfg.disorder_subreddits
    chosen = set()
    for author, recs in corpus.items():
        if author in bipolar_authors:
            continue
        if not any(r.subreddit.lower() in eligible for r in recs):
            continue
        mh = token_count(r for r in recs if r.subreddit.lower() in scope)
        if mh > cfg.control_mh_max_words:
            continue
        if token_count(recs) < cfg.min_words:
            continue
        chosen.add(author)
    return chosen


def category_token_counts(comments: Iterable[CommentRecord], category_map) -> dict[str, int]:
    counts = {c: 0 for c in category_map}
    for rec in comments:
        sub = rec.subreddit.lower()
        n = None
        for cat, subs in category_map.items():
            if sub in subs:
                if n is None:
                    n = _ntokens(rec.body)
                counts[cat] += n
    return counts


def assign_topic_categories(user: UserDoc, category_map, min_words: int = 1000) -> frozenset[str]:
    category_map = {k: _lower_set(v) for k, v in category_map.items()}
    counts = category_token_counts(user.comments, category_map)
    return frozenset(c for c, n in counts.items() if n >= min_words)


@dataclass
class CohortResult:
    bipolar: list[UserDoc]
    control: list[UserDoc]
    rejected: list[Rejected]
    detected: set[str]


def build_cohorts(corpus: Mapping[str, Sequence[CommentRecord]], cfg: CohortConfig) -> CohortResult:
    """Run every cohort rule and return admitted users sorted by author."""
    detected = build_bipolar_cohort(corpus, cfg)
    bipolar, rejected = [], []
    for author in sorted(detected):
        res = prune_user(corpus[author], cfg)
        if isinstance(res, Rejected):
            rejected.append(res)
        else:
            res.categories = assign_topic_categories(res, cfg.category_map, cfg.category_min_words)
            bipolar.append(res)
    control = []
    for author in sorted(select_control(corpus, detected, cfg)):
        recs = list(corpus[author])
        doc = UserDoc(author, "control", recs, token_count(recs))
        doc.categories = assign_topic_categories(doc, cfg.category_map, cfg.category_min_words)
        control.append(doc)
    return CohortResult(bipolar, control, rejected, detected)


def write_users(users: Iterable[UserDoc], fh) -> None:
    for u in users:
        fh.write(json.dumps(u.to_json(), ensure_ascii=False, sort_keys=True))
        fh.write("\n")


def read_users(path) -> list[UserDoc]:
    users = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                users.append(UserDoc.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad user record: {exc}") from exc
    return users
