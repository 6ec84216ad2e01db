"""Streaming parser for Reddit-dump JSONL.

Bad lines never abort a stream: :func:`parse_dump_line` returns a
:class:`Skip` carrying the reason instead of raising.
"""
from __future__ import annotations

import gzip
import io
import json
import logging
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Iterator

from .errors import DataError

log = logging.getLogger(__name__)

MIN_UTC = 1104537600  # 2005-01-01
MAX_UTC = 1546300800  # 2019-01-01, exclusive
REQUIRED = ("id", "author", "subreddit", "created_utc", "body")
DELETED_AUTHORS = frozenset({"[deleted]"})
GZIP_MAGIC = b"\x1f\x8b"


@dataclass(frozen=True, slots=True)
class CommentRecord:
    id: str
    author: str
    subreddit: str
    created_utc: int
    body: str
    kind: str = "comment"
    gilded: int = 0
    controversiality: int = 0
    ups: int = 0
    downs: int = 0
    flair_text: str | None = None

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True)


@dataclass(frozen=True, slots=True)
class Skip:
    reason: str


@dataclass
class CorpusStats:
    records_read: int = 0
    records_skipped: int = 0
    users_seen: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    @property
    def accepted(self) -> int:
        return self.records_read - self.records_skipped

    def to_json(self) -> dict:
        return {
            "records_read": self.records_read,
            "records_skipped": self.records_skipped,
            "accepted": self.accepted,
            "users_seen": self.users_seen,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
        }


def _as_int(value, default=0):
    if value is None:
        return default
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, float)):
        return int(value)
    return int(float(str(value)))


def _infer_kind(obj: dict) -> str:
    kind = obj.get("kind")
    if kind in ("post", "comment"):
        return kind
    for key in ("name", "id"):
        ident = obj.get(key)
        if isinstance(ident, str):
            if ident.startswith("t3_"):
                return "post"
            if ident.startswith("t1_"):
                return "comment"
    return "comment"


def parse_dump_line(line: str) -> CommentRecord | Skip:
    """Parse one JSONL line into a validated record, or a Skip with a reason."""
    try:
        obj = json.loads(line)
    except (ValueError, TypeError):
        return Skip("malformed")
    if not isinstance(obj, dict):
        return Skip("malformed")
    if "body" not in obj and "selftext" in obj:
        # submissions carry their text in selftext
        obj = dict(obj, body=obj["selftext"])
    for key in REQUIRED:
        if obj.get(key) is None:
            return Skip("missing_field")
    author = str(obj["author"]).strip()
    subreddit = str(obj["subreddit"]).strip()
    if author in DELETED_AUTHORS:
        return Skip("deleted_author")
    if not author or not subreddit:
        return Skip("missing_field")
    try:
        created = _as_int(obj["created_utc"])
        gilded = _as_int(obj.get("gilded"))
        controversiality = _as_int(obj.get("controversiality"))
        ups = _as_int(obj.get("ups"), default=_as_int(obj.get("score")))
        downs = _as_int(obj.get("downs"))
    except (ValueError, TypeError, OverflowError):
        return Skip("bad_value")
    if not MIN_UTC <= created < MAX_UTC:
        return Skip("timestamp_out_of_range")
    if gilded < 0 or controversiality not in (0, 1):
        return Skip("bad_value")
    flair = obj.get("flair_text", obj.get("author_flair_text"))
    return CommentRecord(
        id=str(obj["id"]),
        author=author,
        subreddit=subreddit,
        created_utc=created,
        body=str(obj["body"]),
        kind=_infer_kind(obj),
        gilded=gilded,
        controversiality=controversiality,
        ups=ups,
        downs=downs,
        flair_text=None if flair is None else str(flair),
    )


def _open_text(path) -> io.TextIOBase:
    try:
        with open(path, "rb") as fh:
            magic = fh.read(2)
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    if magic == GZIP_MAGIC:
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", errors="replace")
    return open(path, encoding="utf-8", errors="replace")


class CorpusStream:
    """Iterate accepted records of a dump file; ``stats`` fills in as you go.

    ``subreddits``/``authors`` restrict what is yielded (matching is
    case-insensitive for subreddits); filtered-out records still count as
    read but not as skipped.
    """

    def __init__(self, path, subreddits: Iterable[str] | None = None,
                 authors: Iterable[str] | None = None,
                 predicate: Callable[[CommentRecord], bool] | None = None):
        self.path = path
        self.subreddits = None if subreddits is None else {s.lower() for s in subreddits}
        self.authors = None if authors is None else set(authors)
        self.predicate = predicate
        self.stats = CorpusStats()

    def _wanted(self, rec: CommentRecord) -> bool:
        if self.subreddits is not None and rec.subreddit.lower() not in self.subreddits:
            return False
        if self.authors is not None and rec.author not in self.authors:
            return False
        return self.predicate is None or self.predicate(rec)

    def __iter__(self) -> Iterator[CommentRecord]:
        stats = self.stats
        reasons: Counter = Counter()
        seen = set()
        fh = _open_text(self.path)
        try:
            for line in fh:
                if not line.strip():
                    continue
                stats.records_read += 1
                res = parse_dump_line(line)
                if isinstance(res, Skip):
                    stats.records_skipped += 1
                    reasons[res.reason] += 1
                    stats.skip_reasons = dict(reasons)
                    continue
                if not self._wanted(res):
                    continue
                if res.author not in seen:
                    seen.add(res.author)
                    stats.users_seen = len(seen)
                yield res
        except (OSError, EOFError, gzip.BadGzipFile) as exc:
            raise DataError(f"failed to decompress/read {self.path}: {exc}") from exc
        finally:
            fh.close()


def stream_corpus(path, subreddits=None, authors=None, predicate=None) -> CorpusStream:
    return CorpusStream(path, subreddits=subreddits, authors=authors, predicate=predicate)


def _record_key(rec: CommentRecord):
    return (rec.created_utc, rec.id)


def group_by_user(records: Iterable[CommentRecord]) -> dict[str, list[CommentRecord]]:
    """Partition records by author; lists sorted by (created_utc, id), authors sorted."""
    groups: dict[str, list[CommentRecord]] = defaultdict(list)
    for rec in records:
        groups[rec.author].append(rec)
    return {a: sorted(groups[a], key=_record_key) for a in sorted(groups)}


def record_from_json(obj: dict) -> CommentRecord:
    res = parse_dump_line(json.dumps(obj))
    if isinstance(res, Skip):
        raise DataError(f"invalid record {obj.get('id')!r}: {res.reason}")
    return res


def write_grouped(groups: dict[str, list[CommentRecord]], fh) -> None:
    """One JSON object per user: ``{"author": ..., "records": [...]}``."""
    for author, recs in groups.items():
        fh.write(json.dumps({"author": author, "records": [r.to_json() for r in recs]},
                            ensure_ascii=False, sort_keys=True))
        fh.write("\n")


def read_grouped(path) -> dict[str, list[CommentRecord]]:
    groups = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                groups[obj["author"]] = [record_from_json(r) for r in obj["records"]]
            except (ValueError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad grouped record: {exc}") from exc
    return {a: sorted(groups[a], key=_record_key) for a in sorted(groups)}
