import gzip
import json

import pytest
from hypothesis import given, settings, strategies as st

from bpdetect.errors import DataError
from bpdetect.ingest import (CommentRecord, Skip, group_by_user, parse_dump_line, read_grouped,
                             record_from_json, stream_corpus, write_grouped)

from conftest import T0


def line(**kw):
    obj = {"id": "abc", "author": "alice", "subreddit": "bipolar", "created_utc": T0, "body": "hi there",
           "gilded": 0, "controversiality": 0, "ups": 3, "downs": 1}
    obj.update(kw)
    return json.dumps(obj)


def test_valid_line():
    r = parse_dump_line(line())
    assert r == CommentRecord("abc", "alice", "bipolar", T0, "hi there", "comment", 0, 0, 3, 1, None)


@pytest.mark.parametrize("text,reason", [
    ("{not json", "malformed"),
    ("[1, 2]", "malformed"),
    (line(author="[deleted]"), "deleted_author"),
    (line(body=None), "missing_field"),
    (line(created_utc=1), "timestamp_out_of_range"),
    (line(controversiality=3), "bad_value"),
    (line(ups="many"), "bad_value"),
])
def test_skips(text, reason):
    assert parse_dump_line(text) == Skip(reason)


def test_post_kind_and_selftext():
    obj = json.loads(line(name="t3_xyz"))
    del obj["body"]
    obj["selftext"] = "my post"
    r = parse_dump_line(json.dumps(obj))
    assert r.kind == "post" and r.body == "my post"


def test_score_fallback_and_flair():
    obj = json.loads(line(author_flair_text="Bipolar II"))
    del obj["ups"]
    obj["score"] = 7
    r = parse_dump_line(json.dumps(obj))
    assert r.ups == 7 and r.flair_text == "Bipolar II"


def _write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_stream_counts(tmp_path):
    p = _write(tmp_path / "d.jsonl", [line(id="1"), line(id="2", subreddit="gaming"), line(id="3", subreddit="news")])
    s = stream_corpus(p)
    assert len(list(s)) == 3 and s.stats.records_skipped == 0
    s = stream_corpus(p, subreddits=["bipolar"])
    out = list(s)
    assert len(out) == 1 and s.stats.records_read == 3


def test_stream_empty_and_gzip(tmp_path):
    p = tmp_path / "e.jsonl"
    p.write_text("")
    s = stream_corpus(p)
    assert list(s) == [] and s.stats.records_read == 0
    g = tmp_path / "d.jsonl.gz"
    with gzip.open(g, "wt", encoding="utf-8") as fh:
        fh.write(line() + "\n" + "{bad\n")
    s = stream_corpus(g)
    assert len(list(s)) == 1 and s.stats.skip_reasons == {"malformed": 1}


def test_stream_missing_file(tmp_path):
    with pytest.raises(DataError):
        list(stream_corpus(tmp_path / "nope.jsonl"))


def test_group_by_user():
    a1 = CommentRecord("2", "A", "x", T0 + 5, "b")
    b1 = CommentRecord("3", "B", "x", T0, "c")
    a2 = CommentRecord("1", "A", "x", T0 + 1, "a")
    g = group_by_user([a1, b1, a2])
    assert g == {"A": [a2, a1], "B": [b1]}
    assert group_by_user([]) == {}
    t1 = CommentRecord("z", "A", "x", T0, "")
    t2 = CommentRecord("y", "A", "x", T0, "")
    assert [r.id for r in group_by_user([t1, t2])["A"]] == ["y", "z"]


def test_grouped_roundtrip(tmp_path):
    recs = [CommentRecord(str(i), f"u{i % 3}", "s", T0 + i, f"body {i}") for i in range(10)]
    g = group_by_user(recs)
    with open(tmp_path / "g.jsonl", "w") as fh:
        write_grouped(g, fh)
    assert read_grouped(tmp_path / "g.jsonl") == g


records = st.builds(
    CommentRecord,
    id=st.text("abc123", min_size=1, max_size=6),
    author=st.sampled_from(["ann", "bob", "cy", "dee"]),
    subreddit=st.sampled_from(["bipolar", "gaming", "news"]),
    created_utc=st.integers(T0, T0 + 10**6),
    body=st.text(max_size=40),
    kind=st.sampled_from(["post", "comment"]),
    gilded=st.integers(0, 5),
    controversiality=st.integers(0, 1),
    ups=st.integers(-50, 50),
    downs=st.integers(0, 50),
    flair_text=st.none() | st.text(max_size=10),
)


@given(records)
def test_roundtrip_property(r):
    assert parse_dump_line(r.dumps()) == r
    assert record_from_json(r.to_json()) == r


@settings(max_examples=50)
@given(st.lists(records, max_size=30), st.randoms())
def test_grouping_partition_and_order_independence(recs, rnd):
    g = group_by_user(recs)
    assert sum(map(len, g.values())) == len(recs)
    shuffled = list(recs)
    rnd.shuffle(shuffled)
    g2 = group_by_user(shuffled)
    # records with identical sort keys may swap, so compare by key
    key = lambda d: {a: [(r.created_utc, r.id) for r in v] for a, v in d.items()}
    assert key(g) == key(g2)
    assert all(sorted(map(repr, g[a])) == sorted(map(repr, g2[a])) for a in g)
