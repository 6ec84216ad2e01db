import itertools

import pytest

from bpdetect import synth
from bpdetect.ingest import CommentRecord

_ids = itertools.count(1)
T0 = 1483228800  # 2017-01-01 UTC


def words(n, word="cat"):
    return " ".join([word] * n)


def rec(author="u1", subreddit="gaming", body="hello", ts=None, **kw):
    i = next(_ids)
    return CommentRecord(id=kw.pop("id", f"c{i:06d}"), author=author, subreddit=subreddit,
                         created_utc=T0 + i if ts is None else ts, body=body, **kw)


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("mini")
    synth.write_corpus(synth.bundled_spec("mini"), d / "corpus.jsonl", d / "truth.json")
    return d / "corpus.jsonl"


# acceptance criteria report: test_acceptance appends (number, ok, detail)
CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(CRITERIA):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
