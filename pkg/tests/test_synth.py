import json

import numpy as np
import pytest

from bpdetect import synth
from bpdetect.cohort import CohortConfig, build_cohorts
from bpdetect.errors import ConfigError
from bpdetect.ingest import group_by_user, parse_dump_line, stream_corpus
from bpdetect.lexicon import load_demo_lexicon
from bpdetect.textproc import tokenize

LEX = load_demo_lexicon()


def flat_spec(**over):
    obj = {"seed": 5, "comments_per_user": [30, 30], "tokens_per_comment": [40, 40],
           "base_rates": {"i": [0.05, 0.0], "posemo": [0.03, 0.0], "negemo": [0.02, 0.0],
                          "sad": [0.01, 0.0], "article": [0.06, 0.0], "health": [0.005, 0.0]},
           "groups": [{"name": "g", "label": "control", "n_users": 20}]}
    obj.update(over)
    return synth.SynthSpec.from_json(obj)


def test_same_seed_same_bytes(tmp_path):
    spec = synth.bundled_spec("mini")
    synth.write_corpus(spec, tmp_path / "a.jsonl", tmp_path / "a.json")
    synth.write_corpus(synth.bundled_spec("mini"), tmp_path / "b.jsonl", tmp_path / "b.json")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    spec.seed += 1
    synth.write_corpus(spec, tmp_path / "c.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() != (tmp_path / "c.jsonl").read_bytes()


def test_zero_comments_empty():
    spec = flat_spec(comments_per_user=[0, 0])
    lines, truth = synth.generate_corpus(spec)
    assert lines == [] and len(truth["users"]) == 20


def test_lines_ingest_cleanly():
    lines, _ = synth.generate_corpus(flat_spec())
    recs = [parse_dump_line(s) for s in lines]
    assert all(r.__class__.__name__ == "CommentRecord" for r in recs)


def test_vocabulary_words_match_their_category():
    vocab = synth.category_vocabulary(LEX)
    owner = {}
    for cat, ws in vocab.items():
        for w in ws:
            assert w not in owner, w
            owner[w] = cat
            assert LEX.category_id(cat) in LEX.match(w)
    for w in synth._filler():
        assert LEX.match(w) == frozenset(), w


def test_emitted_counts_and_law_of_large_numbers():
    spec = flat_spec()
    lines, truth = synth.generate_corpus(spec)
    owner = {w: c for c, ws in synth.category_vocabulary(LEX).items() for w in ws}
    cats = sorted(spec.groups[0].rates)
    recount = {}
    for s in lines:
        r = parse_dump_line(s)
        c = recount.setdefault(r.author, dict.fromkeys(cats + ["filler"], 0))
        for tok in tokenize(r.body):
            c[owner.get(tok, "filler")] += 1
    total = dict.fromkeys(cats + ["filler"], 0)
    for author, t in truth["users"].items():
        assert recount[author] == t["emitted"]
        for k, v in t["emitted"].items():
            total[k] += v
    n = sum(total.values())
    assert n >= 10_000
    for c in cats:
        p = spec.groups[0].rates[c][0]
        assert abs(total[c] / n - p) <= 3 * np.sqrt(p * (1 - p) / n), c


def test_full_injection_recovered_by_cohort(mini_corpus):
    truth = json.loads(mini_corpus.with_name("truth.json").read_text())
    res = build_cohorts(group_by_user(stream_corpus(mini_corpus)), CohortConfig())
    planted = {a for a, t in truth["users"].items() if t["label"] == "bipolar"}
    assert {u.author for u in res.bipolar} == planted
    assert {u.author for u in res.control} == set(truth["users"]) - planted


def test_bad_specs():
    with pytest.raises(ConfigError):
        flat_spec(groups=[{"name": "g", "label": "x", "n_users": 1}])
    with pytest.raises(ConfigError):
        flat_spec(base_rates={"nosuchcategory": [0.1, 0.0]})
    with pytest.raises(ConfigError):
        flat_spec(base_rates={"i": [0.9, 0.0], "we": [0.2, 0.0]})
    with pytest.raises(ConfigError):
        synth.SynthSpec.from_json({"seed": 1})
    with pytest.raises(ConfigError):
        synth.bundled_spec("nope")


@pytest.mark.parametrize("name", synth.BUNDLED)
def test_bundled_specs_load(name):
    assert synth.bundled_spec(name).groups
