"""Synthetic Reddit-style corpora with planted group differences.

Text is a bag of lexicon words and filler pseudo-words, so every token's
category membership is known by construction. Each user draws from its own
``default_rng([seed, group_index, user_index])`` stream; the corpus bytes do
not depend on generation order.
"""
from __future__ import annotations

import calendar
import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping

import numpy as np

from .cohort import DEFAULT_CATEGORY_MAP, DEFAULT_SELF_REPORT
from .errors import ConfigError
from .lexicon import Lexicon, load_demo_lexicon
from .textproc import tokenize

BUNDLED = ("signal", "null", "oscillator", "mini")

_GROUP_KEYS = {"name", "label", "n_users", "rates", "oscillation", "self_report_rate", "flair_rate",
               "mention_rate", "disorder_comments", "mh_comments", "category_weights", "home_share",
               "post_rate", "gilded_rate", "controversial_rate", "score_mean"}
_SPEC_KEYS = {"seed", "start", "months", "comments_per_user", "tokens_per_comment", "base_rates",
              "groups", "bipolar_subreddit", "mentalhealth_subreddits", "category_map", "description"}


@dataclass
class GroupSpec:
    name: str
    label: str
    n_users: int
    rates: dict[str, tuple[float, float]]
    oscillation: dict[str, list[float]] = field(default_factory=dict)
    self_report_rate: float = 0.0
    flair_rate: float = 0.0
    mention_rate: float = 0.0
    disorder_comments: int = 0
    mh_comments: int = 0
    category_weights: dict[str, float] = field(default_factory=dict)
    home_share: float = 0.6
    post_rate: float = 0.1
    gilded_rate: float = 0.01
    controversial_rate: float = 0.05
    score_mean: float = 5.0


@dataclass
class SynthSpec:
    seed: int
    groups: list[GroupSpec]
    start: str = "2016-01"
    months: int = 6
    comments_per_user: tuple[int, int] = (40, 40)
    tokens_per_comment: tuple[int, int] = (30, 50)
    bipolar_subreddit: str = "bipolar"
    mentalhealth_subreddits: tuple[str, ...] = ("mentalhealth", "depression")
    category_map: dict[str, list[str]] = field(default_factory=lambda: dict(DEFAULT_CATEGORY_MAP))
    description: str = ""

    @classmethod
    def from_json(cls, obj: Mapping) -> "SynthSpec":
        unknown = set(obj) - _SPEC_KEYS
        if unknown:
            raise ConfigError(f"unknown synth spec keys {sorted(unknown)}")
        if "seed" not in obj or "groups" not in obj:
            raise ConfigError("synth spec needs 'seed' and 'groups'")
        base = {k: tuple(v) for k, v in obj.get("base_rates", {}).items()}
        groups = []
        for g in obj["groups"]:
            bad = set(g) - _GROUP_KEYS
            if bad:
                raise ConfigError(f"unknown group keys {sorted(bad)}")
            g = dict(g)
            rates = dict(base)
            rates.update({k: tuple(v) for k, v in g.pop("rates", {}).items()})
            groups.append(GroupSpec(rates=rates, **g))
        kw = {k: obj[k] for k in ("start", "months", "bipolar_subreddit", "description") if k in obj}
        for k in ("comments_per_user", "tokens_per_comment", "mentalhealth_subreddits"):
            if k in obj:
                kw[k] = tuple(obj[k]) if isinstance(obj[k], (list, tuple)) else (obj[k], obj[k])
        if "category_map" in obj:
            kw["category_map"] = dict(obj["category_map"])
        spec = cls(int(obj["seed"]), groups, **kw)
        spec.validate()
        return spec

    def validate(self, lexicon: Lexicon | None = None) -> None:
        vocab = category_vocabulary(lexicon or load_demo_lexicon())
        if not self.groups:
            raise ConfigError("synth spec has no groups")
        if self.months < 1:
            raise ConfigError("months must be >= 1")
        _month_starts(self.start, self.months)
        lo, hi = self.comments_per_user
        if not 0 <= lo <= hi:
            raise ConfigError("comments_per_user must be 0 <= lo <= hi")
        lo, hi = self.tokens_per_comment
        if not 1 <= lo <= hi:
            raise ConfigError("tokens_per_comment must be 1 <= lo <= hi")
        names = set()
        for g in self.groups:
            if g.name in names:
                raise ConfigError(f"duplicate group {g.name!r}")
            names.add(g.name)
            if g.label not in ("bipolar", "control"):
                raise ConfigError(f"group {g.name!r}: label must be bipolar or control")
            if g.n_users < 0:
                raise ConfigError(f"group {g.name!r}: n_users must be >= 0")
            for cat, (mean, sd) in g.rates.items():
                if cat not in vocab:
                    raise ConfigError(f"group {g.name!r}: no emittable words for category {cat!r}")
                if not (0.0 <= mean <= 1.0) or sd < 0:
                    raise ConfigError(f"group {g.name!r}: bad rate for {cat!r}")
            for cat, mult in g.oscillation.items():
                if cat not in g.rates or not mult or min(mult) < 0:
                    raise ConfigError(f"group {g.name!r}: bad oscillation for {cat!r}")
            peak = sum(m * max(g.oscillation.get(c, [1.0])) for c, (m, _) in g.rates.items())
            if peak > 1.0:
                raise ConfigError(f"group {g.name!r}: category rates sum to {peak:.3f} > 1")
            for key in ("self_report_rate", "flair_rate", "mention_rate", "home_share", "post_rate",
                        "gilded_rate", "controversial_rate"):
                if not 0.0 <= getattr(g, key) <= 1.0:
                    raise ConfigError(f"group {g.name!r}: {key} must lie in [0, 1]")
            for cat in g.category_weights:
                if cat not in self.category_map:
                    raise ConfigError(f"group {g.name!r}: unknown category {cat!r}")


def load_spec(path) -> SynthSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read synth spec {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return SynthSpec.from_json(obj)


def bundled_spec(name: str) -> SynthSpec:
    if name not in BUNDLED:
        raise ConfigError(f"no bundled synth spec {name!r}; choose from {BUNDLED}")
    text = resources.files("bpdetect.data").joinpath(f"synth_{name}.json").read_text(encoding="utf-8")
    return SynthSpec.from_json(json.loads(text))


# --- vocabulary ------------------------------------------------------------

@lru_cache(maxsize=8)
def _filler() -> tuple[str, ...]:
    text = resources.files("bpdetect.data").joinpath("filler.txt").read_text(encoding="utf-8")
    return tuple(w for w in text.split() if w)


def category_vocabulary(lex: Lexicon) -> dict[str, list[str]]:
    """Words whose matched categories are exactly one category plus its ancestors.

    Prefix entries contribute the bare stem and stem+"s" when those forms
    match back to the same entry.
    """
    members: dict[int, set[str]] = {c: set() for c in lex.categories}
    entries = list(lex.exact_entries.items()) + [(p, ids) for p, ids in lex.prefix_entries.items()]
    for word, ids in entries:
        for c in ids:
            members[c].add(word)
    out: dict[str, list[str]] = {}
    for word, ids in entries:
        primary = min(ids, key=lambda c: (len(members[c]), c))
        if not all(members[primary] <= members[c] for c in ids):
            continue  # categories not nested, e.g. a word filed under two unrelated leaves
        forms = [word] if word in lex.exact_entries else [word, word + "s"]
        for form in forms:
            if tokenize(form) == [form] and lex.match(form) == ids and form not in ("bipolar", "bp"):
                out.setdefault(lex.categories[primary], set()).add(form)
    return {k: sorted(v) for k, v in sorted(out.items())}


# --- generation ------------------------------------------------------------

def _month_starts(start: str, months: int) -> list[int]:
    try:
        year, month = (int(x) for x in start.split("-"))
        if not 1 <= month <= 12:
            raise ValueError
    except ValueError:
        raise ConfigError(f"start must look like YYYY-MM, got {start!r}") from None
    out = []
    for _ in range(months + 1):
        out.append(calendar.timegm((year, month, 1, 0, 0, 0)))
        month += 1
        if month == 13:
            year, month = year + 1, 1
    return out


@dataclass
class _Ctx:
    spec: SynthSpec
    vocab: dict[str, list[str]]
    filler: tuple[str, ...]
    bounds: list[int]
    topic_subs: list[str]
    flat: np.ndarray = None
    start: dict = field(default_factory=dict)
    _layouts: dict = field(default_factory=dict)

    def __post_init__(self):
        # every pool laid end to end; filler goes last
        words, pos = [], 0
        for c, ws in list(self.vocab.items()) + [(None, list(self.filler))]:
            self.start[c] = (pos, len(ws))
            words.extend(ws)
            pos += len(ws)
        self.flat = np.array(words, dtype=object)

    def layout(self, cats):
        key = tuple(cats)
        if key not in self._layouts:
            pairs = [self.start[c] for c in cats] + [self.start[None]]
            self._layouts[key] = (np.array([a for a, _ in pairs], dtype=np.intp),
                                  np.array([b for _, b in pairs], dtype=float))
        return self._layouts[key]


def _words(rng, ctx: _Ctx, cats: list[str], probs: np.ndarray, n: int):
    """``n`` words plus the category index of each (len(cats) means filler)."""
    draw = rng.choice(len(probs), size=n, p=probs)
    u = rng.random(n)
    offset, size = ctx.layout(cats)
    idx = offset[draw] + (u * size[draw]).astype(np.intp)
    return ctx.flat[idx].tolist(), draw


def _user(ctx: _Ctx, gi: int, g: GroupSpec, ui: int, author: str):
    spec = ctx.spec
    rng = np.random.default_rng([spec.seed, gi, ui])
    cats = sorted(g.rates)
    user_rate = np.array([min(1.0, max(0.0, g.rates[c][0] + g.rates[c][1] * rng.standard_normal()))
                          for c in cats])
    cat_names = sorted(spec.category_map)
    if g.category_weights:
        w = np.array([g.category_weights.get(c, 0.0) for c in cat_names], dtype=float)
    else:
        w = np.ones(len(cat_names))
    home = cat_names[int(rng.choice(len(cat_names), p=w / w.sum()))]
    home_subs = list(spec.category_map[home])
    self_report = bool(rng.random() < g.self_report_rate)
    flair = bool(rng.random() < g.flair_rate)
    lo, hi = spec.comments_per_user
    n_comments = int(rng.integers(lo, hi + 1))
    emitted = np.zeros(len(cats) + 1, dtype=np.int64)

    records = []
    tlo, thi = spec.tokens_per_comment

    def body(month: int) -> str:
        rates = user_rate.copy()
        for j, c in enumerate(cats):
            mult = g.oscillation.get(c)
            if mult:
                rates[j] *= mult[month % len(mult)]
        total = rates.sum()
        if total > 1.0:
            rates /= total
        probs = np.append(rates, max(0.0, 1.0 - rates.sum()))
        probs /= probs.sum()
        n = int(rng.integers(tlo, thi + 1))
        words, draw = _words(rng, ctx, cats, probs, n)
        emitted[:] += np.bincount(draw, minlength=len(cats) + 1)
        return words

    def stamp(month: int) -> int:
        a, b = ctx.bounds[month], ctx.bounds[month + 1]
        return int(rng.integers(a, b))

    def add(sub, text, month, kind="comment", flair_text=None):
        records.append({"sub": sub, "body": text, "t": stamp(month), "kind": kind, "flair": flair_text})

    for j in range(n_comments):
        month = j * spec.months // max(n_comments, 1)
        sub = (home_subs[int(rng.integers(len(home_subs)))] if rng.random() < g.home_share
               else ctx.topic_subs[int(rng.integers(len(ctx.topic_subs)))])
        text = " ".join(body(month))
        if rng.random() < g.mention_rate:
            text += " bipolar"
        kind = "post" if rng.random() < g.post_rate else "comment"
        add(sub, text, month, kind)
    disorder_flair = "Bipolar II" if flair else None
    if self_report:
        phrase = DEFAULT_SELF_REPORT[int(rng.integers(len(DEFAULT_SELF_REPORT)))]
        add(spec.bipolar_subreddit, phrase + " " + " ".join(_words(rng, ctx, [], np.ones(1), 10)[0]),
            int(rng.integers(spec.months)), flair_text=disorder_flair)
    topic_emitted = emitted.copy()
    for _ in range(g.disorder_comments):
        add(spec.bipolar_subreddit, " ".join(body(0)), int(rng.integers(spec.months)),
            flair_text=disorder_flair)
    for _ in range(g.mh_comments):
        sub = spec.mentalhealth_subreddits[int(rng.integers(len(spec.mentalhealth_subreddits)))]
        add(sub, " ".join(body(0)), int(rng.integers(spec.months)))

    lines = []
    for k, r in enumerate(records):
        ident = f"{author}x{k:04d}"
        obj = {
            "author": author,
            "subreddit": r["sub"],
            "created_utc": r["t"],
            "gilded": int(rng.random() < g.gilded_rate),
            "controversiality": int(rng.random() < g.controversial_rate),
            "ups": int(rng.poisson(g.score_mean)),
            "downs": int(rng.poisson(1.0)),
        }
        if r["kind"] == "post":
            obj.update(id=ident, name="t3_" + ident, selftext=r["body"], title="")
        else:
            obj.update(id=ident, name="t1_" + ident, body=r["body"])
        if r["flair"]:
            obj["author_flair_text"] = r["flair"]
        lines.append(json.dumps(obj, sort_keys=True, ensure_ascii=False))
    truth = {"group": g.name, "label": g.label, "self_report": self_report, "flair": flair,
             "home_category": home, "n_records": len(records),
             "rates": {c: float(r) for c, r in zip(cats, user_rate)},
             "emitted": dict(zip(cats + ["filler"], (int(v) for v in topic_emitted)))}
    return lines, truth


def generate_corpus(spec: SynthSpec, lexicon: Lexicon | None = None) -> tuple[list[str], dict]:
    """Return (JSONL lines, truth dict). Same spec, same output."""
    lex = lexicon or load_demo_lexicon()
    spec.validate(lex)
    vocab = category_vocabulary(lex)
    topic_subs = sorted({s for subs in spec.category_map.values() for s in subs})
    ctx = _Ctx(spec, vocab, _filler(), _month_starts(spec.start, spec.months), topic_subs)
    lines, users = [], {}
    serial = 0
    for gi, g in enumerate(spec.groups):
        for ui in range(g.n_users):
            serial += 1
            author = f"u{serial:05d}"
            ls, truth = _user(ctx, gi, g, ui, author)
            lines.extend(ls)
            users[author] = truth
    truth = {"seed": spec.seed, "description": spec.description,
             "groups": [g.name for g in spec.groups], "users": users}
    return lines, truth


def write_corpus(spec: SynthSpec, out_path, truth_path=None, lexicon: Lexicon | None = None) -> dict:
    lines, truth = generate_corpus(spec, lexicon)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
    if truth_path is not None:
        with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(truth, fh, indent=1, sort_keys=True)
            fh.write("\n")
    return truth

