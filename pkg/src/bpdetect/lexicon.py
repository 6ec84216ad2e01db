"""LIWC-format dictionary engine.

A ``.dic`` file has a header of ``id<TAB>name`` lines between two ``%``
lines, followed by ``word<TAB>id<TAB>id...`` entries. A trailing ``*``
turns an entry into a prefix match. Exact entries beat prefix entries and
the longest matching prefix wins.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from .errors import DataError

_TERMINAL = ""  # trie key holding the category set of a prefix entry


class LexiconFormatError(DataError):
    pass


@dataclass
class Lexicon:
    categories: dict[int, str]
    exact_entries: dict[str, frozenset[int]]
    prefix_entries: dict[str, frozenset[int]]
    _trie: dict = field(default_factory=dict, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for word, ids in list(self.exact_entries.items()) + list(self.prefix_entries.items()):
            missing = set(ids) - set(self.categories)
            if missing:
                raise LexiconFormatError(f"entry {word!r} references undeclared categories {sorted(missing)}")
            if not ids:
                raise LexiconFormatError(f"entry {word!r} has no categories")
        self._trie = {}
        for prefix, ids in self.prefix_entries.items():
            node = self._trie
            for ch in prefix:
                node = node.setdefault(ch, {})
            node[_TERMINAL] = ids
        self._by_name = {name: cid for cid, name in self.categories.items()}

    @property
    def names(self) -> list[str]:
        """Category names in id order."""
        return [self.categories[c] for c in sorted(self.categories)]

    def category_id(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"category {name!r} not in lexicon") from None

    def match(self, token: str) -> frozenset[int]:
        hit = self._cache.get(token)
        if hit is not None:
            return hit
        hit = self.exact_entries.get(token)
        if hit is None:
            hit = frozenset()
            node = self._trie
            for ch in token:
                node = node.get(ch)
                if node is None:
                    break
                ids = node.get(_TERMINAL)
                if ids is not None:
                    hit = ids
        self._cache[token] = hit
        return hit


def match_token(lex: Lexicon, token: str) -> frozenset[int]:
    return lex.match(token)


def parse_dic(text: str) -> Lexicon:
    lines = text.splitlines()
    pct = [i for i, ln in enumerate(lines) if ln.strip() == "%"]
    if len(pct) < 2:
        raise LexiconFormatError("missing '%' delimiters around the category header")
    start, end = pct[0], pct[1]
    categories: dict[int, str] = {}
    for lineno in range(start + 1, end):
        line = lines[lineno].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2 or not parts[0].isdigit():
            raise LexiconFormatError(f"line {lineno + 1}: bad category line {line!r}")
        categories[int(parts[0])] = parts[1]
    exact: dict[str, set[int]] = {}
    prefix: dict[str, set[int]] = {}
    for lineno in range(end + 1, len(lines)):
        raw = lines[lineno].rstrip("\r\n")
        if not raw.strip():
            continue
        parts = raw.split("\t") if "\t" in raw else raw.split()
        word = parts[0].strip().lower()
        ids = set()
        for tok in parts[1:]:
            tok = tok.strip()
            if not tok:
                continue
            if not tok.isdigit():
                raise LexiconFormatError(f"line {lineno + 1}: bad category id {tok!r}")
            cid = int(tok)
            if cid not in categories:
                raise LexiconFormatError(f"line {lineno + 1}: entry {word!r} references undeclared category {cid}")
            ids.add(cid)
        if not ids:
            raise LexiconFormatError(f"line {lineno + 1}: entry {word!r} has no categories")
        if word.endswith("*"):
            prefix.setdefault(word[:-1], set()).update(ids)
        else:
            exact.setdefault(word, set()).update(ids)
    return Lexicon(categories,
                   {w: frozenset(s) for w, s in exact.items()},
                   {w: frozenset(s) for w, s in prefix.items()})


def load_dic(path) -> Lexicon:
    with open(path, encoding="utf-8-sig") as fh:
        return parse_dic(fh.read())


def load_demo_lexicon() -> Lexicon:
    """The bundled open demo dictionary (LIWC-compatible format, our own content)."""
    return parse_dic(resources.files("bpdetect.data").joinpath("demo.dic").read_text("utf-8"))


def wordlists_to_dic(text: str) -> str:
    """Convert ``category: word, word, ...`` lines (Empath-style lists) to ``.dic`` text."""
    cats: list[str] = []
    entries: dict[str, set[int]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if ":" not in line:
            raise LexiconFormatError(f"line {lineno}: expected 'category: words'")
        name, words = line.split(":", 1)
        name = name.strip()
        if not name:
            raise LexiconFormatError(f"line {lineno}: empty category name")
        if name not in cats:
            cats.append(name)
        cid = cats.index(name) + 1
        for w in re.split(r"[,\s]+", words.strip()):
            if w:
                entries.setdefault(w.lower(), set()).add(cid)
    out = ["%"] + [f"{i}\t{n}" for i, n in enumerate(cats, 1)] + ["%"]
    for w in sorted(entries):
        out.append(w + "\t" + "\t".join(str(c) for c in sorted(entries[w])))
    return "\n".join(out) + "\n"


# --- summary variables ----------------------------------------------------

@dataclass(frozen=True)
class SummaryVariableDef:
    name: str
    weights: dict[str, float]
    intercept: float = 0.0
    transform: str = "linear"

    def __post_init__(self):
        if self.transform not in ("linear", "logistic100"):
            raise DataError(f"summary {self.name!r}: unknown transform {self.transform!r}")

    def value(self, percent: dict[str, float]) -> float:
        x = self.intercept + sum(w * percent[c] for c, w in self.weights.items())
        if self.transform == "logistic100":
            # numerically safe sigmoid
            if x >= 0:
                return 100.0 / (1.0 + math.exp(-x))
            e = math.exp(x)
            return 100.0 * e / (1.0 + e)
        return x

    def check(self, lex: Lexicon) -> None:
        missing = [c for c in self.weights if c not in lex.names]
        if missing:
            raise DataError(f"summary {self.name!r} references unknown categories {missing}")


def parse_summaries(obj) -> list[SummaryVariableDef]:
    items = obj.get("summaries", obj) if isinstance(obj, dict) else obj
    try:
        return [SummaryVariableDef(d["name"], {k: float(v) for k, v in d["weights"].items()},
                                   float(d.get("intercept", 0.0)), d.get("transform", "linear"))
                for d in items]
    except (KeyError, TypeError, AttributeError) as exc:
        raise DataError(f"bad summary definition: {exc}") from exc


def load_summaries(path) -> list[SummaryVariableDef]:
    with open(path, encoding="utf-8") as fh:
        return parse_summaries(json.load(fh))


def load_demo_summaries() -> list[SummaryVariableDef]:
    text = resources.files("bpdetect.data").joinpath("demo_summaries.json").read_text("utf-8")
    return parse_summaries(json.loads(text))


# --- profiling ------------------------------------------------------------

@dataclass
class CategoryProfile:
    percent: dict[str, float]
    token_count: int
    summary: dict[str, float] = field(default_factory=dict)


def category_counts(lex: Lexicon, tokens: Iterable[str]) -> tuple[Counter, int]:
    """Per-category-id match counts and the token total."""
    counts: Counter = Counter()
    n = 0
    for tok, k in Counter(tokens).items():
        n += k
        for cid in lex.match(tok):
            counts[cid] += k
    return counts, n


def profile(lex: Lexicon, tokens: Sequence[str],
            summaries: Sequence[SummaryVariableDef] = ()) -> CategoryProfile:
    """Percentage of tokens falling in each category, plus summary variables."""
    counts, n = category_counts(lex, tokens)
    if n == 0:
        raise DataError("cannot profile an empty token stream")
    percent = {lex.categories[cid]: 100.0 * counts.get(cid, 0) / n for cid in sorted(lex.categories)}
    summary = {s.name: s.value(percent) for s in summaries}
    return CategoryProfile(percent, n, summary)


# LIWC2015-style punctuation rates, as a percentage of word count.
PUNCTUATION = {
    "Period": ".", "Comma": ",", "Colon": ":", "SemiC": ";", "QMark": "?",
    "Exclam": "!", "Dash": "-", "Quote": "\"", "Apostro": "'", "Parenth": "()",
}
_ALL_PUNCT = re.compile(r"[^\w\s]")


def punctuation_rates(text: str, token_count: int) -> dict[str, float]:
    if token_count <= 0:
        raise DataError("punctuation rates need a positive token count")
    counts = {name: sum(text.count(ch) for ch in chars) for name, chars in PUNCTUATION.items()}
    named = set("".join(PUNCTUATION.values()))
    total = len(_ALL_PUNCT.findall(text))
    counts["OtherP"] = sum(1 for ch in _ALL_PUNCT.findall(text) if ch not in named)
    rates = {"AllPunc": 100.0 * total / token_count}
    rates.update({k: 100.0 * v / token_count for k, v in counts.items()})
    return rates
