"""Pipeline configuration and the stage functions shared by the CLI subcommands.

Each stage reads and writes plain files, so ``run`` is literally the
composition of the standalone subcommands.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis, ml
from .cohort import CohortConfig, UserDoc, build_cohorts, read_users, write_users
from .errors import ConfigError, DataError
from .eval import (DEFAULT_GRIDS, CVReport, baseline_report, category_matrices, derive_seed, nested_cv,
                   per_category_eval)
from .ingest import group_by_user, read_grouped, stream_corpus, write_grouped
from .lexicon import load_demo_lexicon, load_demo_summaries, load_dic, load_summaries
from .textproc import DEFAULT_MAX_FEATURES, DEFAULT_MIN_DF, TfidfModel, fit_tfidf
from .userfeat import PARTS, FeatureMatrix, LexiconModel, assemble, user_tokens

log = logging.getLogger("bpdetect")

_CONFIG_KEYS = {"seed", "input", "output_dir", "lexicons", "cohort", "tfidf", "parts", "models", "cv",
                "per_category", "analysis", "description"}


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_json(path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=1, ensure_ascii=False) + "\n")


# --- config ----------------------------------------------------------------

@dataclass
class LexiconSpec:
    namespace: str
    dic: str = "demo"
    summaries: str | None = "demo"
    punctuation: bool = False

    def load(self) -> LexiconModel:
        lex = load_demo_lexicon() if self.dic == "demo" else load_dic(self.dic)
        if self.summaries is None:
            summ = []
        elif self.summaries == "demo":
            summ = load_demo_summaries()
        else:
            summ = load_summaries(self.summaries)
        return LexiconModel(self.namespace, lex, summ, self.punctuation)


@dataclass
class PipelineConfig:
    seed: int
    input: Path
    output_dir: Path
    lexicons: list[LexiconSpec] = field(default_factory=lambda: [LexiconSpec("liwc")])
    cohort: CohortConfig = field(default_factory=CohortConfig)
    tfidf: dict = field(default_factory=lambda: {"min_df": DEFAULT_MIN_DF, "max_features": DEFAULT_MAX_FEATURES})
    parts: list[str] = field(default_factory=lambda: list(PARTS))
    models: dict = field(default_factory=lambda: dict(DEFAULT_GRIDS))
    cv: dict = field(default_factory=lambda: {"k_outer": 10, "k_inner": 5})
    per_category: dict | None = field(default_factory=lambda: {"model": "rf", "grid": None})
    analysis: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: dict, base_dir=".") -> "PipelineConfig":
        """Parse and check a config; relative paths resolve against ``base_dir``."""
        if not isinstance(obj, dict):
            raise ConfigError("pipeline config must be a JSON object")
        unknown = set(obj) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for key in ("seed", "input", "output_dir"):
            if key not in obj:
                raise ConfigError(f"config needs {key!r} (seeds are never implicit)")
        if not isinstance(obj["seed"], int):
            raise ConfigError("seed must be an integer")
        base = Path(base_dir)

        def resolve(p):
            return p if p in ("demo", None) else str(base / p)

        lexicons = []
        for spec in obj.get("lexicons", [{"namespace": "liwc"}]):
            try:
                ls = LexiconSpec(**spec)
            except TypeError as exc:
                raise ConfigError(f"bad lexicon entry {spec}: {exc}") from None
            ls.dic, ls.summaries = resolve(ls.dic), resolve(ls.summaries)
            lexicons.append(ls)
        cohort_obj = dict(obj.get("cohort", {}))
        if isinstance(cohort_obj.get("category_map"), str):
            cohort_obj["category_map"] = _read_json(base / cohort_obj["category_map"], "category map")
        cfg = cls(obj["seed"], base / obj["input"], base / obj["output_dir"], lexicons,
                  CohortConfig.from_json(cohort_obj))
        if "tfidf" in obj:
            cfg.tfidf = {**cfg.tfidf, **obj["tfidf"]}
        if "parts" in obj:
            cfg.parts = list(obj["parts"])
        if "models" in obj:
            cfg.models = dict(obj["models"])
        if "cv" in obj:
            cfg.cv = {**cfg.cv, **obj["cv"]}
        if "per_category" in obj:
            cfg.per_category = obj["per_category"]
        cfg.analysis = dict(obj.get("analysis", {}))
        cfg.check()
        return cfg

    def check(self) -> None:
        if not self.input.is_file():
            raise ConfigError(f"input corpus not found: {self.input}")
        for ls in self.lexicons:
            for p in (ls.dic, ls.summaries):
                if p not in ("demo", None) and not Path(p).is_file():
                    raise ConfigError(f"lexicon file not found: {p}")
        bad = set(self.parts) - set(PARTS)
        if bad or not self.parts:
            raise ConfigError(f"parts must be a non-empty subset of {PARTS}")
        for kind in self.models:
            if kind not in ml.MODEL_KINDS:
                raise ConfigError(f"unknown model kind {kind!r}")
        if len({ls.namespace for ls in self.lexicons}) != len(self.lexicons):
            raise ConfigError("lexicon namespaces must be distinct")


def _read_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{what} {path} is not valid JSON: {exc}") from exc


def load_config(path) -> PipelineConfig:
    path = Path(path)
    return PipelineConfig.from_json(_read_json(path, "pipeline config"), path.parent)


def parse_grid(text_or_path):
    """Grid from inline JSON or a JSON file; None means the default grid."""
    if text_or_path is None:
        return None
    if os.path.isfile(text_or_path):
        return _read_json(text_or_path, "grid")
    try:
        return json.loads(text_or_path)
    except ValueError:
        raise ConfigError(f"grid is neither a file nor inline JSON: {text_or_path!r}") from None


# --- stages ----------------------------------------------------------------

def stage_ingest(input_path, out_path, stats_path=None, subreddits=None) -> dict:
    stream = stream_corpus(input_path, subreddits=subreddits)
    groups = group_by_user(stream)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        write_grouped(groups, fh)
    stats = stream.stats.to_json()
    if stats_path:
        write_json(stats_path, stats)
    log.info("ingest: %d records accepted from %d users", stats["accepted"], len(groups))
    return stats


def categories_tsv(result, category_map) -> str:
    lines = ["category\tbipolar\tcontrol"]
    for cat in sorted(category_map):
        nb = sum(cat in u.categories for u in result.bipolar)
        nc = sum(cat in u.categories for u in result.control)
        lines.append(f"{cat}\t{nb}\t{nc}")
    lines.append(f"All\t{len(result.bipolar)}\t{len(result.control)}")
    return "\n".join(lines) + "\n"


def stage_cohort(grouped_path, out_dir, cfg: CohortConfig) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = build_cohorts(read_grouped(grouped_path), cfg)
    with open(out_dir / "bipolar.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        write_users(result.bipolar, fh)
    with open(out_dir / "control.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        write_users(result.control, fh)
    reasons: dict[str, int] = {}
    for r in result.rejected:
        reasons[r.reason] = reasons.get(r.reason, 0) + 1
    summary = {"detected": len(result.detected), "bipolar": len(result.bipolar),
               "control": len(result.control), "rejected": dict(sorted(reasons.items())),
               "config": cfg.to_json()}
    write_json(out_dir / "cohort.json", summary)
    _write_text(out_dir / "topic_categories.tsv", categories_tsv(result, cfg.category_map))
    log.info("cohort: %d bipolar, %d control", len(result.bipolar), len(result.control))
    # files above are still written so an empty cohort can be diagnosed
    if not result.bipolar or not result.control:
        raise DataError(f"empty cohort: {len(result.bipolar)} bipolar, {len(result.control)} control users "
                        f"({summary['detected']} self-reports detected)")
    return summary


def load_users(paths: Sequence) -> list[UserDoc]:
    users = []
    for p in paths:
        users.extend(read_users(p))
    seen = set()
    for u in users:
        if u.author in seen:
            raise DataError(f"user {u.author!r} appears more than once")
        seen.add(u.author)
    return users


def build_features(users, parts, lexicons: Sequence[LexiconModel], tfidf_params=None,
                   tfidf_model: TfidfModel | None = None) -> tuple[FeatureMatrix, TfidfModel | None]:
    """Assemble the matrix; fits tf-idf on these users' token streams when no model is given."""
    tokens = {u.author: user_tokens(u) for u in users}
    if "tfidf" in parts and tfidf_model is None:
        params = tfidf_params or {}
        tfidf_model = fit_tfidf([tokens[a] for a in sorted(tokens)],
                                params.get("min_df", DEFAULT_MIN_DF),
                                params.get("max_features", DEFAULT_MAX_FEATURES))
    fm = assemble(users, parts, lexicons, tfidf_model, tokens)
    return fm, tfidf_model


def feature_sets(fm: FeatureMatrix) -> dict[str, list[str]]:
    """Named column groups: one per namespace, plus 'all'."""
    spaces = []
    for n in fm.feature_names:
        ns = n.split(":", 1)[0]
        if ns not in spaces:
            spaces.append(ns)
    out = {ns: [n for n in fm.feature_names if n.startswith(ns + ":")] for ns in spaces}
    out["all"] = list(fm.feature_names)
    return out


def evaluate_matrix(fm: FeatureMatrix, kind: str, grid, seed: int, k_outer=10, k_inner=5,
                    class_weighted=False, threads=1) -> CVReport:
    return nested_cv(fm.X, fm.labels, kind, grid, k_outer, k_inner, seed, fm.sparse_mask,
                     class_weighted, threads)


def evaluation_json(report: CVReport, fm: FeatureMatrix, seed: int) -> dict:
    n_pos = int(np.sum(fm.labels == 1))
    return {"report": report.to_json(),
            "label_baselines": baseline_report(n_pos, len(fm.labels) - n_pos, seed).to_json()}


def models_tsv(reports: dict[str, CVReport], base) -> str:
    lines = ["model\taccuracy\tf1"]
    lines.append(f"MCC\t{base.mcc_accuracy:.3f}\t-")
    lines.append(f"Random (expected)\t{base.random_expected:.3f}\t-")
    lines.append(f"Random (seeded)\t{base.random_empirical:.3f}\t-")
    for kind, r in reports.items():
        mark = "*" if r.p_vs_mcc < 0.001 and r.mean_accuracy > r.mcc_mean_accuracy else ""
        lines.append(f"{kind}\t{r.mean_accuracy:.3f}{mark}\t{r.mean_f1:.3f}")
    return "\n".join(lines) + "\n"


def feature_sets_tsv(acc: dict[str, dict[str, float]], sets: Sequence[str]) -> str:
    kinds = list(acc)
    lines = ["model\t" + "\t".join(sets)]
    for k in kinds:
        lines.append(k + "\t" + "\t".join(f"{acc[k][s]:.3f}" for s in sets))
    return "\n".join(lines) + "\n"


def per_category_tsv(results) -> str:
    lines = ["category\tusers\tbipolar\tmcc\tmodel\tp"]
    for cat, r in results.items():
        if r.report is None:
            lines.append(f"{cat}\t{r.n_users}\t{r.n_pos}\t"
                         f"{'-' if r.mcc_accuracy is None else format(r.mcc_accuracy, '.3f')}\tskipped\t-")
            continue
        mark = "*" if r.significant else ""
        lines.append(f"{cat}\t{r.n_users}\t{r.n_pos}\t{r.report.mcc_mean_accuracy:.3f}\t"
                     f"{r.report.mean_accuracy:.3f}{mark}\t{r.p_value:.3g}")
    return "\n".join(lines) + "\n"


# --- run -------------------------------------------------------------------

def _stage(name):
    def wrap(fn):
        def inner(*a, **kw):
            log.info("stage %s", name)
            try:
                return fn(*a, **kw)
            except (ConfigError, DataError) as exc:
                raise type(exc)(f"stage {name}: {exc}") from exc
        return inner
    return wrap


def run_pipeline(cfg: PipelineConfig, threads: int = 1) -> dict:
    """ingest -> cohort -> features -> evaluate -> analyze, all outputs under ``cfg.output_dir``."""
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    lexicons = [ls.load() for ls in cfg.lexicons]
    k_outer, k_inner = int(cfg.cv["k_outer"]), int(cfg.cv["k_inner"])
    artifacts = {}

    _stage("ingest")(stage_ingest)(cfg.input, out / "grouped.jsonl", out / "ingest_stats.json")
    _stage("cohort")(stage_cohort)(out / "grouped.jsonl", out / "cohort", cfg.cohort)

    @_stage("features")
    def features():
        users = load_users([out / "cohort" / "bipolar.jsonl", out / "cohort" / "control.jsonl"])
        fm, tf = build_features(users, cfg.parts, lexicons, cfg.tfidf)
        fm.save_csv(out / "features.csv")
        if tf is not None:
            tf.save(out / "tfidf.json")
        return users, fm, tf

    users, fm, tf = features()

    @_stage("evaluate")
    def evaluate():
        sets = feature_sets(fm)
        n_pos = int(np.sum(fm.labels == 1))
        base = baseline_report(n_pos, len(fm.labels) - n_pos, derive_seed(cfg.seed, 50))
        reports, acc, blob = {}, {}, {"label_baselines": base.to_json(), "feature_sets": {}}
        for mi, kind in enumerate(cfg.models):
            acc[kind] = {}
            for si, (set_name, cols) in enumerate(sets.items()):
                sub = fm if set_name == "all" else fm.select(cols)
                rep = evaluate_matrix(sub, kind, cfg.models[kind], derive_seed(cfg.seed, 60, mi, si),
                                      k_outer, k_inner, False, threads)
                acc[kind][set_name] = rep.mean_accuracy
                blob["feature_sets"].setdefault(set_name, {})[kind] = rep.to_json()
                if set_name == "all":
                    reports[kind] = rep
        write_json(out / "report_models.json", blob)
        _write_text(out / "models.tsv", models_tsv(reports, base))
        _write_text(out / "feature_sets.tsv", feature_sets_tsv(acc, list(sets)))

        if cfg.per_category:
            pc = cfg.per_category
            kind = pc.get("model", "rf")

            def build(members):
                return build_features(members, cfg.parts, lexicons, tfidf_model=tf)[0]

            mats = category_matrices(users, cfg.cohort.category_map, build)
            res = per_category_eval(mats, kind, pc.get("grid"), derive_seed(cfg.seed, 70),
                                    k_outer, k_inner, threads)
            write_json(out / "report_categories.json",
                       {"model": kind, "categories": {c: r.to_json() for c, r in res.items()}})
            _write_text(out / "per_category.tsv", per_category_tsv(res))

    evaluate()

    @_stage("analyze")
    def analyze():
        an = cfg.analysis
        ns = an.get("namespace", cfg.lexicons[0].namespace)
        prefix = ns + ":"
        if "category_profile" in cfg.parts:
            merit = analysis.feature_merit(fm.with_prefix(prefix))
            write_json(out / "report_merit.json", merit.to_json())
            _write_text(out / "merit.tsv", merit.to_tsv(an.get("merit_top", 20)))
            emo = analysis.emotion_summary(fm, an.get("emotion_categories", analysis.EMOTION_CATEGORIES), ns)
            write_json(out / "report_emotion.json", emo.to_json())
            _write_text(out / "emotion.tsv", emo.to_tsv())
        var = an.get("variance", {})
        if var is not None:
            lex = next(lm.lexicon for lm in lexicons if lm.namespace == ns)
            bip = [u for u in users if u.label == "bipolar"]
            ctl = [u for u in users if u.label == "control"]
            rep = analysis.variance_analysis(
                bip, ctl, lex, var.get("categories", analysis.EMOTION_CATEGORIES),
                var.get("n_sample", 100), var.get("min_user_tokens", 100_000), derive_seed(cfg.seed, 80),
                var.get("min_months", 3), var.get("min_month_tokens", 100))
            write_json(out / "report_variance.json", rep.to_json())
            _write_text(out / "variance.tsv", rep.to_tsv())

    analyze()
    for p in sorted(out.rglob("*")):
        if p.is_file():
            artifacts[str(p.relative_to(out))] = p.stat().st_size
    return artifacts
