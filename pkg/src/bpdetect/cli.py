"""Command-line entry point: ``bpdetect <subcommand> ...``.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 internal error.
Set BPDETECT_LOG (e.g. DEBUG, INFO) to change log verbosity.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from . import analysis, ml, synth
from .errors import ConfigError, DataError
from .lexicon import load_demo_lexicon, load_dic
from .ml.base import Hyperparams
from .pipeline import (LexiconSpec, build_features, evaluation_json, evaluate_matrix, load_config,
                       load_users, parse_grid, run_pipeline, stage_cohort, stage_ingest, write_json)
from .cohort import CohortConfig
from .textproc import TfidfModel
from .userfeat import FeatureMatrix

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
log = logging.getLogger("bpdetect")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _need_file(path, what="file"):
    if path is None or not Path(path).is_file():
        raise ConfigError(f"{what} not found: {path}")
    return path


def _lexicon_specs(values, summaries, punctuation=False) -> list[LexiconSpec]:
    """``--lexicon NS=PATH`` (or just PATH for the liwc namespace); PATH may be 'demo'."""
    summ = {}
    for item in summaries or []:
        ns, _, path = item.rpartition("=")
        summ[ns or "liwc"] = None if path == "none" else path
    specs = []
    for item in values or ["liwc=demo"]:
        ns, _, path = item.rpartition("=")
        ns = ns or "liwc"
        if path != "demo":
            _need_file(path, "lexicon")
        s = summ.get(ns, "demo" if path == "demo" else None)
        if s not in (None, "demo"):
            _need_file(s, "summary definitions")
        specs.append(LexiconSpec(ns, path, s, punctuation))
    return specs


def _out_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# --- subcommands -------------------------------------------------------------

def cmd_ingest(a):
    _need_file(a.input, "input corpus")
    stats = stage_ingest(a.input, a.out, a.stats, a.subreddits)
    if not a.stats:
        print(json.dumps(stats, indent=1))


def cmd_cohort(a):
    _need_file(a.grouped, "grouped corpus")
    cfg = CohortConfig()
    if a.config:
        with open(_need_file(a.config, "cohort config"), encoding="utf-8") as fh:
            try:
                cfg = CohortConfig.from_json(json.load(fh))
            except ValueError as exc:
                raise ConfigError(f"{a.config}: {exc}") from exc
    stage_cohort(a.grouped, a.out_dir, cfg)


def cmd_profile(a):
    for p in a.users:
        _need_file(p, "users file")
    lexicons = [s.load() for s in _lexicon_specs(a.lexicon, a.summaries, a.punctuation)]
    fm, _ = build_features(load_users(a.users), ["category_profile"], lexicons)
    fm.save_csv(a.out)


def cmd_features(a):
    for p in a.users:
        _need_file(p, "users file")
    parts = [p.strip() for p in a.parts.split(",") if p.strip()]
    lexicons = [s.load() for s in _lexicon_specs(a.lexicon, a.summaries, a.punctuation)] \
        if "category_profile" in parts else []
    tf = TfidfModel.load(_need_file(a.tfidf_model, "tf-idf model")) if a.tfidf_model else None
    fm, tf = build_features(load_users(a.users), parts, lexicons,
                            {"min_df": a.min_df, "max_features": a.max_features}, tf)
    fm.save_csv(a.out)
    if a.save_tfidf and tf is not None:
        tf.save(a.save_tfidf)


def _hyperparams(a) -> Hyperparams:
    if a.hyperparams:
        obj = parse_grid(a.hyperparams)
        obj = dict(obj, kind=a.model)
        return Hyperparams.from_json(obj)
    return Hyperparams(a.model, C=a.C, n_trees=a.n_trees, max_depth=a.max_depth,
                       class_weighted=a.class_weighted)


def cmd_train(a):
    fm = FeatureMatrix.load_csv(_need_file(a.features, "feature file"))
    try:
        hp = _hyperparams(a)
    except (TypeError, DataError) as exc:
        raise ConfigError(f"bad hyperparameters: {exc}") from None
    model = ml.train(fm.X, fm.labels, hp, seed=a.seed, sparse_mask=fm.sparse_mask, threads=a.threads)
    obj = model.to_json()
    obj["feature_names"] = fm.feature_names
    with open(a.out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh)


def cmd_predict(a):
    with open(_need_file(a.model_file, "model file"), encoding="utf-8") as fh:
        obj = json.load(fh)
    fm = FeatureMatrix.load_csv(_need_file(a.features, "feature file"))
    names = obj.get("feature_names")
    if names is not None and names != fm.feature_names:
        missing = [n for n in names if n not in fm.feature_names]
        if missing:
            raise DataError(f"feature file lacks {len(missing)} model columns, e.g. {missing[:3]}")
        fm = fm.select(names)
    pred = ml.model_from_json(obj).predict(fm.X)
    with open(a.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "label", "prediction"])
        for uid, y, p in zip(fm.user_ids, fm.labels, pred):
            w.writerow([uid, int(y), int(p)])


def cmd_evaluate(a):
    fm = FeatureMatrix.load_csv(_need_file(a.features, "feature file"))
    grid = parse_grid(a.grid)
    rep = evaluate_matrix(fm, a.model, grid, a.seed, a.k_outer, a.k_inner, a.class_weighted, a.threads)
    write_json(a.out, evaluation_json(rep, fm, a.seed))


def _write_report(path, rep):
    if str(path).endswith(".tsv"):
        _out_text(path, rep.to_tsv())
    else:
        write_json(path, rep.to_json())


def cmd_analyze(a):
    if a.what in ("merit", "emotion"):
        fm = FeatureMatrix.load_csv(_need_file(a.features, "feature file"))
        if a.what == "merit":
            if a.prefix:
                fm = fm.with_prefix(a.prefix)
            rep = analysis.feature_merit(fm)
            if str(a.out).endswith(".tsv"):
                _out_text(a.out, rep.to_tsv(a.top))
                return
        else:
            rep = analysis.emotion_summary(fm, a.categories or analysis.EMOTION_CATEGORIES, a.namespace)
    else:
        for p in a.users:
            _need_file(p, "users file")
        lex = load_demo_lexicon() if a.lexicon == "demo" else load_dic(_need_file(a.lexicon, "lexicon"))
        users = load_users(a.users)
        rep = analysis.variance_analysis(
            [u for u in users if u.label == "bipolar"], [u for u in users if u.label == "control"], lex,
            a.categories or analysis.EMOTION_CATEGORIES, a.n_sample, a.min_user_tokens, a.seed,
            a.min_months, a.min_month_tokens)
    _write_report(a.out, rep)


def cmd_synth(a):
    if a.spec in synth.BUNDLED and not Path(a.spec).is_file():
        spec = synth.bundled_spec(a.spec)
    else:
        spec = synth.load_spec(_need_file(a.spec, "synth spec"))
    if a.seed is not None:
        spec.seed = a.seed
    synth.write_corpus(spec, a.out, a.truth)


def cmd_run(a):
    cfg = load_config(_need_file(a.config, "pipeline config"))
    if a.out_dir:
        cfg.output_dir = Path(a.out_dir)
    artifacts = run_pipeline(cfg, threads=a.threads)
    for name in artifacts:
        log.info("wrote %s", name)


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bpdetect", description="Self-reported bipolar detection pipeline on Reddit-style dumps.")
    p.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("ingest", help="parse a JSONL(.gz) dump and group records by author")
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True, help="grouped JSONL")
    s.add_argument("--stats", help="write corpus statistics JSON here")
    s.add_argument("--subreddits", nargs="*")
    s.set_defaults(fn=cmd_ingest)

    s = sub.add_parser("cohort", help="build bipolar and control cohorts")
    s.add_argument("--grouped", required=True)
    s.add_argument("--config", help="cohort config JSON")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(fn=cmd_cohort)

    def lexicon_args(s):
        s.add_argument("--lexicon", action="append", help="NS=PATH or PATH (.dic); 'demo' for the bundled one")
        s.add_argument("--summaries", action="append", help="NS=PATH summary definitions JSON, or NS=none")
        s.add_argument("--punctuation", action="store_true", help="add punctuation-rate columns")

    s = sub.add_parser("profile", help="category percentages per user")
    s.add_argument("--users", nargs="+", required=True)
    lexicon_args(s)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_profile)

    s = sub.add_parser("features", help="assemble the per-user feature matrix")
    s.add_argument("--users", nargs="+", required=True)
    s.add_argument("--parts", default="category_profile,tfidf,behavioral")
    lexicon_args(s)
    s.add_argument("--min-df", type=int, default=5)
    s.add_argument("--max-features", type=int, default=50000)
    s.add_argument("--tfidf-model", help="use a fitted tf-idf model instead of fitting one")
    s.add_argument("--save-tfidf", help="write the fitted tf-idf model here")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_features)

    s = sub.add_parser("train", help="fit one model on a feature CSV")
    s.add_argument("--features", required=True)
    s.add_argument("--model", choices=ml.MODEL_KINDS, required=True)
    s.add_argument("--hyperparams", help="JSON object (inline or file)")
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--n-trees", type=int, default=100)
    s.add_argument("--max-depth", type=int)
    s.add_argument("--class-weighted", action="store_true")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_train)

    s = sub.add_parser("predict", help="apply a trained model to a feature CSV")
    s.add_argument("--model-file", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_predict)

    s = sub.add_parser("evaluate", help="nested cross-validation with baselines")
    s.add_argument("--features", required=True)
    s.add_argument("--model", choices=ml.MODEL_KINDS, required=True)
    s.add_argument("--grid", help="JSON grid (inline or file); default grid if omitted")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--k-outer", type=int, default=10)
    s.add_argument("--k-inner", type=int, default=5)
    s.add_argument("--class-weighted", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_evaluate)

    s = sub.add_parser("analyze", help="merit, emotion or variance analysis")
    s.add_argument("what", choices=("merit", "emotion", "variance"))
    s.add_argument("--features")
    s.add_argument("--prefix", default="liwc:", help="merit: only columns with this prefix ('' for all)")
    s.add_argument("--top", type=int, default=None)
    s.add_argument("--namespace", default="liwc")
    s.add_argument("--categories", nargs="*")
    s.add_argument("--users", nargs="*", default=[])
    s.add_argument("--lexicon", default="demo")
    s.add_argument("--n-sample", type=int, default=100)
    s.add_argument("--min-user-tokens", type=int, default=100_000)
    s.add_argument("--min-months", type=int, default=3)
    s.add_argument("--min-month-tokens", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help=".json or .tsv")
    s.set_defaults(fn=cmd_analyze)

    s = sub.add_parser("synth", help="generate a synthetic corpus")
    s.add_argument("--spec", required=True, help=f"spec JSON or a bundled name {synth.BUNDLED}")
    s.add_argument("--seed", type=int, help="override the seed stored in the corpus spec")
    s.add_argument("--out", required=True)
    s.add_argument("--truth")
    s.set_defaults(fn=cmd_synth)

    s = sub.add_parser("run", help="full pipeline from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", help="override output_dir from the config")
    s.set_defaults(fn=cmd_run)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("BPDETECT_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.command == "analyze":
            if args.what in ("merit", "emotion") and not args.features:
                raise ConfigError(f"analyze {args.what} needs --features")
            if args.what == "variance" and not args.users:
                raise ConfigError("analyze variance needs --users")
        args.fn(args)
    except ConfigError as exc:
        print(f"bpdetect: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"bpdetect: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"bpdetect: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"bpdetect: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
