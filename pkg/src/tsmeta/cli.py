"""Command-line entry point: ``tsmeta <subcommand> ...``.

Exit codes: 0 success, 1 bad input or usage, 2 internal failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import __version__
from .core import SplitConfig, TimeSeries, read_series_csv, write_series_csv
from .errors import TsMetaError, ValidationError
from .features import FEATURE_NAMES, extract_features
from .learners import LearnerConfig, load_learners, save_learners, train_learners
from .metadata import CorpusConfig, build_corpus, read_meta, split_meta
from .models import ModelId
from .pipeline import (EvalConfig, consistency_table, evaluate_methods, forecast_auto,
                       forecast_ensemble)
from .strategy import HPTMode
from .synthetic import generate_corpus
from .tuning import random_search

log = logging.getLogger("tsmeta")

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2


@dataclasses.dataclass(frozen=True)
class RunConfig:
    period: int = 1
    horizon: int | None = None
    trials: int = 20
    seed: int = 0
    p: float = 0.75
    s: float = 1.0
    n_trees: int = 100
    max_depth: int = 12
    epochs: int = 200
    lr: float = 0.05
    batch: int = 32
    mf_lambda: float = 1.0
    jobs: int = 1

    # execution knobs that must not change results, so are not echoed
    _NOT_ECHOED = ("jobs",)

    def echo(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if k not in self._NOT_ECHOED}

    def learner_config(self) -> LearnerConfig:
        return LearnerConfig(n_trees=self.n_trees, max_depth=self.max_depth, epochs=self.epochs,
                             lr=self.lr, batch=self.batch, s=self.s, mf_lambda=self.mf_lambda,
                             seed=self.seed)


_CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the --config file, then TSMETA_SEED, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("--config: expected a JSON object")
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            raise UsageError(f"--config: unknown keys {sorted(unknown)}")
        values.update(loaded)
    if "seed" not in values and os.environ.get("TSMETA_SEED"):
        try:
            values["seed"] = int(os.environ["TSMETA_SEED"])
        except ValueError as exc:
            raise UsageError(f"TSMETA_SEED must be an integer, got {os.environ['TSMETA_SEED']!r}") from exc
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(**values)
    if cfg.period < 1:
        raise UsageError("--period must be at least 1")
    if cfg.trials < 1:
        raise UsageError("--trials must be at least 1")
    if cfg.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return cfg


def _provenance(cfg: RunConfig, **inputs) -> dict:
    return {"tool_version": __version__, "seed": cfg.seed, "config": {**cfg.echo(), **inputs}}


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _emit(payload: dict, out: str | None) -> None:
    if out:
        _write_json(Path(out), payload)
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list], prov: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    _write_json(path.with_name(path.name + ".meta.json"), prov)


def _read_dir(directory: str, period: int) -> list[TimeSeries]:
    out = []
    for path in sorted(Path(directory).glob("*.csv")):
        try:
            out.append(read_series_csv(path, period=period))
        except (TsMetaError, ValueError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
    if not out:
        raise ValidationError(f"no readable series in {directory}")
    return out


# ------------------------------------------------------------------ commands


def cmd_features(args, cfg: RunConfig) -> int:
    ts = read_series_csv(args.input, period=cfg.period)
    fv = extract_features(ts)
    _emit({**_provenance(cfg, input=str(args.input)), "id": ts.id, **fv.to_json()}, args.out)
    return EXIT_OK


def cmd_tune(args, cfg: RunConfig) -> int:
    ts = read_series_csv(args.input, period=cfg.period)
    split = SplitConfig(cfg.horizon) if cfg.horizon else None
    best, trials = random_search(args.model, ts, trials=cfg.trials, seed=cfg.seed, cfg=split)
    _emit({**_provenance(cfg, input=str(args.input), model=args.model), "id": ts.id,
           "best": {"params": best.assignment.to_dict(), "mape": best.error, "failed": best.failed},
           "trials": [t.to_dict() for t in trials]}, args.out)
    return EXIT_OK


def cmd_build_meta(args, cfg: RunConfig) -> int:
    summary = build_corpus(args.input_dir, args.out,
                           CorpusConfig(cfg.period, cfg.horizon, cfg.trials, cfg.seed, cfg.jobs))
    log.info("wrote %d records (%d quarantined, %d skipped) to %s", len(summary.written),
             len(summary.quarantined), len(summary.skipped), summary.path)
    return EXIT_OK


def cmd_train(args, cfg: RunConfig) -> int:
    records = read_meta(args.meta)
    train, test = split_meta(records, cfg.p, cfg.seed)
    if args.train_size is not None:
        if args.train_size < 2:
            raise UsageError("--train-size must be at least 2")
        # a prefix of the shuffled training split, so smaller sizes nest inside larger ones
        train = train[: args.train_size]
    learners = train_learners(train, cfg.learner_config())
    learners.config = {**_provenance(cfg, meta=str(args.meta), train_size=len(train))["config"],
                       "test_ids": sorted(r.series_id for r in test)}
    save_learners(learners, args.out)
    if learners.forest.single_class:
        log.warning("only one best-model label in the training split; the forest is constant")
    return EXIT_OK


def cmd_forecast(args, cfg: RunConfig) -> int:
    ts = read_series_csv(args.input, period=cfg.period)
    learners = load_learners(args.learners)
    h = cfg.horizon
    if not h:
        raise UsageError("--horizon is required for forecast")
    if args.strategy == "ssl":
        fc = forecast_auto(ts, learners, h)
        params = fc.params.to_dict()
    else:
        fc = forecast_ensemble(ts, learners, h, HPTMode(args.hpt), trials=cfg.trials, seed=cfg.seed)
        params = fc.params
    model = fc.model_id.value if isinstance(fc.model_id, ModelId) else str(fc.model_id)
    _emit({**_provenance(cfg, input=str(args.input), learners=str(args.learners),
                         strategy=args.strategy, hpt=args.hpt),
           "id": ts.id, "horizon": h, "model": model, "params": params,
           "forecasts": list(fc.point_forecasts), "fallback": fc.fallback}, args.out)
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    learners = load_learners(args.learners)
    corpus = _read_dir(args.input_dir, cfg.period)
    if args.exclude_train:
        train_ids = set(learners.train_ids)
        corpus = [ts for ts in corpus if ts.id not in train_ids]
    report = evaluate_methods(corpus, learners,
                              EvalConfig(horizon=cfg.horizon, trials=cfg.trials, seed=cfg.seed,
                                         jobs=cfg.jobs))
    out = Path(args.out)
    prov = _provenance(cfg, input_dir=str(args.input_dir), learners=str(args.learners),
                       exclude_train=bool(args.exclude_train))
    payload = report.to_json()
    learner_echo = {k: v for k, v in learners.config.items() if k != "test_ids"}
    payload["config"] = {**prov["config"], "learners": learner_echo}
    _write_json(out / "report.json", payload)
    cols = ["method", "avg_mape", "avg_mape_change_pct", "median_mape", "median_mape_change_pct",
            "n_fails", "runtime_units"]
    _write_csv(out / "report.csv", cols, [[getattr(r, c) for c in cols] for r in report.rows], prov)
    _write_csv(out / "mape_distribution.csv", ["series_id", "method", "mape"],
               [[o.series_id, m, o.mapes[m]] for o in report.outcomes for m in o.mapes], prov)
    by_label = defaultdict(list)
    by_id = {ts.id: ts for ts in corpus}
    for o in report.outcomes:
        by_label[o.ssl_model].append(extract_features(by_id[o.series_id]))
    rows = []
    for label in sorted(by_label):
        fvs = by_label[label]
        for j, name in enumerate(FEATURE_NAMES):
            vals = [f.values[j] for f in fvs if f.mask[j]]
            rows.append([label, name, float(np.mean(vals)) if vals else "", len(vals)])
    _write_csv(out / "feature_means_by_label.csv", ["label", "feature", "mean", "n"], rows, prov)
    return EXIT_OK


def cmd_consistency(args, cfg: RunConfig) -> int:
    learners = load_learners(args.learners)
    corpus = _read_dir(args.input_dir, cfg.period)
    try:
        cps = [int(c) for c in args.checkpoints.split(",")]
    except ValueError as exc:
        raise UsageError(f"--checkpoints: expected comma-separated integers, got {args.checkpoints!r}") from exc
    table, used = consistency_table(corpus, cps, learners, jobs=cfg.jobs)
    cells = [[None if np.isnan(v) else float(v) for v in row] for row in table]
    _emit({**_provenance(cfg, input_dir=str(args.input_dir), learners=str(args.learners)),
           "checkpoints": cps, "n_series": used, "change_rate_pct": cells}, args.out)
    return EXIT_OK


def cmd_synth(args, cfg: RunConfig) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for ts in generate_corpus(args.n, seed=cfg.seed, period=cfg.period):
        write_series_csv(ts, out / f"{ts.id}.csv")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser, *, search=False, learn=False) -> None:
    p.add_argument("--config", help="JSON file of default settings; flags override it")
    p.add_argument("--seed", type=int, help="master seed (falls back to TSMETA_SEED, then 0)")
    p.add_argument("--period", type=int, help="seasonal period of the input series")
    p.add_argument("--horizon", type=int, help="forecast / holdout length")
    p.add_argument("--jobs", type=int, help="worker processes; results do not depend on it")
    if search:
        p.add_argument("--trials", type=int, help="random-search trials per model (default 20)")
    if learn:
        p.add_argument("--p", type=float, help="fraction of meta records used for training")
        p.add_argument("--s", type=float, help="regression-loss divisor for the multi-task nets")
        p.add_argument("--n-trees", dest="n_trees", type=int)
        p.add_argument("--max-depth", dest="max_depth", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--batch", type=int)
        p.add_argument("--mf-lambda", dest="mf_lambda", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsmeta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("features", help="extract the 40-entry feature vector of one series")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("tune", help="random-search one model's hyper-parameters")
    p.add_argument("--model", required=True, choices=[m.value for m in ModelId.ordered()])
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    _common(p, search=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("build-meta", help="build the meta-dataset from a directory of CSVs")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--out", required=True)
    _common(p, search=True)
    p.set_defaults(func=cmd_build_meta)

    p = sub.add_parser("train", help="train the forest, nets and MF ranker on a meta-dataset")
    p.add_argument("--meta", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--train-size", dest="train_size", type=int,
                   help="use only this many training records (for size sweeps)")
    _common(p, learn=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("forecast", help="forecast one series with trained learners")
    p.add_argument("--input", required=True)
    p.add_argument("--learners", required=True)
    p.add_argument("--strategy", choices=["ssl", "ensemble"], default="ssl")
    p.add_argument("--hpt", choices=[m.value for m in HPTMode], default=HPTMode.SSL_HPT.value,
                   help="tuning mode for the ensemble strategy")
    p.add_argument("--out")
    _common(p, search=True)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="compare the nine strategies on a test corpus")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--learners", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--exclude-train", action="store_true",
                   help="skip series the learners were trained on instead of failing")
    _common(p, search=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("consistency", help="model-label change rates between prefix lengths")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--learners", required=True)
    p.add_argument("--checkpoints", required=True, help="comma-separated prefix lengths")
    p.add_argument("--out")
    _common(p)
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus of CSV series")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=30)
    _common(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a subcommand is required")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = _resolve_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"tsmeta: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (TsMetaError, ValueError, OSError) as exc:
        print(f"tsmeta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"tsmeta: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
