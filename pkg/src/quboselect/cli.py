"""Command-line pipeline: synth -> ingest -> rank -> evaluate -> report.

One JSON config file drives every stage; flags override single fields.
All randomness flows from the config's master ``seed`` through the
documented stream derivations, so a full pipeline run is byte
reproducible.

Exit codes: 0 success, 2 configuration or validation problem,
3 file I/O problem, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import Dataset, RawTable, TargetSpec, build_dataset, drop_missing_columns, load_table, write_table
from .evaluation import EvalProtocol, GbtConfig, run_protocol, write_report_csv, write_report_json
from .qubo import QuboBuildMode
from .ranking import FeatureRanking, SweepConfig, mlr_rank, qa_rank, rank_delta, write_rank_delta_csv
from .rng import STREAM_EVAL, STREAM_RANK, derive_seed
from .solver import AnnealConfig, SolverError
from .synth import SynthSpec, generate, redundant_preset, survey_preset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4

PRESETS = {"survey": survey_preset, "redundant": redundant_preset}


class ConfigError(ValueError):
    """The run configuration is missing, malformed, or inconsistent."""


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def _require(config: dict, key: str):
    if key not in config:
        raise ConfigError(f"config is missing required key {key!r}")
    return config[key]


def _master_seed(config: dict, args) -> int:
    if args.seed is not None:
        return args.seed
    seed = _require(config, "seed")
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return seed


def _out_dir(config: dict, args) -> Path:
    out = args.out if args.out is not None else config.get("out", "out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _section(config: dict, key: str) -> dict:
    value = config.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"config section {key!r} must be an object")
    return value


def _build(cls, section: dict, name: str, **overrides):
    try:
        return cls(**{**section, **overrides})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {name} section: {exc}") from None


def _synth_spec(config: dict, seed: int) -> SynthSpec:
    section = dict(_section(config, "synth"))
    preset = section.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown synth preset {preset!r}; choose from {sorted(PRESETS)}")
        if section:
            raise ConfigError("a synth preset cannot be combined with explicit fields")
        return PRESETS[preset](seed=seed)
    for key in ("signal_weights", "target_names"):
        if key in section and isinstance(section[key], list):
            section[key] = tuple(section[key])
    return _build(SynthSpec, section, "synth", seed=seed)


def _target_specs(config: dict) -> list[TargetSpec]:
    declared = _require(config, "targets")
    if not isinstance(declared, list) or not declared:
        raise ConfigError("targets must be a non-empty list")
    specs = []
    for item in declared:
        if not isinstance(item, dict) or "name" not in item:
            raise ConfigError("each target needs at least a name")
        specs.append(
            _build(
                TargetSpec,
                {
                    "name": item["name"],
                    "items": tuple(item.get("items", ())),
                    "column": item.get("column"),
                },
                "target",
            )
        )
    return specs


def _target_names(config: dict) -> list[str]:
    return [spec.name for spec in _target_specs(config)]


def _load_dataset(config: dict, out_dir: Path) -> Dataset:
    processed = Path(config.get("processed", out_dir / "processed.csv"))
    table = load_table(
        processed,
        delimiter=config.get("delimiter", ","),
        missing_values=tuple(config.get("missing_values", ("",))),
    )
    names = _target_names(config)
    specs = [TargetSpec(name=name, column=name) for name in names]
    return build_dataset(table, specs)


def _anneal_config(config: dict, seed: int) -> AnnealConfig:
    return _build(AnnealConfig, _section(config, "anneal"), "anneal", seed=seed)


def _sweep_config(config: dict, anneal: AnnealConfig, jobs: int) -> SweepConfig:
    section = dict(_section(config, "sweep"))
    if "mode" in section:
        try:
            section["mode"] = QuboBuildMode(section["mode"])
        except ValueError:
            raise ConfigError(f"unknown qubo mode {section['mode']!r}") from None
    return _build(SweepConfig, section, "sweep", anneal=anneal, jobs=jobs)


def _protocol(config: dict) -> EvalProtocol:
    section = dict(_section(config, "protocol"))
    if "conditions" in section:
        section["conditions"] = tuple(section["conditions"])
    return _build(EvalProtocol, section, "protocol")


def _gbt_config(config: dict) -> GbtConfig:
    return _build(GbtConfig, _section(config, "gbt"), "gbt")


def _ranking_path(out_dir: Path, method: str, target: str) -> Path:
    return out_dir / f"ranking_{method}_{target}.csv"


def cmd_synth(args) -> int:
    config = _load_config(args.config)
    seed = _master_seed(config, args)
    out_dir = _out_dir(config, args)
    spec = _synth_spec(config, seed)
    table, truth = generate(spec)
    table_path = out_dir / "synthetic.csv"
    write_table(table, table_path)
    truth.save(out_dir / "ground_truth.json")
    print(f"wrote {table.n_rows} x {table.n_cols} table to {table_path}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    out_dir = _out_dir(config, args)
    raw_path = config.get("input", str(out_dir / "synthetic.csv"))
    table = load_table(
        raw_path,
        delimiter=config.get("delimiter", ","),
        missing_values=tuple(config.get("missing_values", ("",))),
    )
    complete, dropped = drop_missing_columns(table)
    ds = build_dataset(complete, _target_specs(config), dropped_columns=dropped)

    columns = ds.feature_names + tuple(ds.targets)
    cells = np.hstack([ds.X] + [ds.targets[name][:, None] for name in ds.targets])
    write_table(RawTable(column_names=columns, cells=cells), out_dir / "processed.csv")
    with open(out_dir / "provenance.json", "w", encoding="utf-8") as handle:
        json.dump(ds.meta, handle, sort_keys=True, indent=2)
        handle.write("\n")
    print(
        f"ingested {table.n_cols} columns -> {ds.n_features} features "
        f"+ {len(ds.targets)} targets ({len(dropped)} dropped)"
    )
    return EXIT_OK


def cmd_rank(args) -> int:
    config = _load_config(args.config)
    seed = _master_seed(config, args)
    out_dir = _out_dir(config, args)
    method = args.method if args.method is not None else config.get("method")
    if method not in ("qa", "mlr"):
        raise ConfigError("method must be 'qa' or 'mlr' (flag --method or config key)")
    ds = _load_dataset(config, out_dir)
    for index, target in enumerate(ds.targets):
        if method == "qa":
            anneal = _anneal_config(config, derive_seed(seed, STREAM_RANK, index))
            ranking = qa_rank(ds, target, _sweep_config(config, anneal, args.jobs))
        else:
            ranking = mlr_rank(ds, target)
        path = _ranking_path(out_dir, method, target)
        ranking.write_csv(path)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _load_config(args.config)
    seed = _master_seed(config, args)
    out_dir = _out_dir(config, args)
    ds = _load_dataset(config, out_dir)
    proto = _protocol(config)
    gbt = _gbt_config(config)
    reports = []
    for index, target in enumerate(ds.targets):
        rankings = {}
        for method in ("qa", "mlr"):
            path = _ranking_path(out_dir, method, target)
            if not path.exists():
                raise FileNotFoundError(f"missing ranking file {path}; run 'rank' first")
            rankings[method] = FeatureRanking.read_csv(path, method=method, target=target)
        reports.append(
            run_protocol(
                ds,
                rankings,
                target,
                proto,
                gbt,
                master_seed=derive_seed(seed, STREAM_EVAL, index),
                jobs=args.jobs,
            )
        )
    write_report_csv(reports, out_dir / "report.csv")
    write_report_json(reports, out_dir / "report.json")
    print(f"wrote {out_dir / 'report.csv'} and {out_dir / 'report.json'}")
    return EXIT_OK


def cmd_report(args) -> int:
    config = _load_config(args.config)
    out_dir = _out_dir(config, args)
    section = _section(config, "report")
    before = section.get("before")
    after = section.get("after")
    if not before or not after:
        raise ConfigError("report section needs 'before' and 'after' target names")
    method = section.get("method", "qa")
    rankings = {}
    for label, target in (("before", before), ("after", after)):
        path = _ranking_path(out_dir, method, target)
        if not path.exists():
            raise FileNotFoundError(f"missing ranking file {path}; run 'rank' first")
        rankings[label] = FeatureRanking.read_csv(path, method=method, target=target)
    rows = rank_delta(rankings["before"], rankings["after"])
    write_rank_delta_csv(rows, out_dir / "rank_delta.csv")
    payload = [row._asdict() for row in rows]
    with open(out_dir / "rank_delta.json", "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")
    improved = sum(row.improved for row in rows)
    print(f"wrote {out_dir / 'rank_delta.csv'} ({improved} features improved)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quboselect",
        description="Annealed feature selection for survey data, with baselines.",
        epilog="exit codes: 0 ok, 2 config error, 3 I/O error, 4 solver failure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p_synth = sub.add_parser("synth", help="generate a synthetic survey table")
    common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_ingest = sub.add_parser("ingest", help="preprocess a raw table into a dataset")
    common(p_ingest)
    p_ingest.set_defaults(func=cmd_ingest)

    p_rank = sub.add_parser("rank", help="rank features for every declared target")
    common(p_rank)
    p_rank.add_argument("--method", choices=("qa", "mlr"), default=None)
    p_rank.set_defaults(func=cmd_rank)

    p_eval = sub.add_parser("evaluate", help="validate both rankings with boosted trees")
    common(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)

    p_report = sub.add_parser("report", help="before/after rank movement table")
    common(p_report)
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
