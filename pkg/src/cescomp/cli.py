"""Command-line harness: scenario generation, validation, single-query
composition, and the completeness/scalability experiments.

Exit codes: 0 success, 1 usage error, 2 data error. All data outputs are
deterministic for a fixed seed; measured wall-times in the scalability
experiment are the one exception.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .composability import DEFAULT_ELIGIBILITY_MARGIN, DEFAULT_ESD_METERS
from .composers import COMPOSERS, GAConfig, OracleSizeError, Preference
from .experiments import (
    PipelineSettings,
    completeness_csv,
    run_completeness,
    run_query_pipeline,
    run_scalability,
    scalability_csv,
)
from .model import SchemaError, plan_to_dict
from .qos import TsrParams
from .workload import (
    ScenarioConfig,
    export_scenario_csv,
    generate_scenario,
    load_scenario_with_config,
    save_scenario,
)

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); remap to usage error
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cescomp", description=__doc__)
    parser.add_argument("--seed", type=int, default=None,
                        help="base seed (default: CES_SEED env var or 0)")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config file (tsr_params, ga, esd_meters, "
                             "eligibility_margin, min_chunk_seconds, scenario)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="experiment output format")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel workers for experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a scenario file")
    gen.add_argument("--services", type=int, default=100)
    gen.add_argument("--queries", type=int, default=20)
    gen.add_argument("--meta", choices=("short_svc_short_q", "short_svc_long_q",
                                        "long_svc_short_q", "long_svc_long_q", "mixed"),
                     default="mixed")
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--csv-prefix", type=Path, default=None,
                     help="also export <prefix>_services.csv / <prefix>_queries.csv")

    val = sub.add_parser("validate", help="check a scenario file against the schema")
    val.add_argument("path", type=Path)

    comp = sub.add_parser("compose", help="compose one query from a scenario file")
    comp.add_argument("--input", type=Path, required=True)
    comp.add_argument("--query-id", required=True)
    comp.add_argument("--algo", required=True)
    comp.add_argument("--pref", choices=("max_energy", "earliest_time", "shortest_time"),
                      default="max_energy")
    comp.add_argument("--per-chunk", choices=("dp", "greedy"), default="dp",
                      help="per-chunk solver for the knapsack composer")

    exp = sub.add_parser("experiment", help="run a batch experiment")
    exp_sub = exp.add_subparsers(dest="experiment", required=True)
    for name in ("completeness", "scalability"):
        e = exp_sub.add_parser(name)
        e.add_argument("--ratios", default="1,3,5,7,9",
                       help="comma-separated service/query ratios")
        e.add_argument("--algos", default="greedy,knapsack,heuristic,priority,ga")
        e.add_argument("--queries", type=int, default=20,
                       help="queries per scenario")
        e.add_argument("--out", type=Path, default=None,
                       help="output file (default: stdout)")
        if name == "completeness":
            e.add_argument("--sq", default="0.7,0.8,0.9,1.0",
                           help="comma-separated served-query thresholds")
            e.add_argument("--repeats", type=int, default=1)
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    return doc


def _settings_from_config(doc: dict, ga_seed: int) -> PipelineSettings:
    ga_block = dict(doc.get("ga", {}))
    ga_block.setdefault("seed", ga_seed)
    return PipelineSettings(
        esd=float(doc.get("esd_meters", DEFAULT_ESD_METERS)),
        margin_factor=float(doc.get("eligibility_margin", DEFAULT_ELIGIBILITY_MARGIN)),
        min_chunk_seconds=(None if doc.get("min_chunk_seconds") is None
                           else float(doc["min_chunk_seconds"])),
        ga=GAConfig.from_dict(ga_block),
    )


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise UsageError(f"{flag}: empty list")
    return values


def _check_algos(labels: list[str]) -> list[str]:
    for label in labels:
        if label not in COMPOSERS:
            raise UsageError(
                f"unknown algorithm {label!r}; valid: {', '.join(sorted(COMPOSERS))}")
    return labels


def _scenario_config(doc: dict, seed: int, **overrides) -> ScenarioConfig:
    block = dict(doc.get("scenario", {}))
    block.update(overrides)
    block.setdefault("seed", seed)
    return ScenarioConfig.from_dict(block)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _cmd_gen(args, doc: dict, seed: int) -> int:
    cfg = _scenario_config(doc, seed, n_services=args.services,
                           n_queries=args.queries, meta_scenario=args.meta)
    scenario = generate_scenario(cfg)
    save_scenario(scenario, args.out, config=cfg)
    if args.csv_prefix is not None:
        export_scenario_csv(scenario, args.csv_prefix)
    return 0


def _cmd_validate(args) -> int:
    services, queries, _ = load_scenario_with_config(args.path)
    sys.stdout.write(f"ok: {len(services)} services, {len(queries)} queries\n")
    return 0


def _cmd_compose(args, doc: dict, seed: int) -> int:
    _check_algos([args.algo])
    services, queries, _ = load_scenario_with_config(args.input)
    by_qid = {q.qid: q for q in queries}
    if args.query_id not in by_qid:
        raise SchemaError(f"query id {args.query_id!r} not found in {args.input}")
    settings = _settings_from_config(doc, ga_seed=seed)
    settings = PipelineSettings(
        esd=settings.esd, margin_factor=settings.margin_factor,
        min_chunk_seconds=settings.min_chunk_seconds, ga=settings.ga,
        pref=Preference(args.pref))
    from .stindex import build_index

    index = build_index(services)
    q = by_qid[args.query_id]
    if args.algo == "knapsack" and args.per_chunk != "dp":
        from .composers import compose_knapsack
        from .composability import filter_eligible
        from .stindex import select_candidates

        partials = select_candidates(index, q, settings.esd)
        eligible = filter_eligible(partials, index.services, q, settings.margin_factor)
        plan = compose_knapsack(q, eligible,
                                min_chunk_seconds=settings.min_chunk_seconds,
                                margin_factor=settings.margin_factor,
                                per_chunk=args.per_chunk)
    else:
        plan = run_query_pipeline(index, q, [args.algo], settings)[args.algo]
    record = plan_to_dict(plan)
    record.pop("wall_time_us")  # measured time would break byte-determinism
    record["qid"] = q.qid
    sys.stdout.write(json.dumps(record, sort_keys=True, indent=2) + "\n")
    return 0


def _records_json(records) -> str:
    payload = [vars(r) if hasattr(r, "__dict__") else _record_dict(r) for r in records]
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _record_dict(record) -> dict:
    return {name: getattr(record, name) for name in record.__dataclass_fields__}


def _cmd_experiment(args, doc: dict, seed: int) -> int:
    ratios = _parse_floats(args.ratios, "--ratios")
    algos = _check_algos([a.strip() for a in args.algos.split(",") if a.strip()])
    if not algos:
        raise UsageError("--algos: empty list")
    settings = _settings_from_config(doc, ga_seed=seed)
    cfg = _scenario_config(doc, seed, n_queries=args.queries)
    if args.experiment == "completeness":
        sq_values = _parse_floats(args.sq, "--sq")
        records = run_completeness(cfg, ratios, sq_values, algos,
                                   repeats=args.repeats, settings=settings,
                                   workers=args.workers)
        text = completeness_csv(records) if args.format == "csv" else _records_json(records)
    else:
        records = run_scalability(cfg, ratios, algos, settings=settings,
                                  workers=args.workers)
        text = scalability_csv(records) if args.format == "csv" else _records_json(records)
    _emit(text, args.out)
    return 0


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        seed = args.seed
        if seed is None:
            seed = int(os.environ.get("CES_SEED", "0"))
        doc = _load_config(args.config)
        if args.command == "gen":
            return _cmd_gen(args, doc, seed)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "compose":
            return _cmd_compose(args, doc, seed)
        return _cmd_experiment(args, doc, seed)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return USAGE_ERROR
    except (SchemaError, OracleSizeError) as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return DATA_ERROR
    except ValueError as exc:
        sys.stderr.write(f"data error: {exc}\n")
        return DATA_ERROR


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
