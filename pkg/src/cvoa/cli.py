"""Command-line front end: configured runs and length sweeps.

`run` executes one or more seeded pandemics from a JSON config and writes
per-run iteration traces (CSV), the best genotype found, and a summary with
per-run records and aggregate statistics. `sweep` repeats the benchmark
across several bit lengths and tabulates mean iterations-to-optimum and
the evaluated fraction of each search space.

Exit status: 0 on success, 1 when a fitness evaluation fails (the partial
iteration trace is still flushed), 2 for config or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from random import Random

from .binary import BinaryCodec
from .codec import Codec, EvaluationError
from .multistrain import MultiStrainConfig, PandemicResult, PzStrategy, run_pandemic
from .nn import ExternalEvaluator, NetCodec, generate_net_patient_zero, parse_net_text
from .params import EpidemicParameters, Objective, ParameterError, validate_parameters

CSV_HEADER = ("Iteration", "Deaths", "Recovered", "Infected", "Fitness")

# hidden-target derivation for "random" surrogate targets (Knuth multiplier)
_TARGET_SEED_MIX = 2654435761


class ConfigError(ValueError):
    """The run configuration is unreadable or violates its contract."""


@dataclass
class RunConfig:
    codec_spec: dict
    parameters: EpidemicParameters
    pz_strategy: PzStrategy
    repeat: int
    out: Path


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _parse_parameters(raw: dict) -> EpidemicParameters:
    _require(isinstance(raw, dict), "parameters must be an object")
    known = {f.name for f in fields(EpidemicParameters)}
    unknown = sorted(set(raw) - known)
    _require(not unknown, f"unknown parameter field(s): {', '.join(unknown)}")
    values = dict(raw)
    if "objective" in values:
        try:
            values["objective"] = Objective(values["objective"])
        except ValueError:
            raise ConfigError(f"objective must be minimize or maximize, got {values['objective']!r}")
    for name in ("ordinary_spread_range", "superspreader_spread_range"):
        if name in values:
            pair = values[name]
            _require(
                isinstance(pair, (list, tuple)) and len(pair) == 2,
                f"{name} must be a [low, high] pair",
            )
            values[name] = (int(pair[0]), int(pair[1]))
    params = replace(EpidemicParameters(), **values)
    try:
        validate_parameters(params)
    except ParameterError as exc:
        raise ConfigError(str(exc))
    return params


def _parse_codec_spec(raw: dict) -> dict:
    _require(isinstance(raw, dict), "codec must be an object")
    kind = raw.get("kind")
    _require(kind in ("binary", "nn"), f"codec.kind must be binary or nn, got {kind!r}")
    if kind == "binary":
        allowed = {"kind", "bits", "target"}
    else:
        allowed = {"kind", "surrogate_target", "evaluator"}
        has_target = "surrogate_target" in raw
        has_evaluator = "evaluator" in raw
        _require(
            has_target != has_evaluator,
            "nn codec needs exactly one of surrogate_target / evaluator",
        )
    unknown = sorted(set(raw) - allowed)
    _require(not unknown, f"unknown codec field(s) for kind {kind}: {', '.join(unknown)}")
    return dict(raw)


def load_config(path: Path) -> RunConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    _require(isinstance(raw, dict), "top-level config must be an object")
    allowed = {"codec", "parameters", "pz_strategy", "repeat", "out"}
    unknown = sorted(set(raw) - allowed)
    _require(not unknown, f"unknown config field(s): {', '.join(unknown)}")
    _require("codec" in raw, "config needs a codec section")
    codec_spec = _parse_codec_spec(raw["codec"])
    parameters = _parse_parameters(raw.get("parameters", {}))
    strategy_name = raw.get("pz_strategy", PzStrategy.MAX_HAMMING_SPREAD.value)
    try:
        pz_strategy = PzStrategy(strategy_name)
    except ValueError:
        raise ConfigError(f"pz_strategy must be random or max_hamming_spread, got {strategy_name!r}")
    repeat = raw.get("repeat", 1)
    _require(isinstance(repeat, int) and repeat >= 1, f"repeat must be an integer >= 1, got {repeat!r}")
    out = Path(raw.get("out", "out"))
    return RunConfig(
        codec_spec=codec_spec,
        parameters=parameters,
        pz_strategy=pz_strategy,
        repeat=repeat,
        out=out,
    )


def build_codec(spec: dict, seed: int) -> Codec:
    """Instantiate the configured codec; `seed` pins a "random" surrogate target."""
    if spec["kind"] == "binary":
        try:
            return BinaryCodec(bits=spec.get("bits", 10), target=spec.get("target", 15))
        except ValueError as exc:
            raise ConfigError(str(exc))
    if "evaluator" in spec:
        command = spec["evaluator"]
        _require(
            isinstance(command, (str, list)) and command,
            "codec.evaluator must be a non-empty command",
        )
        return NetCodec(evaluator=ExternalEvaluator(command))
    target_text = spec["surrogate_target"]
    if target_text == "random":
        target = generate_net_patient_zero(Random((seed * _TARGET_SEED_MIX) % 2**64))
    else:
        try:
            target = parse_net_text(target_text)
        except ValueError as exc:
            raise ConfigError(str(exc))
    return NetCodec(target=target)


def write_iterations_csv(path: Path, result: PandemicResult) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for record in result.history:
            writer.writerow(
                (
                    record.iteration,
                    record.deaths_total,
                    record.recovered_total,
                    record.infected_count,
                    record.best_fitness,
                )
            )


def iterations_to_optimum(result: PandemicResult, codec: Codec, objective: Objective) -> int | None:
    """Merged-trace iteration at which the codec's known optimum was reached.

    0 when a patient zero was already optimal; None when the optimum is
    unknown (external evaluator) or was never reached.
    """
    optimum = getattr(codec, "optimum_fitness", lambda: None)()
    if optimum is None:
        return None

    def reached(fitness: float) -> bool:
        return not objective.better(optimum, fitness)

    if result.initial_best is not None and reached(result.initial_best):
        return 0
    for record in result.history:
        if reached(record.best_fitness):
            return record.iteration
    return None


def run_summary(
    seed: int, result: PandemicResult, codec: Codec, objective: Objective
) -> dict:
    return {
        "seed": seed,
        "iterations_to_optimum": iterations_to_optimum(result, codec, objective),
        "best_fitness": result.best.fitness if result.best is not None else None,
        "evaluations_total": result.evaluations_total,
        "termination": result.termination.value if result.termination is not None else None,
    }


def aggregate_summaries(runs: list[dict], space_size: int) -> dict:
    reached = [r["iterations_to_optimum"] for r in runs if r["iterations_to_optimum"] is not None]
    fractions = [r["evaluations_total"] / space_size for r in runs]
    return {
        "mean_iterations_to_optimum": statistics.mean(reached) if reached else None,
        "median_iterations_to_optimum": statistics.median(reached) if reached else None,
        "success_rate": len(reached) / len(runs) if runs else 0.0,
        "mean_evaluated_fraction": statistics.mean(fractions) if fractions else None,
    }


def _execute(params: EpidemicParameters, codec: Codec, pz_strategy: PzStrategy,
             stop_fitness: float | None = None) -> PandemicResult:
    config = MultiStrainConfig.uniform(params, pz_strategy=pz_strategy)
    return run_pandemic(config, codec, stop_fitness=stop_fitness)


def cmd_run(config: RunConfig) -> int:
    params = config.parameters
    codec = build_codec(config.codec_spec, params.seed)
    config.out.mkdir(parents=True, exist_ok=True)
    runs: list[dict] = []
    for r in range(config.repeat):
        seed = params.seed + r
        run_dir = config.out / f"run_{seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        try:
            result = _execute(params.with_seed(seed), codec, config.pz_strategy)
        except EvaluationError as exc:
            if isinstance(exc.partial, PandemicResult):
                write_iterations_csv(run_dir / "iterations.csv", exc.partial)
            print(f"error: evaluation failed in run seed={seed}: {exc}", file=sys.stderr)
            return 1
        write_iterations_csv(run_dir / "iterations.csv", result)
        if result.best is not None:
            (run_dir / "best.txt").write_text(codec.text(result.best.genotype) + "\n", encoding="utf-8")
        summary = run_summary(seed, result, codec, params.objective)
        runs.append(summary)
        print(
            f"run seed={seed}: best_fitness={summary['best_fitness']} "
            f"iterations_to_optimum={summary['iterations_to_optimum']} "
            f"termination={summary['termination']}"
        )
    document = {
        "codec": config.codec_spec["kind"],
        "search_space_size": codec.search_space_size(),
        "runs": runs,
        "aggregates": aggregate_summaries(runs, codec.search_space_size()),
    }
    summary_path = config.out / "summary.json"
    summary_path.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {summary_path}")
    return 0


def cmd_sweep(config: RunConfig, lengths: list[int]) -> int:
    _require(config.codec_spec["kind"] == "binary", "sweep requires a binary codec config")
    params = config.parameters
    target = config.codec_spec.get("target", 15)
    rows: list[tuple[int, float | None, float]] = []
    for length in lengths:
        try:
            codec = BinaryCodec(bits=length, target=target)
        except ValueError as exc:
            raise ConfigError(f"length {length}: {exc}")
        optimum = codec.optimum_fitness()
        runs: list[dict] = []
        for r in range(config.repeat):
            seed = params.seed + r
            result = _execute(
                params.with_seed(seed), codec, config.pz_strategy, stop_fitness=optimum
            )
            runs.append(run_summary(seed, result, codec, params.objective))
        aggregates = aggregate_summaries(runs, codec.search_space_size())
        rows.append(
            (length, aggregates["mean_iterations_to_optimum"], aggregates["mean_evaluated_fraction"])
        )
        print(
            f"length {length}: mean_iterations_to_optimum={rows[-1][1]} "
            f"mean_evaluated_fraction={rows[-1][2]}"
        )
    config.out.mkdir(parents=True, exist_ok=True)
    sweep_path = config.out / "sweep.csv"
    with sweep_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("Length", "MeanIterationsToOptimum", "MeanEvaluatedFraction"))
        writer.writerows(rows)
    print(f"wrote {sweep_path}")
    return 0


def _parse_lengths(text: str) -> list[int]:
    try:
        lengths = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"lengths must be comma-separated integers, got {text!r}")
    _require(bool(lengths), "lengths list is empty")
    return lengths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvoa", description="Epidemic-propagation optimizer runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute seeded pandemics from a config")
    run.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    run.add_argument("--seed", type=int, default=None, help="override the base seed")
    run.add_argument("--out", type=Path, default=None, help="override the output directory")

    sweep = sub.add_parser("sweep", help="benchmark several bit lengths")
    sweep.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    sweep.add_argument("--lengths", required=True, help="comma-separated bit lengths")
    sweep.add_argument("--seed", type=int, default=None, help="override the base seed")
    sweep.add_argument("--out", type=Path, default=None, help="override the output directory")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config.parameters = config.parameters.with_seed(args.seed)
        if args.out is not None:
            config.out = args.out
        if args.command == "run":
            return cmd_run(config)
        lengths = _parse_lengths(args.lengths)
        return cmd_sweep(config, lengths)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
