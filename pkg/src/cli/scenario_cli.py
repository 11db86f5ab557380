"""
Command-line interface for the bundled scenarios.

Runs vaccination, shortest-path or energy with an optional JSON config and
writes result files plus a manifest into the output directory.
"""

import argparse
import logging
import time
from dataclasses import fields
from typing import Any, Dict

from ..core.errors import ConfigurationError
from ..data.schemas import ScenarioConfigSchema
from ..data.sources import (
    attack_config_from_schema,
    energy_params_from_schema,
    load_graph_csv,
    load_profiles_csv,
    load_scenario_config,
)
from ..services.parameterization import VaccinationPolicy
from ..services.reports import sweep_summary, write_csv, write_json, write_scenario_result
from ..services.scenarios import (
    SCENARIOS,
    config_echo,
    default_attack_config,
    scenario_energy,
    scenario_shortest_path,
    scenario_vaccination,
    sweep,
)
from ..services.scm_library import VaccinationScmParams
from .common import EXIT_OK, add_common_arguments, finish_run, output_dir

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("scenario", help="Run a bundled scenario")
    parser.add_argument("name", choices=SCENARIOS, help="Scenario to run")
    parser.add_argument("--config", type=str, help="Scenario config JSON")
    parser.add_argument("--seed", type=int, help="Top-level seed (overrides the config)")
    parser.add_argument("--t", type=int, dest="hours", help="Energy horizon in hours")
    parser.add_argument("--sweep", type=int, metavar="N",
                        help="Run seeds seed..seed+N-1 and write sweep.csv")
    add_common_arguments(parser)
    parser.set_defaults(run=run)
    return parser


def _scm_params(overrides: Dict[str, float]) -> VaccinationScmParams:
    known = {f.name for f in fields(VaccinationScmParams)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ConfigurationError(f"vaccination.scm has unknown coefficients {unknown}")
    return VaccinationScmParams(**overrides)


def _runner(name: str, cfg: ScenarioConfigSchema, seed: int):
    """Scenario function and keyword arguments resolved from the config."""
    attack = (attack_config_from_schema(cfg.attack) if cfg.attack is not None
              else default_attack_config(name, seed))
    if name == "vaccination":
        v = cfg.vaccination
        policy = VaccinationPolicy(n_spots=v.n_spots, alpha=v.alpha, beta=v.beta)
        return scenario_vaccination, {
            "n_people": v.n_people, "n_spots": v.n_spots, "cfg": attack,
            "scm_params": _scm_params(v.scm), "policy": policy,
        }
    sp = cfg.shortest_path
    kwargs = {"s": sp.source, "t": sp.target, "cfg": attack}
    if sp.graph is not None:
        kwargs["graph"] = load_graph_csv(sp.graph)
    return scenario_shortest_path, kwargs


def _print_summary(name: str, summary: Dict[str, Any]) -> None:
    print(f"Scenario: {name}")
    for key, value in summary.items():
        if key == "reference_rows":
            continue
        print(f"  {key}: {value}")


def run(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.name == "energy" and args.sweep is not None:
        raise ConfigurationError("--sweep applies to the attack scenarios, not energy")
    cfg = load_scenario_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    out_dir = output_dir(args.out, f"{args.name}-{seed}")
    echo: Dict[str, Any] = {"scenario": args.name, "seed": seed,
                            "file": cfg.model_dump(mode="json")}

    if args.name == "energy":
        e = cfg.energy
        hours = args.hours if args.hours is not None else e.hours
        profiles = load_profiles_csv(e.profiles) if e.profiles is not None else None
        if args.hours is not None and profiles is not None and profiles.hours != hours:
            raise ConfigurationError(f"--t {hours} disagrees with the {profiles.hours}-hour profiles")
        result = scenario_energy(energy_params_from_schema(e.params), hours=hours,
                                 profiles=profiles, price_variants=e.price_variants)
        files = write_scenario_result(result, out_dir)
        echo["resolved"] = result.config
        _print_summary(result.name, result.summary)
    elif args.sweep is not None:
        if args.sweep < 1:
            raise ConfigurationError(f"--sweep must be >= 1, got {args.sweep}")
        runner, kwargs = _runner(args.name, cfg, seed)
        frame = sweep(runner, range(seed, seed + args.sweep), **kwargs)
        summary = sweep_summary(frame)
        files = [
            write_csv(out_dir / "sweep.csv", frame).name,
            write_json(out_dir / "result.json", {"scenario": args.name, "seeds": list(
                range(seed, seed + args.sweep)), "summary": summary,
                "attack": config_echo(kwargs["cfg"])}).name,
        ]
        echo["resolved"] = {"attack": config_echo(kwargs["cfg"]), "sweep": args.sweep}
        _print_summary(args.name, summary)
    else:
        runner, kwargs = _runner(args.name, cfg, seed)
        result = runner(seed=seed, **kwargs)
        files = write_scenario_result(result, out_dir)
        echo["resolved"] = result.config
        _print_summary(result.name, result.summary)

    manifest = finish_run("scenario", args.config, echo, out_dir, started, files)
    print(f"Wrote {', '.join(sorted(files))} and {manifest.name} to {out_dir}")
    return EXIT_OK
