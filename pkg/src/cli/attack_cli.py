"""
Command-line interface for ad-hoc attacks and assumption checks on LP files.
"""

import argparse
import logging
import time

from ..core.errors import ConfigurationError
from ..data.sources import load_attack_config, load_lift, load_lp, lp_to_dict
from ..services.attack import AttackEngine
from ..services.reports import diagnostics_to_dict, write_attack_report, write_json
from ..services.scenarios import config_echo
from .common import EXIT_OK, add_common_arguments, finish_run, output_dir

logger = logging.getLogger(__name__)


def add_parsers(subparsers) -> None:
    attack = subparsers.add_parser("attack", help="Attack an LP through a confounder lift")
    attack.add_argument("--lp", required=True, help="Linear program JSON")
    attack.add_argument("--lift", required=True, help="Confounder lift JSON")
    attack.add_argument("--config", required=True, help="Attack config JSON")
    attack.add_argument("--workers", type=int, default=1, help="Threads per gradient estimate")
    add_common_arguments(attack)
    attack.set_defaults(run=run_attack)

    verify = subparsers.add_parser("verify-assumptions",
                                   help="Search an LP's neighbourhood for ties and solution changes")
    verify.add_argument("--lp", required=True, help="Linear program JSON")
    verify.add_argument("--radius", type=float, required=True, help="Infinity-ball radius")
    verify.add_argument("--trials", type=int, default=100, help="Random cost vectors to try")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--assignment-n", type=int,
                        help="Treat the LP as an n x n assignment and report its optimality margin")
    add_common_arguments(verify)
    verify.set_defaults(run=run_verify)


def run_attack(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    lp = load_lp(args.lp)
    lift = load_lift(args.lift)
    cfg = load_attack_config(args.config)
    if lift.k != lp.k:
        raise ConfigurationError(f"Lift has length {lift.k}, LP has {lp.k} variables")

    report = AttackEngine(workers=args.workers).attack(lp, lift, cfg)
    out_dir = output_dir(args.out, "attack")
    files = [write_attack_report(out_dir / "report.json", report).name]
    echo = {"lp": args.lp, "lift": args.lift, "attack": config_echo(cfg)}
    finish_run("attack", args.config, echo, out_dir, started, files)

    print(f"success={str(report.success).lower()} delta_h={report.delta_h:.6g} "
          f"rel_cost_gap={report.rel_cost_gap:.6g} shd={report.shd_codes}")
    return EXIT_OK


def run_verify(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    if args.trials < 0:
        raise ConfigurationError(f"--trials must be >= 0, got {args.trials}")
    lp = load_lp(args.lp)
    if args.assignment_n is not None and args.assignment_n ** 2 != lp.k:
        raise ConfigurationError(f"--assignment-n {args.assignment_n} does not match {lp.k} variables")
    diag = AttackEngine().verify_assumptions(lp, args.radius, args.trials, args.seed,
                                             assignment_n=args.assignment_n)
    out_dir = output_dir(args.out, "verify-assumptions")
    files = [write_json(out_dir / "diagnostics.json", diagnostics_to_dict(diag)).name]
    echo = {"lp": lp_to_dict(lp), "radius": args.radius, "trials": args.trials,
            "seed": args.seed, "assignment_n": args.assignment_n}
    finish_run("verify-assumptions", args.lp, echo, out_dir, started, files)

    verdict = diag.verdict
    print(f"multiple_optima={verdict['multiple_optima']} "
          f"solution_change={verdict['solution_change']}")
    for note in diag.notes:
        print(f"  {note}")
    return EXIT_OK
