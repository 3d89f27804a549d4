import argparse
import logging
import os
import sys
from typing import List, Optional, Sequence, Tuple

from .config import setup_logging
from .errors import EXIT_OK, EXIT_VALIDATION, ConfigValidationError, OsaError
from .evaluator import EvaluationReport, cross_check, evaluate_exact, monte_carlo
from .models import ConstraintKind, EvalMethod, PolicySchedule, Scenario
from .policy_lput import LputSchedule, multi_channel_policy
from .policy_sccp import solve_sccp
from .reproduce import FigureRunner, run_target, targets
from .scenario_config import ScenarioConfig, load_config
from .storage import JsonStorage, dumps, write_csv

logger = logging.getLogger(__name__)

SUMMARY_HEADER = [
    "constraint", "horizon", "channel", "v1", "su_normalized",
    "pu_normalized", "benchmark", "upper_bound", "below_benchmark",
]


# -----------------------------
# Helpers
# -----------------------------
def solve_config(cfg: ScenarioConfig, scenario: Optional[Scenario] = None
                 ) -> Tuple[Scenario, PolicySchedule, Optional[List[LputSchedule]]]:
    scenario = scenario or cfg.to_scenario()
    if cfg.constraint == ConstraintKind.SCCP:
        return scenario, solve_sccp(scenario, budget=cfg.node_budget), None
    schedules, policy = multi_channel_policy(scenario, cfg.psi_for(scenario.horizon), budget=cfg.node_budget)
    return scenario, policy, schedules


def evaluate_config(cfg: ScenarioConfig, scenario: Scenario, policy: PolicySchedule) -> EvaluationReport:
    if cfg.evaluation.method == EvalMethod.MONTE_CARLO:
        return monte_carlo(scenario, policy, cfg.evaluation.episodes, cfg.evaluation.seed)
    return evaluate_exact(scenario, policy, budget=cfg.node_budget)


def policy_document(cfg: ScenarioConfig, policy: PolicySchedule,
                    schedules: Optional[List[LputSchedule]]) -> dict:
    """Policy JSON: per-slot actions (1-based channels) and the nested sensing tree."""
    doc = {
        "constraint": policy.constraint.value,
        "horizon": policy.horizon,
        "zeta": cfg.zeta,
        "value": policy.value,
        "actions": [
            {
                "slot": t,
                "channel": a.channel + 1,
                "epsilon": a.point.epsilon,
                "delta": a.point.delta,
                "f0": a.f0,
                "f1": a.f1,
            }
            for t, row in enumerate(policy.actions, start=1)
            for a in row
        ],
        "tree": policy.tree.to_nested(),
    }
    if schedules is not None:
        doc["schedules"] = [
            {
                "channel": s.channel + 1,
                "upsilon": s.upsilon,
                "records": [r.model_dump() for r in s.records],
            }
            for s in schedules
        ]
    return doc


def summary_rows(cfg: ScenarioConfig, policy: PolicySchedule, report: EvaluationReport) -> list:
    flagged = set(report.below_benchmark())
    return [
        [
            cfg.constraint.value, report.horizon, n + 1, policy.value, report.su_normalized,
            pu, report.benchmark[n], report.upper_bound[n], n in flagged,
        ]
        for n, pu in enumerate(report.pu_normalized)
    ]


# -----------------------------
# Commands
# -----------------------------
def cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except ConfigValidationError as e:
        for pointer, message in e.violations:
            print(f"❌ {pointer}: {message}")
        return EXIT_VALIDATION
    print(f"✅ {args.config} is valid")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    scenario, policy, schedules = solve_config(cfg)
    report = evaluate_config(cfg, scenario, policy)
    JsonStorage(os.path.join(args.out, "policy.json")).save(policy_document(cfg, policy, schedules))
    write_csv(os.path.join(args.out, "summary.csv"), SUMMARY_HEADER, summary_rows(cfg, policy, report))
    for n in report.below_benchmark():
        logger.warning(
            f"Channel {n + 1}: PU throughput {report.pu_normalized[n]:.6f} "
            f"below benchmark {report.benchmark[n]:.6f}"
        )
    print(f"✅ {cfg.constraint.value}: V1={policy.value:.12g}, SU={report.su_normalized:.12g}, "
          f"PU={[round(v, 12) for v in report.pu_normalized]}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    runner = FigureRunner()
    for target in targets(args.ids):
        header, rows = run_target(target, runner)
        write_csv(os.path.join(args.out, f"{target}.csv"), header, rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    episodes = args.episodes if args.episodes is not None else cfg.evaluation.episodes
    seed = args.seed if args.seed is not None else cfg.evaluation.seed
    scenario, policy, _ = solve_config(cfg)
    report = monte_carlo(scenario, policy, episodes, seed)
    doc = report.model_dump(mode="json")
    if args.cross_check:
        exact = evaluate_exact(scenario, policy, budget=cfg.node_budget)
        verdicts = cross_check(exact, report)
        doc["cross_check"] = [
            {"estimate": name, "exact": ex, "mc": est, "stderr": se, "within_4se": ok}
            for name, ex, est, se, ok in verdicts
        ]
        for name, ex, est, se, ok in verdicts:
            mark = "✅" if ok else "❌"
            print(f"{mark} {name}: exact={ex:.12g} mc={est:.12g} se={se}", file=sys.stderr)
    if args.out:
        JsonStorage(args.out).save(doc)
    else:
        sys.stdout.write(dumps(doc))
    return EXIT_OK


# -----------------------------
# Entry point
# -----------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="osa",
        description="Opportunistic spectrum access policies for reactive primary users",
    )
    parser.add_argument("--log-level", default=None, help="Logging level (default: OSA_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="Check a scenario config")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="Solve and evaluate the policy of a scenario config")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="Output directory for policy.json and summary.csv")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reproduce", help="Emit CSV series for table1 and fig4..fig11")
    p.add_argument("ids", nargs="+", help="Reproduction ids, or 'all'")
    p.add_argument("--out", required=True, help="Output directory")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("simulate", help="Monte Carlo evaluation report as JSON")
    p.add_argument("config")
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--cross-check", action="store_true", help="Compare against the exact evaluator (4 SE)")
    p.add_argument("--out", default=None, help="Write the report here instead of stdout")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except OsaError as e:
        logger.error(f"❌ {e.detail}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
