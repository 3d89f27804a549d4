"""Reproduction targets: the non-monotonic Q table and the throughput figure series.

Every target returns (header, rows); rows are (x, series, value) with x the
horizon T, or the case number for the Q table.
"""
import logging
from typing import Callable, Dict, List, Sequence, Tuple

from .belief import initial_belief, expected_su_reward
from .config import node_budget
from .evaluator import EvaluationReport, evaluate_closed_form, evaluate_exact, su_upper_bound
from .errors import UsageError
from .models import ActionTriple, ConstraintKind, OperatingPoint, Scenario
from .policy_lput import build_schedule, multi_channel_policy
from .policy_sccp import q_value, required_nodes, sccp_action, sccp_action_table, solve_sccp
from .pu_model import benchmark_throughput, reduce_to_nonreactive
from .scenario_config import ScenarioConfig, load_preset
from .sensor_roc import PerfectSensorRoc

logger = logging.getLogger(__name__)

Rows = List[Tuple[object, str, float]]
HEADER = ["T", "series", "value"]


class FigureRunner:
    """Solves and evaluates each (preset, constraint, zeta, T) once per run."""

    def __init__(self):
        self._presets: Dict[str, ScenarioConfig] = {}
        self._reports: Dict[tuple, EvaluationReport] = {}

    def preset(self, name: str) -> ScenarioConfig:
        if name not in self._presets:
            self._presets[name] = load_preset(name)
        return self._presets[name]

    def horizons(self, name: str) -> List[int]:
        return self.preset(name).reproduce.horizons

    def zetas(self, name: str) -> List[float]:
        cfg = self.preset(name)
        return cfg.reproduce.zetas or [cfg.zeta]

    def report(self, name: str, constraint: ConstraintKind, zeta: float, horizon: int,
               nonreactive: bool = False) -> EvaluationReport:
        key = (name, constraint, zeta, horizon, nonreactive)
        if key in self._reports:
            return self._reports[key]
        cfg = self.preset(name)
        scenario = cfg.to_scenario(horizon=horizon, zeta=zeta)
        if nonreactive:
            scenario = scenario.model_copy(update={"channels": [reduce_to_nonreactive(p) for p in scenario.channels]})
        if scenario.n_channels == 1 and required_nodes(1, horizon) > node_budget(cfg.node_budget):
            report = self._closed_form(cfg, scenario, constraint)
        else:
            if constraint == ConstraintKind.SCCP:
                policy = solve_sccp(scenario, budget=cfg.node_budget)
            else:
                _, policy = multi_channel_policy(scenario, cfg.psi_for(horizon), budget=cfg.node_budget)
            report = evaluate_exact(scenario, policy, budget=cfg.node_budget)
        self._reports[key] = report
        return report

    @staticmethod
    def _closed_form(cfg: ScenarioConfig, scenario: Scenario, constraint: ConstraintKind) -> EvaluationReport:
        logger.info(f"T={scenario.horizon} is past the tree budget; using the single-channel closed form")
        if constraint == ConstraintKind.SCCP:
            actions = [row[0] for row in sccp_action_table(scenario)]
        else:
            actions = build_schedule(scenario.channels[0], scenario.sensor, scenario.zeta,
                                     scenario.horizon, cfg.psi_for(scenario.horizon)).actions()
        return evaluate_closed_form(scenario, actions)


def _tag(zeta: float) -> str:
    return f"zeta={zeta:g}"


# -----------------------------
# Targets
# -----------------------------
def table1(runner: FigureRunner) -> Tuple[List[str], Rows]:
    cfg = runner.preset("table1")
    scenario = cfg.to_scenario()
    channels = scenario.channels
    belief = initial_belief(channels)
    perfect = PerfectSensorRoc()

    def continuation(b) -> float:
        return max(expected_su_reward(b[n], sccp_action(1.0, perfect, channel=n)) for n in range(len(channels)))

    rows: Rows = []
    for i, case in enumerate(cfg.reproduce.cases, start=1):
        action = ActionTriple(
            channel=0,
            point=OperatingPoint(epsilon=case.epsilon, delta=case.delta),
            f0=case.f0,
            f1=case.f1,
        )
        q = q_value(belief, action, channels, continuation, 1, scenario.horizon)
        rows.append((i, "g", action.g))
        rows.append((i, "Q", q))
    return ["case", "series", "value"], rows


def fig4(runner: FigureRunner) -> Tuple[List[str], Rows]:
    """SU throughput under SCCP, reactive vs non-reactive PU."""
    rows: Rows = []
    for zeta in runner.zetas("single_channel"):
        for t in runner.horizons("single_channel"):
            rows.append((t, f"reactive {_tag(zeta)}",
                         runner.report("single_channel", ConstraintKind.SCCP, zeta, t).su_normalized))
            rows.append((t, f"nonreactive {_tag(zeta)}",
                         runner.report("single_channel", ConstraintKind.SCCP, zeta, t, nonreactive=True).su_normalized))
    return HEADER, rows


def fig5(runner: FigureRunner) -> Tuple[List[str], Rows]:
    """PU throughput under SCCP and LPUT against the benchmark."""
    params = runner.preset("single_channel").channel_params()[0]
    rows: Rows = []
    for zeta in runner.zetas("single_channel"):
        for t in runner.horizons("single_channel"):
            for kind in (ConstraintKind.SCCP, ConstraintKind.LPUT):
                report = runner.report("single_channel", kind, zeta, t)
                rows.append((t, f"{kind.value} {_tag(zeta)}", report.pu_normalized[0]))
            rows.append((t, f"benchmark {_tag(zeta)}", benchmark_throughput(params, zeta)))
    return HEADER, rows


def fig6(runner: FigureRunner) -> Tuple[List[str], Rows]:
    """SU throughput under SCCP and LPUT against the upper bound."""
    params = runner.preset("single_channel").channel_params()[0]
    rows: Rows = []
    for zeta in runner.zetas("single_channel"):
        for t in runner.horizons("single_channel"):
            for kind in (ConstraintKind.SCCP, ConstraintKind.LPUT):
                rows.append((t, f"{kind.value} {_tag(zeta)}",
                             runner.report("single_channel", kind, zeta, t).su_normalized))
            rows.append((t, f"upper bound {_tag(zeta)}", su_upper_bound(params, zeta)))
    return HEADER, rows


def fig7(runner: FigureRunner) -> Tuple[List[str], Rows]:
    rows: Rows = []
    for zeta in runner.zetas("single_channel"):
        for t in runner.horizons("single_channel"):
            for kind in (ConstraintKind.SCCP, ConstraintKind.LPUT):
                report = runner.report("single_channel", kind, zeta, t)
                rows.append((t, f"{kind.value} {_tag(zeta)}", report.sum_throughput[0]))
    return HEADER, rows


def _per_channel_pu(runner: FigureRunner, kind: ConstraintKind) -> Tuple[List[str], Rows]:
    rows: Rows = []
    zetas = runner.zetas("multi_channel")
    for zeta in zetas:
        suffix = f" {_tag(zeta)}" if len(zetas) > 1 else ""
        for t in runner.horizons("multi_channel"):
            report = runner.report("multi_channel", kind, zeta, t)
            for n, (pu, ups) in enumerate(zip(report.pu_normalized, report.benchmark), start=1):
                rows.append((t, f"channel {n}{suffix}", pu))
                rows.append((t, f"benchmark {n}{suffix}", ups))
    return HEADER, rows


def fig8(runner: FigureRunner) -> Tuple[List[str], Rows]:
    return _per_channel_pu(runner, ConstraintKind.SCCP)


def fig9(runner: FigureRunner) -> Tuple[List[str], Rows]:
    return _per_channel_pu(runner, ConstraintKind.LPUT)


def fig10(runner: FigureRunner) -> Tuple[List[str], Rows]:
    rows: Rows = []
    for zeta in runner.zetas("multi_channel"):
        for t in runner.horizons("multi_channel"):
            for kind in (ConstraintKind.SCCP, ConstraintKind.LPUT):
                rows.append((t, f"{kind.value} {_tag(zeta)}",
                             runner.report("multi_channel", kind, zeta, t).su_normalized))
    return HEADER, rows


def fig11(runner: FigureRunner) -> Tuple[List[str], Rows]:
    rows: Rows = []
    for zeta in runner.zetas("multi_channel"):
        for t in runner.horizons("multi_channel"):
            for kind in (ConstraintKind.SCCP, ConstraintKind.LPUT):
                report = runner.report("multi_channel", kind, zeta, t)
                for n, value in enumerate(report.sum_throughput, start=1):
                    rows.append((t, f"{kind.value} channel {n} {_tag(zeta)}", value))
    return HEADER, rows


TARGETS: Dict[str, Callable[[FigureRunner], Tuple[List[str], Rows]]] = {
    "table1": table1,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
    "fig9": fig9,
    "fig10": fig10,
    "fig11": fig11,
}


def run_target(target: str, runner: FigureRunner = None) -> Tuple[List[str], Rows]:
    if target not in TARGETS:
        raise UsageError(f"Unknown reproduction id {target!r}; choose from {', '.join(TARGETS)}")
    runner = runner or FigureRunner()
    logger.info(f"Reproducing {target}")
    return TARGETS[target](runner)


def targets(ids: Sequence[str]) -> List[str]:
    """Expand 'all' into every known id."""
    return list(TARGETS) if list(ids) == ["all"] else list(ids)
