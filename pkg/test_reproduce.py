import pytest
from pytest import approx

from reactive_osa.models import ConstraintKind
from reactive_osa.reproduce import FigureRunner, run_target, targets


@pytest.fixture(scope="module")
def runner():
    return FigureRunner()


@pytest.fixture(autouse=True)
def no_budget_override(monkeypatch):
    monkeypatch.delenv("OSA_NODE_BUDGET", raising=False)


def series(runner, target):
    """{series name: {T: value}} for one reproduction target."""
    _, rows = run_target(target, runner)
    out = {}
    for t, name, value in rows:
        out.setdefault(name, {})[t] = value
    return out


def test_targets_expand_all():
    assert targets(["all"]) == ["table1", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11"]
    assert targets(["fig4", "fig9"]) == ["fig4", "fig9"]


# -----------------------------
# Single channel
# -----------------------------
def test_fig4_reactive_beats_flat_nonreactive(runner):
    curves = series(runner, "fig4")
    for zeta in ("0.05", "0.1"):
        reactive, flat = curves[f"reactive zeta={zeta}"], curves[f"nonreactive zeta={zeta}"]
        assert sorted(reactive) == list(range(1, 9))
        assert all(v == approx(flat[1], abs=1e-12) for v in flat.values())
        assert reactive[1] == approx(flat[1], abs=1e-12)
        assert all(reactive[t] > flat[t] for t in range(2, 9))
    # a looser cap leaves more room for the SU
    assert curves["nonreactive zeta=0.1"][1] > curves["nonreactive zeta=0.05"][1]


def test_fig6_sccp_su_at_least_lput(runner):
    curves = series(runner, "fig6")
    for zeta in ("0.05", "0.1"):
        sccp, lput = curves[f"sccp zeta={zeta}"], curves[f"lput zeta={zeta}"]
        assert set(curves[f"upper bound zeta={zeta}"]) == set(sccp)
        for t in sccp:
            assert sccp[t] >= lput[t] - 1e-12
        assert sccp[1] == approx(lput[1], abs=1e-12)


def test_fig7_lput_sum_at_least_sccp(runner):
    curves = series(runner, "fig7")
    for zeta in ("0.05", "0.1"):
        sccp, lput = curves[f"sccp zeta={zeta}"], curves[f"lput zeta={zeta}"]
        assert all(lput[t] >= sccp[t] - 1e-12 for t in sccp)


# -----------------------------
# Three channels
# -----------------------------
def test_fig8_sccp_drops_below_benchmark(runner):
    curves = series(runner, "fig8")
    short = [(n, t) for n in (1, 2, 3) for t, pu in curves[f"channel {n}"].items()
             if pu < curves[f"benchmark {n}"][t] - 1e-9]
    assert any(t > 2 for _, t in short)


def test_fig9_lput_keeps_every_benchmark(runner):
    curves = series(runner, "fig9")
    for n in (1, 2, 3):
        for t, pu in curves[f"channel {n}"].items():
            assert pu >= curves[f"benchmark {n}"][t] - 1e-9
    assert curves["benchmark 1"][1] == approx(0.855, abs=1e-12)


def test_fig10_sccp_su_at_least_lput(runner):
    curves = series(runner, "fig10")
    sccp, lput = curves["sccp zeta=0.05"], curves["lput zeta=0.05"]
    assert sorted(sccp) == list(range(1, 7))
    assert all(sccp[t] >= lput[t] - 1e-12 for t in sccp)


def test_fig11_lput_sum_at_least_sccp_on_contested_channels(runner):
    curves = series(runner, "fig11")
    for n in (2, 3):
        sccp, lput = curves[f"sccp channel {n} zeta=0.05"], curves[f"lput channel {n} zeta=0.05"]
        assert all(lput[t] >= sccp[t] - 1e-12 for t in sccp)


# -----------------------------
# Past the tree budget
# -----------------------------
@pytest.mark.parametrize("constraint", [ConstraintKind.SCCP, ConstraintKind.LPUT])
@pytest.mark.parametrize("nonreactive", [False, True])
def test_closed_form_takes_over_past_budget(runner, monkeypatch, constraint, nonreactive):
    tree = runner.report("single_channel", constraint, 0.05, 6, nonreactive=nonreactive)
    monkeypatch.setenv("OSA_NODE_BUDGET", "10")
    closed = FigureRunner().report("single_channel", constraint, 0.05, 6, nonreactive=nonreactive)
    assert tree.branch_count is not None
    assert closed.branch_count is None
    assert closed.su_normalized == approx(tree.su_normalized, abs=1e-12)
    assert closed.pu_normalized == approx(tree.pu_normalized, abs=1e-12)
    assert closed.sum_throughput == approx(tree.sum_throughput, abs=1e-12)
