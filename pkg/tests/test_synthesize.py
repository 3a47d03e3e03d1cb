import math

import numpy as np
import pytest

from scallop_switch import InfeasibleError, Regime, RegularityError, ScallopParams, State
from scallop_switch.model import f_primitive, gap
from scallop_switch.simulate import StrokeCase, propagate_exact, stroke_displacement
from scallop_switch.switching import Fixed, Magnitude, Sign, Thermostat
from scallop_switch.synthesize import (
    FOUR_PERMUTATIONS,
    admissible_ordering,
    classify_case,
    plan_displacement,
    plan_leg,
    plan_transfer,
    predicted_total,
    reachable_radius,
    realize_plan,
    solve_four_angles,
    solve_single_angle,
    solve_stretched_pair,
    solve_symmetric_pair,
)

Q = math.pi / 4
V, I = Regime.VISCOUS, Regime.IDEAL
# gap(pi/2 - m) - gap(m) by 50-digit quadrature of V_ideal - V_viscous
R_TWO_1E3 = 1.5891389925714340329
R_TWO_1E2 = 1.5880353459356820426


def simulate(p, rule, plans, kind="smooth", x0=0.0):
    sig = realize_plan(plans, kind)
    s0 = State(x0, plans[0].theta0, plans[0].w0)
    return sig, propagate_exact(p, rule, sig, s0)


def test_single_angle(p):
    assert solve_single_angle(p, Q, 0.0) == pytest.approx(Q, abs=1e-15)
    th1 = solve_single_angle(p, Q, 0.3)
    assert th1 < Q
    assert stroke_displacement(p, StrokeCase.VISCOUS_HOLD, (th1,), Q) == pytest.approx(0.3, abs=1e-12)
    th1 = solve_single_angle(p, Q, 0.1, w0=I)
    assert th1 > Q
    assert stroke_displacement(p, StrokeCase.IDEAL_HOLD, (th1,), Q) == pytest.approx(0.1, abs=1e-12)


def test_single_angle_out_of_range_reports_interval(p):
    with pytest.raises(InfeasibleError) as exc:
        solve_single_angle(p, Q, -0.5)
    lo, hi = exc.value.interval
    assert lo < 0 < hi and lo > -0.5


def test_symmetric_pair(p):
    t1, t2 = solve_symmetric_pair(p, Q, 0.0)
    assert t1 == pytest.approx(Q, abs=1e-15) and t2 == pytest.approx(Q, abs=1e-15)
    t1, t2 = solve_symmetric_pair(p, Q, -0.4)
    assert t1 < t2
    t1, t2 = solve_symmetric_pair(p, Q, 1.0)
    assert t1 - Q == pytest.approx(Q - t2, abs=1e-14)
    assert stroke_displacement(p, StrokeCase.IDEAL_TWO, (t1, t2)) == pytest.approx(1.0, abs=1e-12)


def test_stretched_pair_reaches_beyond_symmetric(p):
    with pytest.raises(InfeasibleError):
        solve_symmetric_pair(p, 0.15, 1.2)
    t1, t2 = solve_stretched_pair(p, 0.15, 1.2)
    assert gap(p, t1) - gap(p, t2) == pytest.approx(1.2, abs=1e-12)


def test_four_angles_plug_back(p):
    for target in (0.5, -0.5, 0.0):
        for case, side in ((StrokeCase.IDEAL_FOUR, 1), (StrokeCase.IDEAL_FOUR, -1), (StrokeCase.VISCOUS_FOUR, 1)):
            ang = solve_four_angles(p, Q, target, case, side)
            assert stroke_displacement(p, case, ang) == pytest.approx(target, abs=1e-12)


def test_ordering_example():
    # theta3 > theta4 > theta1 > theta2 breaks the scheme; the fix is (theta3, theta4, theta1, theta2)
    t1, t2, t3, t4 = 0.6, 0.3, 1.3, 1.0
    assert admissible_ordering((t1, t2, t3, t4)) == (t3, t4, t1, t2)


def test_ordering_preserves_displacement(p):
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = rng.uniform(0.05, 1.5, 4)
        d = [stroke_displacement(p, StrokeCase.IDEAL_FOUR, [a[i - 1] for i in perm]) for perm in FOUR_PERMUTATIONS]
        assert np.ptp(d) <= 1e-14


def test_ordering_failure_lists_constraints():
    with pytest.raises(InfeasibleError, match="theta1 > theta4"):
        admissible_ordering((0.5, 0.5, 0.5, 0.5))


def test_reachable_radius(p):
    r = reachable_radius(p, Thermostat(0.1), StrokeCase.IDEAL_TWO, Q, margin=1e-3)
    assert r.r == pytest.approx(R_TWO_1E3, abs=1e-12)
    assert reachable_radius(p, Thermostat(0.1), StrokeCase.IDEAL_TWO, Q).r == pytest.approx(R_TWO_1E2, abs=1e-12)
    rs = reachable_radius(p, Sign(), StrokeCase.IDEAL_TWO, Q)
    assert rs.interval[0] == 0.0
    single = reachable_radius(p, Thermostat(0.1), StrokeCase.VISCOUS_HOLD, Q)
    assert single.r == pytest.approx(min(-single.interval[0], single.interval[1]))
    four = reachable_radius(p, Magnitude(1.0), StrokeCase.IDEAL_FOUR, Q)
    assert 0 < four.r < R_TWO_1E2


def test_classify_case():
    th = Thermostat(0.1)
    assert classify_case(th, 0.05, V) is StrokeCase.VISCOUS_HOLD
    assert classify_case(th, 0.05, I) is StrokeCase.IDEAL_HOLD
    assert classify_case(th, 0.5) is StrokeCase.IDEAL_TWO
    assert classify_case(th, -0.5) is StrokeCase.VISCOUS_TWO
    assert classify_case(Sign(), -1.0) is StrokeCase.VISCOUS_TWO
    assert classify_case(Magnitude(1.0), 2.0) is StrokeCase.IDEAL_FOUR
    assert classify_case(Magnitude(1.0), -0.5) is StrokeCase.VISCOUS_FOUR
    with pytest.raises(InfeasibleError):
        classify_case(Fixed(I), 1.0)


def test_reference_thermostat_stroke(p):
    rule = Thermostat(0.1)
    plans = plan_displacement(p, rule, State(0.0, Q, I), 0.5, 1.0, 7.0)
    assert len(plans) == 1 and plans[0].switch_times == (2.0, 6.0) and plans[0].T == 7.0
    sig, tr = simulate(p, rule, plans)
    assert [e.t for e in tr.events] == pytest.approx([2.0, 6.0], abs=1e-10)
    assert tr.delta_x == pytest.approx(1.0, abs=1e-9)
    _, tr_pwc = simulate(p, rule, plans, "pwc")
    assert tr_pwc.delta_x == pytest.approx(tr.delta_x, abs=1e-10)


def test_zero_target_gives_event_free_control(p):
    rule = Thermostat(0.1)
    for u0, w0 in ((0.5, I), (0.05, V), (-0.5, V)):
        plans = plan_displacement(p, rule, State(0.0, Q, w0), u0, 0.0, 7.0)
        assert len(plans) == 1 and plans[0].switch_angles == ()
        _, tr = simulate(p, rule, plans)
        assert tr.events == [] and abs(tr.delta_x) < 1e-14


def test_sign_rule_is_forward_only(p):
    with pytest.raises(InfeasibleError, match="forward"):
        plan_displacement(p, Sign(), State(0.0, Q, I), 0.5, -0.5, 7.0)
    plans = plan_displacement(p, Sign(), State(0.0, Q, V), -0.3, 0.7, 7.0)
    _, tr = simulate(p, Sign(), plans)
    assert tr.delta_x == pytest.approx(0.7, abs=1e-9)


def test_sign_rule_rest_stroke(p):
    plans = plan_displacement(p, Sign(), State(0.0, 0.4, I), 0.0, 0.0, 3.0)
    _, tr = simulate(p, Sign(), plans)
    assert tr.events == [] and tr.delta_x == 0.0


@pytest.mark.parametrize("u0", [2.0, -2.0, 0.4])
@pytest.mark.parametrize("target", [0.6, -0.6, 0.0])
@pytest.mark.parametrize("kind", ["smooth", "pwc"])
def test_magnitude_strokes(p, u0, target, kind):
    rule = Magnitude(1.0)
    s0 = State(0.0, Q, I if abs(u0) > 1 else V)
    plans = plan_displacement(p, rule, s0, u0, target, 7.0)
    _, tr = simulate(p, rule, plans, kind)
    assert tr.delta_x == pytest.approx(target, abs=1e-9)
    assert len(tr.events) == sum(len(pl.switch_angles) for pl in plans)


def test_splitting_threads_regime(p):
    rule = Thermostat(0.1)
    plans = plan_displacement(p, rule, State(0.0, Q, V), 0.05, 0.6, 7.0)
    assert len(plans) > 1
    for a, b in zip(plans[:-1], plans[1:]):
        assert b.w0 is a.w_end
    _, tr = simulate(p, rule, plans)
    assert tr.delta_x == pytest.approx(0.6, abs=1e-9)
    assert predicted_total(plans) == pytest.approx(0.6, abs=1e-12)


def test_transfer_without_angle_change_is_displacement(p):
    rule = Thermostat(0.1)
    plans = plan_transfer(p, rule, (0.0, Q), (0.8, Q), 0.5)
    assert all(pl.kind == "stroke" for pl in plans)


def test_leg_drift_is_primitive_difference(p):
    leg = plan_leg(p, Thermostat(0.1), Q, 1.2, I, 0.5, 7.0)
    assert leg.switch_angles == ()
    assert leg.predicted_dx == pytest.approx(f_primitive(p, I, 1.2) - f_primitive(p, I, Q), abs=1e-15)
    # magnitude ideal start cannot close without leaving the ideal regime
    leg = plan_leg(p, Magnitude(1.0), 1.2, 0.6, I, 2.0, 7.0)
    assert len(leg.switch_angles) == 2


@pytest.mark.parametrize("rule,u0", [(Thermostat(0.1), 0.5), (Thermostat(0.1), -0.5), (Magnitude(1.0), 2.0)])
def test_transfer_end_state(p, rule, u0):
    for goal in ((2.0, 1.2), (-1.5, 0.6)):
        plans = plan_transfer(p, rule, (0.0, Q), goal, u0)
        _, tr = simulate(p, rule, plans)
        assert tr.x[-1] == pytest.approx(goal[0], abs=1e-9)
        assert tr.theta[-1] == goal[1]


def test_irregular_parameters_rejected():
    q = ScallopParams(a=1.0, b=0.9, xi=1.0, eta=3.0)
    with pytest.raises(RegularityError):
        solve_symmetric_pair(q, Q, 0.1)


def test_plan_serialisation(p):
    (plan,) = plan_displacement(p, Thermostat(0.1), State(0.0, Q, I), 0.5, 1.0, 7.0)
    d = plan.to_dict()
    assert d["switch_times"] == [2.0, 6.0] and d["w0"] == 2 and d["theta_end"] == Q
