import itertools
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcsim.linkadapt import McsDecision
from mcsim.sched import (
    Policy,
    SchedulerKind,
    UeSchedState,
    priority,
    run_tti,
    select_ue,
    update_avg,
)

MT = SchedulerKind(Policy.MT)
BET = SchedulerKind(Policy.BET)
PF = SchedulerKind(Policy.PF)


def test_scheduler_kind_validation():
    with pytest.raises(ValueError):
        SchedulerKind(Policy.PF, 0.0)
    with pytest.raises(ValueError):
        SchedulerKind(Policy.PF, 1.5)
    assert SchedulerKind.from_window("pf", 100).alpha == pytest.approx(0.01)
    assert SchedulerKind("bet").policy is Policy.BET


def test_priority_examples():
    assert priority(MT, UeSchedState(1, d=5e6, R=1.0)) == 5e6
    assert priority(PF, UeSchedState(1, d=5e6, R=1e6)) == 5.0
    assert priority(BET, UeSchedState(1, R=2e6)) == 5e-7


def test_priority_rejects_negative_average():
    with pytest.raises(ValueError):
        priority(PF, UeSchedState(1, d=1.0, R=-1.0))
    with pytest.raises(ValueError):
        priority(BET, UeSchedState(1, R=-1.0))


def test_select_examples():
    states = [UeSchedState(1, d=2e6, R=1e6), UeSchedState(2, d=1e6, R=1e6)]
    assert select_ue(PF, states) == 1
    assert select_ue(BET, [UeSchedState(1, R=1e6), UeSchedState(2, R=2e6)]) == 1


def test_select_tie_breaks():
    # UE2 was scheduled longest ago
    states = [
        UeSchedState(1, d=1e6, R=1e6, last_scheduled=9),
        UeSchedState(2, d=1e6, R=1e6, last_scheduled=3),
        UeSchedState(3, d=1e6, R=1e6, last_scheduled=7),
    ]
    assert select_ue(PF, states) == 2
    fresh = [UeSchedState(u, d=1.0, R=1.0) for u in (3, 1, 2)]
    assert select_ue(PF, fresh) == 1


def test_select_empty():
    with pytest.raises(ValueError):
        select_ue(PF, [])


def test_update_avg_examples():
    assert update_avg(123.0, 456.0, 1.0) == 456.0
    assert update_avg(77.0, 77.0, 0.3) == pytest.approx(77.0)
    assert update_avg(100.0, 200.0, 0.01) == pytest.approx(101.0)


def _decisions(tbs_by_ue, bler=0.0):
    return {u: McsDecision(mcs_index=7, tbs=t, expected_bler=bler, cqi=7) for u, t in tbs_by_ue.items()}


def test_run_tti_single_ue():
    s = [UeSchedState(1, R=1e3)]
    rec = run_tti(PF, s, _decisions({1: 1000}), {1: 0.5}, t=0, tti=1e-3)
    assert rec.ue_id == 1 and not rec.error
    assert s[0].r == s[0].d == 1e6
    assert rec.delivered_bits == 1000


def test_run_tti_block_error_still_updates_average():
    s = [UeSchedState(1, R=1e3)]
    rec = run_tti(PF, s, _decisions({1: 1000}, bler=0.5), {1: 0.1}, tti=1e-3)
    assert rec.error and rec.delivered_bits == 0
    assert s[0].r == 0.0
    assert s[0].R == pytest.approx((1 - PF.alpha) * 1e3)


def test_run_tti_skips_cqi_zero():
    s = [UeSchedState(1, R=1.0), UeSchedState(2, R=1e9)]
    dec = {1: McsDecision(None, 0, 1.0, 0), 2: McsDecision(3, 500, 0.0, 3)}
    rec = run_tti(BET, s, dec, {1: 0.0, 2: 0.9})
    assert rec.ue_id == 2
    s = [UeSchedState(1, R=1.0)]
    rec = run_tti(BET, s, {1: McsDecision(None, 0, 1.0, 0)}, {1: 0.0})
    assert rec.ue_id is None and s[0].R == pytest.approx(1.0 - BET.alpha)


def _bet_rule_schedules(n_ue, n_tti, d, r0, alpha):
    """Enumerate every schedule and keep those where each TTI picks a UE of
    minimal R (with ties ordered by least recent, then id)."""
    valid = []
    for sched in itertools.product(range(n_ue), repeat=n_tti):
        R = [r0] * n_ue
        last = [-1] * n_ue
        ok = True
        for t, u in enumerate(sched):
            key = lambda i: (R[i], last[i], i)
            if min(range(n_ue), key=key) != u:
                ok = False
                break
            last[u] = t
            R = [(1 - alpha) * R[i] + alpha * (d if i == u else 0.0) for i in range(n_ue)]
        if ok:
            valid.append(sched)
    return valid


def test_bet_symmetric_three_ttis():
    (expected,) = _bet_rule_schedules(3, 3, 1e6, 1e3, 0.01)
    states = [UeSchedState(u, R=1e3) for u in (1, 2, 3)]
    dec = _decisions({1: 1000, 2: 1000, 3: 1000})
    picks = [run_tti(BET, states, dec, {1: 1, 2: 1, 3: 1}, t=t, tti=1e-3).ue_id for t in range(3)]
    assert sorted(picks) == [1, 2, 3]
    assert picks == [u + 1 for u in expected]


def test_work_conservation():
    rng = random.Random(3)
    states = [UeSchedState(u, R=1e3) for u in (1, 2, 3)]
    for t in range(500):
        dec = {u: McsDecision(rng.randint(1, 15), rng.randint(100, 5000), 0.0, 1) for u in (1, 2, 3)}
        rec = run_tti(PF, states, dec, {u: 0.5 for u in (1, 2, 3)}, t=t)
        assert rec.ue_id in (1, 2, 3)
        assert sum(s.r > 0 for s in states) == 1


def _ewma_closed_form(r, R0, alpha):
    t = len(r)
    k = np.arange(t)
    weights = alpha * (1 - alpha) ** k
    return float(np.dot(weights, r[::-1]) + (1 - alpha) ** t * R0)


@given(
    st.lists(st.floats(0, 1e8), min_size=1, max_size=60),
    st.floats(1e-3, 1e8),
    st.floats(1e-4, 1.0),
)
def test_moving_average_closed_form(r, R0, alpha):
    R = R0
    for x in r:
        R = update_avg(R, x, alpha)
    assert R == pytest.approx(_ewma_closed_form(np.array(r), R0, alpha), rel=1e-9, abs=1e-300)


@given(
    st.sampled_from([Policy.MT, Policy.BET, Policy.PF]),
    st.lists(
        st.tuples(st.floats(1e3, 1e8), st.floats(1e3, 1e8), st.integers(-1, 50)),
        min_size=1,
        max_size=6,
    ),
    st.integers(-20, 20),
)
def test_selection_scale_invariant(policy, ues, exp):
    # power-of-two scaling is exact in floating point
    c = 2.0**exp
    kind = SchedulerKind(policy)
    a = [UeSchedState(i, d=d, R=R, last_scheduled=ls) for i, (d, R, ls) in enumerate(ues)]
    b = [UeSchedState(i, d=d * c, R=R * c, last_scheduled=ls) for i, (d, R, ls) in enumerate(ues)]
    assert select_ue(kind, a) == select_ue(kind, b)


def test_bet_fairness_bias_shrinks_with_alpha():
    def spread(alpha):
        kind = SchedulerKind(Policy.BET, alpha)
        states = [UeSchedState(u, R=1e3) for u in (1, 2, 3)]
        dec = _decisions({1: 40000, 2: 20000, 3: 6000})
        got = {1: 0, 2: 0, 3: 0}
        for t in range(20000):
            rec = run_tti(kind, states, dec, {1: 1, 2: 1, 3: 1}, t=t, tti=1e-3)
            got[rec.ue_id] += rec.delivered_bits
        return (max(got.values()) - min(got.values())) / max(got.values())

    assert spread(1e-3) < spread(1e-2) / 3
