import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcsim.linkadapt import (
    TABLES,
    CqiEntry,
    McsDecision,
    achievable_rate,
    bler,
    build_cqi_table,
    cqi_from_sinr,
    decide,
    mcs_from_cqi,
    read_thresholds,
    tbs,
)

TABLE = build_cqi_table()

# CQI table 1 of TS 38.214, transcribed independently: (Qm, rate x 1024, efficiency)
REFERENCE_64QAM = {
    1: (2, 78, 0.1523), 2: (2, 120, 0.2344), 3: (2, 193, 0.3770), 4: (2, 308, 0.6016),
    5: (2, 449, 0.8770), 6: (2, 602, 1.1758), 7: (4, 378, 1.4766), 8: (4, 490, 1.9141),
    9: (4, 616, 2.4063), 10: (6, 466, 2.7305), 11: (6, 567, 3.3223), 12: (6, 666, 3.9023),
    13: (6, 772, 4.5234), 14: (6, 873, 5.1152), 15: (6, 948, 5.5547),
}


def test_table_identity():
    for k, (qm, r1024, eff) in REFERENCE_64QAM.items():
        e = TABLE[k]
        assert e.modulation_order == qm
        assert e.code_rate == r1024 / 1024
        assert e.efficiency == pytest.approx(eff, abs=1e-4)
        d = mcs_from_cqi(k, TABLE)
        assert d.mcs_index == k


@pytest.mark.parametrize("name", sorted(TABLES))
def test_all_tables_valid(name):
    t = build_cqi_table(name)
    assert len(t.entries) == 16
    assert list(t.thresholds) == sorted(set(t.thresholds))
    effs = [e.efficiency for e in t.entries[1:]]
    assert effs == sorted(effs)


def test_low_se_table_target():
    assert build_cqi_table("lowse").target_bler == 0.00001


def test_thresholds_follow_shannon_gap():
    # 10 log10((2^eff - 1) * 10) evaluated by hand for CQI 15: eff = 6 * 948 / 1024
    eff = 6 * 948 / 1024
    assert TABLE[15].sinr_threshold == pytest.approx(10 * math.log10((2**eff - 1) * 10))


def test_cqi_anchors():
    assert cqi_from_sinr(-40.0, TABLE) == 0
    assert cqi_from_sinr(60.0, TABLE) == 15
    th7 = TABLE[7].sinr_threshold
    assert cqi_from_sinr(th7, TABLE) == 7
    assert cqi_from_sinr(math.nextafter(th7, -math.inf), TABLE) == 6


def test_cqi_step_function_breakpoints():
    grid = [x / 100 for x in range(-2000, 4000)]
    cqis = [cqi_from_sinr(s, TABLE) for s in grid]
    assert cqis == sorted(cqis)
    jumps = sum(1 for a, b in zip(cqis, cqis[1:]) if b != a)
    assert jumps == 15


@given(st.floats(-50, 80), st.floats(-50, 80))
def test_efficiency_monotone_in_sinr(s1, s2):
    lo, hi = sorted((s1, s2))
    assert TABLE[cqi_from_sinr(lo, TABLE)].efficiency <= TABLE[cqi_from_sinr(hi, TABLE)].efficiency


def test_mcs_from_cqi_edges():
    d0 = mcs_from_cqi(0, TABLE)
    assert d0.mcs_index is None and d0.tbs == 0
    assert mcs_from_cqi(15, TABLE).mcs_index == max(e.cqi for e in TABLE.entries)
    with pytest.raises(ValueError):
        mcs_from_cqi(16, TABLE)


def test_tbs_examples():
    e = CqiEntry(1, 2, 0.5, 0.0)
    assert tbs(e, 1, 100) == 100
    assert tbs(e, 2, 100) == 200
    assert tbs(CqiEntry(1, 6, 0.65, 0.0), 51, 144) == 28641
    with pytest.raises(ValueError):
        tbs(e, 0, 100)


def test_tbs_matches_integer_oracle():
    rng = random.Random(7)
    for _ in range(1000):
        k = rng.randint(1, 15)
        n_prb = rng.randint(1, 275)
        re = rng.randint(1, 168)
        qm, r1024, _ = REFERENCE_64QAM[k]
        expected = (n_prb * re * qm * r1024) // 1024
        assert tbs(TABLE[k], n_prb, re) == expected


def test_bler_anchor_and_limits():
    for k in range(1, 16):
        e = TABLE[k]
        assert abs(bler(e.sinr_threshold, e, TABLE) - 0.1) <= 1e-12
        assert bler(e.sinr_threshold + 20, e, TABLE) < 1e-3
        assert bler(-1e6, e, TABLE) == pytest.approx(1.0)
        assert bler(1e6, e, TABLE) == 0.0
    with pytest.raises(ValueError):
        bler(0.0, TABLE[0], TABLE)


@given(st.floats(-30, 60), st.floats(min_value=1e-6, max_value=10))
def test_bler_decreasing(s, eps):
    e = TABLE[8]
    assert bler(s + eps, e, TABLE) <= bler(s, e, TABLE)


def test_bler_low_se_anchor():
    t = build_cqi_table("lowse")
    for k in range(1, 16):
        assert abs(bler(t[k].sinr_threshold, t[k], t) - 1e-5) <= 1e-12


def test_achievable_rate():
    assert achievable_rate(McsDecision(None, 0, 1.0), 0.5e-3) == 0.0
    assert achievable_rate(McsDecision(15, 28641, 0.1), 0.5e-3) == pytest.approx(57.282e6)
    d = McsDecision(3, 1000, 0.1)
    assert achievable_rate(d, 0.25e-3) == 2 * achievable_rate(d, 0.5e-3)
    with pytest.raises(ValueError):
        achievable_rate(d, 0.0)


def test_decide_deterministic_never_errors():
    for s in (-5.0, 3.3, 12.0, 40.0):
        d = decide(s, TABLE, 51, deterministic_bler=True)
        assert d.expected_bler in (0.0, 1.0)
        if d.mcs_index is not None:
            assert d.expected_bler == 0.0


def test_threshold_file(tmp_path):
    p = tmp_path / "th.tsv"
    lines = "\n".join(f"{k}\t{-10 + 2.5 * k}" for k in range(1, 16))
    p.write_text(lines + "\n")
    th = read_thresholds(p)
    t = build_cqi_table(thresholds=th)
    assert t[4].sinr_threshold == 0.0
    assert cqi_from_sinr(0.0, t) == 4


def test_threshold_file_errors(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("1\tabc\n")
    with pytest.raises(ValueError, match=":1:"):
        read_thresholds(p)
    p.write_text("16\t3.0\n")
    with pytest.raises(ValueError):
        read_thresholds(p)
    # non-monotone override is rejected by the table invariant
    with pytest.raises(ValueError):
        build_cqi_table(thresholds={5: 100.0})
