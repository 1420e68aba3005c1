from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from gpupart.gen import (GenConfig, GenerationError, generate_taskset, make_task, randfixedsum,
                         reasonable, uunifast, uunifast_discard)
from gpupart.model import MICRO, TaskType
from gpupart.sched import min_sms_single


def test_uunifast_discard_examples():
    rng = np.random.default_rng(7)
    assert uunifast_discard(1, 0.5, rng) == [0.5]
    u = uunifast_discard(50, 30, rng)
    assert len(u) == 50 and abs(sum(u) - 30) <= 1e-9 * 30 and max(u) <= 1
    assert uunifast_discard(2, 2, rng) == [1.0, 1.0]
    with pytest.raises(ValueError):
        uunifast_discard(2, 2.5, rng)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.floats(0, 1), st.integers(0, 2**32))
def test_uunifast_discard_contract(n, frac, seed):
    U = frac * n
    u = uunifast_discard(n, U, np.random.default_rng(seed))
    assert len(u) == n
    assert abs(sum(u) - U) <= 1e-9 * max(U, 1)
    assert max(u) <= 1 and min(u) >= 0


def test_randfixedsum_matches_rejection_distribution():
    # both sample uniformly from {x in [0,1]^4 : sum x = 2.5}
    rng = np.random.default_rng(11)
    rej = []
    while len(rej) < 3000:
        u = uunifast(4, 2.5, rng)
        if u.max() <= 1:
            rej.append(u)
    rfs = [randfixedsum(4, 2.5, rng) for _ in range(3000)]
    for k in range(4):
        assert stats.ks_2samp([r[k] for r in rej], [r[k] for r in rfs]).pvalue > 0.01


def test_make_task_examples():
    c = make_task(0, 0.4, 100 * MICRO, TaskType.COMPUTE)
    assert (c.curve_n.a, c.curve_n.b) == (40 * MICRO, Fraction(8, 10) * MICRO)
    assert (c.curve_c.a, c.curve_c.b) == (48 * MICRO, Fraction(96, 100) * MICRO)
    assert c.deadline == 75 * MICRO
    m = make_task(1, 0.4, 100 * MICRO, TaskType.MEMORY)
    assert (m.curve_n.a, m.curve_n.b) == (40 * MICRO, 4 * MICRO)
    assert (m.curve_c.a, m.curve_c.b) == (92 * MICRO, Fraction(92, 10) * MICRO)


@pytest.mark.parametrize("prm,kind", [(0.0, TaskType.COMPUTE), (1.0, TaskType.MEMORY)])
def test_degenerate_prm(prm, kind):
    ts = generate_taskset(GenConfig(30, 10, prm, seed=3), 68)
    assert all(t.ttype is kind for t in ts)


def test_reasonable_rule():
    assert not reasonable(1e-9, 50 * MICRO, 68, Fraction(3, 4), TaskType.COMPUTE)
    assert reasonable(1e-9, 4000 * MICRO, 68, Fraction(3, 4), TaskType.COMPUTE)
    # 0.9 * 1.1 > 0.75 on a single SM, whatever the period
    assert not reasonable(0.9, 4000 * MICRO, 1, Fraction(3, 4), TaskType.MEMORY)


def test_generation_fails_loudly():
    with pytest.raises(GenerationError):
        generate_taskset(GenConfig(1, 0.9, 1.0, seed=0), 1, max_retries=5)


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(50, 80)
    with pytest.raises(ValueError):
        GenConfig(5, 1, prm=1.5)
    with pytest.raises(ValueError):
        GenConfig(5, 1, period_menu=(100, 50))


def test_same_seed_same_taskset():
    a = generate_taskset(GenConfig(50, 30, seed=42), 68)
    b = generate_taskset(GenConfig(50, 30, seed=42), 68)
    c = generate_taskset(GenConfig(50, 30, seed=43), 68)
    assert a == b and a != c


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.floats(0.05, 1.0), st.integers(0, 2**32))
def test_generated_tasksets(n, frac, seed):
    U = frac * n
    ts = generate_taskset(GenConfig(n, U, seed=seed), 68)
    assert len(ts) == n
    # integer micro-unit rounding moves each a_i by at most half a unit
    slack = sum(Fraction(1, 2 * t.period) for t in ts)
    assert abs(ts.utilization - Fraction(U)) <= slack + Fraction(1, 10**9)
    for t in ts:
        assert t.deadline == Fraction(3, 4) * t.period
        assert t.period // MICRO in (50, 100, 200, 400, 500, 1000, 2000, 4000)
        m = min_sms_single(t, 68)
        assert m is not None and m <= 68
        k = {TaskType.COMPUTE: Fraction(6, 5), TaskType.MEMORY: Fraction(23, 10)}[t.ttype]
        assert abs(t.conflict_factor - k) <= Fraction(1, 2 * t.curve_n.a)


def test_type_frequencies_converge():
    for prm in (0.5, 0.3):
        mem = total = 0
        for seed in range(100):
            ts = generate_taskset(GenConfig(100, 20, prm, seed=seed), 68)
            mem += sum(t.ttype is TaskType.MEMORY for t in ts)
            total += len(ts)
        assert total >= 10**4
        res = stats.chisquare([mem, total - mem], [prm * total, (1 - prm) * total])
        assert res.pvalue > 0.01
