from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import pmf_strategy
from layered_entropy.channels import JointPmf, cond_min_entropy, cond_shannon, layer_channel
from layered_entropy.envelopes import (
    Coupling,
    layer_fixed_point_check,
    lp_coupling_construct,
    lp_coupling_from_uniform,
    lp_objective_upper_check,
    random_feasible_coupling,
    random_uniform_partition,
    uniform_conditional_envelope_check,
)
from layered_entropy.pmf import layered_entropy, min_entropy
from layered_entropy.rng import SplitMix64


def test_construct_examples():
    c = lp_coupling_construct(np.full(4, 0.25))
    assert c.k_marginal == pytest.approx([0, 0, 0, 1])
    assert c.objective() == pytest.approx(2, abs=1e-15)
    c = lp_coupling_construct([0.5, 0.25, 0.25])
    assert c.k_marginal == pytest.approx([0.25, 0, 0.75])
    assert c.objective() == pytest.approx(0.75 * math.log2(3), abs=1e-12)
    c = lp_coupling_construct([0.5, 0.3, 0.2])
    assert c.k_marginal == pytest.approx([0.2, 0.2, 0.6])
    assert c.objective() == pytest.approx(1.1509775, abs=1e-7)


@given(pmf_strategy())
def test_construct_is_feasible_and_optimal(p):
    c = lp_coupling_construct(p)
    assert c.is_feasible(p)
    assert abs(c.objective() - layered_entropy(p)) <= 1e-12
    # every entry is either zero or sits on its constraint
    k = np.arange(1, c.matrix.shape[1] + 1)
    cap = c.k_marginal / k
    on = np.isclose(c.matrix, cap[None, :], rtol=0, atol=1e-12)
    assert np.all(on | (c.matrix == 0))


def test_coupling_rows_follow_input_order():
    c = lp_coupling_construct([0.2, 0.5, 0.3])
    assert c.x_marginal == pytest.approx([0.2, 0.5, 0.3])


def test_infeasible_coupling_detected():
    # all mass at K = 2 on one x violates p(x, k) <= p_K(k)/k
    bad = Coupling(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert bad.feasibility_residual() > 0
    assert not bad.is_feasible([1.0, 0.0])


def test_coupling_serialization():
    c = lp_coupling_construct([0.5, 0.25, 0.25])
    rows = [list(map(float, line.split(","))) for line in c.to_csv().splitlines()]
    assert np.allclose(rows, c.matrix)
    meta = c.metadata()
    assert set(meta) == {"objective", "feasibility_residual"}
    json.dumps(meta)


@given(st.integers(0, 2**64 - 1), st.floats(0.01, 1.0))
@settings(max_examples=200)
def test_random_feasible_points_stay_below(seed, eps):
    rng = SplitMix64(seed)
    p = rng.dirichlet_ones(rng.integer(2, 9))
    c = random_feasible_coupling(rng, p, eps)
    assert c.is_feasible(p, 1e-12)
    assert c.objective() <= layered_entropy(p) + 1e-9


@given(st.integers(0, 2**64 - 1))
def test_uniform_partitions_have_uniform_posteriors(seed):
    rng = SplitMix64(seed)
    p = rng.dirichlet_ones(rng.integer(1, 9))
    j = random_uniform_partition(rng, p)
    assert j.p_x == pytest.approx(p, abs=1e-12)
    for _, _, row in j.conditionals():
        nz = row[row > 0]
        assert np.allclose(nz, nz[0], rtol=1e-9)
    assert cond_shannon(j) <= layered_entropy(p) + 1e-9
    c = lp_coupling_from_uniform(j)
    assert c.is_feasible(p, 1e-9)
    assert c.objective() == pytest.approx(cond_shannon(j), abs=1e-9)


def test_envelope_checks():
    p = SplitMix64(4).dirichlet_ones(6)
    assert lp_objective_upper_check(p, 200, seed=1)
    assert uniform_conditional_envelope_check(p, 50, seed=1)
    with pytest.raises(ValueError):
        lp_objective_upper_check(p, 0)
    with pytest.raises(ValueError):
        uniform_conditional_envelope_check(p, 0)


def test_min_entropy_envelope_extremes():
    p = [0.5, 0.3, 0.2]
    assert cond_min_entropy(JointPmf(np.array(p)[:, None])) == pytest.approx(min_entropy(p))
    assert cond_min_entropy(layer_channel(p)) == pytest.approx(layered_entropy(p), abs=1e-12)


def test_uniform_constant_channel_attains_log_n():
    u = np.full(5, 0.2)
    assert cond_shannon(JointPmf(u[:, None])) == pytest.approx(math.log2(5), abs=1e-12)


@pytest.mark.parametrize("p", [np.full(3, 1 / 3), [0.5, 0.25, 0.25]])
def test_fixed_point_examples(p):
    assert layer_fixed_point_check(p)


@given(pmf_strategy())
def test_fixed_point_property(p):
    assert layer_fixed_point_check(p)
