from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import joint_strategy, pmf_strategy
from layered_entropy.channels import (
    JointPmf,
    brute_force_min_h_u,
    compression_pmf,
    cond_diff_entropy,
    cond_layered,
    cond_min_entropy,
    cond_shannon,
    conditional_compression,
    layer_channel,
    monotone_channel,
    mutual_information,
    random_joint,
    region_sample,
    theorem2_holds,
    three_approx_holds,
    three_cond_entropies,
)
from layered_entropy.pmf import InvalidPmfError, bound_h_from_lambda, layered_entropy, shannon_entropy, sort_pmf
from layered_entropy.rng import SplitMix64

# p(.|y=1) = (0.9, 0.1), p(.|y=2) = (0.6, 0.4), Y uniform
TWO_ROW = JointPmf(np.array([[0.45, 0.30], [0.05, 0.20]]))
BSC = JointPmf(np.array([[0.45, 0.05], [0.05, 0.45]]))


def test_joint_validation():
    with pytest.raises(InvalidPmfError):
        JointPmf(np.array([0.5, 0.5]))
    with pytest.raises(InvalidPmfError):
        JointPmf(np.array([[0.5, -0.1], [0.3, 0.3]]))
    with pytest.raises(InvalidPmfError):
        JointPmf(np.array([[0.5, 0.4]]))


def test_basic_entropies():
    prod = JointPmf.product([0.7, 0.3], [0.2, 0.8])
    assert cond_shannon(prod) == pytest.approx(shannon_entropy([0.7, 0.3]), abs=1e-12)
    assert abs(mutual_information(prod)) < 1e-12
    ident = JointPmf(np.diag([0.5, 0.5]))
    assert cond_shannon(ident) == 0 and mutual_information(ident) == 1
    assert mutual_information(BSC) == pytest.approx(1 - shannon_entropy([0.9, 0.1]), abs=1e-12)
    assert mutual_information(BSC) == pytest.approx(0.531004, abs=1e-6)


def test_cond_layered_examples():
    p = [0.5, 0.3, 0.2]
    assert cond_layered(JointPmf(np.array(p)[:, None])) == pytest.approx(layered_entropy(p), abs=1e-15)
    assert cond_layered(TWO_ROW) == pytest.approx(0.5, abs=1e-12)
    assert cond_layered(JointPmf(np.diag([0.2, 0.3, 0.5]))) == 0


def test_two_row_compression():
    res = conditional_compression(TWO_ROW)
    assert res.u_pmf.probs == pytest.approx([0.75, 0.25], abs=1e-12)
    assert res.entropy == pytest.approx(0.811278, abs=1e-6)
    assert cond_shannon(TWO_ROW) == pytest.approx(0.719973, abs=1e-6)
    assert compression_pmf(TWO_ROW).probs == pytest.approx([0.75, 0.25], abs=1e-12)
    assert brute_force_min_h_u(TWO_ROW) == pytest.approx(0.811278, abs=1e-6)
    assert tuple(three_cond_entropies(TWO_ROW)) == pytest.approx((0.5, 0.719973, 0.811278), abs=1e-6)


def test_independent_compression_is_x():
    p = [0.2, 0.5, 0.3]
    j = JointPmf.product(p, [0.4, 0.6])
    res = conditional_compression(j)
    assert res.rank_map[:, 0].tolist() == res.rank_map[:, 1].tolist()
    assert compression_pmf(j).probs == pytest.approx([0.5, 0.3, 0.2])
    assert cond_diff_entropy(j) == pytest.approx(shannon_entropy(p), abs=1e-12)
    assert brute_force_min_h_u(JointPmf.product([0.5, 0.3, 0.2], [0.5, 0.5])) == pytest.approx(1.485475, abs=1e-6)


def test_function_of_y_compresses_to_constant():
    j = JointPmf(np.array([[0.3, 0.0], [0.0, 0.7]]))
    assert compression_pmf(j).probs[0] == 1.0
    assert cond_diff_entropy(j) == 0
    assert brute_force_min_h_u(JointPmf(np.diag([0.5, 0.5]))) == 0


def test_zero_columns_skipped():
    j = JointPmf(np.array([[0.5, 0.0, 0.25], [0.0, 0.0, 0.25]]))
    assert len(list(j.conditionals())) == 2
    assert cond_shannon(j) == pytest.approx(0.5, abs=1e-15)


def test_brute_force_size_limit():
    with pytest.raises(ValueError):
        brute_force_min_h_u(JointPmf(np.full((6, 2), 1 / 12)))
    with pytest.raises(ValueError):
        conditional_compression(JointPmf(np.full((6, 2), 1 / 12)), "exhaustive_search")


def test_unknown_tie_policy():
    with pytest.raises(ValueError):
        conditional_compression(TWO_ROW, "coin_flip")


@given(joint_strategy())
def test_rank_map_injective_and_matches_formula(m):
    j = JointPmf(m)
    res = conditional_compression(j)
    for y in range(m.shape[1]):
        assert sorted(res.rank_map[:, y]) == list(range(m.shape[0]))
    assert np.max(np.abs(np.sort(res.u_pmf.probs)[::-1] - compression_pmf(j).probs)) <= 1e-12
    assert np.max(np.abs(compression_pmf(j).probs - sorted(oracles.compression_pmf(m.tolist()), reverse=True))) <= 1e-12


@given(joint_strategy(max_x=3, max_y=3))
@settings(max_examples=40, deadline=None)
def test_compression_matches_unreduced_brute_force(m):
    j = JointPmf(m)
    expected = oracles.min_h_u(m.tolist())
    assert brute_force_min_h_u(j) == pytest.approx(expected, abs=1e-9)
    assert cond_diff_entropy(j) == pytest.approx(expected, abs=1e-9)


def test_exhaustive_ties_do_not_change_u_pmf():
    m = np.array([[0.2, 0.1], [0.2, 0.3], [0.1, 0.1]])
    j = JointPmf(m)
    a = conditional_compression(j, "ascending_index")
    b = conditional_compression(j, "exhaustive_search")
    assert np.allclose(a.u_pmf.probs, b.u_pmf.probs)
    # exhaustive search never does worse on H(X|U)
    def h_x_given_u(res):
        nx = m.shape[0]
        pxu = np.zeros((nx, nx))
        for y in range(m.shape[1]):
            for x in range(nx):
                pxu[x, res.rank_map[x, y]] += m[x, y]
        return oracles.cond_shannon(pxu.tolist())

    assert h_x_given_u(b) <= h_x_given_u(a) + 1e-12


@given(joint_strategy(max_x=8, max_y=8))
def test_conditioning_property(m):
    j = JointPmf(m)
    assert abs(cond_layered(j) - layered_entropy(compression_pmf(j))) <= 1e-9
    assert cond_layered(j) <= layered_entropy(j.p_x) + 1e-9
    assert cond_layered(j) == pytest.approx(oracles.cond_layered(m.tolist()), abs=1e-12)


@given(joint_strategy(max_x=8, max_y=8), st.sampled_from(["loge", "sqrt", "opt"]))
def test_compression_gap_and_ordering(m, eta):
    j = JointPmf(m)
    t = three_cond_entropies(j)
    assert theorem2_holds(t.shannon, t.compression, eta)
    assert three_approx_holds(t, eta)


def test_three_approx_detects_violation():
    assert not three_approx_holds(three_cond_entropies(TWO_ROW)._replace(shannon=0.1))
    assert not theorem2_holds(1.0, 0.9)


# -- layer channel ------------------------------------------------------------


def test_layer_channel_examples():
    u = layer_channel(np.full(4, 0.25))
    assert u.shape == (4, 1)
    assert cond_shannon(u) == pytest.approx(2, abs=1e-15)
    lc = layer_channel([0.5, 0.25, 0.25])
    assert lc.p_y == pytest.approx([0.25, 0.75])
    assert cond_shannon(lc) == pytest.approx(0.75 * math.log2(3), abs=1e-12)
    lc = layer_channel([0.5, 0.3, 0.2])
    counts = np.count_nonzero(lc.matrix > 0, axis=0)
    assert counts.tolist() == [1, 2, 3]
    assert lc.p_y / counts == pytest.approx([0.2, 0.1, 0.2])
    assert cond_shannon(lc) == pytest.approx(1.1509775, abs=1e-7)


def test_layer_channel_merges_near_duplicates():
    lc = layer_channel([0.3, 0.3 + 1e-14, 0.4 - 1e-14])
    assert lc.shape[1] == 2


@given(pmf_strategy())
def test_layer_channel_theorem(p):
    lc = layer_channel(p)
    lam = layered_entropy(p)
    assert abs(cond_shannon(lc) - lam) <= 1e-12
    assert abs(cond_min_entropy(lc) - lam) <= 1e-12
    assert np.max(np.abs(compression_pmf(lc).probs - sort_pmf(p).probs)) <= 1e-12
    for _, _, row in lc.conditionals():
        nz = row[row > 0]
        assert np.allclose(nz, nz[0], rtol=0, atol=1e-12)


@given(st.integers(0, 2**64 - 1))
def test_monotone_linearity(seed):
    rng = SplitMix64(seed)
    p = rng.dirichlet_ones(rng.integer(2, 8))
    j = monotone_channel(rng, p, rng.integer(1, 6))
    assert abs(cond_layered(j) - layered_entropy(p)) <= 1e-9
    # no compression is possible, so H(X|Y) cannot dip below the layered entropy
    assert abs(cond_diff_entropy(j) - shannon_entropy(p)) < 1e-9
    assert cond_shannon(j) >= layered_entropy(p) - 1e-9


# -- random instances and region ----------------------------------------------


def test_random_joint_deterministic_and_shaped():
    a = random_joint(SplitMix64(5))
    b = random_joint(SplitMix64(5))
    assert np.array_equal(a.matrix, b.matrix)
    for s in range(50):
        j = random_joint(SplitMix64(s), max_x=4, max_y=3)
        assert 2 <= j.shape[0] <= 4 and 1 <= j.shape[1] <= 3


def test_region_extremes_and_order():
    p = [0.5, 0.3, 0.2]
    rs = region_sample(p, 25, seed=11)
    h, lam = shannon_entropy(p), layered_entropy(p)
    assert rs.points[0] == pytest.approx((h, h), abs=1e-12)
    assert rs.points[1] == pytest.approx((lam, h), abs=1e-12)
    assert rs.channel_seeds[:2] == [None, None]
    assert len(rs.points) == 27
    for hc, hd in rs.points:
        assert hc <= hd + 1e-9
        assert hd <= bound_h_from_lambda(hc, "loge") + 1e-9
    assert region_sample(p, 25, seed=11).to_csv() == rs.to_csv()


def test_region_csv_format():
    text = region_sample([0.5, 0.5], 2, seed=1).to_csv()
    lines = text.splitlines()
    assert lines[0] == "h_cond,h_diff,seed"
    assert lines[1] == "1,1,"
    assert len(lines) == 5


def test_region_needs_a_channel():
    with pytest.raises(ValueError):
        region_sample([1.0], 0)
