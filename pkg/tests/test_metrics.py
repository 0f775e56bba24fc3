import itertools

import numpy as np
import pytest

from dikernel import (
    IntervalPartition,
    LipschitzMeta,
    OpinionFunction,
    SignedBlockKernel,
    apply,
    block_difference,
    bound_discounted,
    bound_dynamic,
    bound_one_step,
    bound_partition,
    bound_two_kernel_discounted,
    catalog,
    cut_norm_exact,
    cut_norm_heuristic,
    discretize_kernel,
    l1_distance,
    min_partition_size,
    refine_block,
    uniform,
)
from dikernel.errors import BudgetError, InvalidArgumentError
from conftest import random_block_kernel, random_opinions, random_partition


def brute_force_cut_norm(u: SignedBlockKernel) -> float:
    p = u.partition.weights()
    m = np.outer(p, p) * u.values
    j = u.partition.ncells
    best = 0.0
    for s in itertools.product([0, 1], repeat=j):
        for t in itertools.product([0, 1], repeat=j):
            best = max(best, abs(np.array(s) @ m @ np.array(t)))
    return best


def test_l1_identical_is_zero():
    rng = np.random.default_rng(0)
    f = random_opinions(rng, uniform(4))
    assert l1_distance(f, f) == 0.0


def test_l1_diameter_is_two():
    f = OpinionFunction(np.ones(3), partition=uniform(3))
    g = OpinionFunction(-np.ones(2), partition=uniform(2))
    assert l1_distance(f, g) == pytest.approx(2.0, abs=1e-12)


def test_l1_one_step_hand_value():
    f0 = OpinionFunction(np.array([0.5, 0.3, 0.8]), partition=uniform(3))
    f1 = OpinionFunction(np.array([0.55, 0.5, 0.3]), partition=uniform(3))
    assert l1_distance(f0, f1) == pytest.approx(0.25, abs=1e-12)


def test_cut_norm_zero_kernel():
    u = SignedBlockKernel(uniform(3), np.zeros((3, 3)))
    value, s, t = cut_norm_exact(u)
    assert value == 0.0


def test_cut_norm_single_block():
    u = SignedBlockKernel(uniform(1), np.array([[-0.7]]))
    value, s, t = cut_norm_exact(u)
    assert value == pytest.approx(0.7, abs=1e-15)
    assert list(s) == [0] and list(t) == [0]


def test_cut_norm_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = random_partition(rng, 5)
        u = SignedBlockKernel(p, rng.normal(size=(5, 5)))
        value, _, _ = cut_norm_exact(u)
        assert value == pytest.approx(brute_force_cut_norm(u), abs=1e-12)


def test_cut_norm_banded_difference_vs_brute_force():
    fine = discretize_kernel(catalog("figure3a"), uniform(8))
    coarse = refine_block(discretize_kernel(catalog("figure3a"), uniform(2)), uniform(8))
    u = SignedBlockKernel(uniform(8), fine.values - coarse.values)
    value, _, _ = cut_norm_exact(u)
    assert value == pytest.approx(brute_force_cut_norm(u), abs=1e-12)


def test_cut_norm_budget_error():
    u = SignedBlockKernel(uniform(23), np.zeros((23, 23)))
    with pytest.raises(BudgetError):
        cut_norm_exact(u)


def test_heuristic_matches_exact_small():
    rng = np.random.default_rng(2)
    for _ in range(10):
        p = random_partition(rng, 8)
        u = SignedBlockKernel(p, rng.normal(size=(8, 8)))
        exact, _, _ = cut_norm_exact(u)
        lower, _, _ = cut_norm_heuristic(u, restarts=50, seed=0)
        assert lower <= exact + 1e-12
        assert lower == pytest.approx(exact, abs=1e-10)


def test_heuristic_rank_one_optimum():
    rng = np.random.default_rng(3)
    p = random_partition(rng, 6)
    a, b = rng.normal(size=6), rng.normal(size=6)
    u = SignedBlockKernel(p, np.outer(a, b))
    pw = p.weights()
    pa, na = (pw * a)[a > 0].sum(), -(pw * a)[a < 0].sum()
    pb, nb = (pw * b)[b > 0].sum(), -(pw * b)[b < 0].sum()
    expected = max(pa * pb, pa * nb, na * pb, na * nb)
    got, _, _ = cut_norm_heuristic(u, restarts=50, seed=0)
    assert got == pytest.approx(expected, abs=1e-12)


def test_heuristic_deterministic():
    rng = np.random.default_rng(4)
    u = SignedBlockKernel(uniform(12), rng.normal(size=(12, 12)))
    first = cut_norm_heuristic(u, restarts=20, seed=7)[0]
    second = cut_norm_heuristic(u, restarts=20, seed=7)[0]
    assert first == second


def test_cut_norm_negation_symmetry():
    rng = np.random.default_rng(5)
    u = SignedBlockKernel(uniform(5), rng.normal(size=(5, 5)))
    neg = SignedBlockKernel(uniform(5), -u.values)
    assert cut_norm_exact(u)[0] == pytest.approx(cut_norm_exact(neg)[0], abs=1e-14)


def test_cut_norm_below_l1():
    rng = np.random.default_rng(6)
    p = random_partition(rng, 6)
    u = SignedBlockKernel(p, rng.normal(size=(6, 6)))
    mass = np.outer(p.weights(), p.weights())
    assert cut_norm_exact(u)[0] <= (mass * np.abs(u.values)).sum() + 1e-12


def test_bound_arithmetic():
    assert bound_one_step(0.0, 0.1).bound == pytest.approx(0.4)
    assert bound_one_step(0.25, 0.0).bound == pytest.approx(0.25)
    assert bound_dynamic(5, 0.01).bound == pytest.approx(0.2)
    assert bound_dynamic(1000, 0.01).bound == 2.0
    assert bound_discounted(1.0, 0.5, 0.1).bound == pytest.approx(0.8)
    assert bound_discounted(1.0, 1e-9, 0.1).bound == pytest.approx(0.0, abs=1e-9)
    assert bound_two_kernel_discounted(1, 0.5, 0.0, 0.1).bound == pytest.approx(0.8)
    assert bound_two_kernel_discounted(1, 0.5, 0.2, 0.0).bound == pytest.approx(0.2)


def test_bound_partition_arithmetic():
    meta = LipschitzMeta(1.0, uniform(1), 2.0)
    assert bound_partition(meta, 10).bound == pytest.approx(0.22)
    vals = [bound_partition(meta, n).bound for n in (1, 2, 4, 8, 16, 64)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_one_step_bound_holds_on_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = random_partition(rng, 4)
        w, v = random_block_kernel(rng, p), random_block_kernel(rng, p)
        f = random_opinions(rng, p)
        cut = cut_norm_exact(block_difference(w, v))[0]
        measured = l1_distance(apply(w, f), apply(v, f))
        assert measured <= bound_one_step(0.0, cut).bound + 1e-12


def test_partition_bound_on_smooth_kernel():
    for a in (0.2, 0.5):
        k = catalog(f"bilinear:{a}")
        for n in (2, 4, 8, 16):
            fine = discretize_kernel(k, uniform(2 * n))
            coarse = refine_block(discretize_kernel(k, uniform(n)), uniform(2 * n))
            u = SignedBlockKernel(uniform(2 * n), fine.values - coarse.values)
            cut = (
                cut_norm_exact(u)[0]
                if 2 * n <= 22
                else cut_norm_heuristic(u, restarts=30, seed=0)[0]
            )
            assert cut <= bound_partition(k.meta, n).bound + 1e-12


def test_min_partition_size_examples():
    meta = LipschitzMeta(1.0, uniform(1), 2.0)
    n0 = min_partition_size(0.1, meta)
    assert n0 == 81
    # returned size satisfies the guarantee, the previous one does not
    assert 4 * bound_partition(meta, n0).bound < 0.1
    assert 4 * bound_partition(meta, n0 - 1).bound >= 0.1


def test_min_partition_size_flat_kernel_limit():
    meta = LipschitzMeta(0.0, uniform(1), 2.0)
    eta = 0.05
    n0 = min_partition_size(eta, meta)
    assert n0 == int(np.floor(2 * np.sqrt(meta.bound / eta))) + 1


def test_min_partition_size_rejects_bad_eta():
    with pytest.raises(InvalidArgumentError):
        min_partition_size(0.0, LipschitzMeta(1.0, uniform(1), 2.0))
