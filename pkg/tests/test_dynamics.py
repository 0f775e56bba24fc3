import numpy as np
import pytest

from dikernel import (
    BlockKernel,
    OpinionFunction,
    catalog,
    consensus,
    discounted_utility,
    discretize_kernel,
    gamma_mixing,
    stage_utility,
    stationary_density,
    uniform,
)
from dikernel.dynamics import adjoint_apply
from dikernel.errors import ContractError, NonConvergenceError
from conftest import random_block_kernel, random_opinions, random_partition


def test_unitype_density_is_fixed_immediately():
    h = np.array([0.5, 1.5])
    w = BlockKernel(uniform(2), np.tile(h, (2, 1)))
    sd = stationary_density(w)
    np.testing.assert_allclose(sd.density, h, atol=1e-12)


def test_constant_kernel_gives_uniform_density():
    w = BlockKernel(uniform(4), np.ones((4, 4)))
    sd = stationary_density(w)
    np.testing.assert_allclose(sd.density, 1.0, atol=1e-12)


def test_irreducible_aperiodic_kernel_density(example1_kernel):
    sd = stationary_density(example1_kernel)
    np.testing.assert_allclose(sd.density, [1.2, 1.2, 0.6], atol=1e-9)


def test_fixed_point_residual():
    rng = np.random.default_rng(0)
    w = random_block_kernel(rng, random_partition(rng, 5), gamma=0.2)
    sd = stationary_density(w, tol=1e-13)
    again = adjoint_apply(w, sd.density)
    masses = w.partition.weights()
    assert float(masses @ np.abs(again - sd.density)) <= 1e-12


def test_periodic_kernel_reports_non_convergence():
    flip = BlockKernel(uniform(2), 2.0 * np.array([[0.0, 1.0], [1.0, 0.0]]))
    f0 = OpinionFunction(np.array([1.0, -1.0]), partition=uniform(2))
    with pytest.raises(NonConvergenceError) as err:
        consensus(flip, f0, max_iter=200)
    assert err.value.partial is not None


def test_doeblin_contraction_rate():
    rng = np.random.default_rng(1)
    w = random_block_kernel(rng, uniform(4), gamma=0.3)
    masses = w.partition.weights()
    h = rng.random(4)
    h = h / (masses @ h)
    sd = stationary_density(w, tol=1e-13)
    prev = float(masses @ np.abs(h - sd.density))
    for _ in range(10):
        h = adjoint_apply(w, h)
        cur = float(masses @ np.abs(h - sd.density))
        if prev > 1e-13:
            assert cur <= (1 - gamma_mixing(w)) * prev + 1e-6
        prev = cur


def test_consensus_constant_kernel():
    w = BlockKernel(uniform(3), np.ones((3, 3)))
    f0 = OpinionFunction(np.array([0.5, 0.3, 0.8]), partition=uniform(3))
    report = consensus(w, f0)
    assert report.value == pytest.approx(8 / 15, abs=1e-12)
    assert report.certified


def test_consensus_unitype_linear_density():
    w = discretize_kernel(catalog("unitype2y"), uniform(256))
    mids = (np.arange(256) + 0.5) / 256
    f0 = OpinionFunction(mids, partition=uniform(256))
    report = consensus(w, f0)
    assert report.value == pytest.approx(2 / 3, abs=1e-3)


def test_geometric_envelope(example1_kernel):
    rng = np.random.default_rng(2)
    blended = BlockKernel(uniform(3), 0.5 * example1_kernel.values + 0.5)
    f0 = random_opinions(rng, uniform(3))
    report = consensus(blended, f0)
    assert report.gamma == pytest.approx(0.5)
    for t, d in enumerate(report.sup_distances):
        assert d <= 2.0 * (1 - report.gamma) ** t + 1e-9


def test_consensus_independent_of_start_density():
    rng = np.random.default_rng(3)
    w = random_block_kernel(rng, random_partition(rng, 4), gamma=0.15)
    f0 = random_opinions(rng, w.partition)
    value = consensus(w, f0).value
    # long trajectory converges to the same constant
    f = f0
    from dikernel import apply

    for _ in range(200):
        f = apply(w, f)
    assert np.max(np.abs(f.values - value)) < 1e-9


def test_stage_utility_values():
    f = OpinionFunction(np.ones(2), partition=uniform(2))
    psi = np.ones(2)
    assert stage_utility(f, psi, 1) == 1.0
    assert stage_utility(f, psi, -1) == -1.0
    f = OpinionFunction(np.array([0.5, 0.3, 0.8]), partition=uniform(3))
    assert stage_utility(f, np.ones(3), 1) == pytest.approx(8 / 15, abs=1e-12)


def test_stage_utility_validates_psi():
    f = OpinionFunction(np.zeros(2), partition=uniform(2))
    with pytest.raises(ContractError):
        stage_utility(f, np.array([2.0, 1.0]), 1)
    with pytest.raises(ContractError):
        stage_utility(f, np.array([-0.5, 2.5]), 1)


def test_discounted_utility_constant_opinions():
    w = BlockKernel(uniform(2), np.ones((2, 2)))
    f = OpinionFunction(np.ones(2), partition=uniform(2))
    for delta in (0.3, 0.9):
        got = discounted_utility(w, f, np.ones(2), 1, delta, tol=1e-12)
        assert got == pytest.approx(delta, abs=1e-10)


def test_discounted_utility_consensus_tail():
    rng = np.random.default_rng(4)
    w = random_block_kernel(rng, uniform(4), gamma=0.4)
    f0 = random_opinions(rng, uniform(4))
    f_star = consensus(w, f0).value
    got = discounted_utility(w, f0, np.ones(4), 1, 0.95, tol=1e-12)
    # after fast consensus the series is close to the geometric closed form
    assert got == pytest.approx(0.95 * f_star, abs=0.05)


def test_discounted_utility_monotone_in_f():
    rng = np.random.default_rng(5)
    w = random_block_kernel(rng, uniform(4))
    f = random_opinions(rng, uniform(4))
    g = OpinionFunction(np.clip(f.values - 0.1, -1, 1), partition=uniform(4))
    uf = discounted_utility(w, f, np.ones(4), 1, 0.8)
    ug = discounted_utility(w, g, np.ones(4), 1, 0.8)
    assert uf >= ug - 1e-12
