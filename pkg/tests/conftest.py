import numpy as np
import pytest

from dikernel import (
    BlockKernel,
    IntervalPartition,
    OpinionFunction,
    WeightedDeGrootModel,
    lift,
    uniform,
)

EXAMPLE1_MATRIX = np.array([[0.0, 0.5, 0.5], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
EXAMPLE1_OPINIONS = np.array([0.5, 0.3, 0.8])

EXAMPLE2_MATRIX = np.array([[0.0, 1.0, 0.0], [0.0, 0.5, 0.5], [1.0, 0.0, 0.0]])
EXAMPLE2_PARTITION = IntervalPartition((0.0, 1 / 6, 1 / 2, 1.0))

EXAMPLE9_MATRIX = np.array(
    [
        [0, 1 / 2, 1 / 2, 0, 0, 0],
        [1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1 / 3, 1 / 3, 1 / 3],
        [0, 1 / 4, 1 / 4, 0, 1 / 4, 1 / 4],
        [0, 0, 0, 0, 0, 1],
        [0, 1 / 4, 1 / 4, 1 / 4, 1 / 4, 0],
    ],
    dtype=float,
)


def random_stochastic_matrix(rng, n, floor=0.0):
    raw = rng.random((n, n)) + floor
    return raw / raw.sum(axis=1, keepdims=True)


def random_model(rng, n, with_opinions=True):
    matrix = random_stochastic_matrix(rng, n)
    weights = rng.random(n) + 0.2
    weights = weights / weights.sum()
    # re-normalize exactly so the 1e-12 contracts hold
    weights[-1] = 1.0 - weights[:-1].sum()
    opinions = rng.uniform(-1, 1, n) if with_opinions else None
    return WeightedDeGrootModel(matrix, weights, opinions)


def random_partition(rng, j):
    cuts = np.sort(rng.uniform(0.05, 0.95, j - 1))
    return IntervalPartition((0.0, *cuts, 1.0))


def random_block_kernel(rng, partition, gamma=0.0):
    p = partition.weights()
    raw = rng.random((partition.ncells, partition.ncells)) + 0.05
    values = raw / (raw @ p)[:, None]
    if gamma > 0:
        values = (1 - gamma) * values + gamma
    return BlockKernel(partition, values)


def random_opinions(rng, partition):
    return OpinionFunction(rng.uniform(-1, 1, partition.ncells), partition=partition)


@pytest.fixture
def example1_kernel():
    model = WeightedDeGrootModel(EXAMPLE1_MATRIX, np.full(3, 1 / 3))
    kernel, _ = lift(model, uniform(3))
    return kernel
