"""Shared fixture builders for the test suite."""

import numpy as np

import bmland
from bmland import LossSpec


def path_instance(n, gamma=0.0, seed=0):
    """Rank-1 instance on the path-with-self-loops pattern, optionally
    perturbed; S is the greedy maximal independent set (odd vertices)."""
    g = bmland.build_named_pattern("example1_path", n=n)
    omega = bmland.induce_measurement_set(g, n, 1)
    s = sorted(bmland.analyze_graph(g).max_independent_set)
    x0 = bmland.build_canonical_ground_truth(g, s, n, 1)
    x = bmland.perturb(x0, gamma, seed) if gamma else x0
    return bmland.assemble_instance(x, omega, g, s)


def star_rank2_instance(gamma=0.05, seed=13):
    """m=4 star with hub 4, self-loops and a connected off-diagonal tree on
    S={1,2,3}; rank-2 canonical ground truth, perturbed."""
    g = bmland.BlockSparsityGraph(
        4,
        frozenset({(1, 4), (2, 4), (3, 4), (1, 1), (2, 2), (3, 3)}),
        frozenset({(1, 2), (2, 3)}),
    )
    s = [1, 2, 3]
    omega = bmland.induce_measurement_set(g, 8, 2)
    x0 = bmland.build_canonical_ground_truth(g, s, 8, 2)
    x = bmland.perturb(x0, gamma, seed) if gamma else x0
    return bmland.assemble_instance(x, omega, g, s)


def random_instance(rng, n_max=30):
    """Random in-class instance with a generic factor, for derivative checks."""
    r = int(rng.integers(1, 4))
    m = int(rng.integers(3, max(4, n_max // r) + 1))
    n = m * r
    s_size = max(1, m // 3)
    s = sorted(rng.choice(np.arange(1, m + 1), size=s_size, replace=False).tolist())
    g = bmland.build_erdos_renyi(m, 0.4, s, seed=int(rng.integers(1 << 31)))
    omega = bmland.induce_measurement_set(g, n, r)
    x_star = bmland.random_block_factor(m, r, seed=int(rng.integers(1 << 31)), n=n)
    return bmland.assemble_instance(x_star, omega, g, s)


L2 = LossSpec.l2()
