import numpy as np
import pytest

import bmland
from bmland.errors import DimensionMismatch

import helpers


def test_full_observation_finds_no_pair():
    x = np.random.default_rng(2).standard_normal((4, 1))
    inst = bmland.assemble_instance(x, bmland.full_measurement_set(4))
    est = bmland.estimate_complexity_metric(inst, bmland.MetricBudget(10, 800), seed=1)
    assert not est.found
    assert est.value is None and est.witness_pair is None


def test_unperturbed_instance_has_zero_distance_witness():
    inst = helpers.path_instance(4)
    est = bmland.estimate_complexity_metric(inst, bmland.MetricBudget(15, 1000), seed=1)
    assert est.found and est.value <= 1e-6
    x1, x2 = est.witness_pair
    w = inst.omega.mask()
    # witness pair agrees on the observed entries but differs overall
    assert np.linalg.norm((x1 @ x1.T - x2 @ x2.T) * w) <= 1e-6 * (1 + inst.omega_scale())
    d = np.linalg.norm(x1 @ x1.T - x2 @ x2.T)
    assert est.separation_achieved == pytest.approx(d)
    assert d >= 1e-3 * np.linalg.norm(inst.m_star())


def test_budget_monotonicity():
    inst = helpers.path_instance(4, gamma=0.1, seed=9)
    small = bmland.estimate_complexity_metric(inst, bmland.MetricBudget(10, 800), seed=1)
    big = bmland.estimate_complexity_metric(inst, bmland.MetricBudget(20, 800), seed=1)
    if small.found:
        assert big.found
        assert big.value <= small.value + 1e-12


def test_budget_validation():
    with pytest.raises(DimensionMismatch):
        bmland.MetricBudget(restarts=1)
    with pytest.raises(DimensionMismatch):
        bmland.MetricBudget(iters=0)
    inst = helpers.path_instance(4)
    with pytest.raises(DimensionMismatch):
        bmland.estimate_complexity_metric(inst, bmland.MetricBudget(), separation=-1.0)
