import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from owgame.model import (
    GridSpec,
    ModelParams,
    ParameterError,
    derived_scalars,
    grid_index,
)


def test_valid_params():
    p = ModelParams(n=2, rho=1.0, T=1.0, theta=0.1, inventories=[1, 1])
    assert p.inventories == (1.0, 1.0)
    assert p.xbar == 1.0


def test_single_trader_rejected():
    with pytest.raises(ParameterError, match="n >= 2"):
        ModelParams(n=1, rho=1.0, T=1.0, theta=0.0, inventories=[1.0])


def test_negative_theta_rejected():
    with pytest.raises(ParameterError, match="theta >= 0"):
        ModelParams.create(1.0, 1.0, -0.1, [1, 0, -1])


@pytest.mark.parametrize("kw", [dict(rho=0.0), dict(T=-1.0), dict(rho=math.nan), dict(inventories=[1.0, math.inf])])
def test_bad_fields(kw):
    base = dict(n=2, rho=1.0, T=1.0, theta=0.0, inventories=[1.0, 2.0])
    base.update(kw)
    with pytest.raises(ParameterError):
        ModelParams(**base)


def test_inventory_length_mismatch():
    with pytest.raises(ParameterError, match="length"):
        ModelParams(n=3, rho=1.0, T=1.0, theta=0.0, inventories=[1.0, 2.0])


def test_overflow_guard():
    with pytest.raises(ParameterError):
        ModelParams.create(400.0, 1.0, 0.0, [1.0, 1.0])


def test_replace_updates_n():
    p = ModelParams.create(1.0, 1.0, 0.0, [1, 2])
    q = p.replace(inventories=[1, 2, 3])
    assert q.n == 3 and q.xbar == 2.0


def test_uniform_grid():
    g = GridSpec.uniform(4, 2.0)
    np.testing.assert_allclose(g.times, [0, 0.5, 1.0, 1.5, 2.0])
    assert g.N == 4 and g.T == 2.0 and g.dt == 0.5 and g.equidistant
    with pytest.raises(ParameterError):
        GridSpec.uniform(0, 1.0)


def test_irregular_grid():
    g = GridSpec.from_times([0.0, 0.1, 0.5, 1.0])
    assert not g.equidistant and g.N == 3
    with pytest.raises(ParameterError):
        g.dt
    with pytest.raises(ParameterError):
        GridSpec.from_times([0.0, 0.5, 0.5])


def test_grid_index_examples():
    g = GridSpec.uniform(10, 1.0)
    assert grid_index(0.0, g) == (0, 0.0)
    assert grid_index(1.0, g) == (10, 0.0)
    k, eta = grid_index(0.31, g)
    assert k == 4 and eta == pytest.approx(0.9)
    with pytest.raises(ParameterError):
        grid_index(1.5, g)


@given(st.integers(1, 500), st.floats(0.0, 1.0))
def test_grid_index_brackets(N, s):
    g = GridSpec.uniform(N, 1.0)
    k, eta = grid_index(s, g)
    assert 0 <= eta < 1
    assert 0 <= k <= N
    assert k - eta == pytest.approx(N * s, abs=1e-9)


def test_derived_scalars():
    p = ModelParams.create(1.0, 1.0, 0.0, [2.0, 0.0, 1.0])
    d = derived_scalars(p, GridSpec.uniform(1, 1.0))
    assert d.alpha == pytest.approx(0.3678794, abs=1e-7)
    assert d.kappa == 1.0 and d.kappa_hat == 2.0 and d.kappa_tilde == 0.5
    assert d.xbar == 1.0
