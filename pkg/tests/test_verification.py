import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from owgame.model import GridSpec, ModelParams, ParameterError
from owgame.solver import StrategyProfile, assemble_profile, dense_equilibrium, solve_equilibrium
from owgame.verification import (
    best_response_probe,
    corrupt_profile,
    full_audit,
    kkt_audit,
    stationarity_vectors,
)


def P(x, theta=0.1, rhoT=1.0):
    return ModelParams.create(rhoT, 1.0, theta, x)


def test_zero_profile_stationarity():
    p, g = P([0.0, 0.0, 0.0]), GridSpec.uniform(8, 1.0)
    res = kkt_audit(p, g, solve_equilibrium(p, g))
    assert res.multipliers == (0.0, 0.0, 0.0)
    assert res.max_spread == 0.0


def test_kkt_on_dense_equilibrium():
    p, g = P([1.0, -1.0]), GridSpec.uniform(20, 1.0)
    res = kkt_audit(p, g, dense_equilibrium(p, g))
    assert res.max_spread <= 1e-10
    assert res.aggregation_residual <= 1e-9


def test_multipliers_are_stationarity_levels():
    p, g = P([2.0, 0.0, 1.0]), GridSpec.uniform(30, 1.0)
    vec = solve_equilibrium(p, g)
    S = stationarity_vectors(p, g, vec)
    res = kkt_audit(p, g, vec)
    np.testing.assert_allclose(S, np.array(res.multipliers)[:, None] * np.ones_like(S), rtol=1e-12)


def test_corrupted_profile_flagged():
    p, g = P([2.0, 0.0, 1.0]), GridSpec.uniform(30, 1.0)
    bad = corrupt_profile(assemble_profile(p, solve_equilibrium(p, g)))
    assert kkt_audit(p, g, bad).max_spread > 1e-3


def test_probe_no_deviation():
    p, g = P([0.0, 0.0]), GridSpec.uniform(5, 1.0)
    r = best_response_probe(p, g, solve_equilibrium(p, g), trials=3)
    assert r.margin == 0.0 and r.identity_residual == 0.0


def test_probe_at_equilibrium():
    p, g = P([2.0, 0.0, 1.0]), GridSpec.uniform(50, 1.0)
    r = best_response_probe(p, g, solve_equilibrium(p, g), trials=100, seed=42)
    assert r.margin >= -1e-10
    assert r.identity_residual <= 1e-9


def test_probe_is_seeded():
    p, g = P([2.0, 0.0, 1.0]), GridSpec.uniform(20, 1.0)
    vec = solve_equilibrium(p, g)
    assert best_response_probe(p, g, vec, 10, 7) == best_response_probe(p, g, vec, 10, 7)
    assert best_response_probe(p, g, vec, 10, 7) != best_response_probe(p, g, vec, 10, 8)


def test_probe_rejects_zero_trials():
    p, g = P([1.0, 1.0]), GridSpec.uniform(5, 1.0)
    with pytest.raises(ParameterError):
        best_response_probe(p, g, solve_equilibrium(p, g), trials=0)


def test_uniform_profile_fails_a_certificate():
    p, g = P([1.0, 2.0, 3.0], theta=0.0), GridSpec.uniform(10, 1.0)
    prof = StrategyProfile(np.outer(p.x, np.full(11, 1 / 11)))
    kkt = kkt_audit(p, g, prof)
    probe = best_response_probe(p, g, prof, 100, 42)
    assert kkt.max_spread > 1e-9 or probe.margin < 0


@pytest.mark.parametrize(
    "x,theta",
    [([2.0, 0.0, 1.0], 0.1), ([2.0, 0.0, 1.0], 0.5), ([2.0, 0.0, 1.0], 0.0), ([1.0, -1.0, 3.0, 0.0, 2.0], 1.0)],
)
def test_full_audit_passes(x, theta):
    rep = full_audit(P(x, theta=theta), GridSpec.uniform(50, 1.0))
    assert rep.passed, rep
    assert rep.solver_gap is not None and rep.solver_gap <= 1e-9
    assert rep.seed == 42 and rep.trials == 100


def test_full_audit_corrupt_fails():
    rep = full_audit(P([2.0, 0.0, 1.0]), GridSpec.uniform(50, 1.0), corrupt=True)
    assert not rep.passed
    assert rep.kkt_spread > 1e-3 or rep.perturbation_margin < -1e-3


def test_full_audit_irregular_grid():
    p = P([1.0, 0.5])
    g = GridSpec.from_times(np.sort(np.r_[0.0, np.random.default_rng(3).uniform(0, 1, 15), 1.0]))
    rep = full_audit(p, g)
    assert rep.passed and rep.solver_gap is None and rep.profile_method == "dense"


def test_report_dict_keys():
    d = full_audit(P([1.0, 1.0]), GridSpec.uniform(10, 1.0), trials=5).to_dict()
    assert d["pass"] is True and "passed" not in d
    assert isinstance(d["multipliers"], list)


@given(
    x=st.lists(st.floats(-3, 3), min_size=2, max_size=6),
    theta=st.floats(0.0, 1.0),
    N=st.integers(1, 80),
)
def test_audit_property(x, theta, N):
    rep = full_audit(P(x, theta=theta), GridSpec.uniform(N, 1.0), trials=10)
    assert rep.passed, rep
