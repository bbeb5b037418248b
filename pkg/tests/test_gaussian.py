import math

import numpy as np
import pytest
from scipy.linalg import toeplitz

from pgsim import (
    ArModel,
    SumAr1Model,
    WeibullACS,
    ar_extrapolate_acs,
    empirical_acs,
    empirical_cross_corr,
    fit_ar,
    fit_mar1,
    fit_sum_ar1,
    levinson_durbin,
    simulate_ar,
    simulate_mar1,
    simulate_sum_ar1,
)
from pgsim.errors import NotPositiveDefiniteError, ParameterError, SpecError

from conftest import pd_toeplitz_head


# -- Yule-Walker ---------------------------------------------------------------

def test_markovian_head_gives_ar1():
    m = fit_ar(0.8 ** np.arange(1, 4), 3)
    assert m.coeffs == pytest.approx([0.8, 0.0, 0.0], abs=1e-12)
    assert m.noise_var == pytest.approx(0.36, abs=1e-12)


def test_white_noise_head():
    m = fit_ar(np.zeros(5), 5)
    assert np.all(m.coeffs == 0)
    assert m.noise_var == 1.0


@pytest.mark.parametrize("p", [10, 100, 1000])
def test_yule_walker_exactness(p):
    head = np.atleast_1d(WeibullACS(10, 0.5)(np.arange(1.0, p + 1)))
    m = fit_ar(head, p)
    col = np.concatenate([[1.0], head[:-1]])
    residual = toeplitz(col) @ m.coeffs - head
    assert np.abs(residual).max() < 1e-8
    # model ACS equals the head within the fitted range
    assert np.abs(ar_extrapolate_acs(m, head, p) - head).max() < 1e-12


@pytest.mark.parametrize("p", [8, 64, 512])
def test_levinson_matches_dense_solve(p):
    head = pd_toeplitz_head(p, seed=p)
    a, s2, _ = levinson_durbin(head)
    col = np.concatenate([[1.0], head[:-1]])
    dense = np.linalg.solve(toeplitz(col), head)
    assert np.abs(a - dense).max() < 1e-10
    assert s2 == pytest.approx(1.0 - float(dense @ head), abs=1e-10)


def test_near_unit_root_falls_back_to_dense():
    rho1 = 1.0 - 1e-12
    a, s2, ks = levinson_durbin(np.array([rho1]))
    assert ks is None  # dense fallback was taken
    assert a[0] == pytest.approx(rho1, abs=1e-15)
    assert s2 > 0


def test_invalid_head_raises():
    with pytest.raises(NotPositiveDefiniteError):
        fit_ar(np.array([0.99, 0.0]), 2)


def test_stationarity_check():
    m = fit_ar(0.95 ** np.arange(1, 11), 10)
    assert m.is_stationary()
    with pytest.raises(NotPositiveDefiniteError):
        ArModel(np.array([0.5]), -1.0)


# -- ACS extrapolation ----------------------------------------------------------

def test_extrapolate_markovian_continues_exactly():
    head = 0.8 ** np.arange(1, 6)
    m = fit_ar(head, 5)
    ext = ar_extrapolate_acs(m, head, 50)
    assert np.abs(ext - 0.8 ** np.arange(1, 51)).max() < 1e-10


def test_extrapolate_zero_model():
    m = fit_ar(np.zeros(4), 4)
    ext = ar_extrapolate_acs(m, np.zeros(4), 20)
    assert np.all(ext[4:] == 0)


def test_extrapolation_error_shrinks_with_order():
    target_model = WeibullACS(10, 0.5)
    tau = np.arange(1.0, 3001.0)
    target = np.atleast_1d(target_model(tau))
    devs = []
    for p in (10, 100, 1000):
        head = target[:p]
        m = fit_ar(head, p)
        ext = ar_extrapolate_acs(m, head, 3000)
        devs.append(np.abs(ext - target).max())
    assert devs[0] > devs[1] > devs[2]


def test_extrapolation_matches_long_simulation():
    target = WeibullACS(10, 0.5)
    p = 100
    head = np.atleast_1d(target(np.arange(1.0, p + 1)))
    m = fit_ar(head, p)
    x = m.simulate(2_000_000, seed=17)
    emp = empirical_acs(x, 200)
    ext = ar_extrapolate_acs(m, head, 200)
    assert np.abs(emp[1:] - ext).max() < 0.02


# -- AR simulation ---------------------------------------------------------------

def test_simulate_iid():
    m = fit_ar(np.zeros(1), 1)
    n = 200_000
    x = simulate_ar(m, n, seed=1)
    assert abs(x.mean()) < 3 / math.sqrt(n)
    assert x.var() == pytest.approx(1.0, abs=5 / math.sqrt(n))


def test_simulate_ar1_lag1():
    m = fit_ar([0.8], 1)
    x = m.simulate(1_000_000, seed=2)
    assert empirical_acs(x, 1)[1] == pytest.approx(0.8, abs=0.01)


def test_simulate_deterministic_under_seed():
    m = fit_ar([0.7, 0.1], 2)
    a = m.simulate(1000, seed=99)
    b = m.simulate(1000, seed=99)
    assert np.array_equal(a, b)
    c = m.simulate(1000, seed=100)
    assert not np.array_equal(a, c)


def test_simulate_gaussianity():
    m = fit_ar([0.6], 1)
    n = 1_000_000
    x = m.simulate(n, seed=5)
    skew = float(np.mean(((x - x.mean()) / x.std()) ** 3))
    kurt = float(np.mean(((x - x.mean()) / x.std()) ** 4))
    assert abs(skew) < 4 * math.sqrt(6 / n) * math.sqrt(1 / (1 - 0.6**2)) + 0.01
    assert abs(kurt - 3) < 4 * math.sqrt(24 / n) * math.sqrt(1 / (1 - 0.6**2)) + 0.05


def test_simulate_block_continuation():
    m = fit_ar(0.9 ** np.arange(1, 4), 3)
    rng1 = np.random.default_rng(8)
    whole, _ = m.simulate_block(500, rng1, state=None)
    rng2 = np.random.default_rng(8)
    first, state = m.simulate_block(200, rng2, state=None)
    second, _ = m.simulate_block(300, rng2, state=state)
    assert np.allclose(np.concatenate([first, second]), whole, atol=1e-12)


# -- sum of AR(1) -----------------------------------------------------------------

def test_sum_ar1_single_component_exact():
    m = fit_sum_ar1(0.8 ** np.arange(1.0, 101.0), 1)
    assert m.lag1[0] == pytest.approx(0.8, abs=1e-6)
    assert m.variances[0] == pytest.approx(1.0, abs=1e-12)
    tau = np.arange(1.0, 101.0)
    assert np.abs(m.acs(tau) - 0.8**tau).max() < 1e-6


def test_sum_ar1_zero_target():
    m = fit_sum_ar1(np.zeros(50), 3)
    assert np.all(m.lag1 == 0)
    assert m.variances.sum() == pytest.approx(1.0)
    assert m.acs(np.array([1.0, 5.0])) == pytest.approx([0.0, 0.0], abs=1e-12)


def test_sum_ar1_slow_acs_approximation():
    # long-memory-like target over three decades of lags
    from pgsim import FGNACS

    target = np.atleast_1d(FGNACS(0.9)(np.arange(1.0, 1001.0)))
    m = fit_sum_ar1(target, 5)
    err = np.abs(m.acs(np.arange(1.0, 1001.0)) - target).max()
    assert err < 0.01


def test_sum_ar1_simulation_matches_mixture():
    m = SumAr1Model(np.array([0.95, 0.5]), np.array([0.4, 0.6]))
    x = simulate_sum_ar1(m, 1_000_000, seed=3)
    assert x.var() == pytest.approx(1.0, abs=0.01)
    emp = empirical_acs(x, 10)
    assert np.abs(emp[1:] - np.atleast_1d(m.acs(np.arange(1.0, 11.0)))).max() < 0.01


def test_sum_ar1_validation():
    with pytest.raises(ParameterError):
        SumAr1Model(np.array([0.5]), np.array([0.9]))  # variances must sum to 1
    with pytest.raises(ParameterError):
        SumAr1Model(np.array([1.0]), np.array([1.0]))  # lag1 must be < 1


# -- MAR(1) -----------------------------------------------------------------------

def test_mar1_white_noise():
    K0 = np.array([[1.0, 0.3], [0.3, 1.0]])
    model = fit_mar1(K0, np.zeros((2, 2)))
    assert np.all(model.A == 0)
    assert model.B @ model.B.T == pytest.approx(K0, abs=1e-12)


def test_mar1_scalar_reduces_to_ar1():
    model = fit_mar1(np.array([[1.0]]), np.array([[0.6]]))
    assert model.A[0, 0] == pytest.approx(0.6, abs=1e-12)
    assert model.B[0, 0] == pytest.approx(math.sqrt(1 - 0.36), abs=1e-12)


def test_mar1_reproduces_parent_matrices():
    KZ0 = np.array(
        [[1.0, 0.69, 0.71], [0.69, 1.0, 0.70], [0.71, 0.70, 1.0]]
    )
    KZ1 = np.array(
        [[0.49, 0.38, 0.27], [0.17, 0.44, 0.40], [0.21, 0.34, 0.51]]
    )
    model = fit_mar1(KZ0, KZ1)
    assert model.implied_lag1() == pytest.approx(KZ1, abs=1e-8)
    assert np.diag(model.stationary_cov()) == pytest.approx(np.ones(3), abs=1e-6)

    z = simulate_mar1(model, 1_000_000, seed=12)
    n = z.shape[1]
    K0_emp = np.corrcoef(z.T)
    K1_emp = np.array(
        [
            [empirical_cross_corr(z[:, i], z[:, j], 1) for j in range(n)]
            for i in range(n)
        ]
    )
    assert np.abs(K0_emp - KZ0).max() < 0.01
    assert np.abs(K1_emp - KZ1).max() < 0.01


def test_mar1_marginals_standard_gaussian():
    model = fit_mar1(
        np.array([[1.0, 0.5], [0.5, 1.0]]), np.array([[0.4, 0.2], [0.1, 0.3]])
    )
    z = model.simulate(500_000, seed=4)
    assert z.mean(axis=0) == pytest.approx([0, 0], abs=0.01)
    assert z.var(axis=0) == pytest.approx([1, 1], abs=0.01)


def test_mar1_input_validation():
    with pytest.raises(SpecError):
        fit_mar1(np.array([[1.0, 0.5], [0.4, 1.0]]), np.zeros((2, 2)))
    with pytest.raises(NotPositiveDefiniteError):
        fit_mar1(np.array([[1.0, 1.0], [1.0, 1.0]]), np.zeros((2, 2)))
    with pytest.raises(NotPositiveDefiniteError), pytest.warns(UserWarning):
        # lag-1 equal to lag-0 forces A = I: not stationary (the zero
        # noise covariance also trips the eigenvalue-clip warning)
        K0 = np.array([[1.0, 0.2], [0.2, 1.0]])
        fit_mar1(K0, K0)


def test_mar1_seed_determinism():
    model = fit_mar1(np.eye(2), np.zeros((2, 2)))
    assert np.array_equal(model.simulate(100, seed=1), model.simulate(100, seed=1))
