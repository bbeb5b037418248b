import json
import math

import numpy as np
import pytest

from pgsim import (
    BurrXIIACS,
    CrossCorrelationModel,
    FGNACS,
    GenLogACS,
    MarkovianACS,
    ParetoIIACS,
    WeibullACS,
    acs_from_dict,
    empirical_acs,
    empirical_cross_corr,
    fit_acs,
    fit_ar,
)
from pgsim.errors import DomainError, ParameterError, SpecError

TAUS = np.arange(0.0, 51.0)

ALL_MODELS = [
    WeibullACS(80.6, 0.73),
    ParetoIIACS(1.7, 0.68),
    BurrXIIACS(3.0, 1.4, 0.5),
    GenLogACS(2.0, 1.5),
    FGNACS(0.75),
    MarkovianACS(0.8),
]


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.family)
def test_rho0_is_one_and_decreasing(model):
    vals = model(TAUS)
    assert vals[0] == pytest.approx(1.0, abs=1e-14)
    assert np.all(np.diff(vals) < 1e-12)
    assert np.all(vals >= 0)  # positive-correlation families in scope


def test_weibull_acs_markovian_special_case():
    b = 4.0
    w = WeibullACS(b, 1.0)
    tau = np.arange(0.0, 30.0)
    assert np.abs(w(tau) - np.exp(-tau / b)).max() < 1e-15


def test_fgn_half_is_white_noise():
    assert FGNACS(0.5)(3.0) == pytest.approx(0.0, abs=1e-14)
    assert FGNACS(0.5)(1.0) == pytest.approx(0.0, abs=1e-14)


def test_fgn_closed_form_value():
    assert FGNACS(0.75)(1.0) == pytest.approx(math.sqrt(2) - 1, abs=1e-12)


def test_burrxii_equals_paretoii_at_c1_one():
    b, c = 2.5, 0.7
    bx = BurrXIIACS(b, 1.0, c)
    pii = ParetoIIACS(b, c)
    assert np.abs(bx(TAUS) - pii(TAUS)).max() < 1e-14


def test_burrxii_weibull_limit_small_c2():
    b, c1 = 3.0, 0.8
    c2 = 1e-8
    bx = BurrXIIACS(b, c1, c2)
    w = WeibullACS(b * c1 ** (1 / c1), c1)
    assert np.abs(bx(TAUS) - w(TAUS)).max() < 1e-6


def test_genlog_markovian_limit():
    b = 5.0
    gl = GenLogACS(b, 1e-8)
    tau = np.arange(0.0, 40.0)
    assert np.abs(gl(tau) - np.exp(-tau / b)).max() < 1e-6


def test_paretoii_decays_slower_than_markovian():
    b = 3.0
    tau = np.arange(1.0, 200.0)
    markov = np.exp(-tau / b)
    for c in (0.1, 0.5, 1.0, 2.0):
        assert np.all(ParetoIIACS(b, c)(tau) >= markov - 1e-14)


def test_fgn_asymptotic_slope():
    H = 0.75
    tau = np.logspace(3, 4, 40)
    vals = FGNACS(H)(tau)
    slope = np.polyfit(np.log(tau), np.log(vals), 1)[0]
    assert slope == pytest.approx(2 * H - 2, rel=0.05)


def test_parameter_domains():
    for bad in ((0, 1), (1, 0), (-2, 1)):
        with pytest.raises(ParameterError):
            WeibullACS(*bad)
    with pytest.raises(ParameterError):
        FGNACS(1.0)
    with pytest.raises(ParameterError):
        MarkovianACS(1.0)
    with pytest.raises(DomainError):
        WeibullACS(1, 1)(-1.0)


# -- cross-correlation structures ---------------------------------------------

def test_ccs_value_at_zero():
    m = CrossCorrelationModel(WeibullACS(2, 1))
    assert m(0.0) == pytest.approx(math.exp(-0.5), abs=1e-14)


def test_ccs_asymmetry_with_distinct_branches():
    pos = WeibullACS(2, 1)
    neg = WeibullACS(4, 0.5)  # same rho(1) = exp(-1/2), slower decay
    assert pos(1.0) == pytest.approx(neg(1.0), abs=1e-12)
    m = CrossCorrelationModel(pos, neg)
    assert m(1.0) != pytest.approx(m(-1.0), abs=1e-6)
    assert m(0.0) == pytest.approx(pos(1.0), abs=1e-14)


def test_ccs_branch_disagreement_rejected():
    with pytest.raises(ParameterError):
        CrossCorrelationModel(WeibullACS(2, 1), WeibullACS(3, 1))


# -- empirical estimation -----------------------------------------------------

def test_empirical_acs_alternating_series():
    x = np.tile([1.0, -1.0], 500)
    rho = empirical_acs(x, 2)
    assert rho[0] == 1.0
    assert rho[1] == pytest.approx(-1.0, abs=2e-3)


def test_empirical_acs_iid_near_zero():
    n = 1_000_000
    x = np.random.default_rng(11).standard_normal(n)
    rho = empirical_acs(x, 1)
    assert abs(rho[1]) < 3 / math.sqrt(n)


def test_empirical_acs_ar1():
    model = fit_ar([0.8], 1)
    x = model.simulate(1_000_000, seed=21)
    rho = empirical_acs(x, 1)
    assert rho[1] == pytest.approx(0.8, abs=0.01)


def test_empirical_acs_errors_and_warning():
    with pytest.raises(DomainError):
        empirical_acs(np.ones(100), 3)
    with pytest.raises(SpecError):
        empirical_acs(np.arange(5.0), 2)
    with pytest.warns(UserWarning):
        empirical_acs(np.random.default_rng(0).standard_normal(30), 15)


def test_empirical_cross_corr_lags():
    rng = np.random.default_rng(3)
    y = rng.standard_normal(200_000)
    x = np.roll(y, 1)  # x(t) = y(t-1)
    assert empirical_cross_corr(x, y, 1) == pytest.approx(1.0, abs=1e-4)
    assert abs(empirical_cross_corr(x, y, 0)) < 0.01


# -- ACS fitting ---------------------------------------------------------------

def test_fit_acs_noiseless_weibull_recovery():
    target = WeibullACS(80.6, 0.73)
    emp = target(np.arange(1.0, 301.0))
    fitted = fit_acs(emp, "WeibullACS")
    assert fitted.b == pytest.approx(80.6, abs=1e-4)
    assert fitted.c == pytest.approx(0.73, abs=1e-6)


def test_fit_acs_markovian_target_with_paretoii_family():
    # ParetoII ACS collapses to Markovian as c -> 0
    emp = 0.8 ** np.arange(1.0, 51.0)
    fitted = fit_acs(emp, "ParetoII_ACS")
    assert fitted.c < 0.05
    assert np.abs(fitted(np.arange(1.0, 51.0)) - emp).max() < 5e-3


def test_fit_acs_noisy_simulation():
    target = WeibullACS(10.0, 0.9)
    model = fit_ar(target, 60)
    x = model.simulate(400_000, seed=33)
    emp = empirical_acs(x, 60)
    fitted = fit_acs(emp[1:], "WeibullACS")
    assert fitted.b == pytest.approx(10.0, rel=0.10)
    assert fitted.c == pytest.approx(0.9, rel=0.10)


def test_fit_acs_exp_weights_and_errors():
    emp = WeibullACS(5, 1.2)(np.arange(1.0, 40.0))
    fitted = fit_acs(emp, "WeibullACS", weights="exp")
    assert fitted.b == pytest.approx(5.0, rel=1e-3)
    with pytest.raises(SpecError):
        fit_acs(emp[:2], "WeibullACS")
    with pytest.raises(SpecError):
        fit_acs(emp, "NoSuchFamily")


def test_acs_json_roundtrip():
    m = BurrXIIACS(3.0, 1.4, 0.5)
    m2 = acs_from_dict(json.loads(json.dumps(m.to_dict())))
    assert m2.params == m.params
    assert m2.family == m.family
