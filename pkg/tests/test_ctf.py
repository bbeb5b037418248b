import math

import numpy as np
import pytest
from scipy import stats

from pgsim import (
    AUTO_RHO_GRID,
    Bernoulli,
    Beta,
    BurrIII,
    BurrXII,
    CtfCurve,
    Gaussian,
    GenGamma,
    MixedMarginal,
    ParetoII,
    PolyaAeppli,
    TransformGrid,
    Weibull,
    acti_evaluate,
    bivariate_normal_cdf,
    build_grid,
    ccti_evaluate,
    fit_ctf,
    rho_max,
)
from pgsim.errors import (
    DomainError,
    InfeasibleCorrelationError,
    InfiniteMomentError,
    IntegrationError,
    SpecError,
)

from conftest import mc_transformed_correlation


# -- bivariate normal cdf -----------------------------------------------------

def test_bvn_against_scipy():
    rng = np.random.default_rng(0)
    for _ in range(60):
        h, k = rng.normal(0, 2, size=2)
        rho = rng.uniform(-0.999, 0.999)
        ref = stats.multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]]).cdf(
            [h, k]
        )
        assert bivariate_normal_cdf(h, k, rho) == pytest.approx(ref, abs=1e-12)


def test_bvn_special_values():
    for rho in (-0.9, -0.3, 0.2, 0.7, 0.99):
        assert bivariate_normal_cdf(0.0, 0.0, rho) == pytest.approx(
            0.25 + math.asin(rho) / (2 * math.pi), abs=1e-12
        )
    assert bivariate_normal_cdf(0.3, 0.8, 1.0) == pytest.approx(
        stats.norm.cdf(0.3), abs=1e-14
    )
    assert bivariate_normal_cdf(0.3, 0.8, -1.0) == pytest.approx(
        stats.norm.cdf(0.3) + stats.norm.cdf(0.8) - 1.0, abs=1e-14
    )


# -- forward transform --------------------------------------------------------

def test_gaussian_identity():
    g = Gaussian(2.0, 3.0)
    for rho in AUTO_RHO_GRID:
        assert acti_evaluate(g, rho) == pytest.approx(rho, abs=1e-6)


def test_zero_correlation_is_exact():
    for m in (Weibull(1, 0.5), MixedMarginal(0.9, ParetoII(1, 0.3)), Bernoulli(0.25)):
        assert acti_evaluate(m, 0.0) == 0.0


def test_weibull_heavy_inflation_point():
    # frozen from converged quadrature; independently confirmed by the
    # MC oracle and a Hermite-series evaluation
    val = acti_evaluate(Weibull(1, 0.25), 0.93)
    assert val == pytest.approx(0.78774, abs=2e-4)
    r, se = mc_transformed_correlation(
        Weibull(1, 0.25), Weibull(1, 0.25), 0.93, n=1_000_000, seed=101
    )
    assert abs(val - r) < 3 * se


@pytest.mark.parametrize(
    "m,rho",
    [
        (GenGamma(16.5, 0.39, 0.97), 0.5),
        (BurrXII(2.13, 0.74, 0.22), 0.8),
        (MixedMarginal(0.9, ParetoII(1, 0.3)), 0.8),
        (PolyaAeppli(0.85, 0.15), 0.5),
        (Bernoulli(0.25), 0.8),
    ],
    ids=["gg", "burrxii", "mixed", "polya-aeppli", "bernoulli"],
)
def test_quadrature_matches_mc_oracle(m, rho):
    val = acti_evaluate(m, rho, check=True)
    r, se = mc_transformed_correlation(m, m, rho, n=1_000_000, seed=7)
    assert abs(val - r) < 3 * se


def test_bernoulli_closed_form_orthant():
    # both-discrete route must agree with the direct orthant expression
    p0 = 0.25
    h = stats.norm.ppf(p0)
    for rho in (0.2, 0.6, 0.9):
        exx = 1 - 2 * p0 + bivariate_normal_cdf(h, h, rho)
        expected = (exx - (1 - p0) ** 2) / (p0 * (1 - p0))
        assert acti_evaluate(Bernoulli(p0), rho) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "m",
    [BurrIII(40.5, 12.6, 0.37), MixedMarginal(0.99, ParetoII(1, 0.3))],
    ids=["burriii", "mixed99"],
)
def test_independent_quadrature_geometry(m):
    # Same integral through a structurally different node geometry: the
    # conditional substitution z2 = rho z1 + sqrt(1-rho^2) w.  Pins down
    # the infinite-kurtosis marginals at high rho, where no Monte-Carlo
    # oracle of feasible size has a calibrated standard error.
    mu, var = m.moments()

    def conditional(rho, n=1200):
        x, w = stats.norm, None  # placeholder to keep imports local
        import scipy.special as sp

        xs, ws = sp.roots_hermite(n)
        z1 = np.sqrt(2.0) * xs
        s = np.sqrt(1 - rho * rho)
        f1 = np.asarray(m.quantile(sp.ndtr(z1), clamp=True))
        z2 = rho * z1[:, None] + s * np.sqrt(2.0) * xs[None, :]
        f2 = np.asarray(m.quantile(sp.ndtr(z2), clamp=True))
        c = np.einsum("i,j,ij->", ws, ws, f1[:, None] * f2) / np.pi
        return (c - mu * mu) / var

    for rho in (0.5, 0.95):
        assert acti_evaluate(m, rho, check=True) == pytest.approx(
            conditional(rho), abs=5e-4
        )


def test_ccti_reduces_to_acti():
    m = MixedMarginal(0.78, GenGamma(16.5, 0.39, 0.97))
    for rho in (0.2, 0.5, 0.9):
        assert ccti_evaluate(m, m, rho) == pytest.approx(
            acti_evaluate(m, rho), abs=1e-10
        )


def test_ccti_symmetry():
    a = Weibull(1, 0.5)
    b = MixedMarginal(0.9, ParetoII(1, 0.3))
    for rho in (0.3, 0.8, 0.99):
        assert ccti_evaluate(a, b, rho) == pytest.approx(
            ccti_evaluate(b, a, rho), abs=1e-12
        )


def test_inflation_inequality_and_monotonicity():
    for m in (Weibull(1, 0.25), MixedMarginal(0.9, ParetoII(1, 0.3)), Bernoulli(0.25)):
        vals = [acti_evaluate(m, rho) for rho in AUTO_RHO_GRID]
        assert np.all(np.diff(vals) > 0)
        assert np.all(np.array(vals) <= np.array(AUTO_RHO_GRID) + 5e-3)


def test_domain_and_moment_errors():
    with pytest.raises(DomainError):
        acti_evaluate(Weibull(1, 2), -0.1)
    with pytest.raises(DomainError):
        acti_evaluate(Weibull(1, 2), 1.0)
    with pytest.raises(InfiniteMomentError):
        acti_evaluate(ParetoII(1, 0.7), 0.5)
    with pytest.raises(IntegrationError) as err:
        acti_evaluate(MixedMarginal(0.9, ParetoII(1, 0.3)), 0.9, check=True, tol=1e-12)
    assert err.value.achieved is not None


# -- grids ---------------------------------------------------------------------

def test_grid_gaussian_on_diagonal():
    g = build_grid(Gaussian(0, 1))
    assert len(g) == 11  # 10 abscissae plus the forced origin
    assert np.abs(g.rho_x - g.rho_z).max() < 1e-6


def test_grid_heavy_tail_below_diagonal():
    g = build_grid(BurrXII(2.13, 0.74, 0.22))
    interior = slice(1, None)
    assert np.all(g.rho_x[interior] < g.rho_z[interior])


def test_cross_grid_monotone():
    g = build_grid(Weibull(1, 0.5), Beta(2, 5), kind="cross")
    assert g.kind == "cross"
    assert len(g) == 12  # 11 abscissae plus the origin
    assert np.all(np.diff(g.rho_x) > 0)


def test_grid_invariant_enforced():
    with pytest.raises(IntegrationError):
        TransformGrid(np.array([0.0, 0.5]), np.array([0.0, 0.6]))
    with pytest.raises(IntegrationError):
        TransformGrid(np.array([0.0, 0.5, 0.9]), np.array([0.0, 0.4, 0.2]))


def test_grid_csv_export(tmp_path):
    g = build_grid(Gaussian(0, 1))
    path = tmp_path / "grid.csv"
    g.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (11, 2)
    assert np.allclose(data[:, 0], g.rho_z)


# -- fitted curves ---------------------------------------------------------------

def test_fit_gaussian_grid_is_identity():
    curve = fit_ctf(build_grid(Gaussian(0, 1)), "rational")
    r = np.linspace(0, 1, 101)
    assert np.abs(curve.apply(r) - r).max() < 1e-3


def test_curve_endpoint_exactness():
    for curve in (
        CtfCurve("rational", 2.96, 0.93),
        CtfCurve("kumaraswamy", 0.9, 1.5),
    ):
        assert curve.apply(0.0) == 0.0
        assert curve.apply(1.0) == pytest.approx(1.0, abs=1e-15)


def test_rational_identity_limit():
    curve = CtfCurve("rational", 1e-12, 1.0)
    r = np.linspace(0, 1, 11)
    assert np.abs(curve.apply(r) - r).max() < 1e-9


def test_kumaraswamy_identity():
    curve = CtfCurve("kumaraswamy", 1.0, 1.0)
    r = np.linspace(0, 1, 11)
    assert np.abs(curve.apply(r) - r).max() < 1e-12


def test_cross_curve_rho_max():
    curve = CtfCurve("cross", 2.0, 1.0)
    assert curve.rho_max == pytest.approx(0.5)
    assert rho_max(curve) == pytest.approx(0.5)
    assert curve.apply(curve.rho_max) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InfeasibleCorrelationError) as err:
        curve.apply(0.7)
    assert "0.5" in str(err.value)
    with pytest.raises(SpecError):
        rho_max(CtfCurve("rational", 1.0, 0.5))


def test_fitted_rho_max_single_point():
    g = build_grid(ParetoII(1, 0.3), MixedMarginal(0.9, ParetoII(1, 0.3)), kind="cross")
    curve = fit_ctf(g, "cross")
    assert curve.rho_max == pytest.approx(0.89, abs=0.02)


def test_fit_family_grid_mismatch():
    auto = build_grid(Gaussian(0, 1))
    cross = build_grid(Weibull(1, 1), Beta(2, 2), kind="cross")
    with pytest.raises(SpecError):
        fit_ctf(auto, "cross")
    with pytest.raises(SpecError):
        fit_ctf(cross, "rational")


def test_poor_fit_warns():
    # an S-shaped point set no member of the rational family can follow
    rz = np.array([0.0, 0.1, 0.2, 0.3, 0.6, 0.9, 0.95])
    rx = np.array([0.0, 0.002, 0.005, 0.2, 0.55, 0.88, 0.94])
    grid = TransformGrid(rz, rx)
    with pytest.warns(UserWarning, match="residual"):
        fit_ctf(grid, "rational")


def test_negative_input_rejected():
    curve = CtfCurve("rational", 2.0, 0.9)
    with pytest.raises(DomainError):
        curve.apply(-0.2)


def test_curve_json_roundtrip():
    curve = CtfCurve("cross", 3.42, 0.53, residual_rms=2e-4)
    d = curve.to_dict()
    assert d["rho_max"] == pytest.approx(curve.rho_max)
    again = CtfCurve.from_dict(d)
    assert again.b == curve.b and again.c == curve.c
    assert again.rho_max == pytest.approx(curve.rho_max)
