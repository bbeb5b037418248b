"""Parametric autocorrelation / cross-correlation structures and estimation.

All ACS families are complementary-cdf shapes used purely as functions of
lag: monotone decreasing, rho(0) = 1, vanishing at infinity.  Lags are
accepted as reals so structures can be plotted on fine grids; generation
only ever evaluates integer lags.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import optimize

from .errors import DomainError, FitError, ParameterError, SpecError

__all__ = [
    "CorrelationModel",
    "WeibullACS",
    "ParetoIIACS",
    "BurrXIIACS",
    "GenLogACS",
    "FGNACS",
    "MarkovianACS",
    "CrossCorrelationModel",
    "acs_from_dict",
    "empirical_acs",
    "empirical_cross_corr",
    "fit_acs",
]


def _check(cond, msg):
    if not cond:
        raise ParameterError(msg)


class CorrelationModel:
    """Base: callable rho(tau) for tau >= 0."""

    family = "CorrelationModel"

    @property
    def params(self):
        raise NotImplementedError

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0):
            raise DomainError(f"{self.family}: lag must be nonnegative")
        out = self._eval(tau)
        return out if out.ndim else float(out)

    def _eval(self, tau):
        raise NotImplementedError

    def to_dict(self):
        return {"family": self.family, "params": [float(p) for p in self.params]}

    def __repr__(self):
        ps = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.family}({ps})"


class WeibullACS(CorrelationModel):
    """rho(tau) = exp(-(tau/b)^c); Markovian for c = 1."""

    family = "WeibullACS"

    def __init__(self, b, c):
        _check(b > 0 and c > 0, "WeibullACS: b and c must be > 0")
        self.b = float(b)
        self.c = float(c)

    @property
    def params(self):
        return (self.b, self.c)

    def _eval(self, tau):
        return np.exp(-((tau / self.b) ** self.c))


class ParetoIIACS(CorrelationModel):
    """rho(tau) = (1 + c tau/b)^(-1/c); power-type, slower than Markovian."""

    family = "ParetoII_ACS"

    def __init__(self, b, c):
        _check(b > 0 and c > 0, "ParetoII_ACS: b and c must be > 0")
        self.b = float(b)
        self.c = float(c)

    @property
    def params(self):
        return (self.b, self.c)

    def _eval(self, tau):
        return np.exp(-np.log1p(self.c * tau / self.b) / self.c)


class BurrXIIACS(CorrelationModel):
    """rho(tau) = (1 + c2 (tau/b)^c1)^(-1/(c1 c2)).

    Bridges the stretched-exponential and power families: equals the
    ParetoII ACS for c1 = 1 and tends to the Weibull ACS (with scale
    b c1^(1/c1) and shape c1) as c2 -> 0.
    """

    family = "BurrXII_ACS"

    def __init__(self, b, c1, c2):
        _check(b > 0 and c1 > 0 and c2 > 0, "BurrXII_ACS: parameters must be > 0")
        self.b = float(b)
        self.c1 = float(c1)
        self.c2 = float(c2)

    @property
    def params(self):
        return (self.b, self.c1, self.c2)

    def _eval(self, tau):
        return np.exp(
            -np.log1p(self.c2 * (tau / self.b) ** self.c1) / (self.c1 * self.c2)
        )


class GenLogACS(CorrelationModel):
    """rho(tau) = (1 + ln(1 + c tau/b))^(-1/c); Markovian as c -> 0."""

    family = "GenLog_ACS"

    def __init__(self, b, c):
        _check(b > 0 and c > 0, "GenLog_ACS: b and c must be > 0")
        self.b = float(b)
        self.c = float(c)

    @property
    def params(self):
        return (self.b, self.c)

    def _eval(self, tau):
        return np.exp(-np.log1p(np.log1p(self.c * tau / self.b)) / self.c)


class FGNACS(CorrelationModel):
    """Fractional-Gaussian-noise ACS with Hurst coefficient H.

    rho(tau) = (|tau-1|^(2H) - 2 tau^(2H) + (tau+1)^(2H)) / 2.
    White noise at H = 1/2; positive, decreasing for H > 1/2.
    """

    family = "FGN_ACS"

    def __init__(self, H):
        _check(0.0 < H < 1.0, "FGN_ACS: H must be in (0, 1)")
        self.H = float(H)

    @property
    def params(self):
        return (self.H,)

    def _eval(self, tau):
        h2 = 2 * self.H
        return 0.5 * (
            np.abs(tau - 1) ** h2 - 2 * np.abs(tau) ** h2 + np.abs(tau + 1) ** h2
        )


class MarkovianACS(CorrelationModel):
    """rho(tau) = rho1^tau."""

    family = "Markovian"

    def __init__(self, rho1):
        _check(0.0 <= rho1 < 1.0, "Markovian: rho1 must be in [0, 1)")
        self.rho1 = float(rho1)

    @property
    def params(self):
        return (self.rho1,)

    def _eval(self, tau):
        if self.rho1 == 0.0:
            return np.where(tau == 0, 1.0, 0.0)
        return self.rho1**tau


ACS_FAMILIES = {
    cls.family: cls
    for cls in (WeibullACS, ParetoIIACS, BurrXIIACS, GenLogACS, FGNACS, MarkovianACS)
}
# tolerated aliases for spec files
_ACS_ALIASES = {
    "Weibull": "WeibullACS",
    "ParetoII": "ParetoII_ACS",
    "BurrXII": "BurrXII_ACS",
    "GenLog": "GenLog_ACS",
    "FGN": "FGN_ACS",
}


def acs_from_dict(d):
    try:
        family = d["family"]
        params = d["params"]
    except (KeyError, TypeError) as e:
        raise SpecError(f"acs spec needs 'family' and 'params': {d!r}") from e
    family = _ACS_ALIASES.get(family, family)
    if family not in ACS_FAMILIES:
        raise SpecError(f"unknown ACS family {family!r}")
    return ACS_FAMILIES[family](*params)


class CrossCorrelationModel:
    """Asymmetric cross-correlation structure built from two ACS branches.

    rho(tau) = pos(tau + 1) for tau >= 0 and neg(1 - tau) for tau <= 0,
    so rho(0) = pos(1) = neg(1) < 1 in general and rho(tau) != rho(-tau)
    when the branches differ.
    """

    def __init__(self, positive, negative=None):
        negative = positive if negative is None else negative
        d0 = abs(positive(1.0) - negative(1.0))
        if d0 > 1e-12:
            raise ParameterError(
                f"cross-correlation branches disagree at lag 0 by {d0:.3g}"
            )
        self.positive = positive
        self.negative = negative

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.where(
            tau >= 0,
            self.positive(np.abs(tau) + 1.0),
            self.negative(1.0 + np.abs(tau)),
        )
        return out if out.ndim else float(out)

    def to_dict(self):
        return {
            "positive": self.positive.to_dict(),
            "negative": self.negative.to_dict(),
        }


def empirical_acs(data, max_lag):
    """Biased (divide-by-n) sample autocorrelation for lags 0..max_lag.

    The biased estimator keeps the sequence positive semi-definite,
    which the Yule-Walker solver downstream relies on.
    """
    x = np.asarray(data, dtype=float)
    n = len(x)
    if n < 10:
        raise SpecError("empirical_acs: need at least 10 observations")
    if max_lag >= n:
        raise SpecError("empirical_acs: max_lag must be < series length")
    if max_lag > n / 3:
        warnings.warn(
            f"max_lag={max_lag} above n/3={n / 3:.0f}; estimates will be noisy",
            stacklevel=2,
        )
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        raise DomainError("empirical_acs: constant series, correlation undefined")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(np.dot(xc[:-k], xc[k:])) / denom
    return out


def empirical_cross_corr(x, y, lag=0):
    """Biased sample Cor[x(t), y(t - lag)]; negative lag means y leads."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise SpecError("empirical_cross_corr: series lengths differ")
    n = len(x)
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.dot(xc, xc)))
    sy = float(np.sqrt(np.dot(yc, yc)))
    if sx == 0.0 or sy == 0.0:
        raise DomainError("empirical_cross_corr: constant series")
    k = int(lag)
    if k >= 0:
        num = float(np.dot(xc[k:], yc[: n - k])) if k < n else 0.0
    else:
        k = -k
        num = float(np.dot(xc[: n - k], yc[k:])) if k < n else 0.0
    return num / (sx * sy)


_ACS_FIT_NPARAM = {
    "WeibullACS": 2,
    "ParetoII_ACS": 2,
    "BurrXII_ACS": 3,
    "GenLog_ACS": 2,
    "FGN_ACS": 1,
    "Markovian": 1,
}


def fit_acs(emp, family, lags=None, weights=None):
    """Least-squares fit of a parametric ACS to empirical correlations.

    Parameters
    ----------
    emp : array
        Empirical correlations.  If ``lags`` is omitted they are taken
        to be 1..len(emp) (pass the lag-0 value of 1 excluded).
    family : str
        ACS family name.
    lags : array, optional
        Explicit lag grid matching ``emp``.
    weights : None | "equal" | "exp" | array
        Lag weights; "exp" down-weights long lags with scale max_lag/3.
    """
    emp = np.asarray(emp, dtype=float)
    if lags is None:
        lags = np.arange(1, len(emp) + 1, dtype=float)
    else:
        lags = np.asarray(lags, dtype=float)
    if len(emp) < 3:
        raise SpecError("fit_acs: need at least 3 lags")
    family = _ACS_ALIASES.get(family, family)
    if family not in ACS_FAMILIES:
        raise SpecError(f"unknown ACS family {family!r}")
    if weights is None or weights == "equal":
        w = np.ones_like(lags)
    elif weights == "exp":
        w = np.exp(-lags / (lags.max() / 3.0))
    else:
        w = np.asarray(weights, dtype=float)

    cls = ACS_FAMILIES[family]
    npar = _ACS_FIT_NPARAM[family]

    def build(theta):
        if family == "FGN_ACS":
            return cls(1.0 / (1.0 + np.exp(-theta[0])))  # H in (0,1)
        if family == "Markovian":
            return cls(1.0 / (1.0 + np.exp(-theta[0])))
        return cls(*np.exp(theta))

    def loss(theta):
        try:
            model = build(theta)
        except ParameterError:
            return 1e30
        r = model(lags) - emp
        return float(np.sum(w * r * r))

    if npar == 1:
        starts = [np.array([s]) for s in (-1.0, 0.0, 1.0, 2.0)]
    else:
        b0 = max(lags.mean(), 1.0)
        starts = [
            np.log(np.concatenate([[b0 * sb], np.full(npar - 1, sc)]))
            for sb in (0.1, 1.0, 10.0)
            for sc in (0.3, 1.0, 3.0)
        ]
    best = None
    for s0 in starts:
        res = optimize.minimize(
            loss, s0, method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 4000},
        )
        if best is None or res.fun < best.fun:
            best = res
    rms = np.sqrt(best.fun / np.sum(w))
    if not np.isfinite(best.fun) or best.fun >= 1e29:
        raise FitError("fit_acs: optimizer failed", residual=rms)
    return build(best.x)
