"""Marginal distribution zoo.

Every family exposes the same surface: ``cdf``, ``quantile``, ``pdf`` (or
``pmf``), ``mean``, ``variance`` and JSON round-tripping.  Quantiles are the
workhorse of the whole package: the quantile transform of a standard
Gaussian series is what turns a parent-Gaussian process into the target
process, and the correlation-transformation integrals are integrals of
quantile products.

Heavy-tailed families (BurrXII, BurrIII, ParetoII) can have infinite
moments; ``variance()`` raises :class:`InfiniteMomentError` before any
correlation computation is attempted, because correlation is undefined
there.

Parameter order in JSON (see also schema.json):

    Gaussian      [mu, sigma]
    Weibull       [beta, gamma]           F(x) = 1 - exp(-(x/beta)^gamma)
    GenGamma      [beta, gamma1, gamma2]
    BurrXII       [beta, gamma1, gamma2]
    BurrIII       [beta, gamma1, gamma2]
    ParetoII      [beta, gamma]
    Beta          [gamma1, gamma2]        on (0, 1)
    Kumaraswamy   [a, b]                  F(x) = 1 - (1 - x^a)^b
    Bernoulli     [p0]                    p0 = P(X = 0)
    PolyaAeppli   [lam, p]                compound Poisson-geometric
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import optimize
from scipy import special as sc

from .errors import DomainError, FitError, InfiniteMomentError, ParameterError, SpecError

__all__ = [
    "Support",
    "Marginal",
    "Gaussian",
    "Weibull",
    "GenGamma",
    "BurrXII",
    "BurrIII",
    "ParetoII",
    "Beta",
    "Kumaraswamy",
    "Bernoulli",
    "PolyaAeppli",
    "MixedMarginal",
    "marginal_from_dict",
    "fit_marginal",
    "sample_lmoments",
    "model_lmoments",
]

_CLAMP_HI = 1.0 - 1e-12


@dataclass(frozen=True)
class Support:
    lower: float
    upper: float
    discrete: bool = False


def _require(cond, message):
    if not cond:
        raise ParameterError(message)


def _as_array(x):
    return np.asarray(x, dtype=float)


class Marginal:
    """Base class: common plumbing plus quadrature fallbacks.

    Subclasses implement ``cdf``/``quantile`` (vectorized) and usually
    override ``mean``/``variance`` with closed forms; the base class
    provides moments by adaptive quadrature of the quantile function so
    that any family with a quantile automatically has moments.
    """

    family = "Marginal"
    support = Support(-math.inf, math.inf)

    @property
    def params(self):
        raise NotImplementedError

    @property
    def is_discrete(self):
        return self.support.discrete

    def atoms(self):
        """Point masses as a list of (value, probability) pairs."""
        return []

    @property
    def has_atoms(self):
        return bool(self.atoms())

    # -- distribution surface -------------------------------------------------

    def cdf(self, x):
        raise NotImplementedError

    def _quantile_core(self, u):
        raise NotImplementedError

    def _quantile_tail_core(self, eps):
        # Q(1 - eps) for tiny eps; families with closed forms in eps
        # override to dodge the float resolution limit near u = 1
        return self._quantile_core(np.minimum(1.0 - eps, 1.0 - 1e-16))

    def quantile_tail(self, eps):
        """Upper-tail quantile Q(1 - eps), accurate for eps below 1e-16."""
        eps = _as_array(eps)
        if np.any(eps < 0.0) or np.any(eps > 1.0):
            raise DomainError(f"{self.family}: tail probability outside [0, 1]")
        out = self._quantile_tail_core(eps)
        return out if out.ndim else float(out)

    def quantile(self, u, clamp=False):
        """Quantile (inverse cdf) of ``u``.

        ``u`` outside [0, 1] raises DomainError.  For families with an
        unbounded support endpoint, u = 0 or 1 raises unless ``clamp``
        is set, in which case u is pulled to 1e-12 / 1 - 1e-12 so the
        transform path never emits non-finite values.
        """
        u = _as_array(u)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise DomainError(f"{self.family}: quantile argument outside [0, 1]")
        lo_open = not np.isfinite(self.support.lower)
        hi_open = not np.isfinite(self.support.upper)
        if clamp:
            lo = 1e-12 if lo_open else 0.0
            hi = _CLAMP_HI if hi_open else 1.0
            u = np.clip(u, lo, hi)
        else:
            if hi_open and np.any(u == 1.0):
                raise DomainError(
                    f"{self.family}: quantile(1) is infinite; pass clamp=True to clip"
                )
            if lo_open and np.any(u == 0.0):
                raise DomainError(
                    f"{self.family}: quantile(0) is infinite; pass clamp=True to clip"
                )
        out = self._quantile_core(u)
        return out if out.ndim else float(out)

    def pdf(self, x):
        raise NotImplementedError

    # -- moments ---------------------------------------------------------------

    def mean(self):
        return self.moments_by_quadrature()[0]

    def variance(self):
        return self.moments_by_quadrature()[1]

    def moments(self):
        """(mean, variance) pair."""
        return self.mean(), self.variance()

    def moments_by_quadrature(self):
        """Moments from the quantile function on (0, 1).

        The endpoint neighborhoods are integrated under the substitutions
        u = exp(-t) and u = 1 - exp(-t), which turn algebraic tail
        singularities of the quantile into exponentially decaying
        integrands.  Serves as the universal fallback and as an
        independent check of the closed-form expressions.
        """

        def q(u):
            return float(self.quantile(np.array([u]), clamp=False)[0])

        def q_tail(eps):
            return float(self.quantile_tail(np.array([eps]))[0])

        log4 = math.log(4.0)
        t_max = 690.0

        def raw(power):
            mid, _ = integrate.quad(lambda u: q(u) ** power, 0.25, 0.75, limit=200)
            lo, _ = integrate.quad(
                lambda t: q(math.exp(-t)) ** power * math.exp(-t),
                log4, t_max, limit=400,
            )
            hi, _ = integrate.quad(
                lambda t: q_tail(math.exp(-t)) ** power * math.exp(-t),
                log4, t_max, limit=400,
            )
            return mid + lo + hi

        m1 = raw(1)
        var = raw(2) - m1 * m1
        if not np.isfinite(m1) or not np.isfinite(var):
            raise InfiniteMomentError(f"{self.family}: quadrature moments diverged")
        return m1, var

    # -- serialization ----------------------------------------------------------

    def to_dict(self):
        return {"family": self.family, "params": [float(p) for p in self.params]}

    def __repr__(self):
        ps = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.family}({ps})"

    def __eq__(self, other):
        return (
            isinstance(other, Marginal)
            and self.family == other.family
            and tuple(self.params) == tuple(other.params)
        )

    def __hash__(self):
        return hash((self.family, tuple(self.params)))


class Gaussian(Marginal):
    family = "Gaussian"

    def __init__(self, mu=0.0, sigma=1.0):
        _require(sigma > 0, "Gaussian: sigma must be > 0")
        self.mu = float(mu)
        self.sigma = float(sigma)

    @property
    def params(self):
        return (self.mu, self.sigma)

    def cdf(self, x):
        return sc.ndtr((_as_array(x) - self.mu) / self.sigma)

    def _quantile_core(self, u):
        return self.mu + self.sigma * sc.ndtri(u)

    def _quantile_tail_core(self, eps):
        return self.mu - self.sigma * sc.ndtri(eps)

    def pdf(self, x):
        z = (_as_array(x) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2 * math.pi))

    def mean(self):
        return self.mu

    def variance(self):
        return self.sigma**2


class Weibull(Marginal):
    """Two-parameter Weibull, F(x) = 1 - exp(-(x/beta)^gamma)."""

    family = "Weibull"
    support = Support(0.0, math.inf)

    def __init__(self, beta, gamma):
        _require(beta > 0 and gamma > 0, "Weibull: beta and gamma must be > 0")
        self.beta = float(beta)
        self.gamma = float(gamma)

    @property
    def params(self):
        return (self.beta, self.gamma)

    def cdf(self, x):
        x = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = -np.expm1(-((x[pos] / self.beta) ** self.gamma))
        return out if out.ndim else float(out)

    def _quantile_core(self, u):
        return self.beta * (-np.log1p(-u)) ** (1.0 / self.gamma)

    def _quantile_tail_core(self, eps):
        with np.errstate(divide="ignore"):
            return self.beta * (-np.log(eps)) ** (1.0 / self.gamma)

    def pdf(self, x):
        x = _as_array(x)
        y = x / self.beta
        return np.where(
            x > 0,
            (self.gamma / self.beta) * y ** (self.gamma - 1) * np.exp(-(y**self.gamma)),
            0.0,
        )

    def mean(self):
        return self.beta * sc.gamma(1 + 1 / self.gamma)

    def variance(self):
        m1 = self.mean()
        return self.beta**2 * sc.gamma(1 + 2 / self.gamma) - m1 * m1


class GenGamma(Marginal):
    """Generalized Gamma with scale beta and shapes gamma1, gamma2.

    Reduces to Gamma for gamma2 = 1 and to Weibull for gamma1 = gamma2.
    """

    family = "GenGamma"
    support = Support(0.0, math.inf)

    def __init__(self, beta, gamma1, gamma2):
        _require(
            beta > 0 and gamma1 > 0 and gamma2 > 0,
            "GenGamma: all parameters must be > 0",
        )
        self.beta = float(beta)
        self.gamma1 = float(gamma1)
        self.gamma2 = float(gamma2)
        self._shape = self.gamma1 / self.gamma2

    @property
    def params(self):
        return (self.beta, self.gamma1, self.gamma2)

    def cdf(self, x):
        x = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = sc.gammainc(self._shape, (x[pos] / self.beta) ** self.gamma2)
        return out if out.ndim else float(out)

    def _quantile_core(self, u):
        return self.beta * sc.gammaincinv(self._shape, u) ** (1.0 / self.gamma2)

    def _quantile_tail_core(self, eps):
        return self.beta * sc.gammainccinv(self._shape, eps) ** (1.0 / self.gamma2)

    def pdf(self, x):
        x = _as_array(x)
        y = x / self.beta
        lead = self.gamma2 / (self.beta * sc.gamma(self._shape))
        return np.where(
            x > 0, lead * y ** (self.gamma1 - 1) * np.exp(-(y**self.gamma2)), 0.0
        )

    def _raw(self, r):
        return self.beta**r * math.exp(
            sc.gammaln((self.gamma1 + r) / self.gamma2) - sc.gammaln(self._shape)
        )

    def mean(self):
        return self._raw(1)

    def variance(self):
        m1 = self._raw(1)
        return self._raw(2) - m1 * m1


class BurrXII(Marginal):
    """Burr type XII, F(x) = 1 - (1 + gamma2 (x/beta)^gamma1)^(-1/(gamma1 gamma2)).

    Power type: moment of order r exists iff r < 1/gamma2, so the
    variance is finite iff gamma2 < 1/2.
    """

    family = "BurrXII"
    support = Support(0.0, math.inf)

    def __init__(self, beta, gamma1, gamma2):
        _require(
            beta > 0 and gamma1 > 0 and gamma2 > 0,
            "BurrXII: all parameters must be > 0",
        )
        self.beta = float(beta)
        self.gamma1 = float(gamma1)
        self.gamma2 = float(gamma2)

    @property
    def params(self):
        return (self.beta, self.gamma1, self.gamma2)

    def cdf(self, x):
        x = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        g1, g2 = self.gamma1, self.gamma2
        out[pos] = -np.expm1(-np.log1p(g2 * (x[pos] / self.beta) ** g1) / (g1 * g2))
        return out if out.ndim else float(out)

    def _quantile_core(self, u):
        g1, g2 = self.gamma1, self.gamma2
        return self.beta * (np.expm1(-g1 * g2 * np.log1p(-u)) / g2) ** (1.0 / g1)

    def _quantile_tail_core(self, eps):
        g1, g2 = self.gamma1, self.gamma2
        with np.errstate(divide="ignore", over="ignore"):
            return self.beta * (np.expm1(-g1 * g2 * np.log(eps)) / g2) ** (1.0 / g1)

    def pdf(self, x):
        x = _as_array(x)
        g1, g2 = self.gamma1, self.gamma2
        y = x / self.beta
        k = 1.0 / (g1 * g2)
        return np.where(
            x > 0,
            y ** (g1 - 1) * (1 + g2 * y**g1) ** (-k - 1) / self.beta,
            0.0,
        )

    def _raw(self, r):
        g1, g2 = self.gamma1, self.gamma2
        if r * g2 >= 1.0:
            raise InfiniteMomentError(
                f"BurrXII: moment of order {r} is infinite (needs gamma2 < 1/{r})"
            )
        k = 1.0 / (g1 * g2)
        return self.beta**r * g2 ** (-r / g1) * k * sc.beta(k - r / g1, 1 + r / g1)

    def mean(self):
        return self._raw(1)

    def variance(self):
        m1 = self._raw(1)
        return self._raw(2) - m1 * m1


class BurrIII(Marginal):
    """Burr type III, F(x) = (1 + (1/gamma1)(x/beta)^(-1/gamma2))^(-gamma1 gamma2).

    Variance finite iff gamma2 < 1/2, as for BurrXII.
    """

    family = "BurrIII"
    support = Support(0.0, math.inf)

    def __init__(self, beta, gamma1, gamma2):
        _require(
            beta > 0 and gamma1 > 0 and gamma2 > 0,
            "BurrIII: all parameters must be > 0",
        )
        self.beta = float(beta)
        self.gamma1 = float(gamma1)
        self.gamma2 = float(gamma2)

    @property
    def params(self):
        return (self.beta, self.gamma1, self.gamma2)

    def cdf(self, x):
        x = _as_array(x)
        g1, g2 = self.gamma1, self.gamma2
        out = np.zeros_like(x)
        pos = x > 0
        y = x[pos] / self.beta
        out[pos] = np.exp(-g1 * g2 * np.log1p(y ** (-1.0 / g2) / g1))
        return out if out.ndim else float(out)

    def _quantile_core(self, u):
        g1, g2 = self.gamma1, self.gamma2
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        pos = u > 0
        with np.errstate(over="ignore"):
            out[pos] = self.beta * (g1 * np.expm1(-np.log(u[pos]) / (g1 * g2))) ** (-g2)
        return out

    def _quantile_tail_core(self, eps):
        g1, g2 = self.gamma1, self.gamma2
        with np.errstate(divide="ignore"):
            return self.beta * (g1 * np.expm1(-np.log1p(-eps) / (g1 * g2))) ** (-g2)

    def pdf(self, x):
        x = _as_array(x)
        g1, g2 = self.gamma1, self.gamma2
        with np.errstate(divide="ignore", over="ignore"):
            y = x / self.beta
            val = (
                (1 + y ** (-1 / g2) / g1) ** (-g1 * g2 - 1)
                * y ** (-1 / g2 - 1)
                / self.beta
            )
        return np.where(x > 0, val, 0.0)

    def _raw(self, r):
        g1, g2 = self.gamma1, self.gamma2
        if r * g2 >= 1.0:
            raise InfiniteMomentError(
                f"BurrIII: moment of order {r} is infinite (needs gamma2 < 1/{r})"
            )
        k = g1 * g2
        return self.beta**r * g1 ** (-r * g2) * k * sc.beta(1 - r * g2, k + r * g2)

    def mean(self):
        return self._raw(1)

    def variance(self):
        m1 = self._raw(1)
        return self._raw(2) - m1 * m1


class ParetoII(Marginal):
    """Pareto type II, F(x) = 1 - (1 + gamma x/beta)^(-1/gamma)."""

    family = "ParetoII"
    support = Support(0.0, math.inf)

    def __init__(self, beta, gamma):
        _require(beta > 0 and gamma > 0, "ParetoII: beta and gamma must be > 0")
        self.beta = float(beta)
        self.gamma = float(gamma)

    @property
    def params(self):
        return (self.beta, self.gamma)

    def cdf(self, x):
        x = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = -np.expm1(-np.log1p(self.gamma * x[pos] / self.beta) / self.gamma)
        return out if out.ndim else float(out)

    def _quantile_core(self, u):
        return (self.beta / self.gamma) * np.expm1(-self.gamma * np.log1p(-u))

    def _quantile_tail_core(self, eps):
        with np.errstate(divide="ignore"):
            return (self.beta / self.gamma) * np.expm1(-self.gamma * np.log(eps))

    def pdf(self, x):
        x = _as_array(x)
        return np.where(
            x >= 0,
            (1 / self.beta) * (1 + self.gamma * x / self.beta) ** (-1 / self.gamma - 1),
            0.0,
        )

    def mean(self):
        if self.gamma >= 1.0:
            raise InfiniteMomentError("ParetoII: mean infinite (needs gamma < 1)")
        return self.beta / (1 - self.gamma)

    def variance(self):
        if self.gamma >= 0.5:
            raise InfiniteMomentError("ParetoII: variance infinite (needs gamma < 1/2)")
        m1 = self.mean()
        m2 = 2 * self.beta**2 / ((1 - self.gamma) * (1 - 2 * self.gamma))
        return m2 - m1 * m1


class Beta(Marginal):
    family = "Beta"
    support = Support(0.0, 1.0)

    def __init__(self, gamma1, gamma2):
        _require(gamma1 > 0 and gamma2 > 0, "Beta: both shapes must be > 0")
        self.gamma1 = float(gamma1)
        self.gamma2 = float(gamma2)

    @property
    def params(self):
        return (self.gamma1, self.gamma2)

    def cdf(self, x):
        x = np.clip(_as_array(x), 0.0, 1.0)
        return sc.betainc(self.gamma1, self.gamma2, x)

    def _quantile_core(self, u):
        # betaincinv returns NaN below ~1e-100; the floor is harmless
        # (the corresponding quantile is indistinguishable from 0 there)
        u = np.asarray(u, dtype=float)
        out = sc.betaincinv(self.gamma1, self.gamma2, np.maximum(u, 1e-99))
        return np.where(u < 1e-99, 0.0, out)

    def pdf(self, x):
        x = _as_array(x)
        inside = (x > 0) & (x < 1)
        out = np.zeros_like(x)
        lb = sc.betaln(self.gamma1, self.gamma2)
        xi = x[inside]
        out[inside] = np.exp(
            (self.gamma1 - 1) * np.log(xi) + (self.gamma2 - 1) * np.log1p(-xi) - lb
        )
        return out if out.ndim else float(out)

    def mean(self):
        return self.gamma1 / (self.gamma1 + self.gamma2)

    def variance(self):
        g1, g2 = self.gamma1, self.gamma2
        return g1 * g2 / ((g1 + g2) ** 2 * (g1 + g2 + 1))


class Kumaraswamy(Marginal):
    """Kumaraswamy on (0, 1), F(x) = 1 - (1 - x^a)^b."""

    family = "Kumaraswamy"
    support = Support(0.0, 1.0)

    def __init__(self, a, b):
        _require(a > 0 and b > 0, "Kumaraswamy: both shapes must be > 0")
        self.a = float(a)
        self.b = float(b)

    @property
    def params(self):
        return (self.a, self.b)

    def cdf(self, x):
        x = np.clip(_as_array(x), 0.0, 1.0)
        return -np.expm1(self.b * np.log1p(-(x**self.a)))

    def _quantile_core(self, u):
        with np.errstate(divide="ignore"):  # u = 1 hits the finite bound
            return (-np.expm1(np.log1p(-u) / self.b)) ** (1.0 / self.a)

    def pdf(self, x):
        x = _as_array(x)
        inside = (x > 0) & (x < 1)
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = (
            self.a * self.b * xi ** (self.a - 1) * (1 - xi**self.a) ** (self.b - 1)
        )
        return out if out.ndim else float(out)

    def _raw(self, r):
        return self.b * sc.beta(1 + r / self.a, self.b)

    def mean(self):
        return self._raw(1)

    def variance(self):
        m1 = self._raw(1)
        return self._raw(2) - m1 * m1


class Bernoulli(Marginal):
    """Binary marginal parameterized by p0 = P(X = 0); P(X = 1) = 1 - p0."""

    family = "Bernoulli"
    support = Support(0.0, 1.0, discrete=True)

    def __init__(self, p0):
        _require(0.0 < p0 < 1.0, "Bernoulli: p0 must be in (0, 1)")
        self.p0 = float(p0)

    @property
    def params(self):
        return (self.p0,)

    def atoms(self):
        return [(0.0, self.p0), (1.0, 1.0 - self.p0)]

    def cdf(self, x):
        x = _as_array(x)
        out = np.where(x < 0, 0.0, np.where(x < 1, self.p0, 1.0))
        return out if out.ndim else float(out)

    def _quantile_core(self, u):
        return (u > self.p0).astype(float)

    def pmf(self, x):
        x = _as_array(x)
        out = np.where(x == 0, self.p0, np.where(x == 1, 1 - self.p0, 0.0))
        return out if out.ndim else float(out)

    pdf = pmf

    def mean(self):
        return 1.0 - self.p0

    def variance(self):
        return self.p0 * (1.0 - self.p0)

    def cdf_table(self, tail=1e-12):
        return np.array([0.0, 1.0]), np.array([self.p0, 1.0])


class PolyaAeppli(Marginal):
    """Polya-Aeppli count distribution: Poisson(lam) many geometric batches.

    X = sum of N geometric variables on {1, 2, ...} with success
    probability 1 - p, N ~ Poisson(lam).  Mean lam/(1-p), variance
    lam(1+p)/(1-p)^2.  The pmf table is built once by the compound
    Poisson (Panjer) recursion.
    """

    family = "PolyaAeppli"
    support = Support(0.0, math.inf, discrete=True)

    def __init__(self, lam, p):
        _require(lam > 0, "PolyaAeppli: lam must be > 0")
        _require(0.0 <= p < 1.0, "PolyaAeppli: p must be in [0, 1)")
        self.lam = float(lam)
        self.p = float(p)
        self._pmf = self._build_pmf()
        self._cdf = np.cumsum(self._pmf)

    def _build_pmf(self, tail=1e-14):
        lam, p = self.lam, self.p
        pmf = [math.exp(-lam)]
        total = pmf[0]
        k = 0
        while total < 1.0 - tail and k < 100_000:
            k += 1
            acc = 0.0
            for j in range(1, k + 1):
                acc += j * (1 - p) * p ** (j - 1) * pmf[k - j]
            pmf.append(lam / k * acc)
            total += pmf[-1]
        return np.array(pmf)

    @property
    def params(self):
        return (self.lam, self.p)

    def atoms(self):
        return [(float(k), float(pk)) for k, pk in enumerate(self._pmf)]

    def cdf(self, x):
        x = _as_array(x)
        idx = np.floor(x).astype(int)
        out = np.where(
            x < 0, 0.0, self._cdf[np.clip(idx, 0, len(self._cdf) - 1)]
        )
        out = np.where(idx >= len(self._cdf), 1.0, out)
        return out if out.ndim else float(out)

    def _quantile_core(self, u):
        # smallest k with cdf(k) >= u
        return np.searchsorted(self._cdf, u, side="left").astype(float)

    def pmf(self, x):
        x = _as_array(x)
        idx = np.round(x).astype(int)
        valid = (x == idx) & (idx >= 0) & (idx < len(self._pmf))
        out = np.zeros_like(x)
        out[valid] = self._pmf[idx[valid]]
        return out if out.ndim else float(out)

    pdf = pmf

    def mean(self):
        return self.lam / (1 - self.p)

    def variance(self):
        return self.lam * (1 + self.p) / (1 - self.p) ** 2

    def cdf_table(self, tail=1e-12):
        keep = self._cdf < 1.0 - 0.0  # full table; tail already truncated
        vals = np.arange(len(self._cdf), dtype=float)
        return vals[keep], np.minimum(self._cdf[keep], 1.0)


class MixedMarginal(Marginal):
    """Atom of mass p0 at zero plus a continuous part for positive values.

    cdf(x) = (1 - p0) F_cont(x) + p0 for x >= 0, and the quantile is 0
    on [0, p0].  Mean and variance follow from the continuous part:
    mu = (1-p0) mu_c and var = (1-p0) var_c + p0 (1-p0) mu_c^2.
    """

    family = "Mixed"

    def __init__(self, p0, continuous):
        _require(0.0 <= p0 < 1.0, "MixedMarginal: p0 must be in [0, 1)")
        if continuous.is_discrete:
            raise ParameterError("MixedMarginal: continuous part must be continuous")
        if continuous.support.lower < 0:
            raise ParameterError(
                "MixedMarginal: continuous part must live on the positive axis"
            )
        self.p0 = float(p0)
        self.continuous = continuous
        self.support = Support(0.0, continuous.support.upper)

    @property
    def params(self):
        return (self.p0, *self.continuous.params)

    def atoms(self):
        return [(0.0, self.p0)] if self.p0 > 0 else []

    def cdf(self, x):
        x = _as_array(x)
        out = np.where(
            x < 0, 0.0, self.p0 + (1 - self.p0) * self.continuous.cdf(np.maximum(x, 0))
        )
        return out if out.ndim else float(out)

    def quantile(self, u, clamp=False):
        u = _as_array(u)
        if np.any(u < 0.0) or np.any(u > 1.0):
            raise DomainError("Mixed: quantile argument outside [0, 1]")
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        out = np.zeros_like(u)
        above = u > self.p0
        if np.any(above):
            uc = (u[above] - self.p0) / (1 - self.p0)
            out[above] = np.atleast_1d(self.continuous.quantile(uc, clamp=clamp))
        return float(out[0]) if scalar else out

    def _quantile_tail_core(self, eps):
        eps = np.asarray(eps, dtype=float)
        out = np.zeros_like(eps)
        inside = eps < (1 - self.p0)
        if np.any(inside):
            out[inside] = self.continuous._quantile_tail_core(
                eps[inside] / (1 - self.p0)
            )
        return out

    def pdf(self, x):
        x = _as_array(x)
        return np.where(x > 0, (1 - self.p0) * self.continuous.pdf(x), 0.0)

    def mean(self):
        return (1 - self.p0) * self.continuous.mean()

    def variance(self):
        mc = self.continuous.mean()
        vc = self.continuous.variance()
        return (1 - self.p0) * vc + self.p0 * (1 - self.p0) * mc * mc

    def to_dict(self):
        d = self.continuous.to_dict()
        d["p0"] = self.p0
        return d

    def __repr__(self):
        return f"Mixed(p0={self.p0:g}, {self.continuous!r})"

    def __eq__(self, other):
        return (
            isinstance(other, MixedMarginal)
            and self.p0 == other.p0
            and self.continuous == other.continuous
        )

    def __hash__(self):
        return hash((self.family, self.p0, self.continuous))


FAMILIES = {
    cls.family: cls
    for cls in (
        Gaussian,
        Weibull,
        GenGamma,
        BurrXII,
        BurrIII,
        ParetoII,
        Beta,
        Kumaraswamy,
        Bernoulli,
        PolyaAeppli,
    )
}


def marginal_from_dict(d):
    """Build a marginal (plain or mixed) from its JSON dict form."""
    try:
        family = d["family"]
        params = d["params"]
    except (KeyError, TypeError) as e:
        raise SpecError(f"marginal spec needs 'family' and 'params': {d!r}") from e
    if family not in FAMILIES:
        raise SpecError(f"unknown marginal family {family!r}")
    base = FAMILIES[family](*params)
    p0 = d.get("p0")
    if p0 is not None and p0 > 0:
        return MixedMarginal(p0, base)
    return base


# ---------------------------------------------------------------------------
# L-moments and fitting
# ---------------------------------------------------------------------------

def sample_lmoments(data, nmom=4):
    """First ``nmom`` sample L-moments via unbiased probability-weighted moments."""
    x = np.sort(np.asarray(data, dtype=float))
    n = len(x)
    if n < nmom + 1:
        raise FitError(f"need at least {nmom + 1} points for {nmom} L-moments")
    i = np.arange(1, n + 1)
    b = [x.mean()]
    for r in range(1, nmom):
        num = np.ones(n)
        den = 1.0
        for j in range(r):
            num *= i - 1 - j
            den *= n - 1 - j
        b.append(np.sum(num * x) / (n * den))
    lam = [b[0]]
    if nmom > 1:
        lam.append(2 * b[1] - b[0])
    if nmom > 2:
        lam.append(6 * b[2] - 6 * b[1] + b[0])
    if nmom > 3:
        lam.append(20 * b[3] - 30 * b[2] + 12 * b[1] - b[0])
    return np.array(lam[:nmom])


_GL_NODES = 512


@functools.lru_cache(maxsize=8)
def _leggauss01(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _shifted_legendre(r, u):
    # P*_r on (0,1): P*_0..P*_3 are all that L-moment fitting needs
    if r == 0:
        return np.ones_like(u)
    if r == 1:
        return 2 * u - 1
    if r == 2:
        return 6 * u**2 - 6 * u + 1
    return 20 * u**3 - 30 * u**2 + 12 * u - 1


def model_lmoments(marginal, nmom=4, nodes=_GL_NODES):
    """Theoretical L-moments by Gauss-Legendre quadrature of the quantile."""
    u, w = _leggauss01(nodes)
    q = np.atleast_1d(marginal.quantile(u, clamp=True))
    return np.array(
        [np.sum(w * q * _shifted_legendre(r, u)) for r in range(nmom)]
    )


_FIT_STARTS = {
    # multiplicative perturbations of the scale-matched initial point
    1: [(0.5,), (1.0,), (2.0,)],
    2: [(s, g) for s in (0.5, 1.0, 2.0) for g in (0.3, 1.0, 3.0)],
    3: [
        (s, g1, g2)
        for s in (0.5, 1.0, 2.0)
        for g1 in (0.4, 1.0, 2.5)
        for g2 in (0.3, 0.8, 2.0)
    ],
}


def _fit_continuous(data, family, method):
    cls = FAMILIES[family]
    nparam = {"Gaussian": 2, "Weibull": 2, "GenGamma": 3, "BurrXII": 3, "BurrIII": 3,
              "ParetoII": 2, "Beta": 2, "Kumaraswamy": 2}[family]
    data = np.asarray(data, dtype=float)
    if family in ("Beta", "Kumaraswamy") and (data.min() < 0 or data.max() > 1):
        raise SpecError(f"{family}: data outside [0, 1] cannot be fitted")
    if family != "Gaussian" and data.min() < 0:
        raise SpecError(f"{family}: negative data outside the support")

    scale0 = float(np.mean(np.abs(data))) or 1.0
    if family in ("Beta", "Kumaraswamy"):
        # shapes only, no scale; seed both shapes from crude moments
        base = (2.0, 2.0)
    elif family == "Gaussian":
        base = (float(np.mean(data)), float(np.std(data)) or 1.0)
    else:
        base = (scale0,) + (1.0,) * (nparam - 1)

    lam_hat = sample_lmoments(data, nmom=nparam)
    scale = np.maximum(np.abs(lam_hat), 1e-12)

    def make(params):
        return cls(*params)

    def objective(logp):
        try:
            m = make(np.exp(logp)) if family != "Gaussian" else cls(logp[0], math.exp(logp[1]))
            if method == "mle":
                dens = m.pdf(data)
                if np.any(dens <= 0) or not np.all(np.isfinite(dens)):
                    return 1e30
                return -float(np.sum(np.log(dens)))
            lam = model_lmoments(m, nmom=nparam)
            return float(np.sum(((lam - lam_hat) / scale) ** 2))
        except (ParameterError, DomainError, InfiniteMomentError, ValueError,
                FloatingPointError, OverflowError):
            return 1e30

    if family == "Gaussian":
        starts = [np.array([base[0], math.log(base[1])])]
    else:
        starts = [
            np.log(np.array(base) * np.array(mult))
            for mult in _FIT_STARTS[min(nparam, 3)][: 27]
        ]

    best = None
    for s0 in starts:
        res = optimize.minimize(
            objective, s0, method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000},
        )
        if best is None or res.fun < best.fun:
            best = res
    if best is None or best.fun >= 1e29:
        raise FitError(f"{family}: marginal fit failed to converge")
    if family == "Gaussian":
        return cls(best.x[0], math.exp(best.x[1]))
    return make(np.exp(best.x))


def fit_marginal(data, family, mixed=False, method="lmoments"):
    """Fit a marginal model to a data series.

    Parameters
    ----------
    data : array-like
        Observed values.  With ``mixed=True`` exact zeros are counted as
        the atom (p0 = n0/n) and the continuous family is fitted to the
        strictly positive values only.
    family : str
        One of the FAMILIES keys.
    mixed : bool
        Fit an atom-at-zero mixed model.
    method : {"lmoments", "mle"}
        L-moment matching (default) or maximum likelihood.  Discrete
        families (Bernoulli, PolyaAeppli) always use moment matching.
    """
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise SpecError("fit_marginal: empty data")
    if np.all(data == data[0]):
        raise FitError("fit_marginal: degenerate data (all values equal)")
    if method not in ("lmoments", "mle"):
        raise SpecError(f"unknown fit method {method!r}")

    if family == "Bernoulli":
        vals = np.unique(data)
        if not np.all(np.isin(vals, (0.0, 1.0))):
            raise SpecError("Bernoulli: data must be 0/1")
        return Bernoulli(float(np.mean(data == 0)))

    if family == "PolyaAeppli":
        m = float(np.mean(data))
        v = float(np.var(data))
        if v <= m or m <= 0:
            raise FitError("PolyaAeppli: moment fit needs var > mean > 0")
        r = v / m
        p = (r - 1) / (r + 1)
        return PolyaAeppli(m * (1 - p), p)

    if mixed:
        n0 = int(np.sum(data == 0.0))
        p0 = n0 / len(data)
        positive = data[data > 0]
        if positive.size < 10:
            raise FitError("mixed fit: too few positive values")
        return MixedMarginal(p0, _fit_continuous(positive, family, method))
    return _fit_continuous(data, family, method)
