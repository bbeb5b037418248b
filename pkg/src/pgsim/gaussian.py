"""Standard-Gaussian process generators with prescribed correlation.

Three constructions: AR(p) fitted by Yule-Walker (exact up to lag p, any
p into the thousands via Levinson-Durbin), a sum of independent AR(1)
components whose mixture ACS approximates a slow target, and a
first-order multivariate autoregression reproducing lag-0/lag-1
correlation matrices.

Simulation is deterministic under an explicit 64-bit seed: noise comes
from numpy's PCG64 generator, and per-stream generators are derived with
SeedSequence.spawn, so identical seeds give identical output at
identical numpy versions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import optimize
from scipy import signal

from .correlations import CorrelationModel
from .errors import FitError, NotPositiveDefiniteError, ParameterError, SpecError

__all__ = [
    "levinson_durbin",
    "ArModel",
    "fit_ar",
    "ar_extrapolate_acs",
    "simulate_ar",
    "SumAr1Model",
    "fit_sum_ar1",
    "simulate_sum_ar1",
    "Mar1Model",
    "fit_mar1",
    "simulate_mar1",
]

_REFLECTION_LIMIT = 1.0 - 1e-10


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _acs_head(rho, p):
    if isinstance(rho, CorrelationModel):
        return np.atleast_1d(rho(np.arange(1, p + 1, dtype=float)))
    head = np.asarray(rho, dtype=float)
    if len(head) < p:
        raise SpecError(f"need correlations up to lag {p}, got {len(head)}")
    return head[:p]


def levinson_durbin(rho_head):
    """Solve the Yule-Walker system for unit-variance data.

    Parameters
    ----------
    rho_head : array
        Correlations at lags 1..p.

    Returns
    -------
    (a, sigma2, reflections) : coefficients, innovation variance and the
        reflection-coefficient sequence.  Falls back to a dense Toeplitz
        solve when a reflection coefficient approaches the unit circle;
        raises NotPositiveDefiniteError if the sequence is invalid.
    """
    r = np.asarray(rho_head, dtype=float)
    p = len(r)
    a = np.zeros(p)
    e = 1.0
    ks = np.zeros(p)
    for i in range(p):
        acc = r[i] - (np.dot(a[:i], r[i - 1 :: -1]) if i else 0.0)
        if e <= 0.0:
            return _dense_yule_walker(r)
        k = acc / e
        if abs(k) >= _REFLECTION_LIMIT:
            return _dense_yule_walker(r)
        ks[i] = k
        if i:
            a[:i] = a[:i] - k * a[i - 1 :: -1]
        a[i] = k
        e *= 1.0 - k * k
    return a, e, ks


def _dense_yule_walker(r):
    p = len(r)
    col = np.concatenate([[1.0], r[: p - 1]])
    try:
        a = sla.solve_toeplitz(col, r)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "Yule-Walker system is singular; the correlation head is invalid"
        ) from exc
    sigma2 = 1.0 - float(np.dot(a, r))
    if sigma2 <= 0.0 or not np.isfinite(sigma2):
        raise NotPositiveDefiniteError(
            "Yule-Walker solution implies nonpositive innovation variance; "
            "the correlation head is not positive definite"
        )
    return a, sigma2, None


@dataclass
class ArModel:
    """AR(p) with unit process variance.

    z(t) = sum_i a_i z(t-i) + eps(t),  eps ~ N(0, noise_var), where
    noise_var = 1 - sum_i a_i rho(i) for the fitted correlation head.
    """

    coeffs: np.ndarray
    noise_var: float
    rho_head: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.noise_var <= 0:
            raise NotPositiveDefiniteError("ArModel: noise variance must be positive")
        if self.rho_head is not None:
            self.rho_head = np.asarray(self.rho_head, dtype=float)

    @property
    def order(self):
        return len(self.coeffs)

    def is_stationary(self):
        """Schur-Cohn check via Levinson reflections of the implied ACS."""
        if self.order == 0:
            return True
        if self.rho_head is not None:
            out = levinson_durbin(self.rho_head)
            ks = out[2]
            if ks is None:
                return True  # dense path succeeded => PD => stationary
            return bool(np.all(np.abs(ks) < 1.0))
        roots = np.roots(np.concatenate([[1.0], -self.coeffs]))
        return bool(np.all(np.abs(roots) < 1.0))

    def default_burn_in(self):
        return max(10 * self.order, 1000)

    def simulate(self, n, seed=None, burn_in=None):
        """Generate n values; discards a transient of burn_in steps first."""
        if n < 1:
            raise SpecError("simulate: n must be >= 1")
        rng = _rng(seed)
        burn = self.default_burn_in() if burn_in is None else int(burn_in)
        eps = rng.standard_normal(n + burn) * np.sqrt(self.noise_var)
        if self.order == 0:
            return eps[burn:]
        z = signal.lfilter([1.0], np.concatenate([[1.0], -self.coeffs]), eps)
        return z[burn:]

    def simulate_block(self, n, rng, state=None):
        """Continue the recursion from ``state`` (most recent value last).

        Returns (block, new_state); used for season-switched generation
        where one model hands its tail to the next.
        """
        eps = rng.standard_normal(n) * np.sqrt(self.noise_var)
        if self.order == 0:
            return eps, np.empty(0)
        a_poly = np.concatenate([[1.0], -self.coeffs])
        if state is None or len(state) == 0:
            zi = np.zeros(self.order)
        else:
            past = np.asarray(state, dtype=float)[-self.order :][::-1]
            if len(past) < self.order:
                past = np.concatenate([past, np.zeros(self.order - len(past))])
            zi = signal.lfiltic([1.0], a_poly, past)
        z, _ = signal.lfilter([1.0], a_poly, eps, zi=zi)
        if n >= self.order:
            tail = z[-self.order :]
        else:
            prev = np.zeros(self.order) if state is None else np.asarray(state, float)
            tail = np.concatenate([prev, z])[-self.order :]
        return z, tail

    def to_dict(self):
        return {
            "type": "ar",
            "order": self.order,
            "coeffs": [float(c) for c in self.coeffs],
            "noise_var": float(self.noise_var),
        }


def fit_ar(rho, p):
    """Fit AR(p) to a correlation structure by Yule-Walker.

    ``rho`` may be a CorrelationModel (evaluated at integer lags) or a
    vector of correlations for lags 1..p.  The fitted model reproduces
    the head exactly for tau <= p.
    """
    if p < 0:
        raise SpecError("fit_ar: order must be >= 0")
    if p == 0:
        return ArModel(np.empty(0), 1.0, rho_head=np.empty(0))
    head = _acs_head(rho, p)
    a, sigma2, _ = levinson_durbin(head)
    if sigma2 <= 0:
        raise NotPositiveDefiniteError("fit_ar: nonpositive innovation variance")
    return ArModel(a, sigma2, rho_head=head)


def ar_extrapolate_acs(model, rho_head, tau_max):
    """ACS implied by an AR model beyond its fitted head.

    Equals the given head for tau <= p and continues by the recursion
    rho(tau) = sum_i a_i rho(tau - i) afterwards.  Returns lags
    1..tau_max.
    """
    p = model.order
    head = np.asarray(rho_head, dtype=float)
    if len(head) < p:
        raise SpecError("ar_extrapolate_acs: head shorter than the model order")
    if tau_max <= len(head):
        return head[:tau_max].copy()
    ext = np.concatenate([[1.0], head, np.zeros(tau_max - len(head))])
    a = model.coeffs
    for tau in range(len(head) + 1, tau_max + 1):
        ext[tau] = np.dot(a, ext[tau - 1 : tau - 1 - p : -1] if p else 0.0)
    return ext[1:]


def simulate_ar(model, n, seed=None, burn_in=None):
    return model.simulate(n, seed=seed, burn_in=burn_in)


@dataclass
class SumAr1Model:
    """Sum of independent AR(1) components with unit total variance.

    Component i has lag-1 correlation r_i and variance w_i; the sum has
    exact ACS rho(tau) = sum_i w_i r_i^tau.
    """

    lag1: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        self.lag1 = np.asarray(self.lag1, dtype=float)
        self.variances = np.asarray(self.variances, dtype=float)
        if len(self.lag1) != len(self.variances) or len(self.lag1) == 0:
            raise ParameterError("SumAr1Model: mismatched or empty component lists")
        if np.any((self.lag1 < 0) | (self.lag1 >= 1)):
            raise ParameterError("SumAr1Model: lag-1 correlations must be in [0, 1)")
        if np.any(self.variances < 0):
            raise ParameterError("SumAr1Model: variances must be nonnegative")
        total = float(self.variances.sum())
        if abs(total - 1.0) > 1e-12:
            raise ParameterError(f"SumAr1Model: variances sum to {total}, not 1")

    @property
    def n_components(self):
        return len(self.lag1)

    def acs(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.sum(
            self.variances[:, None] * self.lag1[:, None] ** tau[None, :], axis=0
        )
        return out if out.ndim else float(out)

    def simulate(self, n, seed=None):
        """Exact stationary start per component; no burn-in needed."""
        if n < 1:
            raise SpecError("simulate: n must be >= 1")
        rng = _rng(seed)
        z = np.zeros(n)
        for r, w in zip(self.lag1, self.variances):
            if w == 0.0:
                continue
            sd = np.sqrt(w)
            eps = rng.standard_normal(n) * np.sqrt((1.0 - r * r) * w)
            eps[0] = rng.standard_normal() * sd  # stationary initial value
            z += signal.lfilter([1.0], [1.0, -r], eps)
        return z

    def to_dict(self):
        return {
            "type": "sum_ar1",
            "lag1": [float(v) for v in self.lag1],
            "variances": [float(v) for v in self.variances],
        }


def _solve_weights(rates, lags, target):
    # weights >= 0 with sum 1, least squares on the lag grid
    A = rates[None, :] ** lags[:, None]
    A = np.vstack([A, 1e3 * np.ones((1, len(rates)))])
    y = np.concatenate([target, [1e3]])
    res = optimize.lsq_linear(A, y, bounds=(0.0, np.inf))
    w = res.x
    s = w.sum()
    if s <= 0:
        raise FitError("fit_sum_ar1: weight solve degenerated")
    return w / s


def fit_sum_ar1(rho, n_components, max_lag=None):
    """Approximate a target ACS by a mixture of AR(1) correlations.

    Decay rates are optimized by simplex search with the nonnegative
    sum-to-one weights solved as an inner linear least-squares problem;
    a final polish minimizes the maximum absolute error on the lag grid.
    """
    if n_components < 1:
        raise SpecError("fit_sum_ar1: need at least one component")
    if isinstance(rho, CorrelationModel):
        L = max_lag or 1000
        target = np.atleast_1d(rho(np.arange(1.0, L + 1)))
    else:
        target = np.asarray(rho, dtype=float)
        if max_lag:
            target = target[:max_lag]
    lags = np.arange(1.0, len(target) + 1)

    if np.all(np.abs(target) < 1e-14):
        w = np.zeros(n_components)
        w[0] = 1.0
        return SumAr1Model(np.zeros(n_components), w)

    def unpack(theta):
        return 1.0 / (1.0 + np.exp(-np.asarray(theta)))

    def objective(theta):
        rates = unpack(theta)
        try:
            w = _solve_weights(rates, lags, target)
        except FitError:
            return 1e30
        err = rates[None, :] ** lags[:, None] @ w - target
        return float(np.max(np.abs(err)))

    # spread initial decay rates across time scales of the target grid
    base = np.log(np.linspace(0.3, 0.98, n_components) / (1 - np.linspace(0.3, 0.98, n_components)))
    best = None
    for scale in (0.5, 1.0, 2.0):
        res = optimize.minimize(
            objective, base * scale, method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 6000},
        )
        if best is None or res.fun < best.fun:
            best = res
    if best is None or best.fun >= 1e29:
        raise FitError("fit_sum_ar1: optimizer failed")
    rates = unpack(best.x)
    w = _solve_weights(rates, lags, target)
    # exact renormalization to machine precision
    w = w / w.sum()
    return SumAr1Model(rates, w)


def simulate_sum_ar1(model, n, seed=None):
    return model.simulate(n, seed=seed)


@dataclass
class Mar1Model:
    """First-order multivariate autoregression z(t) = A z(t-1) + B eps(t)."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape != (n, n):
            raise ParameterError("Mar1Model: A and B must be square and same size")
        if self.spectral_radius() >= 1.0:
            raise NotPositiveDefiniteError(
                f"Mar1Model: spectral radius {self.spectral_radius():.4f} >= 1, "
                "not stationary"
            )

    @property
    def n_processes(self):
        return self.A.shape[0]

    def spectral_radius(self):
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    def stationary_cov(self):
        return sla.solve_discrete_lyapunov(self.A, self.B @ self.B.T)

    def implied_lag1(self):
        return self.A @ self.stationary_cov()

    def simulate(self, n, seed=None, burn_in=1000):
        if n < 1:
            raise SpecError("simulate: n must be >= 1")
        rng = _rng(seed)
        d = self.n_processes
        total = n + burn_in
        eps = rng.standard_normal((total, d))
        out = np.empty((total, d))
        z = rng.standard_normal(d)
        for t in range(total):
            z = self.A @ z + self.B @ eps[t]
            out[t] = z
        return out[burn_in:]

    def simulate_block(self, n, rng, state=None):
        d = self.n_processes
        eps = rng.standard_normal((n, d))
        z = np.zeros(d) if state is None else np.asarray(state, dtype=float)
        out = np.empty((n, d))
        for t in range(n):
            z = self.A @ z + self.B @ eps[t]
            out[t] = z
        return out, z.copy()

    def to_dict(self):
        return {
            "type": "mar1",
            "n": self.n_processes,
            "A": [[float(v) for v in row] for row in self.A],
            "B": [[float(v) for v in row] for row in self.B],
        }


def fit_mar1(K0, K1):
    """Fit the MAR(1) parameters reproducing lag-0 and lag-1 matrices.

    K0 is the contemporaneous correlation matrix (symmetric, unit
    diagonal, positive definite); K1[i, j] = Cor[z_i(t), z_j(t-1)].
    Uses A = K1 K0^{-1} and B B^T = K0 - A K1^T, with B from Cholesky
    (eigenvalue clipping within -1e-10 if quadrature noise makes the
    product marginally indefinite).
    """
    K0 = np.asarray(K0, dtype=float)
    K1 = np.asarray(K1, dtype=float)
    n = K0.shape[0]
    if K0.shape != (n, n) or K1.shape != (n, n):
        raise SpecError("fit_mar1: K0 and K1 must be square matrices of equal size")
    if not np.allclose(K0, K0.T, atol=1e-10):
        raise SpecError("fit_mar1: K0 must be symmetric")
    if not np.allclose(np.diag(K0), 1.0, atol=1e-8):
        raise SpecError("fit_mar1: K0 must have a unit diagonal")
    eig0 = np.linalg.eigvalsh(K0)
    if eig0.min() <= 0:
        raise NotPositiveDefiniteError("fit_mar1: K0 is not positive definite")

    A = K1 @ np.linalg.inv(K0)
    BBt = K0 - A @ K1.T
    BBt = 0.5 * (BBt + BBt.T)
    try:
        B = np.linalg.cholesky(BBt)
    except np.linalg.LinAlgError:
        w, V = np.linalg.eigh(BBt)
        if w.min() < -1e-10:
            raise NotPositiveDefiniteError(
                "fit_mar1: noise covariance K0 - A K1^T is indefinite "
                f"(min eigenvalue {w.min():.3e}); the (K0, K1) pair is not "
                "jointly feasible -- consider repairing the correlation matrices"
            ) from None
        warnings.warn(
            "fit_mar1: clipping slightly negative noise-covariance eigenvalues",
            stacklevel=2,
        )
        w = np.clip(w, 0.0, None)
        B = V @ np.diag(np.sqrt(w)) @ V.T
    model = Mar1Model(A, B)
    implied = model.implied_lag1()
    if not np.allclose(implied, K1, atol=1e-8):
        raise FitError("fit_mar1: implied lag-1 matrix does not match the target")
    return model


def simulate_mar1(model, n, seed=None, burn_in=1000):
    return model.simulate(n, seed=seed, burn_in=burn_in)
