"""Correlation-transformation integrals and fitted transformation curves.

The quantile transform x = Q(Phi(z)) preserves the marginal but deflates
correlation: a parent-Gaussian pair with correlation rho_Z maps to a
target pair with correlation rho_X <= rho_Z.  This module evaluates that
forward map (the auto-/cross-correlation transformation integrals) by
Gauss-Hermite quadrature, and fits simple two-parameter curves to a small
grid of (rho_X, rho_Z) points so the practically needed inverse map
rho_X -> rho_Z becomes a closed-form expression.

Quadrature uses the rotated substitution

    z1 = sqrt(2) (c x + d y),   z2 = sqrt(2) (c x - d y),
    c = sqrt((1 + rho)/2),      d = sqrt((1 - rho)/2),

which makes the tensor rule exactly symmetric under exchange of the two
marginals.  Discrete marginals bypass quadrature entirely: products of
integer-valued variables reduce to sums of bivariate-normal orthant
probabilities, which are computed from Owen's T function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize
from scipy import special as sc

from .errors import (
    DomainError,
    FitError,
    InfeasibleCorrelationError,
    IntegrationError,
    SpecError,
)

__all__ = [
    "AUTO_RHO_GRID",
    "CROSS_RHO_GRID",
    "bivariate_normal_cdf",
    "acti_evaluate",
    "ccti_evaluate",
    "TransformGrid",
    "build_grid",
    "CtfCurve",
    "fit_ctf",
    "rho_max",
]

# parent-Gaussian abscissae at which the integrals are evaluated
AUTO_RHO_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)
CROSS_RHO_GRID = AUTO_RHO_GRID + (0.99,)

_SMOOTH_NODES = 64
_ATOM_NODES = 200
_MAX_NODES = 1600
_SMOOTH_TOL = 1e-5
# Atom-at-zero marginals kink the integrand, so node-doubling deltas
# oscillate around a few 1e-4 (in correlation units) instead of decaying
# spectrally; 5e-4 is attainable and far below every downstream tolerance.
_ATOM_TOL = 5e-4
_KS_SLACK = 5e-3  # quadrature slack on rho_X <= rho_Z


@lru_cache(maxsize=32)
def _gh(n):
    return sc.roots_hermite(n)


def bivariate_normal_cdf(h, k, rho):
    """P(Z1 <= h, Z2 <= k) for standard bivariate normal, via Owen's T.

    Vectorized over h and k; rho is a scalar in [-1, 1].
    """
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    if rho >= 1.0:
        out = sc.ndtr(np.minimum(h, k))
        return out if out.ndim else float(out)
    if rho <= -1.0:
        out = np.maximum(sc.ndtr(h) + sc.ndtr(k) - 1.0, 0.0)
        return out if out.ndim else float(out)
    if rho == 0.0:
        out = sc.ndtr(h) * sc.ndtr(k)
        return out if out.ndim else float(out)
    # Owen (1956); nudge exact zeros off the removable singularity
    h = np.where(np.abs(h) < 1e-13, 1e-13, h)
    k = np.where(np.abs(k) < 1e-13, 1e-13, k)
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    ah = (k - rho * h) / (h * s)
    ak = (h - rho * k) / (k * s)
    delta = np.where(h * k > 0, 0.0, 0.5)
    out = 0.5 * (sc.ndtr(h) + sc.ndtr(k)) - sc.owens_t(h, ah) - sc.owens_t(k, ak) - delta
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# expected product E[Q1(Phi(Z1)) Q2(Phi(Z2))]
# ---------------------------------------------------------------------------

def _gh_tensor_product(m1, m2, rho, nodes):
    x, w = _gh(nodes)
    c = math.sqrt((1.0 + rho) / 2.0)
    d = math.sqrt((1.0 - rho) / 2.0)
    a = math.sqrt(2.0) * c * x
    b = math.sqrt(2.0) * d * x
    z1 = a[:, None] + b[None, :]
    z2 = a[:, None] - b[None, :]
    f1 = np.atleast_2d(m1.quantile(sc.ndtr(z1), clamp=True))
    f2 = np.atleast_2d(m2.quantile(sc.ndtr(z2), clamp=True))
    return float(np.einsum("i,j,ij,ij->", w, w, f1, f2)) / math.pi


def _discrete_pair_product(m1, m2, rho):
    # E[X1 X2] = sum_{j,k >= 0} P(X1 > j, X2 > k) for integer-valued X
    v1, F1 = m1.cdf_table()
    v2, F2 = m2.cdf_table()
    h1 = sc.ndtri(np.clip(F1, 1e-300, 1.0 - 1e-16))
    h2 = sc.ndtri(np.clip(F2, 1e-300, 1.0 - 1e-16))
    HH1, HH2 = np.meshgrid(h1, h2, indexing="ij")
    joint = bivariate_normal_cdf(HH1, HH2, rho)
    surv = 1.0 - F1[:, None] - F2[None, :] + joint
    return float(np.sum(np.maximum(surv, 0.0)))


def _semi_discrete_product(m_disc, m_cont, rho, nodes):
    # E[X Y] = sum_j E[1{X > j} Y]; conditionally Z1 | Z2=z ~ N(rho z, 1-rho^2)
    _, F = m_disc.cdf_table()
    h = sc.ndtri(np.clip(F, 1e-300, 1.0 - 1e-16))
    s = math.sqrt((1.0 - rho) * (1.0 + rho))
    x, w = _gh(max(nodes, _ATOM_NODES))
    z = math.sqrt(2.0) * x
    g = np.atleast_1d(m_cont.quantile(sc.ndtr(z), clamp=True))
    upper = sc.ndtr((rho * z[:, None] - h[None, :]) / s)  # P(Z1 > h_j | z)
    return float(np.sum(w[:, None] * g[:, None] * upper)) / math.sqrt(math.pi)


def _expected_product(m1, m2, rho, nodes=None):
    if m1.is_discrete and m2.is_discrete:
        return _discrete_pair_product(m1, m2, rho)
    if m1.is_discrete:
        return _semi_discrete_product(m1, m2, rho, nodes or _ATOM_NODES)
    if m2.is_discrete:
        return _semi_discrete_product(m2, m1, rho, nodes or _ATOM_NODES)
    if nodes is None:
        nodes = _ATOM_NODES if (m1.has_atoms or m2.has_atoms) else _SMOOTH_NODES
    return _gh_tensor_product(m1, m2, rho, nodes)


def _transform_point(m1, m2, rho_z, nodes, check, tol):
    """One (rho_Z -> rho_X) evaluation with optional node-doubling check."""
    mu1, var1 = m1.moments()
    mu2, var2 = m2.moments()
    if var1 <= 0 or var2 <= 0:
        raise DomainError("transformation integral: degenerate marginal (zero variance)")
    denom = math.sqrt(var1 * var2)

    exact = m1.is_discrete or m2.is_discrete
    if nodes is None:
        nodes = _ATOM_NODES if (m1.has_atoms or m2.has_atoms or exact) else _SMOOTH_NODES
    val = _expected_product(m1, m2, rho_z, nodes)
    if check and not (m1.is_discrete and m2.is_discrete):
        if tol is None:
            tol = _ATOM_TOL if (m1.has_atoms or m2.has_atoms or exact) else _SMOOTH_TOL
        while True:
            nodes2 = nodes * 2
            val2 = _expected_product(m1, m2, rho_z, nodes2)
            delta = abs(val2 - val)
            if delta <= tol * denom:
                val = val2
                break
            if nodes2 >= _MAX_NODES:
                raise IntegrationError(
                    f"quadrature not converged at {nodes2} nodes "
                    f"(achieved {delta / denom:.2e}, target {tol:.0e})",
                    achieved=delta / denom,
                )
            nodes, val = nodes2, val2
    return (val - mu1 * mu2) / denom


def _check_rho_z(rho_z):
    rho_z = float(rho_z)
    if rho_z < 0.0:
        raise DomainError("rho_z must be nonnegative (negative targets unsupported)")
    if rho_z >= 1.0:
        raise DomainError("rho_z must be < 1; the endpoint is handled analytically")
    return rho_z


def acti_evaluate(m, rho_z, nodes=None, check=False, tol=None):
    """Target autocorrelation produced by parent-Gaussian correlation rho_z.

    Evaluates rho_X = (E[X(t) X(t-tau)] - mu^2) / sigma^2 where both
    variables are the quantile transform of a standard-Gaussian pair
    with correlation rho_z.  Requires a finite-variance marginal.
    """
    rho_z = _check_rho_z(rho_z)
    if rho_z == 0.0:
        m.variance()  # still enforce the finite-moment precondition
        return 0.0
    return _transform_point(m, m, rho_z, nodes, check, tol)


def ccti_evaluate(m1, m2, rho_z, nodes=None, check=False, tol=None):
    """Cross-correlation analogue of :func:`acti_evaluate` for two marginals."""
    rho_z = _check_rho_z(rho_z)
    if rho_z == 0.0:
        m1.variance()
        m2.variance()
        return 0.0
    return _transform_point(m1, m2, rho_z, nodes, check, tol)


@dataclass
class TransformGrid:
    """(rho_Z, rho_X) pairs sampled from a transformation integral."""

    rho_z: np.ndarray
    rho_x: np.ndarray
    kind: str = "auto"

    def __post_init__(self):
        self.rho_z = np.asarray(self.rho_z, dtype=float)
        self.rho_x = np.asarray(self.rho_x, dtype=float)
        if self.rho_z.shape != self.rho_x.shape:
            raise SpecError("TransformGrid: mismatched rho_z / rho_x lengths")
        if self.kind not in ("auto", "cross"):
            raise SpecError(f"TransformGrid: bad kind {self.kind!r}")
        if np.any(self.rho_x > self.rho_z + _KS_SLACK):
            raise IntegrationError(
                "TransformGrid: rho_X exceeds rho_Z beyond quadrature slack; "
                "the integral evaluation is suspect"
            )
        if np.any(np.diff(self.rho_x) < -1e-9):
            raise IntegrationError("TransformGrid: rho_X not monotone in rho_Z")

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write("rho_z,rho_x\n")
            for z, x in zip(self.rho_z, self.rho_x):
                f.write(f"{z:.12g},{x:.12g}\n")

    def __len__(self):
        return len(self.rho_z)


def build_grid(m1, m2=None, kind=None, nodes=None, check=True, tol=None):
    """Evaluate the transformation integral on the standard rho_Z grid.

    ``kind="auto"`` uses the 10-point grid; ``kind="cross"`` (implied
    when two distinct marginals are given) appends 0.99.  The point
    (0, 0) is always prepended; independence survives any marginal
    transform, so it is exact.
    """
    if kind is None:
        kind = "auto" if m2 is None else "cross"
    mk = m1 if m2 is None else m2
    grid = AUTO_RHO_GRID if kind == "auto" else CROSS_RHO_GRID
    rho_z = [0.0]
    rho_x = [0.0]
    for rz in grid:
        rho_z.append(rz)
        rho_x.append(_transform_point(m1, mk, rz, nodes, check, tol))
    return TransformGrid(np.array(rho_z), np.array(rho_x), kind=kind)


# ---------------------------------------------------------------------------
# parametric transformation curves (the inverse map rho_X -> rho_Z)
# ---------------------------------------------------------------------------

def _rational_apply(rho_x, b, c):
    if b < 1e-10:
        return np.asarray(rho_x, dtype=float) + 0.0
    om = 1.0 - c
    if abs(om) < 1e-9:
        return np.log1p(b * np.asarray(rho_x, dtype=float)) / math.log1p(b)
    return np.expm1(om * np.log1p(b * np.asarray(rho_x, dtype=float))) / math.expm1(
        om * math.log1p(b)
    )


def _kumaraswamy_apply(rho_x, b, c):
    r = np.clip(np.asarray(rho_x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore"):  # r = 1 maps to 1 exactly
        return -np.expm1(c * np.log1p(-(r**b)))


def _cross_apply(rho_x, b, c):
    return np.expm1(c * np.log1p(b * np.asarray(rho_x, dtype=float)))


@dataclass
class CtfCurve:
    """Fitted correlation-transformation function rho_Z = T(rho_X; b, c).

    Families:
      - "rational":    ((1 + b r)^(1-c) - 1) / ((1 + b)^(1-c) - 1);
                       passes through (0,0) and (1,1).
      - "kumaraswamy": 1 - (1 - r^b)^c with 0 < b <= 1, c >= 1; also
                       pinned at (0,0) and (1,1); preferred for discrete
                       and binary marginals.
      - "cross":       (1 + b r)^c - 1; passes through (0,0) only, and
                       reaches 1 at rho_max = (2^(1/c) - 1)/b, the
                       maximum feasible cross-correlation of the pair.
    """

    family: str
    b: float
    c: float
    residual_rms: float = 0.0
    rho_max: float | None = field(default=None)

    def __post_init__(self):
        if self.family not in ("rational", "kumaraswamy", "cross"):
            raise SpecError(f"CtfCurve: unknown family {self.family!r}")
        if self.family == "rational":
            if self.b < 0 or self.c < 0:
                raise SpecError("rational curve needs b > 0 and c >= 0")
        elif self.family == "kumaraswamy":
            if not (0.0 < self.b <= 1.0) or self.c < 1.0:
                raise SpecError("kumaraswamy curve needs 0 < b <= 1 and c >= 1")
        else:
            if self.b <= 0 or self.c <= 0:
                raise SpecError("cross curve needs b > 0 and c > 0")
            self.rho_max = (2.0 ** (1.0 / self.c) - 1.0) / self.b

    def apply(self, rho_x):
        """Map target correlation(s) to the parent-Gaussian correlation."""
        r = np.asarray(rho_x, dtype=float)
        if np.any(r < 0.0):
            raise DomainError("ctf apply: negative correlations are unsupported")
        if self.family == "cross":
            if np.any(r > self.rho_max + 1e-12):
                worst = float(np.max(r))
                raise InfeasibleCorrelationError(
                    f"target cross-correlation {worst:.4g} exceeds the feasible "
                    f"maximum rho_max = {self.rho_max:.4g} for this pair",
                    target=worst,
                    limit=self.rho_max,
                )
            out = np.minimum(_cross_apply(np.minimum(r, self.rho_max), self.b, self.c), 1.0)
        elif self.family == "rational":
            if np.any(r > 1.0):
                raise DomainError("ctf apply: rho_x must lie in [0, 1]")
            out = np.clip(_rational_apply(r, self.b, self.c), 0.0, 1.0)
        else:
            if np.any(r > 1.0):
                raise DomainError("ctf apply: rho_x must lie in [0, 1]")
            out = np.clip(_kumaraswamy_apply(r, self.b, self.c), 0.0, 1.0)
        return out if out.ndim else float(out)

    def to_dict(self):
        d = {
            "family": self.family,
            "b": float(self.b),
            "c": float(self.c),
            "residual_rms": float(self.residual_rms),
        }
        if self.rho_max is not None:
            d["rho_max"] = float(self.rho_max)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["family"], d["b"], d["c"], d.get("residual_rms", 0.0))


def rho_max(curve):
    """Maximum feasible target cross-correlation of a fitted cross curve."""
    if curve.family != "cross":
        raise SpecError("rho_max is defined for cross curves only")
    return curve.rho_max


_POOR_FIT_RMS = 0.01


def fit_ctf(grid, family=None):
    """Least-squares fit of a transformation curve to a grid.

    Residuals are measured in the rho_Z direction, matching how curves
    are applied.  Derivative-free simplex search from a small lattice of
    log-spaced starting points; the best solution wins.  A residual RMS
    above 0.01 triggers a warning but is not fatal.
    """
    if family is None:
        family = "cross" if grid.kind == "cross" else "rational"
    if family == "cross" and grid.kind != "cross":
        raise SpecError("cross curves must be fitted to cross grids")
    if family != "cross" and grid.kind == "cross":
        raise SpecError(f"{family} curves apply to auto grids only")
    rx = grid.rho_x
    rz = grid.rho_z

    if family == "rational":
        def build(t):
            return math.exp(t[0]), math.exp(t[1])

        def curve_vals(t):
            b, c = build(t)
            return _rational_apply(rx, b, c)
    elif family == "kumaraswamy":
        def build(t):
            return 1.0 / (1.0 + math.exp(-t[0])), 1.0 + math.exp(t[1])

        def curve_vals(t):
            b, c = build(t)
            return _kumaraswamy_apply(rx, b, c)
    elif family == "cross":
        def build(t):
            return math.exp(t[0]), math.exp(t[1])

        def curve_vals(t):
            b, c = build(t)
            return _cross_apply(rx, b, c)
    else:
        raise SpecError(f"fit_ctf: unknown family {family!r}")

    def loss(t):
        with np.errstate(over="ignore", invalid="ignore"):
            v = curve_vals(t)
        if not np.all(np.isfinite(v)):
            return 1e30
        return float(np.sum((v - rz) ** 2))

    best = None
    for t0 in np.linspace(-4.0, 6.0, 9):
        for t1 in np.linspace(-3.0, 3.0, 7):
            res = optimize.minimize(
                loss, np.array([t0, t1]), method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 3000},
            )
            if best is None or res.fun < best.fun:
                best = res
    if best is None or not np.isfinite(best.fun) or best.fun >= 1e29:
        raise FitError("fit_ctf: optimizer failed on every start")
    b, c = build(best.x)
    rms = math.sqrt(best.fun / len(rx))
    if rms > _POOR_FIT_RMS:
        warnings.warn(
            f"fit_ctf: residual RMS {rms:.4g} above {_POOR_FIT_RMS}; "
            "the curve family may not suit this marginal",
            stacklevel=2,
        )
    return CtfCurve(family, b, c, residual_rms=rms)
