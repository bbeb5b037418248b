"""Shared test oracles.

The Monte-Carlo oracle is deliberately independent of the quadrature
path it checks: it generates correlated standard-normal pairs directly,
pushes them through the quantile transform and takes the sample Pearson
correlation.  The standard error comes from interleaved batch
correlations, which stays honest for heavy-tailed transforms where the
textbook (1 - r^2)/sqrt(n) formula underestimates badly.
"""

import numpy as np
from scipy import special as sc


def mc_transformed_correlation(m1, m2, rho_z, n=1_000_000, seed=0, batches=40):
    """Sample correlation of (Q1(Phi(Z1)), Q2(Phi(Z2))) with Cor[Z1,Z2]=rho_z.

    Returns (r, se) where se is a batch-means standard error of r.
    """
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(n)
    z2 = rho_z * z1 + np.sqrt(1.0 - rho_z * rho_z) * rng.standard_normal(n)
    x1 = np.asarray(m1.quantile(sc.ndtr(z1), clamp=True))
    x2 = np.asarray(m2.quantile(sc.ndtr(z2), clamp=True))
    r = float(np.corrcoef(x1, x2)[0, 1])
    rs = [
        float(np.corrcoef(x1[i::batches], x2[i::batches])[0, 1])
        for i in range(batches)
    ]
    se = float(np.std(rs) / np.sqrt(batches))
    return r, se


def mc_product_correlation(m1, m2, rho_z, n=1_000_000, seed=0):
    """Unbiased variant: sample mean of x1*x2 normalized by exact moments.

    For infinite-kurtosis marginals the Pearson estimator at feasible n
    carries a systematic bias from its heavy-tailed variance estimates;
    the product-moment form stays unbiased (its fluctuations are still
    skewed, so compare replicate means, not single runs).
    """
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(n)
    z2 = rho_z * z1 + np.sqrt(1.0 - rho_z * rho_z) * rng.standard_normal(n)
    x1 = np.asarray(m1.quantile(sc.ndtr(z1), clamp=True))
    x2 = np.asarray(m2.quantile(sc.ndtr(z2), clamp=True))
    mu1, var1 = m1.moments()
    mu2, var2 = m2.moments()
    return (float(np.mean(x1 * x2)) - mu1 * mu2) / np.sqrt(var1 * var2)


def pd_toeplitz_head(p, seed):
    """Random valid correlation head: a mixture of AR(1) correlations."""
    rng = np.random.default_rng(seed)
    k = rng.integers(2, 6)
    rates = rng.uniform(0.05, 0.97, size=k)
    w = rng.dirichlet(np.ones(k))
    taus = np.arange(1, p + 1)
    return (w[:, None] * rates[:, None] ** taus[None, :]).sum(axis=0)
