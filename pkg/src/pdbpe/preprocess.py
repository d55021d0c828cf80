"""Per-series numeric preprocessing: normalization, whitening, aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError

# Standard deviations below this are treated as zero (constant input).
_STD_FLOOR = 1e-12
# Relative ridge added to a covariance that is not positive definite as-is.
_COV_RIDGE = 1e-8


def zscore_normalize(values, mask=None) -> np.ndarray:
    """Normalize a 1-D sequence to zero mean and unit population std.

    Statistics are computed over observed (mask True) entries only; masked
    entries are set to 0.0 in the output, which equals the post-normalization
    mean. A constant sequence (std < 1e-12) or one with no observed entries
    comes back as all zeros.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("zscore_normalize expects a 1-D sequence")
    if mask is None:
        mask = np.ones(values.shape, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
    observed = values[mask]
    if observed.size == 0:
        return np.zeros_like(values)
    mean = observed.mean()
    std = observed.std()  # population convention (divide by n)
    out = np.zeros_like(values)
    if std < _STD_FLOOR:
        return out
    out[mask] = (observed - mean) / std
    return out


@dataclass(frozen=True)
class WhiteningStats:
    """Per-series whitening parameters: channel means and the lower-triangular
    Cholesky factor L of the (possibly ridge-regularized) covariance."""

    mean: np.ndarray
    cholesky_factor: np.ndarray


def fit_whitening(values, mask=None) -> WhiteningStats:
    """Estimate whitening statistics from one series' observed entries.

    Channel means come from each channel's observed entries. The population
    covariance is taken over deviations with unobserved entries zeroed (i.e.
    filled at the channel mean). If the covariance is not positive definite
    as-is, a ridge of 1e-8 * trace/d is added to the diagonal; if it still
    fails, the fit is a hard error.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("fit_whitening expects a (length x channels) matrix")
    n, d = values.shape
    if mask is None:
        mask = np.ones(values.shape, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
    mean = np.zeros(d)
    for j in range(d):
        col = values[mask[:, j], j]
        if col.size:
            mean[j] = col.mean()
    dev = np.where(mask, values - mean, 0.0)
    cov = dev.T @ dev / n
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        ridged = cov + _COV_RIDGE * (np.trace(cov) / d) * np.eye(d)
        try:
            factor = np.linalg.cholesky(ridged)
        except np.linalg.LinAlgError:
            raise NumericError(
                "covariance is not positive definite even after ridge "
                f"regularization (trace={np.trace(cov):.6g}, d={d}); "
                "the series is degenerate") from None
    return WhiteningStats(mean=mean, cholesky_factor=factor)


def whiten_multivariate(values, stats: WhiteningStats) -> np.ndarray:
    """Decorrelate rows of a (length x channels) matrix.

    Each row x is mapped to the solution of L z = (x - mean), where L is the
    lower-triangular factor from fit_whitening; the output rows then have
    (near-)identity sample covariance.
    """
    values = np.asarray(values, dtype=np.float64)
    dev = values - stats.mean
    return np.linalg.solve(stats.cholesky_factor, dev.T).T


def l2_collapse(whitened) -> np.ndarray:
    """Collapse a (length x channels) matrix to the per-row Euclidean norm."""
    whitened = np.asarray(whitened, dtype=np.float64)
    return np.sqrt((whitened * whitened).sum(axis=1))


def collapse_series(values, mask) -> np.ndarray:
    """Whiten a multichannel series against its own statistics and collapse
    it to a 1-D magnitude stream. Unobserved entries are held at the channel
    mean, so they contribute nothing to the whitened deviation."""
    stats = fit_whitening(values, mask)
    filled = np.where(np.asarray(mask, dtype=bool), values, stats.mean)
    return l2_collapse(whiten_multivariate(filled, stats))


def paa(values, W: int) -> np.ndarray:
    """Piecewise aggregate approximation with window W.

    Produces ceil(len / W) segment means; a trailing partial window is
    averaged over its actual size.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("paa expects a 1-D sequence")
    if W < 1:
        raise ValueError("W must be >= 1")
    n = values.size
    if n == 0:
        return values.copy()
    if W == 1:
        return values.copy()
    starts = np.arange(0, n, W)
    sums = np.add.reduceat(values, starts)
    sizes = np.minimum(starts + W, n) - starts
    return sums / sizes
