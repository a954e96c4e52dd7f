"""Expected-improvement acquisition (minimization convention) and its argmax."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class AcquisitionConfig:
    xi: float = 0.01
    candidate_count: int = 2048

    def __post_init__(self):
        if self.xi < 0.0:
            raise ValueError("xi must be non-negative")
        if self.candidate_count < 1:
            raise ValueError("candidate_count must be at least 1")


def _norm_cdf(z):
    return 0.5 * erfc(-z / _SQRT2)


def _norm_pdf(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def expected_improvement(mean, variance, best, xi: float = 0.0):
    """EI for minimization: expected amount by which a candidate with the
    given posterior (mean, variance) beats `best - xi`.

    Vectorized over mean/variance. Degenerate variance collapses to
    max(0, best - mean - xi).
    """
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0.0):
        raise ValueError("variance must be non-negative")
    gap = best - mean - xi
    sigma = np.sqrt(variance)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0.0, gap / np.where(sigma > 0.0, sigma, 1.0), 0.0)
    ei = np.where(
        sigma > 0.0,
        gap * _norm_cdf(z) + sigma * _norm_pdf(z),
        np.maximum(gap, 0.0),
    )
    out = np.maximum(ei, 0.0)
    return float(out) if out.ndim == 0 else out


def argmax_ei(gp, candidates, config: AcquisitionConfig = AcquisitionConfig()):
    """Candidate with maximal EI under the surrogate; first index wins ties."""
    candidates = np.asarray(candidates, dtype=float)
    if candidates.ndim != 2 or candidates.shape[0] == 0:
        raise ValueError("candidates must be a nonempty (n, dim) array")
    means, variances = gp.predict_batch(candidates)
    best = float(np.min(gp.targets))
    ei = expected_improvement(means, variances, best, config.xi)
    return candidates[int(np.argmax(ei))]
