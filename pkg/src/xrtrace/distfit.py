"""Sample summaries and Q-Q comparison against normal, Laplace and logistic laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, InsufficientData, ZeroVarianceError


class Family(str, Enum):
    # declaration order is the tie-break order in fit_select
    NORMAL = "Normal"
    LAPLACE = "Laplace"
    LOGISTIC = "Logistic"


# method-of-moments scale: standard-form variance is 1, 2 and pi^2/3 respectively
_MOM_SCALE = {
    Family.NORMAL: 1.0,
    Family.LAPLACE: 1.0 / math.sqrt(2.0),
    Family.LOGISTIC: math.sqrt(3.0) / math.pi,
}

# Acklam's rational approximation to the standard normal quantile
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671016448441e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _normal_ppf(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1)
    elif p <= 1 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
            (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1)
    else:
        q = math.sqrt(-2 * math.log1p(-p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1)
    # one Halley step against erfc takes the ~1e-9 approximation to machine precision
    if x <= 0:
        e = 0.5 * math.erfc(-x / math.sqrt(2)) - p
    else:  # upper tail: work with 1 - p, which is exact for p >= 0.5
        e = (1 - p) - 0.5 * math.erfc(x / math.sqrt(2))
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


def theoretical_quantile(family: Family | str, p: float) -> float:
    """Inverse CDF of the standardized ``family`` at probability ``p``."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability {p!r} outside (0, 1)", "dist_fit.theoretical_quantile")
    family = Family(family)
    if p == 0.5:
        return 0.0
    if family is Family.NORMAL:
        return _normal_ppf(p)
    if family is Family.LAPLACE:
        d = p - 0.5
        return -math.copysign(1.0, d) * math.log1p(-2 * abs(d))
    return math.log(p / (1 - p))


@dataclass
class SampleSummary:
    n: int
    mean: float
    std_dev: float
    min: float
    max: float
    bin_edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "min": self.min,
            "max": self.max,
            "histogram": {"bin_edges": self.bin_edges.tolist(), "counts": self.counts.tolist()},
        }


def summarize(sample: Sequence[float], fallback_bins: int = 30) -> SampleSummary:
    """Summary statistics plus a Freedman-Diaconis histogram (30 bins when IQR is 0)."""
    x = np.asarray(sample, dtype=float)
    if x.size < 1:
        raise InsufficientData("empty sample", "dist_fit.summarize")
    q75, q25 = np.percentile(x, [75, 25])
    width = 2 * (q75 - q25) * x.size ** (-1 / 3)
    span = x.max() - x.min()
    if width > 0 and span > 0:
        bins = max(1, int(math.ceil(span / width)))
    else:
        bins = fallback_bins
    counts, edges = np.histogram(x, bins=bins)
    return SampleSummary(
        n=int(x.size),
        mean=float(x.mean()),
        std_dev=float(x.std(ddof=1)) if x.size > 1 else 0.0,
        min=float(x.min()),
        max=float(x.max()),
        bin_edges=edges,
        counts=counts,
    )


@dataclass
class DistributionFit:
    family: Family
    location: float
    scale: float
    probabilities: np.ndarray = field(repr=False)
    theoretical: np.ndarray = field(repr=False)
    standardized: np.ndarray = field(repr=False)
    linearity: float

    @property
    def qq_points(self) -> list[tuple[float, float]]:
        return list(zip(self.theoretical.tolist(), self.standardized.tolist()))

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "location": self.location,
            "scale": self.scale,
            "linearity": self.linearity,
            "n": int(self.theoretical.size),
        }


def fit_family(sample: Sequence[float], family: Family | str) -> DistributionFit:
    """Q-Q comparison of ``sample`` with one standardized family.

    The sample is sorted, located at its mean and scaled by the family's
    method-of-moments scale so that a perfect match lies on ``y = x``.
    Plotting positions are ``(i - 0.5) / n``. ``linearity`` is the squared
    Pearson correlation of the Q-Q points.
    """
    op = "dist_fit.qq_points"
    family = Family(family)
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n < 3:
        raise InsufficientData(f"need at least 3 points, got {n}", op)
    sd = x.std(ddof=1)
    if sd == 0 or x[0] == x[-1]:
        raise ZeroVarianceError("constant sample has no Q-Q shape", op)
    loc = float(x.mean())
    scale = float(sd * _MOM_SCALE[family])
    probs = (np.arange(1, n + 1) - 0.5) / n
    theo = np.array([theoretical_quantile(family, p) for p in probs])
    std = (x - loc) / scale
    r = np.corrcoef(theo, std)[0, 1]
    return DistributionFit(family, loc, scale, probs, theo, std, float(min(1.0, r * r)))


def qq_points(sample: Sequence[float], family: Family | str) -> list[tuple[float, float]]:
    return fit_family(sample, family).qq_points


def fit_select(sample: Sequence[float]) -> tuple[Family, dict[Family, DistributionFit]]:
    """Fit all three families; the best has the highest linearity (ties: Normal, Laplace, Logistic)."""
    n = len(sample)
    if n < 30:
        raise InsufficientData(f"need at least 30 points, got {n}", "dist_fit.fit_select")
    fits = {f: fit_family(sample, f) for f in Family}
    best = Family.NORMAL
    for f in Family:
        if fits[f].linearity > fits[best].linearity:
            best = f
    return best, fits
