"""Acceptance-rate models: tabulated curves and a per-token geometric model.

The tabulated form carries measured acceptance rates per speculative length
and answers queries by linear interpolation, clamped to the measured range.
The geometric form assumes each drafted token is accepted independently with
probability ``beta`` and acceptance stops at the first rejection; it exists
as an analytically tractable alternative and is never silently substituted
for measured data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError

FIT_TOLERANCE = 1e-6  # absolute tolerance in beta for fit_beta

_INV_PHI = (5.0**0.5 - 1.0) / 2.0


@dataclass(frozen=True)
class TabulatedCurve:
    """Measured acceptance rate per speculative length, k strictly increasing."""

    points: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise DomainError("tabulated curve needs >= 2 points")
        previous_k = 0
        for k, alpha in self.points:
            if k < 1:
                raise DomainError(f"curve k must be >= 1, got {k}")
            if k <= previous_k:
                raise DomainError("curve k values must be strictly increasing")
            if not 0.0 <= alpha <= 1.0:
                raise DomainError(f"curve alpha must be within [0, 1], got {alpha}")
            previous_k = k

    @classmethod
    def from_points(cls, points: Iterable[tuple[int, float]]) -> "TabulatedCurve":
        return cls(tuple(sorted((int(k), float(a)) for k, a in points)))

    @property
    def k_min(self) -> int:
        return self.points[0][0]

    @property
    def k_max(self) -> int:
        return self.points[-1][0]


@dataclass(frozen=True)
class GeometricCurve:
    """Per-token acceptance probability for the stop-at-first-rejection model."""

    beta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must be within [0, 1], got {self.beta}")


def alpha_tabulated(curve: TabulatedCurve, k: int) -> float:
    """Acceptance rate at length ``k``: exact at measured points, linear
    in between, clamped to the nearest endpoint outside the measured range."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    points = curve.points
    if k <= points[0][0]:
        return points[0][1]
    if k >= points[-1][0]:
        return points[-1][1]
    for (k_lo, a_lo), (k_hi, a_hi) in zip(points, points[1:]):
        if k == k_lo:
            return a_lo
        if k_lo < k < k_hi:
            weight = (k - k_lo) / (k_hi - k_lo)
            return a_lo + weight * (a_hi - a_lo)
    return points[-1][1]  # unreachable given sorted points


def alpha_geometric(curve: GeometricCurve, k: int) -> float:
    """Expected accepted fraction of ``k`` drafted tokens under the
    per-token model: beta * (1 - beta**k) / (k * (1 - beta))."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    beta = curve.beta
    if beta <= 0.0:
        return 0.0
    if beta >= 1.0:
        return 1.0
    return beta * (1.0 - beta**k) / (k * (1.0 - beta))


def expected_accepted(alpha: float, k: int) -> float:
    """Expected accepted tokens per round: k drafted at rate ``alpha`` plus
    the one token every verification yields regardless of rejections."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must be within [0, 1], got {alpha}")
    return k * alpha + 1.0


def fit_beta(samples: Sequence[tuple[int, float]]) -> GeometricCurve:
    """Least-squares fit of the per-token model to (k, alpha) samples.

    Minimises the sum of squared residuals over beta in [0, 1] by
    golden-section search to within ``FIT_TOLERANCE``; fully deterministic.
    """
    if not samples:
        raise DomainError("fit_beta requires at least one (k, alpha) sample")
    cleaned = []
    for k, alpha in samples:
        if k < 1:
            raise DomainError(f"sample k must be >= 1, got {k}")
        if not 0.0 <= alpha <= 1.0:
            raise DomainError(f"sample alpha must be within [0, 1], got {alpha}")
        cleaned.append((int(k), float(alpha)))

    def sse(beta: float) -> float:
        curve = GeometricCurve(beta)
        return sum((alpha_geometric(curve, k) - alpha) ** 2 for k, alpha in cleaned)

    lo, hi = 0.0, 1.0
    mid_lo = hi - _INV_PHI * (hi - lo)
    mid_hi = lo + _INV_PHI * (hi - lo)
    sse_lo, sse_hi = sse(mid_lo), sse(mid_hi)
    while hi - lo > FIT_TOLERANCE:
        if sse_lo < sse_hi:
            hi, mid_hi, sse_hi = mid_hi, mid_lo, sse_lo
            mid_lo = hi - _INV_PHI * (hi - lo)
            sse_lo = sse(mid_lo)
        else:
            lo, mid_lo, sse_lo = mid_lo, mid_hi, sse_hi
            mid_hi = lo + _INV_PHI * (hi - lo)
            sse_hi = sse(mid_hi)
    return GeometricCurve((lo + hi) / 2.0)
