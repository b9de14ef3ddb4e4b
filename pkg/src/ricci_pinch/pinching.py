"""Scalar Ricci-pinching bounds and the verdict of a Ricci value against them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class PinchingParams:
    """Dimension ``n``, pinching integer ``k`` and mean-curvature length ``H``.

    Enforces ``n >= 4``, ``2 <= k <= n/2`` and ``H >= 0``.  The narrower ranges
    required by the topological theorem are checked separately by
    :func:`theorem1_k_range_ok`.
    """

    n: int
    k: int
    H: float

    def __post_init__(self):
        if int(self.n) != self.n or int(self.k) != self.k:
            raise ValueError(f"n and k must be integers, got n={self.n}, k={self.k}")
        if self.n < 4:
            raise ValueError(f"n must be >= 4, got {self.n}")
        if not 2 <= self.k <= self.n / 2:
            raise ValueError(f"k must satisfy 2 <= k <= n/2, got n={self.n}, k={self.k}")
        if not (self.H >= 0 and math.isfinite(self.H)):
            raise ValueError(f"H must be finite and nonnegative, got {self.H}")


class Status(str, enum.Enum):
    STRICT = "Strict"
    EQUALITY = "Equality"
    VIOLATED = "Violated"


@dataclass(frozen=True)
class PinchingVerdict:
    status: Status
    margin: float


def _root_term(n: int, k: int, H: float) -> float:
    return n * H + math.sqrt(n * n * H * H + 4 * k * (n - k))


def bound_b(params: PinchingParams) -> float:
    """The Ricci lower bound b(n, k, H)."""
    n, k, H = params.n, params.k, params.H
    return n * (k - 1) / k + n * (k - 1) * H * _root_term(n, k, H) / (2 * k * k)


def lambda_value(params: PinchingParams) -> float:
    """Positive root of ``k x^2 - n H x - (n - k) = 0``."""
    n, k, H = params.n, params.k, params.H
    return _root_term(n, k, H) / (2 * k)


def bound_identity_residual(params: PinchingParams) -> float:
    """``k b - n(k-1)(1 + H lambda)``, identically zero."""
    n, k, H = params.n, params.k, params.H
    return k * bound_b(params) - n * (k - 1) * (1 + H * lambda_value(params))


def final_constant(params: PinchingParams) -> float:
    """``n - k + k b - k(n-1) - n(k-1) H lambda``.

    This is the per-unit-norm constant left at the end of the lower-bound
    chain for the Bochner form; it vanishes for every admissible (n, k, H).
    """
    n, k, H = params.n, params.k, params.H
    return n - k + k * bound_b(params) - k * (n - 1) - n * (k - 1) * H * lambda_value(params)


def even_dimension_bound(n: int, H: float) -> float:
    """``(n-2)(1 + H^2 + H sqrt(1 + H^2))``: b at k = n/2."""
    return (n - 2) * (1 + H * H + H * math.sqrt(1 + H * H))


def odd_dimension_bound(n: int, H: float) -> float:
    """b at k = (n-1)/2 for odd n, written in its expanded form."""
    return n * (n - 3) / (n - 1) * (1 + H / (n - 1) * (n * H + math.sqrt(n * n * H * H + n * n - 1)))


def classify(ric_min: float, params: PinchingParams, tol: float = DEFAULT_TOL) -> PinchingVerdict:
    """Compare a minimal Ricci value with b(n, k, H) at absolute tolerance ``tol``."""
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    margin = ric_min - bound_b(params)
    if margin > tol:
        status = Status.STRICT
    elif margin < -tol:
        status = Status.VIOLATED
    else:
        status = Status.EQUALITY
    return PinchingVerdict(status, margin)


def theorem1_k_range_ok(n: int, k: int) -> bool:
    """k >= 2 with k < n/2 (n even) or k < (n-1)/2 (n odd)."""
    if n < 4 or k < 2:
        return False
    if n % 2 == 0:
        return 2 * k < n
    return 2 * k < n - 1


def k_range_ok(n: int, k: int) -> bool:
    """The weaker range ``2 <= k <= n/2`` on which b(n, k, H) is defined."""
    return n >= 4 and 2 <= k and 2 * k <= n
