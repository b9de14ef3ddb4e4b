"""Generalized Clifford tori ``T^n_p(r) = S^p(r) x S^{n-p}(sqrt(1 - r^2))`` in S^{n+1}.

Chart convention: each unit factor sphere S^d in R^{d+1} is parametrised by
the graph chart ``phi(u) = (sqrt(1 - |u|^2), u_1, ..., u_d)`` on the open
unit ball, so ``u = 0`` is the north pole ``(1, 0, ..., 0)``.  The
embedding is ``(r phi(u), sqrt(1 - r^2) psi(v))`` in R^{p+1} x R^{n-p+1}.

Orientation: the unit normal is ``xi = (-sqrt(1 - r^2) phi, r psi)``, which
makes the multiplicity-p principal curvature ``sqrt(1 - r^2)/r`` positive
and the mean curvature nonnegative for ``r^2 <= p/n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pinching import DEFAULT_TOL, PinchingParams, PinchingVerdict, classify, k_range_ok
from .shape import ShapeOperator


@dataclass(frozen=True)
class CliffordTorus:
    n: int
    p: int
    r: float

    def __post_init__(self):
        if not 1 <= self.p <= self.n - 1:
            raise ValueError(f"need 1 <= p <= n-1, got n={self.n}, p={self.p}")
        if not 0 < self.r < 1:
            raise ValueError(f"radius must lie in (0, 1), got {self.r}")

    @classmethod
    def from_r_squared(cls, n: int, p: int, r_squared: float) -> "CliffordTorus":
        return cls(n, p, math.sqrt(r_squared))

    @property
    def second_radius(self) -> float:
        return math.sqrt(1.0 - self.r * self.r)


def sphere_chart(u) -> np.ndarray:
    """Graph chart of the unit sphere: ``u -> (sqrt(1 - |u|^2), u)``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    rho2 = float(u @ u)
    if rho2 >= 1.0:
        raise ValueError(f"chart coordinates must satisfy |u| < 1, got |u| = {math.sqrt(rho2)!r}")
    return np.concatenate([[math.sqrt(1.0 - rho2)], u])


def embed(t: CliffordTorus, u, v) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if u.shape != (t.p,) or v.shape != (t.n - t.p,):
        raise ValueError(f"expected chart coordinates of sizes {t.p} and {t.n - t.p}, got {u.shape} and {v.shape}")
    return np.concatenate([t.r * sphere_chart(u), t.second_radius * sphere_chart(v)])


def unit_normal(t: CliffordTorus, u, v) -> np.ndarray:
    """The oriented unit normal ``(-sqrt(1 - r^2) phi(u), r psi(v))``."""
    return np.concatenate([-t.second_radius * sphere_chart(u), t.r * sphere_chart(v)])


def principal_curvatures(t: CliffordTorus) -> list[tuple[float, int]]:
    a = t.second_radius / t.r
    return [(a, t.p), (-1.0 / a, t.n - t.p)]


def shape_operator(t: CliffordTorus) -> ShapeOperator:
    """The shape operator in a principal frame: first p axes tangent to S^p(r)."""
    (mu1, m1), (mu2, m2) = principal_curvatures(t)
    return ShapeOperator(np.diag([mu1] * m1 + [mu2] * m2))


def mean_curvature(t: CliffordTorus) -> float:
    """Signed mean curvature ``(p - n r^2) / (n r sqrt(1 - r^2))``."""
    return (t.p - t.n * t.r * t.r) / (t.n * t.r * t.second_radius)


def ricci_values(t: CliffordTorus) -> tuple[float, float]:
    """Ricci curvature along the first and second factor: ``(p-1)/r^2, (n-p-1)/(1-r^2)``."""
    if t.p < 2 or t.n - t.p < 2:
        raise ValueError(f"both factors need dimension >= 2, got p={t.p}, n-p={t.n - t.p}")
    r2 = t.r * t.r
    return (t.p - 1) / r2, (t.n - t.p - 1) / (1.0 - r2)


def admissible_r_squared_range(n: int, k: int) -> tuple[float, float]:
    """``[(k-1)/(n-2), k/n]``, the r^2 for which T^n_k(r) satisfies the pinching."""
    if not k_range_ok(n, k):
        raise ValueError(f"(n={n}, k={k}) outside 2 <= k <= n/2 with n >= 4")
    lo, hi = (k - 1) / (n - 2), k / n
    if lo > hi:
        raise ArithmeticError(f"empty admissible range [{lo}, {hi}] for n={n}, k={k}")
    return lo, hi


def verify_equality_case(t: CliffordTorus, k: int, tol: float = DEFAULT_TOL) -> PinchingVerdict:
    """Classify the torus against b(n, k, |H|).

    Equality inside the admissible r^2 range, a violation strictly outside.
    """
    if t.p != k:
        raise ValueError(f"the equality case concerns p = k, got p={t.p}, k={k}")
    ric = min(ricci_values(t))
    return classify(ric, PinchingParams(t.n, k, abs(mean_curvature(t))), tol)
