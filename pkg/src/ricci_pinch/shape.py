"""Pointwise extrinsic geometry of a hypersurface in the unit sphere.

Everything here is algebraic in the shape operator A at one point: Ricci
curvature from the Gauss equation, the mean-curvature length, the Bochner
quadratic form on k-forms and the chain of lower bounds that shows it is
nonnegative under Ricci pinching.  A seeded sampler produces pinched shape
operators for sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ortho_group

from .exterior import (
    PForm,
    SymmetricEndomorphism,
    _index_array,
    compound_matrix,
    eigen_sums,
    t_matrix,
    t_operator,
)
from .pinching import PinchingParams, bound_b, final_constant, k_range_ok, lambda_value

UNIT_TOL = 1e-10


class ShapeOperator(SymmetricEndomorphism):
    """Shape operator of a hypersurface M^n in S^{n+1}, n >= 4."""

    def __init__(self, matrix):
        super().__init__(matrix)
        if self.n < 4:
            raise ValueError(f"hypersurface dimension must be >= 4, got {self.n}")


def ricci_from_shape(a: SymmetricEndomorphism, x) -> float:
    """Gauss equation: ``Ric(X) = n - 1 + tr(A) <AX, X> - |AX|^2`` for unit X."""
    x = np.asarray(x, dtype=float)
    if x.shape != (a.n,):
        raise ValueError(f"expected a vector of length {a.n}, got shape {x.shape}")
    if abs(np.linalg.norm(x) - 1.0) > UNIT_TOL:
        raise ValueError(f"X must be a unit vector, |X| = {np.linalg.norm(x)!r}")
    ax = a.matrix @ x
    return float(a.n - 1 + a.trace * (ax @ x) - ax @ ax)


def ricci_eigenvalues(a: SymmetricEndomorphism) -> np.ndarray:
    """Ric(e_i) for the eigenvectors e_i, ordered like ``a.eigenvalues``."""
    mu = a.eigenvalues
    return a.n - 1 + a.trace * mu - mu * mu


def ricci_min(a: SymmetricEndomorphism) -> float:
    """Minimum of Ric over unit directions.

    In eigen-coordinates Ric(X) = n - 1 + sum x_i^2 (tr(A) mu_i - mu_i^2) is
    linear in the x_i^2, which lie on a simplex, so the minimum sits at an
    eigenvector.
    """
    return float(ricci_eigenvalues(a).min())


def mean_curvature_scalar(a: SymmetricEndomorphism) -> float:
    return abs(a.trace) / a.n


def pinching_params(a: SymmetricEndomorphism, k: int) -> PinchingParams:
    """(n, k, H) with H recomputed from ``a``."""
    return PinchingParams(a.n, k, mean_curvature_scalar(a))


def scale_of(a: SymmetricEndomorphism) -> float:
    """Conditioning scale ``1 + |A|^2`` used for relative slacks."""
    return 1.0 + a.norm() ** 2


def _check_form_degree(a: SymmetricEndomorphism, k: int, form: PForm) -> None:
    if form.n != a.n:
        raise ValueError(f"dimension mismatch: operator n={a.n}, form n={form.n}")
    if form.p != k:
        raise ValueError(f"degree mismatch: expected a {k}-form, got degree {form.p}")
    if not 2 <= k <= a.n / 2:
        raise ValueError(f"k must satisfy 2 <= k <= n/2, got k={k}, n={a.n}")


def bochner_quadratic_form(a: SymmetricEndomorphism, k: int, form: PForm) -> float:
    """``k(n-k)|w|^2 + <T_A^[k] w, w>`` evaluated in the ambient basis."""
    _check_form_degree(a, k, form)
    t = t_operator(a, form)
    return float(k * (a.n - k) * form.norm() ** 2 + t.coeffs @ form.coeffs)


@dataclass
class BochnerReport:
    value: float
    lower_chain: list[float]
    min_chain_value: float
    scale: float = 1.0

    @property
    def slacks(self) -> list[float]:
        """Successive differences ``value - c_1, c_1 - c_2, ...``; all >= 0 in exact arithmetic."""
        seq = [self.value, *self.lower_chain]
        return [u - v for u, v in zip(seq, seq[1:])]


def bochner_chain(a: SymmetricEndomorphism, k: int, coeffs) -> dict[str, np.ndarray]:
    """Vectorised Bochner values and their lower-bound chain.

    ``coeffs`` is an (F, C(n,k)) array of forms in the ambient basis.  Returns
    arrays of length F:

    * ``value``: the quadratic form from the brute-force matrix of T_A^[k];
    * ``eigen``: the same, expanded in A's eigen-coframe with the closed-form
      eigenvalues ``tr(A) s_I - s_I^2``;
    * ``cauchy_schwarz``: after ``s_I^2 <= k sum_{i in I} mu_i^2``;
    * ``pinched``: after ``Ric(e_i) >= b`` and ``tr(A) mu_i <= n H lambda``,
      i.e. ``k |w|^2`` times :func:`final_constant`.
    """
    n = a.n
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    norms2 = np.einsum("fi,fi->f", coeffs, coeffs)
    base = k * (n - k) * norms2

    t = t_matrix(a, k)
    value = base + np.einsum("fi,ij,fj->f", coeffs, t, coeffs)

    a_eig = coeffs @ compound_matrix(a.eigenvectors, k)
    sq = a_eig * a_eig
    s = eigen_sums(a, k)
    tr = a.trace
    eigen = base + sq @ (tr * s - s * s)

    mu = a.eigenvalues
    idx = _index_array(n, k)
    per_axis = tr * mu - k * mu * mu
    cauchy_schwarz = base + sq @ per_axis[idx].sum(axis=1)

    params = pinching_params(a, k)
    pinched = k * norms2 * final_constant(params)
    return {"value": value, "eigen": eigen, "cauchy_schwarz": cauchy_schwarz, "pinched": pinched}


def bochner_report(a: SymmetricEndomorphism, k: int, form: PForm) -> BochnerReport:
    _check_form_degree(a, k, form)
    chain = bochner_chain(a, k, form.coeffs[None, :])
    lower = [float(chain[key][0]) for key in ("eigen", "cauchy_schwarz", "pinched")]
    return BochnerReport(
        value=float(chain["value"][0]),
        lower_chain=lower,
        min_chain_value=min(lower),
        scale=scale_of(a) * form.norm() ** 2,
    )


def check_trace_eigen_bound(a: SymmetricEndomorphism, k: int) -> tuple[bool, float]:
    """Check ``tr(A) mu_i <= n H lambda(n, k, H)`` for every eigenvalue mu_i.

    Returns ``(ok, worst)`` where ``worst`` is the largest value of
    ``tr(A) mu_i - n H lambda``; ``ok`` allows a slack of ``1e-9 (1 + |A|^2)``.
    """
    params = pinching_params(a, k)
    rhs = a.n * params.H * lambda_value(params)
    worst = float((a.trace * a.eigenvalues).max() - rhs)
    return worst <= 1e-9 * scale_of(a), worst


# -- sampler ---------------------------------------------------------------

STRATEGIES = ("clifford", "perturbed", "random")


class SamplerExhausted(RuntimeError):
    """No pinched operator was found within the allotted number of tries."""

    def __init__(self, n: int, k: int, seed, tries: int):
        super().__init__(f"no pinched operator for (n={n}, k={k}, seed={seed}) after {tries} tries")
        self.tries = tries


@dataclass
class PinchedSample:
    operator: ShapeOperator
    strategy: str
    tries: int
    r_squared: float | None = field(default=None)


def sample_stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based (Philox) stream keyed by ``seed`` and extra integers.

    Each key gives an independent stream, so sample ``i`` of a sweep does not
    depend on how many samples were drawn before it or by which worker.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def clifford_spectrum(n: int, k: int, r_squared: float) -> np.ndarray:
    """Principal curvatures of T^n_k(r): sqrt(1-r^2)/r (x k) and -r/sqrt(1-r^2) (x n-k)."""
    s = np.sqrt(1.0 - r_squared) / np.sqrt(r_squared)
    return np.concatenate([np.full(k, s), np.full(n - k, -1.0 / s)])


def _random_frame(n: int, rng: np.random.Generator) -> np.ndarray:
    return ortho_group.rvs(n, random_state=rng)


def _random_symmetric_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n))
    g = g + g.T
    return g / np.linalg.norm(g)


def is_pinched(a: SymmetricEndomorphism, k: int, slack: float = 1e-12) -> bool:
    return ricci_min(a) >= bound_b(pinching_params(a, k)) - slack


def sample_pinched_operator(
    n: int,
    k: int,
    seed: int,
    max_tries: int = 1000,
    *,
    index: int = 0,
    strategy: str = "mixed",
    perturbation_scale: float = 0.1,
) -> PinchedSample:
    """Draw a shape operator satisfying ``ricci_min(A) >= b(n, k, H(A)) - 1e-12``.

    Strategies, chosen per try when ``strategy="mixed"``:

    ``clifford``
        the exact Clifford-torus spectrum at a random admissible r^2, in a
        random orthonormal frame (always pinched, with equality);
    ``perturbed``
        the same plus a random symmetric perturbation of Frobenius norm
        ``perturbation_scale * U(0, 1)``, kept only if still pinched (with
        ``perturbation_scale=0`` this is the exact Clifford operator);
    ``random``
        a random spectrum ``shift + c z`` in a random frame, by rejection.

    Deterministic in ``(seed, n, k, index)``.
    """
    if not k_range_ok(n, k):
        raise ValueError(f"(n={n}, k={k}) outside 2 <= k <= n/2 with n >= 4")
    if max_tries < 1:
        raise ValueError(f"max_tries must be >= 1, got {max_tries}")
    if strategy != "mixed" and strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if perturbation_scale < 0:
        raise ValueError("perturbation_scale must be nonnegative")

    rng = sample_stream(seed, n, k, index)
    lo, hi = (k - 1) / (n - 2), k / n
    for attempt in range(1, max_tries + 1):
        kind = strategy if strategy != "mixed" else STRATEGIES[rng.choice(3, p=[0.2, 0.4, 0.4])]
        frame = _random_frame(n, rng)
        r2 = None
        if kind in ("clifford", "perturbed"):
            r2 = float(rng.uniform(lo, hi))
            m = (frame * clifford_spectrum(n, k, r2)) @ frame.T
            if kind == "perturbed" and perturbation_scale > 0:
                m = m + perturbation_scale * rng.uniform() * _random_symmetric_unit(n, rng)
        else:
            shift = rng.uniform(-1.0, 1.0)
            spread = rng.uniform(0.0, 1.5)
            m = (frame * (shift + spread * rng.standard_normal(n))) @ frame.T
        a = ShapeOperator(m)
        if is_pinched(a, k):
            return PinchedSample(a, kind, attempt, r2)
    raise SamplerExhausted(n, k, seed, max_tries)
