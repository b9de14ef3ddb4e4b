"""Tubes over focal submanifolds and their curvature, evaluated numerically.

For a focal submanifold g: L^m -> S^{n+1}, a radius function 0 < tau < pi/2
with |grad tau| < 1, and a unit normal w of g at x, the tube map is

    Psi(x, w) = cos(tau) g - sin(tau) (g_* grad tau + sqrt(1 - |grad tau|^2) w)

with unit normal (Gauss map)

    eta(x, w) = sin(tau) g + cos(tau) (g_* grad tau + sqrt(1 - |grad tau|^2) w).

Shape operators follow the convention ``eta_* V = -Psi_*(A V)``, under which
the fibre directions are principal with curvature cot(tau).

Local coordinates on the unit normal bundle around (x0, w0) are
``y = (x, t)`` in R^m x R^ell: the normal frame at x is the Gram-Schmidt frame
with the pivots of x0, and ``t`` runs through the exponential chart of the
fibre sphere, ``w(t) = cos|t| w0 + sin|t| U t/|t|`` with U an orthonormal
completion of w0.  The last ell coordinates are therefore vertical.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular, subspace_angles
from scipy.optimize import brentq, minimize_scalar

from .exterior import SymmetricEndomorphism
from .findiff import DEFAULT_STEP, numerical_gradient, numerical_jacobian
from .focal import FocalSubmanifold, RadiusFunction, complete_unit_vector, constant_radius

UNIT_TOL = 1e-12


class DomainError(ValueError):
    """Input outside the domain of the tube construction."""


class SingularPointError(ArithmeticError):
    """The tube map is not an immersion at the requested point."""


class ConditioningWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BundlePoint:
    """Point (x, w) of the unit normal bundle; ``w`` holds normal-frame coefficients."""

    x: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        if abs(np.linalg.norm(w) - 1.0) > UNIT_TOL:
            raise ValueError(f"w must be a unit vector, |w| = {np.linalg.norm(w)!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)


@dataclass
class _Local:
    pos: np.ndarray
    jac: np.ndarray
    tau: float
    dtau: np.ndarray
    grad: np.ndarray  # g_* grad tau in R^{n+2}
    grad_norm2: float

    @property
    def root(self) -> float:
        return math.sqrt(1.0 - self.grad_norm2)


def _local(g: FocalSubmanifold, tau: RadiusFunction, x) -> _Local:
    x = np.asarray(x, dtype=float)
    t = tau(x)
    if not 0 < t < math.pi / 2:
        raise DomainError(f"tau(x) = {t!r} outside (0, pi/2)")
    jac = g.tangent(x)
    dtau = tau.gradient(x)
    coords = np.linalg.solve(jac.T @ jac, dtau)
    norm2 = float(dtau @ coords)
    if norm2 >= 1.0:
        raise DomainError(f"|grad tau| = {math.sqrt(norm2)!r} must be < 1")
    return _Local(g.point(x), jac, t, dtau, jac @ coords, norm2)


def psi_ambient(g: FocalSubmanifold, tau: RadiusFunction, x, w_ambient) -> np.ndarray:
    loc = _local(g, tau, x)
    return math.cos(loc.tau) * loc.pos - math.sin(loc.tau) * (loc.grad + loc.root * np.asarray(w_ambient))


def gauss_ambient(g: FocalSubmanifold, tau: RadiusFunction, x, w_ambient) -> np.ndarray:
    loc = _local(g, tau, x)
    return math.sin(loc.tau) * loc.pos + math.cos(loc.tau) * (loc.grad + loc.root * np.asarray(w_ambient))


def _check_point(g: FocalSubmanifold, q: BundlePoint) -> None:
    if q.x.shape != (g.m,) or q.w.shape != (g.ell + 1,):
        raise ValueError(f"bundle point shapes {q.x.shape}, {q.w.shape} do not match m={g.m}, ell={g.ell}")


def normal_vector(g: FocalSubmanifold, q: BundlePoint) -> np.ndarray:
    """The unit normal w of g as a vector of R^{n+2}."""
    _check_point(g, q)
    frame, _ = g.normal_frame(q.x)
    return frame @ q.w


def psi(g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint) -> np.ndarray:
    return psi_ambient(g, tau, q.x, normal_vector(g, q))


def gauss_map(g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint) -> np.ndarray:
    return gauss_ambient(g, tau, q.x, normal_vector(g, q))


class BundleChart:
    """Coordinates ``y = (x, t)`` on the unit normal bundle near ``q``."""

    def __init__(self, g: FocalSubmanifold, q: BundlePoint):
        _check_point(g, q)
        self.g = g
        self.q = q
        _, self.pivots = g.normal_frame(q.x)
        self.completion = complete_unit_vector(q.w)
        self.y0 = np.concatenate([q.x, np.zeros(g.ell)])

    @property
    def vertical(self) -> slice:
        return slice(self.g.m, self.g.n)

    def lift(self, y) -> tuple[np.ndarray, np.ndarray]:
        """``y -> (x, w)`` with w as a vector of R^{n+2}."""
        y = np.asarray(y, dtype=float)
        m = self.g.m
        x, t = y[:m], y[m:]
        r = float(np.linalg.norm(t))
        sinc = math.sin(r) / r if r > 0 else 1.0
        coeffs = math.cos(r) * self.q.w + sinc * (self.completion @ t)
        frame, _ = self.g.normal_frame(x, self.pivots)
        return x, frame @ coeffs


def regularity_operator(g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint) -> SymmetricEndomorphism:
    """The endomorphism P(x, w) of T_xL, in the orthonormal frame from QR of dg.

    ``P Y = cos(tau) (Y - <Y, grad tau> grad tau) - sin(tau) Hess(tau) Y
    + sin(tau) sqrt(1 - |grad tau|^2) A^g_w Y``; Psi is regular at (x, w)
    exactly when P is nonsingular.
    """
    _check_point(g, q)
    loc = _local(g, tau, q.x)
    w = normal_vector(g, q)
    d2 = g.second_derivatives(q.x)
    # covariant Hessian: coordinate Hessian minus Christoffel part <d_ij g, g_* grad tau>
    hess = tau.hessian(q.x) - np.einsum("aij,a->ij", d2, loc.grad)
    second_form = np.einsum("aij,a->ij", d2, w)
    _, r = np.linalg.qr(loc.jac)
    rinv = solve_triangular(r, np.eye(g.m))
    hess_f = rinv.T @ hess @ rinv
    form_f = rinv.T @ second_form @ rinv
    v = rinv.T @ loc.dtau
    c, s = math.cos(loc.tau), math.sin(loc.tau)
    p = c * (np.eye(g.m) - np.outer(v, v)) - s * hess_f + s * loc.root * form_f
    return SymmetricEndomorphism(p)


def tube_maps(g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint):
    """``(chart, Psi(y), eta(y))`` in bundle coordinates around ``q``."""
    chart = BundleChart(g, q)

    def f_psi(y):
        return psi_ambient(g, tau, *chart.lift(y))

    def f_eta(y):
        return gauss_ambient(g, tau, *chart.lift(y))

    return chart, f_psi, f_eta


def singular_threshold(step: float) -> float:
    """Smallest singular value of the Psi-Jacobian below which a point counts as singular."""
    return 10.0 * step * step


def chart_normalisation(g: FocalSubmanifold, x) -> np.ndarray:
    """``blockdiag(R^{-1}, I)`` with ``dg = QR``: base columns measured in unit length.

    Right-multiplying a bundle-chart Jacobian by this makes its singular
    values independent of how the chart of L is scaled (the fibre chart is
    already isometric at the base point).
    """
    _, r = np.linalg.qr(g.tangent(x))
    out = np.eye(g.n)
    out[: g.m, : g.m] = solve_triangular(r, np.eye(g.m))
    return out


def psi_sigma_min(g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint, step: float = DEFAULT_STEP) -> float:
    """Smallest singular value of the normalised finite-difference Psi-Jacobian."""
    chart, f_psi, _ = tube_maps(g, tau, q)
    jac = numerical_jacobian(f_psi, chart.y0, step) @ chart_normalisation(g, q.x)
    return float(np.linalg.svd(jac, compute_uv=False)[-1])


@dataclass
class TubeShape:
    """Numerical shape operator of the tube at one bundle point.

    ``operator`` acts in the orthonormal tangent frame ``frame`` (columns in
    R^{n+2}) obtained from the QR factorisation ``J_psi = frame @ r``.
    """

    operator: SymmetricEndomorphism
    frame: np.ndarray
    r: np.ndarray
    asymmetry: float
    jac_psi: np.ndarray
    jac_eta: np.ndarray
    sigma_min: float


def numerical_shape_operator(
    g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint, step: float = DEFAULT_STEP
) -> TubeShape:
    """Shape operator from ``eta_* = -Psi_* A`` with finite-difference Jacobians.

    Solved in the least-squares sense through the QR factors of the
    Psi-Jacobian, then symmetrised; the antisymmetric part is reported as
    ``asymmetry`` (max abs entry).
    """
    chart, f_psi, f_eta = tube_maps(g, tau, q)
    return _shape_from_maps(f_psi, f_eta, chart.y0, step, chart_normalisation(g, q.x))


def _shape_from_maps(f_psi, f_eta, y0, step: float, normalisation=None) -> TubeShape:
    jp = numerical_jacobian(f_psi, y0, step)
    je = numerical_jacobian(f_eta, y0, step)
    sv = np.linalg.svd(jp if normalisation is None else jp @ normalisation, compute_uv=False)
    if sv[-1] < singular_threshold(step):
        raise SingularPointError(f"Psi-Jacobian is rank deficient (smallest singular value {sv[-1]:.3g})")
    frame, r = np.linalg.qr(jp)
    # A = -frame^T J_eta r^{-1}
    a = -solve_triangular(r, (frame.T @ je).T, trans="T").T
    asym = float(np.max(np.abs(a - a.T))) / 2.0
    return TubeShape(SymmetricEndomorphism(a), frame, r, asym, jp, je, float(sv[-1]))


@dataclass
class VerticalReport:
    status: str  # "pass", "fail" or "inconclusive"
    cot_tau: float
    eigenvalues: list[float]
    multiplicity: int
    expected_multiplicity: int
    eigen_error: float
    max_angle: float
    gap: float
    tol_cluster: float
    error_estimate: float
    asymmetry: float
    reasons: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def verify_vertical_eigenspace(
    g: FocalSubmanifold,
    tau: RadiusFunction,
    q: BundlePoint,
    step: float = DEFAULT_STEP,
    tol: float = 1e-4,
) -> VerticalReport:
    """Check that cot(tau) is a principal curvature whose eigenspace is the fibre.

    The finite-difference error is estimated from the spectra at ``step`` and
    ``2 step`` (second-order Richardson) plus the asymmetry.  Eigenvalues
    within ``tol_cluster = 50 * error`` of cot(tau) form the cluster.  The
    multiplicity is only judged when the (ell+1)-th nearest eigenvalue is
    farther than ``10 * tol_cluster``; otherwise a horizontal eigenvalue is
    numerically indistinguishable from cot(tau) and the result is
    ``"inconclusive"``.
    """
    fine = numerical_shape_operator(g, tau, q, step)
    coarse = numerical_shape_operator(g, tau, q, 2.0 * step)
    eig = fine.operator.eigenvalues
    err = float(np.max(np.abs(eig - coarse.operator.eigenvalues))) / 3.0 + fine.asymmetry
    scale = 1.0 + float(np.max(np.abs(eig)))
    tol_cluster = max(50.0 * err, 1e-9 * scale)
    cot = 1.0 / math.tan(tau(q.x))

    dist = np.abs(eig - cot)
    order = np.argsort(dist, kind="stable")
    in_cluster = order[dist[order] <= tol_cluster]
    mult = int(in_cluster.size)
    # distance of the nearest eigenvalue that should lie outside the cluster
    gap = float(dist[order[g.ell]]) if g.ell < eig.size else math.inf
    eigen_error = float(dist[order[0]])

    if mult:
        vertical = fine.r[:, chart_vertical(g)]
        angles = subspace_angles(vertical, fine.operator.eigenvectors[:, in_cluster])
        max_angle = float(np.max(angles)) if mult >= g.ell else math.pi / 2
    else:
        max_angle = math.pi / 2

    reasons = []
    if gap <= 10.0 * tol_cluster:
        status = "inconclusive"
        reasons.append(f"eigenvalue gap {gap:.3g} within 10 x cluster tolerance {tol_cluster:.3g}")
    else:
        if eigen_error > tol:
            reasons.append(f"no eigenvalue within {tol} of cot(tau) (closest off by {eigen_error:.3g})")
        if mult != g.ell:
            reasons.append(f"multiplicity {mult}, expected {g.ell}")
        if max_angle > tol:
            reasons.append(f"vertical directions at angle {max_angle:.3g} from the eigenspace")
        status = "fail" if reasons else "pass"
    return VerticalReport(
        status=status,
        cot_tau=cot,
        eigenvalues=eig.tolist(),
        multiplicity=mult,
        expected_multiplicity=g.ell,
        eigen_error=eigen_error,
        max_angle=max_angle,
        gap=gap,
        tol_cluster=tol_cluster,
        error_estimate=err,
        asymmetry=fine.asymmetry,
        reasons=reasons,
    )


def chart_vertical(g: FocalSubmanifold) -> slice:
    return slice(g.m, g.n)


def round_trip_residual(g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint) -> float:
    """``|cos(tau) Psi + sin(tau) eta - g(x)|``, zero up to rounding."""
    w = normal_vector(g, q)
    t = tau(q.x)
    back = math.cos(t) * psi_ambient(g, tau, q.x, w) + math.sin(t) * gauss_ambient(g, tau, q.x, w)
    return float(np.linalg.norm(back - g.point(q.x)))


# -- regularity along a family of constant radii ---------------------------


def regularity_profile(g: FocalSubmanifold, q: BundlePoint, taus, step: float = DEFAULT_STEP) -> dict:
    """det P, min |eig P| and the smallest singular value of dPsi for constant radii."""
    dets, mins, svs = [], [], []
    for t0 in taus:
        tau = constant_radius(float(t0))
        p = regularity_operator(g, tau, q)
        dets.append(float(np.prod(p.eigenvalues)))
        mins.append(float(np.min(np.abs(p.eigenvalues))))
        svs.append(psi_sigma_min(g, tau, q, step))
    return {"tau": list(map(float, taus)), "det_p": dets, "min_abs_eig_p": mins, "sigma_min": svs}


def locate_singularity(
    g: FocalSubmanifold, q: BundlePoint, bracket: tuple[float, float], step: float = DEFAULT_STEP
) -> dict:
    """Radius at which Psi stops being an immersion, found two independent ways.

    ``tau_det``: root of det P(tau) (Brent's method when the sign changes on
    the bracket, else the minimiser of |det P|).  ``tau_sigma``: minimiser of
    the smallest singular value of the finite-difference Psi-Jacobian.
    """
    lo, hi = bracket

    def det_p(t0):
        return float(np.prod(regularity_operator(g, constant_radius(t0), q).eigenvalues))

    def sigma_min(t0):
        return psi_sigma_min(g, constant_radius(t0), q, step)

    if det_p(lo) * det_p(hi) < 0:
        tau_det = brentq(det_p, lo, hi, xtol=1e-12)
    else:
        tau_det = minimize_scalar(lambda t: abs(det_p(t)), bounds=bracket, method="bounded", options={"xatol": 1e-9}).x
    res = minimize_scalar(sigma_min, bounds=bracket, method="bounded", options={"xatol": 1e-9})
    return {
        "tau_det": float(tau_det),
        "tau_sigma": float(res.x),
        "sigma_at_min": float(res.fun),
        "delta": float(abs(tau_det - res.x)),
    }


# -- hypersurfaces and their focal data ------------------------------------


@dataclass
class HypersurfaceSample:
    """A local immersion y -> f(y) in S^{n+1} with unit normal and one principal curvature.

    ``curvature(y)`` returns the selected principal curvature lambda > 0 whose
    focal map is taken.
    """

    n: int
    immersion: Callable[[np.ndarray], np.ndarray]
    normal: Callable[[np.ndarray], np.ndarray]
    curvature: Callable[[np.ndarray], float]
    base: np.ndarray


def tube_sample(g: FocalSubmanifold, tau: RadiusFunction, q: BundlePoint) -> HypersurfaceSample:
    """The tube near q, with lambda = cot(tau)."""
    chart, f_psi, f_eta = tube_maps(g, tau, q)
    m = g.m
    return HypersurfaceSample(g.n, f_psi, f_eta, lambda y: 1.0 / math.tan(tau(np.asarray(y)[:m])), chart.y0)


def clifford_sample(torus) -> HypersurfaceSample:
    """T^n_p(r) in the graph charts, with lambda = sqrt(1 - r^2)/r."""
    from . import clifford

    p = torus.p
    lam = torus.second_radius / torus.r
    return HypersurfaceSample(
        torus.n,
        lambda y: clifford.embed(torus, y[:p], y[p:]),
        lambda y: clifford.unit_normal(torus, y[:p], y[p:]),
        lambda y: lam,
        np.zeros(torus.n),
    )


def sample_shape_operator(sample: HypersurfaceSample, point=None, step: float = DEFAULT_STEP) -> TubeShape:
    """Numerical shape operator of any hypersurface sample (same convention as the tube)."""
    y = sample.base if point is None else np.asarray(point, dtype=float)
    return _shape_from_maps(sample.immersion, sample.normal, y, step)


def focal_angle(lam: float) -> float:
    """sigma in (0, pi/2) with cot(sigma) = lam; lam must be positive."""
    if not lam > 0:
        raise DomainError(f"principal curvature must be positive, got {lam!r}")
    return math.atan2(1.0, lam)


def focal_map(sample: HypersurfaceSample, point=None) -> np.ndarray:
    """``h = cos(sigma) f + sin(sigma) eta`` with cot(sigma) the selected curvature."""
    y = sample.base if point is None else np.asarray(point, dtype=float)
    sigma = focal_angle(sample.curvature(y))
    return math.cos(sigma) * sample.immersion(y) + math.sin(sigma) * sample.normal(y)


@dataclass
class FocalData:
    """Decomposition ``eta = <g, eta> g + g_* Z + delta`` along the focal submanifold."""

    sin_tau: float
    sin_tau_expected: float
    grad_part: np.ndarray
    grad_expected: np.ndarray
    normal_norm: float
    normal_norm_expected: float
    grad_tau_norm: float
    rank: int
    condition: float

    @property
    def residuals(self) -> dict[str, float]:
        return {
            "sin_tau": abs(self.sin_tau - self.sin_tau_expected),
            "grad_part": float(np.linalg.norm(self.grad_part - self.grad_expected)),
            "normal_norm": abs(self.normal_norm - self.normal_norm_expected),
        }


def extract_focal_data(
    sample: HypersurfaceSample, point=None, step: float = DEFAULT_STEP, rank: int | None = None
) -> FocalData:
    """Recover tau, grad tau and the normal part of eta from the focal map.

    The tangent space of the focal submanifold is the column space of the
    finite-difference Jacobian of h (rank ``n - ell``, detected from the
    singular values unless ``rank`` is given).  grad tau is the vector u in
    that space with ``<u, h_* X> = d sigma(X)``.
    """
    y = sample.base if point is None else np.asarray(point, dtype=float)
    sigma = focal_angle(sample.curvature(y))
    g = focal_map(sample, y)
    eta = sample.normal(y)
    jh = numerical_jacobian(lambda z: focal_map(sample, z), y, step)
    u_svd, s, _ = np.linalg.svd(jh, full_matrices=False)
    if rank is None:
        rank = int(np.sum(s > 1e-5 * s[0]))
    condition = float(s[rank] / s[rank - 1]) if rank < s.size else 0.0
    if rank == 0 or s[rank - 1] < 1e-3 * s[0] or condition > 1e-2:
        warnings.warn(
            f"focal tangent space poorly resolved (singular values {np.array2string(s, precision=3)})",
            ConditioningWarning,
            stacklevel=2,
        )
    tangent = u_svd[:, :rank]
    dsigma = numerical_gradient(lambda z: focal_angle(sample.curvature(z)), y, step)
    coeffs = np.linalg.lstsq((tangent.T @ jh).T, dsigma, rcond=None)[0]
    grad_tau = tangent @ coeffs

    along = float(g @ eta)
    grad_part = tangent @ (tangent.T @ eta)
    delta = eta - along * g - grad_part
    gnorm = float(np.linalg.norm(grad_tau))
    return FocalData(
        sin_tau=along,
        sin_tau_expected=math.sin(sigma),
        grad_part=grad_part,
        grad_expected=math.cos(sigma) * grad_tau,
        normal_norm=float(np.linalg.norm(delta)),
        normal_norm_expected=math.cos(sigma) * math.sqrt(max(0.0, 1.0 - gnorm * gnorm)),
        grad_tau_norm=gnorm,
        rank=rank,
        condition=condition,
    )
