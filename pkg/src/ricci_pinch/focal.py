"""Focal submanifolds g: L^m -> S^{n+1} and radius functions on them.

A :class:`FocalSubmanifold` is a local chart ``x -> g(x)`` from an open box of
R^m into the unit sphere of R^{n+2}, with ``m = n - ell``.  First and second
chart derivatives are analytic for the built-in families and fall back to
central differences otherwise.

Built-in families (all use the graph chart ``u -> (sqrt(1 - |u|^2), u)`` of
the unit sphere, see :mod:`ricci_pinch.clifford`):

``great_sphere``
    ``g(x) = (phi(x), 0)``, a totally geodesic S^m.
``small_sphere``
    ``g(x) = (rho phi(x), sqrt(1 - rho^2), 0)``, a sphere of Euclidean radius
    rho = sin(beta) inside a great S^{m+1}; its focal distance is beta.
``clifford_factor``
    ``g(x) = (rho phi_a(x_a), sqrt(1 - rho^2) phi_b(x_b), 0)`` with
    ``a + b = m``; for a = b = 1 this is a product of circles.
``table``
    sampled chart values on a regular grid, interpolated by cubic splines and
    projected back to the sphere.

Normal frames are built by Gram-Schmidt of the standard basis of R^{n+2}
against ``{g(x), dg(x)}``.  Pivoting rule: at each step take the standard
basis vector with the largest residual norm, lowest index on ties.  Callers
differentiating along x must reuse the pivots chosen at the base point, which
keeps the frame smooth in a neighbourhood.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .findiff import numerical_gradient, numerical_hessian, numerical_jacobian

_JAC_STEP = 1e-5
_HESS_STEP = 1e-4


class FocalSpecError(ValueError):
    """Malformed focal-submanifold description."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.message = message
        self.field = field
        self.line = line


# -- sphere blocks -----------------------------------------------------------


def _graph_jet(u: np.ndarray):
    """Value, first and second derivatives of the graph chart at u."""
    d = u.size
    rho2 = float(u @ u)
    if rho2 >= 1.0:
        raise ValueError(f"chart coordinates must satisfy |u| < 1, got |u| = {math.sqrt(rho2)!r}")
    z = math.sqrt(1.0 - rho2)
    val = np.concatenate([[z], u])
    jac = np.zeros((d + 1, d))
    jac[0] = -u / z
    jac[1:] = np.eye(d)
    hess = np.zeros((d + 1, d, d))
    hess[0] = -np.eye(d) / z - np.outer(u, u) / z**3
    return val, jac, hess


@dataclass(frozen=True)
class _SphereBlocks:
    """``x -> (r_1 phi(x_1), ..., r_j phi(x_j), c, 0, ...)`` with analytic jets."""

    blocks: tuple[tuple[int, float], ...]
    constants: tuple[float, ...]
    ambient: int

    @property
    def m(self) -> int:
        return sum(d for d, _ in self.blocks)

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        m = self.m
        val = np.zeros(self.ambient)
        jac = np.zeros((self.ambient, m))
        hess = np.zeros((self.ambient, m, m))
        row = col = 0
        for d, radius in self.blocks:
            v, j, h = _graph_jet(x[col : col + d])
            val[row : row + d + 1] = radius * v
            jac[row : row + d + 1, col : col + d] = radius * j
            hess[row : row + d + 1, col : col + d, col : col + d] = radius * h
            row += d + 1
            col += d
        val[row : row + len(self.constants)] = self.constants
        return val, jac, hess


# -- focal submanifold -------------------------------------------------------


class FocalSubmanifold:
    """Chart of an m-dimensional submanifold of S^{n+1} in R^{n+2}.

    Args:
        n: dimension of the hypersurfaces built over it (so ambient R^{n+2}).
        m: intrinsic dimension, ``m = n - ell`` with ``2 <= ell <= n - 2``.
        chart: ``x -> g(x)``.
        jacobian, second_derivatives: optional analytic derivatives,
            shapes (n+2, m) and (n+2, m, m).
        domain: half-width of the coordinate box where sample points live.
    """

    def __init__(
        self,
        n: int,
        m: int,
        chart: Callable[[np.ndarray], np.ndarray],
        jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
        second_derivatives: Callable[[np.ndarray], np.ndarray] | None = None,
        *,
        kind: str = "custom",
        domain: float = 0.4,
        parameters: dict | None = None,
    ):
        ell = n - m
        if not 2 <= ell <= n - 2:
            raise ValueError(f"need 2 <= ell <= n-2, got n={n}, m={m} (ell={ell})")
        self.n = n
        self.m = m
        self.kind = kind
        self.domain = domain
        self.parameters = dict(parameters or {})
        self._chart = chart
        self._jacobian = jacobian
        self._second = second_derivatives

    @property
    def ell(self) -> int:
        return self.n - self.m

    @property
    def ambient(self) -> int:
        return self.n + 2

    def point(self, x) -> np.ndarray:
        return np.asarray(self._chart(np.asarray(x, dtype=float)), dtype=float)

    def tangent(self, x) -> np.ndarray:
        if self._jacobian is not None:
            return np.asarray(self._jacobian(np.asarray(x, dtype=float)), dtype=float)
        return numerical_jacobian(self.point, x, _JAC_STEP)

    def second_derivatives(self, x) -> np.ndarray:
        if self._second is not None:
            return np.asarray(self._second(np.asarray(x, dtype=float)), dtype=float)
        return numerical_hessian(self.point, x, _HESS_STEP)

    def normal_frame(self, x, pivots: tuple[int, ...] | None = None) -> tuple[np.ndarray, tuple[int, ...]]:
        """Orthonormal basis of the normal space of g in S^{n+1} at x.

        Returns ``(frame, pivots)`` with ``frame`` of shape (n+2, ell+1).
        Passing the ``pivots`` of a nearby base point reproduces the same
        smooth local frame.
        """
        g = self.point(x)
        basis, _ = np.linalg.qr(np.column_stack([g, self.tangent(x)]))
        return _complete(basis, self.ell + 1, pivots)

    def sample_points(self, density: int) -> list[np.ndarray]:
        """Grid of ``density`` points per axis over the coordinate box."""
        axis = np.linspace(-self.domain, self.domain, density) if density > 1 else np.zeros(1)
        mesh = np.meshgrid(*([axis] * self.m), indexing="ij")
        return [np.array(p) for p in np.stack([a.ravel() for a in mesh], axis=1)]


def _complete(basis: np.ndarray, count: int, pivots=None) -> tuple[np.ndarray, tuple[int, ...]]:
    """Extend orthonormal columns ``basis`` by ``count`` standard-basis residuals."""
    dim = basis.shape[0]
    current = basis.copy()
    chosen = []
    out = []
    for step in range(count):
        if pivots is None:
            resid = np.eye(dim) - current @ (current.T @ np.eye(dim))
            norms = np.linalg.norm(resid, axis=0)
            norms[chosen] = -1.0
            # ties within rounding go to the lowest index
            j = int(np.flatnonzero(norms >= norms.max() - 1e-12)[0])
        else:
            j = pivots[step]
        v = np.zeros(dim)
        v[j] = 1.0
        # twice for numerical orthogonality
        v -= current @ (current.T @ v)
        v -= current @ (current.T @ v)
        nv = np.linalg.norm(v)
        if nv < 1e-8:
            raise ArithmeticError(f"pivot {j} is degenerate for this frame (residual {nv:.3g})")
        v /= nv
        chosen.append(j)
        out.append(v)
        current = np.column_stack([current, v])
    return np.column_stack(out), tuple(chosen)


def complete_unit_vector(w) -> np.ndarray:
    """Orthonormal completion of a unit vector w in R^d, shape (d, d-1), same pivoting rule."""
    w = np.asarray(w, dtype=float)
    frame, _ = _complete(w[:, None] / np.linalg.norm(w), w.size - 1)
    return frame


def great_sphere(n: int, ell: int) -> FocalSubmanifold:
    m = n - ell
    blocks = _SphereBlocks(((m, 1.0),), (), n + 2)
    return _from_blocks(n, m, blocks, "great_sphere", {})


def small_sphere(n: int, ell: int, rho: float) -> FocalSubmanifold:
    """S^m(rho) in a great S^{m+1}; focal distance ``arcsin(rho)`` along the inward normal."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    m = n - ell
    blocks = _SphereBlocks(((m, rho),), (math.sqrt(1.0 - rho * rho),), n + 2)
    return _from_blocks(n, m, blocks, "small_sphere", {"rho": rho})


def clifford_factor(n: int, ell: int, rho: float, split: int | None = None) -> FocalSubmanifold:
    """S^a(rho) x S^b(sqrt(1 - rho^2)) in a great S^{m+1}, ``a + b = m``."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    m = n - ell
    a = m // 2 if split is None else split
    if not 1 <= a <= m - 1:
        raise ValueError(f"split must satisfy 1 <= a <= m-1, got a={a}, m={m}")
    blocks = _SphereBlocks(((a, rho), (m - a, math.sqrt(1.0 - rho * rho))), (), n + 2)
    return _from_blocks(n, m, blocks, "clifford_factor", {"rho": rho, "split": a})


def _from_blocks(n, m, blocks, kind, parameters) -> FocalSubmanifold:
    return FocalSubmanifold(
        n,
        m,
        lambda x: blocks.jet(x)[0],
        lambda x: blocks.jet(x)[1],
        lambda x: blocks.jet(x)[2],
        kind=kind,
        domain=min(0.4, 0.9 / math.sqrt(m)),
        parameters=parameters,
    )


def table_chart(n: int, ell: int, origin, spacing, values) -> FocalSubmanifold:
    """Chart from samples ``values[i_1, ..., i_m, :]`` at ``origin + i * spacing``.

    Cubic-spline interpolation per ambient coordinate, renormalised onto the
    unit sphere; derivatives by finite differences.
    """
    from scipy.interpolate import RegularGridInterpolator

    m = n - ell
    vals = np.asarray(values, dtype=float)
    if vals.ndim != m + 1 or vals.shape[-1] != n + 2:
        raise ValueError(f"table values must have shape (N_1, ..., N_{m}, {n + 2}), got {vals.shape}")
    if min(vals.shape[:-1]) < 4:
        raise ValueError("cubic interpolation needs at least 4 samples per axis")
    origin = np.broadcast_to(np.asarray(origin, dtype=float), (m,))
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (m,))
    if np.any(spacing <= 0):
        raise ValueError("table spacing must be positive")
    axes = [origin[i] + spacing[i] * np.arange(vals.shape[i]) for i in range(m)]
    interp = RegularGridInterpolator(axes, vals, method="cubic", bounds_error=True)

    def chart(x):
        p = interp(np.asarray(x, dtype=float)[None, :])[0]
        return p / np.linalg.norm(p)

    centre = np.array([(a[0] + a[-1]) / 2 for a in axes])
    half = min((a[-1] - a[0]) / 2 for a in axes)
    g = FocalSubmanifold(n, m, lambda x: chart(x + centre), kind="table", domain=0.5 * half)
    g.parameters = {"centre": centre.tolist()}
    return g


# -- radius functions --------------------------------------------------------


@dataclass
class RadiusFunction:
    """Scalar tau on the chart domain with gradient and coordinate Hessian.

    ``gradient`` and ``hessian`` return plain coordinate derivatives
    (d tau / d x_i and d^2 tau / d x_i d x_j); the metric corrections are
    applied by the tube code.  Missing derivatives use finite differences.
    """

    value: Callable[[np.ndarray], float]
    gradient_fn: Callable[[np.ndarray], np.ndarray] | None = None
    hessian_fn: Callable[[np.ndarray], np.ndarray] | None = None
    kind: str = "custom"
    parameters: dict = field(default_factory=dict)

    def __call__(self, x) -> float:
        return float(self.value(np.asarray(x, dtype=float)))

    def gradient(self, x) -> np.ndarray:
        if self.gradient_fn is not None:
            return np.asarray(self.gradient_fn(np.asarray(x, dtype=float)), dtype=float)
        return numerical_gradient(self, x, _JAC_STEP)

    def hessian(self, x) -> np.ndarray:
        if self.hessian_fn is not None:
            return np.asarray(self.hessian_fn(np.asarray(x, dtype=float)), dtype=float)
        return numerical_hessian(self, x, _HESS_STEP)


def constant_radius(tau0: float) -> RadiusFunction:
    if not 0 < tau0 < math.pi / 2:
        raise ValueError(f"tau must lie in (0, pi/2), got {tau0}")
    return RadiusFunction(
        lambda x: tau0,
        lambda x: np.zeros(np.size(x)),
        lambda x: np.zeros((np.size(x), np.size(x))),
        kind="constant",
        parameters={"tau0": tau0},
    )


def cosine_bump(tau0: float, amplitude: float, frequency=1.0, phase: float = 0.0) -> RadiusFunction:
    """``tau(x) = tau0 + amplitude * cos(<k, x> + phase)`` with wave vector k.

    A scalar ``frequency`` means ``k = frequency * (1, ..., 1)``.
    """
    if not (0 < tau0 - abs(amplitude) and tau0 + abs(amplitude) < math.pi / 2):
        raise ValueError(f"tau0 +- amplitude must stay inside (0, pi/2), got {tau0} +- {amplitude}")

    def wave(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(frequency, dtype=float), x.shape)

    def value(x):
        return tau0 + amplitude * math.cos(float(wave(x) @ x) + phase)

    def grad(x):
        k = wave(x)
        return -amplitude * math.sin(float(k @ x) + phase) * k

    def hess(x):
        k = wave(x)
        return -amplitude * math.cos(float(k @ x) + phase) * np.outer(k, k)

    return RadiusFunction(
        value,
        grad,
        hess,
        kind="cosine_bump",
        parameters={"tau0": tau0, "amplitude": amplitude, "frequency": frequency, "phase": phase},
    )


# -- declarative descriptions ------------------------------------------------

FOCAL_KINDS = ("great_sphere", "small_sphere", "clifford_factor", "table")
TAU_KINDS = ("constant", "cosine_bump")


def _get(obj: dict, key: str, path: str, kind=None, required=True, default=None):
    if not isinstance(obj, dict):
        raise FocalSpecError("expected an object", path or "<root>")
    if key not in obj:
        if required:
            raise FocalSpecError("missing required field", f"{path}.{key}" if path else key)
        return default
    val = obj[key]
    if kind is not None:
        if isinstance(val, bool) or not isinstance(val, kind):
            raise FocalSpecError(f"wrong type {type(val).__name__}", f"{path}.{key}" if path else key)
    return val


def parse_focal_spec(spec: dict) -> tuple[FocalSubmanifold, RadiusFunction]:
    """Build (g, tau) from a decoded JSON description.

    Schema::

        {"kind": "great_sphere" | "small_sphere" | "clifford_factor" | "table",
         "dims": {"n": int, "ell": int},
         "parameters": {...},
         "tau": {"kind": "constant" | "cosine_bump", "parameters": {...}}}

    Parameters: small_sphere ``rho``; clifford_factor ``rho`` and optional
    ``split``; table ``origin``, ``spacing``, ``values``; constant ``tau0``;
    cosine_bump ``tau0``, ``amplitude``, optional ``frequency``, ``phase``.
    """
    num = (int, float)
    kind = _get(spec, "kind", "", str)
    if kind not in FOCAL_KINDS:
        raise FocalSpecError(f"unknown kind {kind!r}, expected one of {FOCAL_KINDS}", "kind")
    dims = _get(spec, "dims", "", dict)
    n = _get(dims, "n", "dims", int)
    ell = _get(dims, "ell", "dims", int)
    if n < 4:
        raise FocalSpecError(f"n must be >= 4, got {n}", "dims.n")
    if not 2 <= ell <= n - 2:
        raise FocalSpecError(f"ell must satisfy 2 <= ell <= n-2, got {ell}", "dims.ell")
    params = _get(spec, "parameters", "", dict, required=False, default={})
    try:
        if kind == "great_sphere":
            g = great_sphere(n, ell)
        elif kind == "small_sphere":
            g = small_sphere(n, ell, float(_get(params, "rho", "parameters", num)))
        elif kind == "clifford_factor":
            split = _get(params, "split", "parameters", int, required=False)
            g = clifford_factor(n, ell, float(_get(params, "rho", "parameters", num)), split)
        else:
            g = table_chart(
                n,
                ell,
                _get(params, "origin", "parameters", (list, int, float)),
                _get(params, "spacing", "parameters", (list, int, float)),
                _get(params, "values", "parameters", list),
            )
    except FocalSpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise FocalSpecError(str(exc), "parameters") from exc

    tau_spec = _get(spec, "tau", "", dict)
    tau_kind = _get(tau_spec, "kind", "tau", str)
    tau_params = _get(tau_spec, "parameters", "tau", dict)
    try:
        if tau_kind == "constant":
            tau = constant_radius(float(_get(tau_params, "tau0", "tau.parameters", num)))
        elif tau_kind == "cosine_bump":
            tau = cosine_bump(
                float(_get(tau_params, "tau0", "tau.parameters", num)),
                float(_get(tau_params, "amplitude", "tau.parameters", num)),
                _get(tau_params, "frequency", "tau.parameters", (int, float, list), required=False, default=1.0),
                float(_get(tau_params, "phase", "tau.parameters", num, required=False, default=0.0)),
            )
        else:
            raise FocalSpecError(f"unknown tau kind {tau_kind!r}, expected one of {TAU_KINDS}", "tau.kind")
    except FocalSpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise FocalSpecError(str(exc), "tau.parameters") from exc
    return g, tau


def load_focal_spec(path) -> tuple[FocalSubmanifold, RadiusFunction]:
    text = Path(path).read_text()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FocalSpecError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    try:
        return parse_focal_spec(spec)
    except FocalSpecError as exc:
        if exc.line is not None or not exc.field:
            raise
        raise FocalSpecError(exc.message, exc.field, _field_line(text, exc.field)) from exc


def _field_line(text: str, field_path: str) -> int | None:
    """Line of the key ``a.b.c``, following each component in document order."""
    pos, line = 0, None
    for key in field_path.split("."):
        hit = re.compile(rf'"{re.escape(key)}"\s*:').search(text, pos)
        if hit is None:
            break  # a missing key: report its enclosing object
        pos = hit.start()
        line = text.count("\n", 0, pos) + 1
    return line
