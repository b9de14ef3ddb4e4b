"""Central finite differences."""

from __future__ import annotations

from typing import Callable

import numpy as np

DEFAULT_STEP = 1e-4


def _check_step(x: np.ndarray, step: float) -> None:
    if not np.isfinite(step) or step <= 0:
        raise ValueError(f"step must be positive and finite, got {step!r}")
    if np.any(x + step == x) or np.any(x - step == x):
        raise ValueError(f"step {step!r} underflows against the point coordinates")


def numerical_jacobian(
    fn: Callable[[np.ndarray], np.ndarray],
    x,
    step: float = DEFAULT_STEP,
) -> np.ndarray:
    """Central-difference Jacobian, ``J[i, j] = d fn_i / d x_j``.

    Second-order accurate: the truncation error scales like ``step**2``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_step(x, step)
    cols = []
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] += step
        xm[j] -= step
        cols.append((np.atleast_1d(fn(xp)) - np.atleast_1d(fn(xm))) / (2.0 * step))
    return np.column_stack(cols)


def numerical_gradient(fn: Callable[[np.ndarray], float], x, step: float = DEFAULT_STEP) -> np.ndarray:
    return numerical_jacobian(lambda y: np.atleast_1d(fn(y)), x, step)[0]


def numerical_hessian(fn: Callable[[np.ndarray], np.ndarray], x, step: float = DEFAULT_STEP) -> np.ndarray:
    """Second derivatives of a (possibly vector-valued) map.

    Returns an array of shape ``fn(x).shape + (d, d)``.  Mixed partials use
    the four-point stencil, diagonal ones the three-point stencil.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    _check_step(x, step)
    d = x.size
    f0 = np.asarray(fn(x), dtype=float)
    out = np.zeros(f0.shape + (d, d))
    eye = np.eye(d) * step
    for i in range(d):
        out[..., i, i] = (fn(x + eye[i]) - 2.0 * f0 + fn(x - eye[i])) / step**2
        for j in range(i):
            val = (
                fn(x + eye[i] + eye[j]) - fn(x + eye[i] - eye[j]) - fn(x - eye[i] + eye[j]) + fn(x - eye[i] - eye[j])
            ) / (4.0 * step**2)
            out[..., i, j] = val
            out[..., j, i] = val
    return out


def jacobian_convergence(fn, x, step: float = DEFAULT_STEP, exact=None) -> dict:
    """Three-step convergence study at ``step, step/2, step/4``.

    With ``exact`` given, reports the errors against it and the observed
    order from consecutive error ratios.  Without it, the Richardson
    differences ``J(h) - J(h/2)`` and ``J(h/2) - J(h/4)`` are used, whose
    ratio is about 4 for a second-order scheme.
    """
    steps = [step, step / 2, step / 4]
    jacs = [numerical_jacobian(fn, x, h) for h in steps]
    if exact is not None:
        exact = np.asarray(exact, dtype=float)
        errors = [float(np.max(np.abs(j - exact))) for j in jacs]
    else:
        errors = [float(np.max(np.abs(jacs[0] - jacs[1]))), float(np.max(np.abs(jacs[1] - jacs[2])))]
    ratios = [a / b if b > 0 else float("inf") for a, b in zip(errors, errors[1:])]
    return {
        "steps": steps,
        "errors": errors,
        "ratios": ratios,
        "order": [float(np.log2(r)) if np.isfinite(r) and r > 0 else float("nan") for r in ratios],
        # Richardson-extrapolated Jacobian from the two finest steps
        "extrapolated": (4.0 * jacs[2] - jacs[1]) / 3.0,
    }
