"""Exterior powers of a finite-dimensional inner-product space.

Forms of degree p on V = R^n are stored densely as coefficient vectors over
the basis theta_I, with I running over strictly increasing multi-indices in
lexicographic order.  Multi-indices are 1-based tuples, matching the usual
mathematical labelling; array positions are 0-based.

The derivation extension ``A^[p]`` of a symmetric endomorphism is assembled
by brute force, i.e. by evaluating

    (A^[p] w)(v_1, ..., v_p) = sum_i w(v_1, ..., A v_i, ..., v_p)

on basis tuples.  No assumption is made that A is diagonal in the frame
used, so the closed-form spectrum in :func:`t_spectrum_in_eigenbasis` can be
checked against it independently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

MultiIndex = tuple[int, ...]


def enumerate_multi_indices(n: int, p: int) -> list[MultiIndex]:
    """All strictly increasing p-tuples from 1..n, in lexicographic order."""
    if n < 1 or not 1 <= p <= n:
        raise ValueError(f"degree p={p} out of range for dimension n={n}")
    return list(itertools.combinations(range(1, n + 1), p))


@lru_cache(maxsize=None)
def _index_array(n: int, p: int) -> np.ndarray:
    # 0-based, shape (C(n,p), p); read-only so the cache can be shared
    idx = np.array(enumerate_multi_indices(n, p), dtype=np.intp) - 1
    idx.setflags(write=False)
    return idx


class SymmetricEndomorphism:
    """A self-adjoint endomorphism of R^n with its eigendecomposition.

    The input is symmetrised on construction, ``(M + M.T) / 2``, so the
    stored matrix is exactly symmetric.  Eigen-data is computed eagerly,
    which keeps instances immutable and safe to share between threads.
    Eigenvalues are ascending; eigenvectors are the columns of
    ``eigenvectors``.
    """

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        self._matrix = m
        w, q = np.linalg.eigh(m)
        w.setflags(write=False)
        q.setflags(write=False)
        self._eigenvalues = w
        self._eigenvectors = q

    @classmethod
    def from_spectrum(cls, eigenvalues, frame=None):
        """Build ``Q diag(eigenvalues) Q^T``; ``frame`` defaults to the identity."""
        mu = np.asarray(eigenvalues, dtype=float)
        if frame is None:
            return cls(np.diag(mu))
        q = np.asarray(frame, dtype=float)
        return cls((q * mu) @ q.T)

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._eigenvalues

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._eigenvectors

    @property
    def trace(self) -> float:
        return float(np.trace(self._matrix))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self._matrix))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, eigenvalues={np.round(self._eigenvalues, 6).tolist()})"


@dataclass(frozen=True)
class PForm:
    """A p-form on R^n given by its coefficients a_I in the theta_I basis."""

    n: int
    p: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if not 1 <= self.p <= self.n:
            raise ValueError(f"degree p={self.p} out of range for n={self.n}")
        if c.shape[0] != comb(self.n, self.p):
            raise ValueError(
                f"expected {comb(self.n, self.p)} coefficients for (n={self.n}, p={self.p}), got {c.shape[0]}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis(cls, n: int, index: MultiIndex) -> "PForm":
        """The basis form theta_I for a 1-based multi-index I."""
        p = len(index)
        labels = enumerate_multi_indices(n, p)
        try:
            pos = labels.index(tuple(index))
        except ValueError:
            raise ValueError(f"{index} is not a strictly increasing multi-index for n={n}") from None
        c = np.zeros(len(labels))
        c[pos] = 1.0
        return cls(n, p, c)

    @classmethod
    def zero(cls, n: int, p: int) -> "PForm":
        return cls(n, p, np.zeros(comb(n, p)))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, *vectors) -> float:
        """Evaluate on p vectors of R^n."""
        if len(vectors) != self.p:
            raise ValueError(f"a {self.p}-form takes {self.p} arguments, got {len(vectors)}")
        v = np.column_stack([np.asarray(x, dtype=float) for x in vectors])
        return float(self.coeffs @ _minors(v, _index_array(self.n, self.p)))


def _minors(vectors: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """det of the rows ``I`` of an (n, p) matrix, for every multi-index row of ``idx``."""
    return np.linalg.det(vectors[idx])


def _check_dims(a: SymmetricEndomorphism, form: PForm) -> None:
    if a.n != form.n:
        raise ValueError(f"dimension mismatch: endomorphism n={a.n}, form n={form.n}")


def derivation_matrix(a: SymmetricEndomorphism, p: int, frame=None) -> np.ndarray:
    """Matrix of ``A^[p]`` on the basis theta_I induced by an orthonormal frame.

    Column I holds the coefficients of ``A^[p] theta_I``; entry (J, I) is
    ``(A^[p] theta_I)(e_J)``, computed from the defining sum over slots.
    ``frame`` is an orthogonal matrix whose columns are e_1..e_n (default:
    the standard basis); the dual forms are ``theta_i = <e_i, .>``.
    """
    n = a.n
    if not 1 <= p <= n:
        raise ValueError(f"degree p={p} out of range for n={n}")
    e = np.eye(n) if frame is None else np.asarray(frame, dtype=float)
    if e.shape != (n, n):
        raise ValueError(f"frame must be {n}x{n}, got {e.shape}")
    idx = _index_array(n, p)
    ae = a.matrix @ e
    size = idx.shape[0]
    out = np.zeros((size, size))
    slots = np.arange(p)
    for row_j, jj in enumerate(idx):
        # p copies of the tuple e_J, copy s having A e_{j_s} in slot s
        v = np.repeat(e[:, jj][None], p, axis=0)
        v[slots, :, slots] = ae[:, jj].T
        # theta_I(v_1..v_p) = det[<e_{i_r}, v_s>]
        coords = np.einsum("ba,sbc->sac", e, v) if frame is not None else v
        out[row_j] = np.linalg.det(coords[:, idx]).sum(axis=0)
    return out


def apply_derivation(a: SymmetricEndomorphism, form: PForm) -> PForm:
    """``A^[p] w`` in the standard basis."""
    _check_dims(a, form)
    return PForm(form.n, form.p, derivation_matrix(a, form.p) @ form.coeffs)


def t_matrix(a: SymmetricEndomorphism, p: int, frame=None) -> np.ndarray:
    """Matrix of ``T_A^[p] = (tr A) A^[p] - A^[p] A^[p]`` in the frame's basis."""
    d = derivation_matrix(a, p, frame)
    return a.trace * d - d @ d


def t_operator(a: SymmetricEndomorphism, form: PForm) -> PForm:
    _check_dims(a, form)
    once = apply_derivation(a, form)
    twice = apply_derivation(a, once)
    return PForm(form.n, form.p, a.trace * once.coeffs - twice.coeffs)


def eigen_sums(a: SymmetricEndomorphism, p: int) -> np.ndarray:
    """s_I = sum of the eigenvalues mu_i over i in I, in lexicographic order of I."""
    return a.eigenvalues[_index_array(a.n, p)].sum(axis=1)


def t_spectrum_in_eigenbasis(a: SymmetricEndomorphism, p: int) -> list[tuple[MultiIndex, float]]:
    """Closed-form eigenvalues ``(tr A) s_I - s_I^2`` of ``T_A^[p]``.

    The eigenforms are theta_I of the eigen-coframe of ``a`` (see
    :func:`eigen_coframe`), which is ordered like ``a.eigenvalues``.
    """
    if not 1 <= p <= a.n:
        raise ValueError(f"degree p={p} out of range for n={a.n}")
    s = eigen_sums(a, p)
    vals = a.trace * s - s * s
    return list(zip(enumerate_multi_indices(a.n, p), vals.tolist()))


def eigen_coframe(a: SymmetricEndomorphism) -> np.ndarray:
    """Orthogonal matrix whose columns are the eigenvectors of ``a``."""
    return np.array(a.eigenvectors)


def compound_matrix(q, p: int) -> np.ndarray:
    """p-th compound: entry (I, J) is the minor ``det q[I, J]``.

    For an orthogonal change of frame ``e'_j = sum_i q[i, j] e_i`` the
    coefficients transform as ``a' = compound_matrix(q, p).T @ a``.
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    idx = _index_array(n, p)
    sub = q[idx[:, None, :, None], idx[None, :, None, :]]  # (C, C, p, p)
    return np.linalg.det(sub)


def to_frame(form: PForm, frame) -> np.ndarray:
    """Coefficients of ``form`` in the theta_I basis dual to ``frame``'s columns."""
    return compound_matrix(frame, form.p).T @ form.coeffs


def from_frame(n: int, p: int, coeffs, frame) -> PForm:
    """Inverse of :func:`to_frame`."""
    return PForm(n, p, compound_matrix(frame, p) @ np.asarray(coeffs, dtype=float))
