"""Dense complex linear algebra on small Hilbert spaces.

Vectors are 1-D complex ``ndarray`` objects and operators are 2-D complex
arrays. Tensor products use row-major Kronecker order everywhere: entry
``i * dim(b) + j`` of ``a (x) b`` is ``a[i] * b[j]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotOrthonormal, TooManyColumns

HERMITIAN_TOL = 1e-10
ORTHONORMAL_TOL = 1e-10
CLUSTER_GAP = 1e-9
PHASE_TOL = 1e-10
GS_SKIP = 1e-8

SQRT_HALF = np.sqrt(0.5)

Z_PLUS = np.array([1.0, 0.0], dtype=complex)
Z_MINUS = np.array([0.0, 1.0], dtype=complex)
X_PLUS = SQRT_HALF * np.array([1.0, 1.0], dtype=complex)
X_MINUS = SQRT_HALF * np.array([1.0, -1.0], dtype=complex)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise DimensionMismatch(f"expected a non-empty 1-D vector, got shape {v.shape}")
    return v


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.size < 1:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    return m


def maxabs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def projector(v) -> np.ndarray:
    """|v><v| without normalising ``v``."""
    v = as_vector(v)
    return np.outer(v, np.conj(v))


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and maxabs(h - dagger(h)) <= tol


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return maxabs(dagger(u) @ u - np.eye(u.shape[0])) <= tol


def tensor_product(a, b) -> np.ndarray:
    return np.kron(as_vector(a), as_vector(b))


def partial_trace_second(v, dim_a: int, dim_b: int) -> np.ndarray:
    """Reduced density of |v><v| on the first factor (trace over the second)."""
    w = as_vector(v).reshape(dim_a, dim_b)
    return w @ dagger(w)


@dataclass(frozen=True)
class HermitianEigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(v) > PHASE_TOL)
    if idx.size == 0:
        return v
    c = v[idx[0]]
    return v * (np.abs(c) / c)


def _gram_schmidt_sweep(basis: list[np.ndarray], candidates, want: int, skip: float,
                        project=None) -> list[np.ndarray]:
    """Extend ``basis`` with normalised residuals of ``candidates`` until it has ``want`` members."""
    out = list(basis)
    for c in candidates:
        if len(out) >= want:
            break
        r = c if project is None else project(c)
        # two passes keep the result orthogonal to working precision
        for _ in range(2):
            for q in out:
                r = r - q * np.vdot(q, r)
        nrm = np.linalg.norm(r)
        if nrm >= skip:
            out.append(r / nrm)
    return out


def _canonical_cluster(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis for the span of the columns of ``vecs``."""
    dim, k = vecs.shape
    proj = vecs @ dagger(vecs)
    eye = np.eye(dim, dtype=complex)
    # with this floor a sweep over all basis vectors always finds k members
    floor = 0.5 / np.sqrt(dim)
    found = _gram_schmidt_sweep([], (eye[:, j] for j in range(dim)), k, floor,
                                project=lambda c: proj @ c)
    if len(found) < k:
        return vecs
    return np.column_stack(found)


def hermitian_eig(h) -> HermitianEigenResult:
    """Eigendecomposition with ascending eigenvalues and a fixed phase convention.

    The first component of each eigenvector with modulus above ``PHASE_TOL`` is
    made real and positive. Inside a cluster of eigenvalues closer than
    ``CLUSTER_GAP`` the vectors are replaced by a Gram-Schmidt sweep of the
    standard basis projected onto the cluster, so the output depends only on
    the eigenspace and not on LAPACK's internal choices.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1] or maxabs(h - dagger(h)) > HERMITIAN_TOL:
        raise NotHermitian(f"matrix is not Hermitian within {HERMITIAN_TOL:g}")
    h = 0.5 * (h + dagger(h))
    w, v = np.linalg.eigh(h)
    v = v.astype(complex, copy=True)
    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] < CLUSTER_GAP:
            stop += 1
        if stop - start > 1:
            v[:, start:stop] = _canonical_cluster(v[:, start:stop])
        start = stop
    for j in range(n):
        v[:, j] = _fix_phase(v[:, j])
    return HermitianEigenResult(w, v)


def expm_hermitian(h, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian ``h``."""
    res = hermitian_eig(h)
    v = res.eigenvectors
    return (v * np.exp(-1j * res.eigenvalues * t)) @ dagger(v)


def _check_orthonormal(rows: np.ndarray, tol: float) -> None:
    gram = np.conj(rows) @ rows.T
    if maxabs(gram - np.eye(rows.shape[0])) > tol:
        raise NotOrthonormal(f"vectors are not orthonormal within {tol:g}")


def complete_to_unitary(columns, target_dim: int) -> np.ndarray:
    """Square unitary whose leading columns are ``columns``.

    Missing columns come from a Gram-Schmidt sweep over the standard basis,
    skipping candidates whose residual norm is below ``GS_SKIP``.
    """
    cols = [as_vector(c) for c in columns]
    if len(cols) > target_dim:
        raise TooManyColumns(f"{len(cols)} columns cannot fit in dimension {target_dim}")
    if any(c.size != target_dim for c in cols):
        raise DimensionMismatch(f"every column must have length {target_dim}")
    if cols:
        _check_orthonormal(np.array(cols), ORTHONORMAL_TOL)
    eye = np.eye(target_dim, dtype=complex)
    full = _gram_schmidt_sweep(cols, (eye[:, j] for j in range(target_dim)),
                               target_dim, GS_SKIP)
    u = np.column_stack(full) if full else np.zeros((0, 0), dtype=complex)
    return u


def trace_distance(r1, r2) -> float:
    """Half the trace norm of ``r1 - r2``."""
    r1 = as_matrix(r1)
    r2 = as_matrix(r2)
    if r1.shape != r2.shape or r1.shape[0] != r1.shape[1]:
        raise DimensionMismatch(f"shapes {r1.shape} and {r2.shape} differ or are not square")
    d = r1 - r2
    d = 0.5 * (d + dagger(d))
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(d))))


def check_orthonormal_basis(basis, dim: int, tol: float = 1e-9, complete: bool = True) -> np.ndarray:
    """Validate a list of vectors as an orthonormal (optionally complete) basis of C^dim.

    Returns the vectors stacked as rows. Raises ``NotOrthonormal`` or
    ``DimensionMismatch``; callers translate these to their own error types.
    """
    rows = np.array([as_vector(b) for b in basis])
    if rows.ndim != 2 or rows.shape[1] != dim:
        raise DimensionMismatch(f"basis vectors must have length {dim}")
    if complete and rows.shape[0] != dim:
        raise NotOrthonormal(f"basis has {rows.shape[0]} vectors, need {dim}")
    _check_orthonormal(rows, tol)
    return rows
