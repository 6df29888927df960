"""Ensembles of unnormalised states and the mixing-matrix machinery relating them.

A state's squared norm is its probability in the ensemble, so
``density_of`` is simply ``sum_i |psi_i><psi_i|``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import (
    DimensionMismatch,
    InvalidDensity,
    InvalidEnsemble,
    NotSameDensity,
    NotUnitary,
    SizeTooSmall,
)
from .hilbert import dagger, maxabs

TOTAL_PROB_TOL = 1e-10
DENSITY_TOL = 1e-10
RANK_CUTOFF = 1e-12
NULL_NORM2 = 1e-14
SAME_DENSITY_TOL = 1e-9
UNITARY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Finite mixture of weighted states; ``states[i]`` has squared norm ``d_i``."""

    states: np.ndarray

    def __post_init__(self):
        s = np.array(self.states, dtype=complex)
        if s.ndim == 1:
            s = s[None, :]
        if s.ndim != 2 or s.shape[0] == 0 or s.shape[1] == 0:
            raise InvalidEnsemble(f"states must be a non-empty (n, dim) array, got {s.shape}")
        w = np.sum(np.abs(s) ** 2, axis=1)
        if np.any(w <= 0.0) or np.any(w > 1.0 + TOTAL_PROB_TOL):
            raise InvalidEnsemble("every state needs squared norm in (0, 1]")
        if abs(w.sum() - 1.0) > TOTAL_PROB_TOL:
            raise InvalidEnsemble(f"total probability {w.sum():.15g} differs from 1")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @classmethod
    def from_normalized(cls, weights, vectors) -> "Ensemble":
        """Build from probabilities and (not necessarily unit) vectors, storing sqrt(d) |psi>."""
        vecs = np.array(vectors, dtype=complex)
        if vecs.ndim == 1:
            vecs = vecs[None, :]
        norms = np.linalg.norm(vecs, axis=1)
        if np.any(norms == 0):
            raise InvalidEnsemble("zero vector in ensemble")
        w = np.asarray(weights, dtype=float)
        return cls(vecs / norms[:, None] * np.sqrt(w)[:, None])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)

    def unit_states(self) -> np.ndarray:
        return self.states / np.sqrt(self.weights)[:, None]

    def __len__(self) -> int:
        return self.states.shape[0]

    def __iter__(self):
        return iter(self.states)

    def __repr__(self) -> str:
        return f"Ensemble(n={len(self)}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class SpectralEnsemble:
    """Orthogonal decomposition rho = sum |chi_i><chi_i| with <chi_i|chi_j> = lambda_i delta_ij."""

    chis: np.ndarray  # rows
    lambdas: np.ndarray

    @property
    def rank(self) -> int:
        return self.chis.shape[0]

    @property
    def dim(self) -> int:
        return self.chis.shape[1]

    def density(self) -> np.ndarray:
        return self.chis.T @ np.conj(self.chis)

    def as_ensemble(self) -> Ensemble:
        return Ensemble(self.chis)


@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """Rectangular ``m`` (n_psi x n) with orthonormal columns and its unitary completion."""

    m: np.ndarray
    padded_unitary: np.ndarray

    def column_residual(self) -> float:
        m = self.m
        return maxabs(dagger(m) @ m - np.eye(m.shape[1]))


def check_density(rho, tol: float = DENSITY_TOL, psd_tol: float | None = None) -> np.ndarray:
    """Return ``rho`` as a complex array after checking the density-matrix invariants."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidDensity(f"density matrix must be square, got {rho.shape}")
    if maxabs(rho - dagger(rho)) > tol:
        raise InvalidDensity("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise InvalidDensity(f"trace {np.trace(rho).real:.12g} differs from 1")
    floor = -tol if psd_tol is None else -psd_tol
    if np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0] < floor:
        raise InvalidDensity("density matrix has a negative eigenvalue")
    return rho


def density_of(e: Ensemble) -> np.ndarray:
    s = e.states
    return s.T @ np.conj(s)


def equivalent(e1: Ensemble, e2: Ensemble, tol: float = SAME_DENSITY_TOL) -> bool:
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"ensembles live in dimensions {e1.dim} and {e2.dim}")
    return maxabs(density_of(e1) - density_of(e2)) <= tol


def spectral_vectors(rho: np.ndarray, cutoff: float = RANK_CUTOFF) -> tuple[np.ndarray, np.ndarray]:
    """sqrt(lambda) * eigenvector rows for eigenvalues above ``cutoff``, ascending."""
    res = hilbert.hermitian_eig(rho)
    keep = res.eigenvalues > cutoff
    lam = res.eigenvalues[keep]
    chis = (res.eigenvectors[:, keep] * np.sqrt(lam)).T
    return chis, lam


def spectral_ensemble(rho) -> SpectralEnsemble:
    rho = check_density(rho)
    chis, lam = spectral_vectors(rho)
    return SpectralEnsemble(chis, lam)


def mixing_matrix(e: Ensemble, s: SpectralEnsemble, size: int | None = None) -> MixingMatrix:
    """Coefficients m_ik = <chi_k|psi_i> / lambda_k and their unitary completion.

    ``size`` pads the state list with null vectors before completing; it
    defaults to ``len(e)``.
    """
    if e.dim != s.dim:
        raise DimensionMismatch(f"ensemble dim {e.dim} vs spectral dim {s.dim}")
    gap = maxabs(density_of(e) - s.density())
    if gap > SAME_DENSITY_TOL:
        raise NotSameDensity(f"ensemble density differs from spectral density by {gap:.3g}")
    n_psi = len(e)
    size = n_psi if size is None else size
    if size < n_psi:
        raise SizeTooSmall(f"cannot pad {n_psi} states into size {size}")
    m = (e.states @ dagger(s.chis)) / s.lambdas
    padded = np.zeros((size, m.shape[1]), dtype=complex)
    padded[:n_psi] = m
    u = hilbert.complete_to_unitary(list(padded.T), size)
    return MixingMatrix(m, u)


def apply_mixing(s: SpectralEnsemble, u) -> Ensemble:
    """psi_i = sum_j u_ij chi_j with the chi list padded by null vectors to u's size."""
    u = hilbert.as_matrix(u)
    if not hilbert.is_unitary(u, UNITARY_TOL):
        raise NotUnitary(f"mixing matrix is not unitary within {UNITARY_TOL:g}")
    if u.shape[0] < s.rank:
        raise SizeTooSmall(f"unitary of size {u.shape[0]} is smaller than rank {s.rank}")
    psi = u[:, : s.rank] @ s.chis
    keep = np.sum(np.abs(psi) ** 2, axis=1) >= NULL_NORM2
    return Ensemble(psi[keep])


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal phases removed."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_equivalent_ensemble(rho, size: int, seed) -> Ensemble:
    """Random ensemble of at most ``size`` states with density ``rho``.

    ``seed`` is anything ``numpy.random.default_rng`` accepts.
    """
    s = spectral_ensemble(rho)
    if size < s.rank:
        raise SizeTooSmall(f"size {size} is below rank {s.rank}")
    rng = np.random.default_rng(seed)
    return apply_mixing(s, haar_unitary(size, rng))


def concatenate(*parts: tuple[float, Ensemble]) -> Ensemble:
    """Mixture {sqrt(w_1) e_1, sqrt(w_2) e_2, ...} of weighted ensembles."""
    rows = [np.sqrt(w) * e.states for w, e in parts]
    return Ensemble(np.vstack(rows))
