"""Shared entangled states that let a distant party prepare either of two equivalent mixtures."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hilbert
from .ensemble import (
    NULL_NORM2,
    Ensemble,
    density_of,
    mixing_matrix,
    spectral_ensemble,
)
from .errors import BadBasis, DimensionMismatch, DuplicateLabels, NotEquivalent, NotOrthonormal
from .hilbert import maxabs

EQUIV_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Purification:
    """|V> in H (x) K with the Bob-side bases that expand it.

    ``alpha`` and ``beta`` hold basis vectors as rows; ``beta`` is empty for a
    single-ensemble purification.
    """

    v: np.ndarray
    alice_dim: int
    bob_dim: int
    alpha: np.ndarray
    beta: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=complex))

    def as_matrix(self) -> np.ndarray:
        """V reshaped so that row index is Alice's, column index Bob's."""
        return self.v.reshape(self.alice_dim, self.bob_dim)

    def reduced_density(self) -> np.ndarray:
        return hilbert.partial_trace_second(self.v, self.alice_dim, self.bob_dim)


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: np.ndarray
    basis: np.ndarray
    labels: np.ndarray


def expansion(states: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """sum_i states[i] (x) basis[i]; missing states count as null vectors."""
    n = states.shape[0]
    return sum(np.kron(states[i], basis[i]) for i in range(n))


def expansion_residual(p: Purification, e: Ensemble, basis: np.ndarray) -> float:
    return maxabs(expansion(e.states, basis) - p.v)


def _bob_vectors(mixing: np.ndarray) -> np.ndarray:
    # alpha_j = sum_i (M^dagger)_ij a_i with a_i the standard basis, i.e. conj of row j of M
    return np.conj(mixing)


def purify(e: Ensemble) -> Purification:
    s = spectral_ensemble(density_of(e))
    mm = mixing_matrix(e, s)
    n_psi = len(e)
    eye = np.eye(n_psi, dtype=complex)
    v = expansion(s.chis, eye)
    return Purification(v, e.dim, n_psi, _bob_vectors(mm.padded_unitary))


def joint_purification(e1: Ensemble, e2: Ensemble) -> Purification:
    """One |V> = sum psi_i (x) alpha_i = sum phi_i (x) beta_i for two equivalent ensembles."""
    if e1.dim != e2.dim:
        raise DimensionMismatch(f"ensembles live in dimensions {e1.dim} and {e2.dim}")
    r1, r2 = density_of(e1), density_of(e2)
    if maxabs(r1 - r2) > EQUIV_TOL:
        d = hilbert.trace_distance(r1, r2)
        raise NotEquivalent(f"ensembles are not equivalent (trace distance {d:.6g})", d)
    s = spectral_ensemble(r1)
    size = max(len(e1), len(e2))
    m1 = mixing_matrix(e1, s, size)
    m2 = mixing_matrix(e2, s, size)
    eye = np.eye(size, dtype=complex)
    v = expansion(s.chis, eye)
    return Purification(v, e1.dim, size, _bob_vectors(m1.padded_unitary),
                        _bob_vectors(m2.padded_unitary))


def _check_basis(basis, dim: int) -> np.ndarray:
    try:
        return hilbert.check_orthonormal_basis(basis, dim, tol=1e-9, complete=True)
    except (NotOrthonormal, DimensionMismatch) as exc:
        raise BadBasis(str(exc)) from exc


def conditional_states(p: Purification, basis) -> np.ndarray:
    """Alice's unnormalised post-measurement states (I (x) <b_i|)|V>, one row per outcome."""
    rows = _check_basis(basis, p.bob_dim)
    return (p.as_matrix() @ np.conj(rows).T).T


def remote_prepare(p: Purification, basis) -> Ensemble:
    """Ensemble Alice holds after Bob measures in ``basis``; null outcomes are dropped."""
    psi = conditional_states(p, basis)
    keep = np.sum(np.abs(psi) ** 2, axis=1) >= NULL_NORM2
    return Ensemble(psi[keep])


def bob_observable(basis, labels=None) -> Observable:
    rows = np.array([hilbert.as_vector(b) for b in basis])
    rows = _check_basis(rows, rows.shape[1])
    n = rows.shape[0]
    labels = np.arange(1, n + 1, dtype=float) if labels is None else np.asarray(labels, dtype=float)
    if labels.shape != (n,):
        raise DuplicateLabels(f"need {n} labels, got {labels.size}")
    if np.unique(labels).size != n:
        raise DuplicateLabels("observable outcome labels must be distinct")
    mat = (rows.T * labels) @ np.conj(rows)
    return Observable(mat, rows, labels)
