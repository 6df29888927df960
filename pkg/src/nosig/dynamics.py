"""State-vector evolutions and the density-matrix maps they induce.

Every spec is time-homogeneous with the time origin at 0. Deterministic
specs act on single vectors; ``LindbladMaster`` acts on density matrices
only; ``JumpUnraveling`` is a stochastic vector evolution whose projector
average solves the corresponding master equation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg

from . import hilbert, kernels
from .ensemble import Ensemble, check_density, density_of, spectral_vectors
from .errors import (
    BadParameter,
    BadStep,
    DimensionMismatch,
    NonPositiveTime,
    NotAStateMap,
    NotHermitian,
    NotInTable,
    NotPure,
    StepTooLarge,
)
from .hilbert import SIGMA_Z, X_MINUS, X_PLUS, Z_MINUS, Z_PLUS, dagger, maxabs
from .seeding import child_seed, rng_for

COLLINEAR_TOL = 1e-9
PURE_TOL = 1e-9
MAX_JUMP_PROB = 0.1
TRAJECTORY_CHUNK = 1024


def _hermitian(h) -> np.ndarray:
    h = hilbert.as_matrix(h)
    if h.shape[0] != h.shape[1] or maxabs(h - dagger(h)) > hilbert.HERMITIAN_TOL:
        raise NotHermitian("Hamiltonian must be Hermitian")
    return h


def _operators(ops, dim: int) -> np.ndarray:
    ops = np.asarray(ops, dtype=complex)
    if ops.size == 0:
        return np.zeros((0, dim, dim), dtype=complex)
    if ops.ndim == 2:
        ops = ops[None]
    if ops.shape[1:] != (dim, dim):
        raise DimensionMismatch(f"jump operators must be {dim}x{dim}, got {ops.shape[1:]}")
    return ops


@dataclass(frozen=True, eq=False)
class Unitary:
    H: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "H", _hermitian(self.H))


@dataclass(frozen=True)
class NonlinearWeinberg:
    """psi -> exp(-i g t <sigma_z>_psi sigma_z) psi on a qubit."""

    strength: float = 1.0


@dataclass(frozen=True)
class FigureThreeTable:
    """Qubit map defined only on z+, z-, x+, x-: z+->x+, z-->x-, x+->z+, x-->x-."""


@dataclass(frozen=True, eq=False)
class LindbladMaster:
    H: np.ndarray
    ops: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0), dtype=complex))
    dt: float = 1e-3

    def __post_init__(self):
        h = _hermitian(self.H)
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "ops", _operators(self.ops, h.shape[0]))
        if not self.dt > 0:
            raise BadStep("dt must be positive")


@dataclass(frozen=True, eq=False)
class JumpUnraveling:
    H: np.ndarray
    ops: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0), dtype=complex))
    dt: float = 1e-3
    trajectories: int = 1000

    def __post_init__(self):
        h = _hermitian(self.H)
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "ops", _operators(self.ops, h.shape[0]))
        if not self.dt > 0:
            raise BadStep("dt must be positive")
        if int(self.trajectories) < 1:
            raise BadParameter("trajectories must be >= 1")


EvolutionSpec = Union[Unitary, NonlinearWeinberg, FigureThreeTable, LindbladMaster, JumpUnraveling]


def is_stochastic(spec: EvolutionSpec) -> bool:
    return isinstance(spec, JumpUnraveling)


def describe(spec: EvolutionSpec) -> str:
    if isinstance(spec, Unitary):
        return f"Unitary(dim={spec.H.shape[0]})"
    if isinstance(spec, NonlinearWeinberg):
        return f"NonlinearWeinberg(g={spec.strength:g})"
    if isinstance(spec, FigureThreeTable):
        return "FigureThreeTable()"
    if isinstance(spec, LindbladMaster):
        return f"LindbladMaster(dim={spec.H.shape[0]}, n_ops={len(spec.ops)}, dt={spec.dt:g})"
    if isinstance(spec, JumpUnraveling):
        return (f"JumpUnraveling(dim={spec.H.shape[0]}, n_ops={len(spec.ops)}, "
                f"dt={spec.dt:g}, N={spec.trajectories})")
    raise TypeError(f"unknown evolution spec {spec!r}")


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    final_states: np.ndarray  # (n_traj, dim), unit norm
    seed: int

    def mean_projector(self) -> np.ndarray:
        s = self.final_states
        # einsum keeps the reduction order fixed, independent of BLAS threading
        return np.einsum("ia,ib->ab", s, np.conj(s)) / s.shape[0]


def _step_grid(t: float, dt: float) -> tuple[int, float]:
    """Number of full ``dt`` steps and the trailing partial step covering [0, t]."""
    if not dt > 0 or not np.isfinite(dt):
        raise BadStep(f"step {dt!r} must be positive and finite")
    if t < 0:
        raise BadStep(f"duration {t!r} must be non-negative")
    if t == 0:
        return 0, 0.0
    n = int(np.floor(t / dt))
    rem = t - n * dt
    if rem >= dt * (1 - 1e-9):
        n, rem = n + 1, 0.0
    elif rem <= 1e-9 * dt:
        rem = 0.0
    return n, float(rem)


def lindblad_rhs(rho, H, ops) -> np.ndarray:
    """-i[H, rho] + sum_k (L rho L^dagger - 1/2 L^dagger L rho - 1/2 rho L^dagger L)."""
    rho = hilbert.as_matrix(rho)
    H = hilbert.as_matrix(H)
    if H.shape != rho.shape:
        raise DimensionMismatch(f"H {H.shape} vs rho {rho.shape}")
    out = -1j * (H @ rho - rho @ H)
    for L in _operators(ops, rho.shape[0]):
        LdL = dagger(L) @ L
        out = out + L @ rho @ dagger(L) - 0.5 * LdL @ rho - 0.5 * rho @ LdL
    return out


def _generator(H, ops) -> np.ndarray:
    g = -1j * H
    for L in ops:
        g = g - 0.5 * dagger(L) @ L
    return g


def propagate_lindblad(rhos, H, ops, t: float, dt: float) -> np.ndarray:
    """RK4 propagation of a stack (B, d, d) of operators; no density checks."""
    H = hilbert.as_matrix(H)
    ops = _operators(ops, H.shape[0])
    n_full, dt_last = _step_grid(t, dt)
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.shape[1:] != H.shape:
        raise DimensionMismatch(f"H {H.shape} vs rho {rhos.shape[1:]}")
    return kernels.rk4_lindblad(rhos, _generator(H, ops), ops, float(dt), n_full, dt_last)


def integrate_lindblad(rho0, H, ops, t: float, dt: float) -> np.ndarray:
    """Classical RK4 with fixed step ``dt`` (final partial step allowed), re-Hermitised every step."""
    rho0 = check_density(rho0)
    if t < 0 or not dt > 0 or (t > 0 and dt > t):
        raise BadStep(f"need t >= 0 and 0 < dt <= t (got t={t}, dt={dt})")
    return propagate_lindblad(rho0[None], H, ops, t, dt)[0]


def unravel(psi0, H, ops, t: float, dt: float, n_traj: int, seed: int) -> TrajectoryResult:
    """Quantum-jump (Monte-Carlo wave function) trajectories from ``psi0``.

    Trajectory ``j`` draws its uniforms from the stream ``(seed, j)``, so the
    result does not depend on chunking or thread count.
    """
    psi0 = hilbert.as_vector(psi0)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise BadParameter("initial state must have unit norm")
    H = _hermitian(H)
    ops = _operators(ops, H.shape[0])
    if H.shape[0] != psi0.size:
        raise DimensionMismatch(f"H {H.shape} vs psi {psi0.shape}")
    if n_traj < 1:
        raise BadParameter("n_traj must be >= 1")
    if t < 0:
        raise NonPositiveTime(f"time {t} is negative")
    n_full, dt_last = _step_grid(t, dt)
    n_steps = n_full + (1 if dt_last > 0 else 0)
    h_eff = H - 0.5j * sum((dagger(L) @ L for L in ops), np.zeros_like(H))
    props = np.stack([
        scipy.linalg.expm(-1j * h_eff * dt),
        scipy.linalg.expm(-1j * h_eff * dt_last),
    ])
    out = np.empty((n_traj, psi0.size), dtype=complex)
    for start in range(0, n_traj, TRAJECTORY_CHUNK):
        stop = min(n_traj, start + TRAJECTORY_CHUNK)
        uniforms = np.empty((stop - start, n_steps, 2))
        for j in range(start, stop):
            uniforms[j - start] = rng_for(seed, j).random((n_steps, 2))
        states, max_p = kernels.jump_trajectories(psi0, props, ops, float(dt), dt_last,
                                                  n_full, uniforms)
        if max_p > MAX_JUMP_PROB:
            raise StepTooLarge(f"jump probability {max_p:.3g} per step exceeds {MAX_JUMP_PROB}; "
                               "reduce dt")
        out[start:stop] = states
    return TrajectoryResult(out, int(seed))


def _weinberg(g: float, psi: np.ndarray, t: float) -> np.ndarray:
    if psi.size != 2:
        raise DimensionMismatch("NonlinearWeinberg acts on qubits only")
    sz = float(np.real(np.vdot(psi, SIGMA_Z @ psi)) / np.real(np.vdot(psi, psi)))
    theta = g * t * sz
    return np.array([np.exp(-1j * theta), np.exp(1j * theta)]) * psi


_TABLE = ((Z_PLUS, X_PLUS), (Z_MINUS, X_MINUS), (X_PLUS, Z_PLUS), (X_MINUS, X_MINUS))


def _table(psi: np.ndarray) -> np.ndarray:
    if psi.size != 2:
        raise NotInTable("FigureThreeTable acts on qubits only")
    nrm = np.linalg.norm(psi)
    for src, dst in _TABLE:
        c = np.vdot(src, psi)
        if np.linalg.norm(psi - c * src) <= COLLINEAR_TOL * nrm:
            return c * dst
    raise NotInTable("state is not collinear with z+, z-, x+ or x-")


def evolve_state(spec: EvolutionSpec, psi, t: float, seed: int = 0) -> np.ndarray:
    """Apply the vector map for duration ``t``; output norm equals input norm."""
    psi = hilbert.as_vector(psi)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise BadParameter("cannot evolve the zero vector")
    if not t > 0:
        raise NonPositiveTime(f"evolution time must be positive, got {t}")
    if isinstance(spec, Unitary):
        if spec.H.shape[0] != psi.size:
            raise DimensionMismatch(f"H {spec.H.shape} vs psi {psi.shape}")
        return hilbert.expm_hermitian(spec.H, t) @ psi
    if isinstance(spec, NonlinearWeinberg):
        return _weinberg(spec.strength, psi, t)
    if isinstance(spec, FigureThreeTable):
        return _table(psi)
    if isinstance(spec, JumpUnraveling):
        res = unravel(psi / nrm, spec.H, spec.ops, t, spec.dt, 1, seed)
        return res.final_states[0] * nrm
    if isinstance(spec, LindbladMaster):
        raise NotAStateMap("LindbladMaster defines no state-vector evolution; "
                           "use evolve_pure_density or evolve_ensemble")
    raise TypeError(f"unknown evolution spec {spec!r}")


def evolve_pure_density(spec: EvolutionSpec, rho_pure, t: float, seed: int = 0) -> np.ndarray:
    rho = check_density(rho_pure)
    res = hilbert.hermitian_eig(rho)
    if res.eigenvalues.size > 1 and res.eigenvalues[-2] > PURE_TOL:
        raise NotPure(f"second eigenvalue {res.eigenvalues[-2]:.3g} exceeds {PURE_TOL:g}")
    if not t > 0:
        raise NonPositiveTime(f"evolution time must be positive, got {t}")
    psi = res.eigenvectors[:, -1]
    if isinstance(spec, LindbladMaster):
        return integrate_lindblad(rho, spec.H, spec.ops, t, min(spec.dt, t))
    if isinstance(spec, JumpUnraveling):
        return unravel(psi, spec.H, spec.ops, t, spec.dt, spec.trajectories, seed).mean_projector()
    out = evolve_state(spec, psi, t, seed)
    out = out / np.linalg.norm(out)
    return np.outer(out, np.conj(out))


def evolve_ensemble(spec: EvolutionSpec, e: Ensemble, t: float, seed: int = 0) -> Ensemble:
    """Evolve every sub-ensemble independently.

    Deterministic vector maps keep one state per input state with its weight.
    ``JumpUnraveling`` replaces state ``i`` by its ``N`` trajectory endpoints of
    weight ``d_i / N``. ``LindbladMaster`` replaces state ``i`` by the spectral
    vectors of its evolved projector.
    """
    if not t > 0:
        raise NonPositiveTime(f"evolution time must be positive, got {t}")
    w = e.weights
    if isinstance(spec, JumpUnraveling):
        n = int(spec.trajectories)
        rows = []
        for i, psi in enumerate(e.unit_states()):
            res = unravel(psi, spec.H, spec.ops, t, spec.dt, n, child_seed(seed, i))
            rows.append(res.final_states * np.sqrt(w[i] / n))
        return Ensemble(np.vstack(rows))
    if isinstance(spec, LindbladMaster):
        rows = [spectral_vectors(r)[0] for r in _lindblad_projectors(spec, e, t)]
        return Ensemble(np.vstack(rows))
    out = np.empty_like(e.states)
    for i, psi in enumerate(e.states):
        evolved = evolve_state(spec, psi, t, child_seed(seed, i))
        out[i] = evolved * (np.sqrt(w[i]) / np.linalg.norm(evolved))
    return Ensemble(out)


def _lindblad_projectors(spec: LindbladMaster, e: Ensemble, t: float) -> np.ndarray:
    projs = np.einsum("ia,ib->iab", e.states, np.conj(e.states))
    out = propagate_lindblad(projs, spec.H, spec.ops, t, min(spec.dt, t))
    return 0.5 * (out + dagger(out))


def evolve_density(spec: EvolutionSpec, e: Ensemble, t: float, seed: int = 0) -> np.ndarray:
    """Density of the evolved ensemble, sum_i d_i E(|psi_i><psi_i|)."""
    if isinstance(spec, LindbladMaster):
        if not t > 0:
            raise NonPositiveTime(f"evolution time must be positive, got {t}")
        return _lindblad_projectors(spec, e, t).sum(axis=0)
    return density_of(evolve_ensemble(spec, e, t, seed))
