"""Executable form of the no-signaling argument.

An evolution is audited by preparing several equivalent ensembles of one
density matrix, evolving each, and measuring how far apart the evolved
densities drift. Any separation is a communication channel for whoever
chooses the ensemble remotely; ``demo_signaling_protocol`` runs that channel.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import hilbert
from .dynamics import (
    EvolutionSpec,
    JumpUnraveling,
    LindbladMaster,
    describe,
    evolve_density,
    evolve_pure_density,
    evolve_state,
    integrate_lindblad,
    is_stochastic,
    unravel,
)
from .ensemble import (
    Ensemble,
    check_density,
    concatenate,
    density_of,
    random_equivalent_ensemble,
    spectral_ensemble,
)
from .errors import BadParameter, NotEquivalent
from .purification import conditional_states, joint_purification
from .seeding import child_seed, rng_for

DETERMINISTIC_THRESHOLD = 1e-8
EQUIV_TOL = 1e-9


class Verdict(enum.Enum):
    NO_SIGNALING_CONSISTENT = "NoSignalingConsistent"
    SIGNALING_DETECTED = "SignalingDetected"


def mc_threshold(n_traj: int) -> float:
    return 5.0 / np.sqrt(n_traj)


def default_threshold(spec: EvolutionSpec) -> float:
    if isinstance(spec, JumpUnraveling):
        return mc_threshold(spec.trajectories)
    return DETERMINISTIC_THRESHOLD


@dataclass
class AuditReport:
    spec: str
    times: list[float]
    max_trace_distance: float
    verdict: Verdict
    threshold: float
    witness_pair: tuple[int, int]
    witness_time: float
    ensembles: list[Ensemble]
    distances: list[tuple[float, int, int, float]]
    note: str = "only the listed probe times were examined; later separation is not excluded"

    @property
    def helstrom_success(self) -> float:
        return 0.5 * (1.0 + min(self.max_trace_distance, 1.0))

    @property
    def witness(self) -> tuple[Ensemble, Ensemble, float]:
        i, j = self.witness_pair
        return self.ensembles[i], self.ensembles[j], self.witness_time


@dataclass
class LinearityReport:
    lam: float
    t: float
    residual: float
    tolerance: float
    extended: np.ndarray = field(repr=False)
    mixed: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


@dataclass
class UnravelingReport:
    trace_distance: float
    bound: float
    rho_trajectories: np.ndarray = field(repr=False)
    rho_master: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return bool(self.trace_distance <= self.bound)


@dataclass
class DemoTranscript:
    trials: np.ndarray  # columns: bob_bit, bob_outcome, alice_outcome, guess
    accuracy: float
    theoretical: float
    trace_distance: float

    @property
    def sigma(self) -> float:
        p = self.theoretical
        return float(np.sqrt(p * (1 - p) / len(self.trials)))

    def within(self, n_sigma: float = 3.0) -> bool:
        # p = 1 gives a zero-width band; fall back to the p = 1/2 width
        width = self.sigma or np.sqrt(0.25 / len(self.trials))
        return bool(abs(self.accuracy - self.theoretical) <= n_sigma * width)


def audit_no_signaling(spec: EvolutionSpec, rho0, n_decomp: int = 8, sizes=(2, 3, 4),
                       times=(0.25, 0.5, 1.0, 2.0), threshold: float | None = None,
                       seed: int = 0, ensembles: list[Ensemble] | None = None) -> AuditReport:
    """Largest trace distance between evolved densities of equivalent ensembles of ``rho0``.

    Without ``ensembles`` the candidates are the spectral ensemble plus
    ``n_decomp`` Haar-random decompositions, the k-th of size
    ``sizes[k % len(sizes)]``. With ``ensembles`` exactly those are audited
    (each must be equivalent to ``rho0``).
    """
    rho0 = check_density(rho0)
    if ensembles is None:
        if n_decomp < 1:
            raise BadParameter("n_decomp must be >= 1")
        sizes = list(sizes) or [rho0.shape[0]]
        ens = [spectral_ensemble(rho0).as_ensemble()]
        ens += [random_equivalent_ensemble(rho0, int(sizes[k % len(sizes)]), child_seed(seed, 0, k))
                for k in range(n_decomp)]
    else:
        ens = list(ensembles)
        for k, e in enumerate(ens):
            gap = hilbert.maxabs(density_of(e) - rho0)
            if gap > EQUIV_TOL:
                raise NotEquivalent(f"ensemble {k} is not a decomposition of rho0",
                                    hilbert.trace_distance(density_of(e), rho0))
    if len(ens) < 2:
        raise BadParameter("an audit needs at least two ensembles")
    threshold = default_threshold(spec) if threshold is None else float(threshold)
    if not threshold > 0:
        raise BadParameter("threshold must be positive")

    rows = []
    best = (-1.0, (0, 1), float(times[0]))
    for ti, t in enumerate(times):
        evolved = [evolve_density(spec, e, t, child_seed(seed, 1, ti, k)) for k, e in enumerate(ens)]
        for i, j in combinations(range(len(ens)), 2):
            d = hilbert.trace_distance(evolved[i], evolved[j])
            rows.append((float(t), i, j, d))
            if d > best[0]:
                best = (d, (i, j), float(t))
    dmax = best[0]
    verdict = Verdict.SIGNALING_DETECTED if dmax > threshold else Verdict.NO_SIGNALING_CONSISTENT
    return AuditReport(describe(spec), [float(t) for t in times], dmax, verdict, threshold,
                       best[1], best[2], ens, rows)


def audit_linearity(spec: EvolutionSpec, rho1, rho2, lam: float, t: float, tol: float = 1e-8,
                    seed: int = 0, e1: Ensemble | None = None,
                    e2: Ensemble | None = None) -> LinearityReport:
    """Compare E(lam rho1 + (1-lam) rho2) with lam E(rho1) + (1-lam) E(rho2).

    The right side is the evolved mixture {sqrt(lam) a_i, sqrt(1-lam) b_i} of the
    chosen ensembles ``e1``/``e2`` (spectral ensembles by default). The left
    side evaluates the extended map on the mixed density through its own
    spectral ensemble, which is where a nonlinear vector map betrays itself.
    """
    if not 0.0 < lam < 1.0:
        raise BadParameter(f"lambda must lie strictly between 0 and 1, got {lam}")
    rho1 = check_density(rho1)
    rho2 = check_density(rho2)
    e1 = spectral_ensemble(rho1).as_ensemble() if e1 is None else e1
    e2 = spectral_ensemble(rho2).as_ensemble() if e2 is None else e2
    for e, r in ((e1, rho1), (e2, rho2)):
        if hilbert.maxabs(density_of(e) - r) > EQUIV_TOL:
            raise NotEquivalent("chosen ensemble does not match its density",
                                hilbert.trace_distance(density_of(e), r))
    mixture = concatenate((lam, e1), (1.0 - lam, e2))
    rho = lam * rho1 + (1.0 - lam) * rho2
    extended = evolve_density(spec, spectral_ensemble(rho).as_ensemble(), t, child_seed(seed, 0))
    mixed = evolve_density(spec, mixture, t, child_seed(seed, 1))
    return LinearityReport(lam, t, hilbert.trace_distance(extended, mixed), tol, extended, mixed)


def unraveling_consistency(H, ops, rho0, t: float, dt: float, n_traj: int,
                           seed: int = 0) -> UnravelingReport:
    """Trajectory average over rho0's spectral ensemble versus the RK4 master equation."""
    rho0 = check_density(rho0)
    s = spectral_ensemble(rho0)
    rho_mc = np.zeros_like(rho0)
    for i, (chi, lam) in enumerate(zip(s.chis, s.lambdas)):
        res = unravel(chi / np.sqrt(lam), H, ops, t, dt, n_traj, child_seed(seed, i))
        rho_mc = rho_mc + lam * res.mean_projector()
    rho_me = integrate_lindblad(rho0, H, ops, t, min(dt, t)) if t > 0 else rho0
    return UnravelingReport(hilbert.trace_distance(rho_mc, rho_me), mc_threshold(n_traj),
                            rho_mc, rho_me)


def _alice_density_factory(spec: EvolutionSpec, t: float, seed: int):
    """Return f(bit, outcome, unit_state, trial) -> Alice's evolved density for one run."""
    cache: dict[tuple[int, int], np.ndarray] = {}

    def evolved(bit, outcome, psi, trial):
        if is_stochastic(spec):
            out = evolve_state(spec, psi, t, child_seed(seed, 2, trial))
            return np.outer(out, np.conj(out))
        key = (bit, outcome)
        if key not in cache:
            if isinstance(spec, LindbladMaster):
                cache[key] = evolve_pure_density(spec, np.outer(psi, np.conj(psi)), t)
            else:
                out = evolve_state(spec, psi, t)
                out = out / np.linalg.norm(out)
                cache[key] = np.outer(out, np.conj(out))
        return cache[key]

    return evolved


def demo_signaling_protocol(e1: Ensemble, e2: Ensemble, spec: EvolutionSpec, t: float,
                            trials: int, seed: int = 0) -> DemoTranscript:
    """Simulate Bob encoding a bit in his basis choice and Alice decoding it after evolution.

    Bob measures the alpha basis for bit 0 and the beta basis for bit 1 of a
    joint purification of ``e1`` and ``e2``. Alice measures in the eigenbasis of
    rho1_t - rho2_t and guesses 0 on a positive eigenvalue, 1 otherwise.
    """
    if trials < 1:
        raise BadParameter("trials must be >= 1")
    p = joint_purification(e1, e2)
    rho1_t = evolve_density(spec, e1, t, child_seed(seed, 0))
    rho2_t = evolve_density(spec, e2, t, child_seed(seed, 1))
    dist = hilbert.trace_distance(rho1_t, rho2_t)
    delta = rho1_t - rho2_t
    w, v = np.linalg.eigh(0.5 * (delta + hilbert.dagger(delta)))
    guess_for = np.where(w > 1e-12, 0, 1)

    cond = [conditional_states(p, p.alpha), conditional_states(p, p.beta)]
    probs = [np.sum(np.abs(c) ** 2, axis=1) for c in cond]
    probs = [q / q.sum() for q in probs]
    alice = _alice_density_factory(spec, t, seed)

    rng = rng_for(seed, 3)
    log = np.zeros((trials, 4), dtype=np.int64)
    for k in range(trials):
        bit = int(rng.integers(2))
        outcome = int(rng.choice(len(probs[bit]), p=probs[bit]))
        psi = cond[bit][outcome]
        rho = alice(bit, outcome, psi / np.linalg.norm(psi), k)
        pa = np.clip(np.real(np.einsum("ak,ab,bk->k", np.conj(v), rho, v)), 0.0, None)
        a_out = int(rng.choice(len(pa), p=pa / pa.sum()))
        log[k] = (bit, outcome, a_out, guess_for[a_out])
    accuracy = float(np.mean(log[:, 0] == log[:, 3]))
    return DemoTranscript(log, accuracy, 0.5 * (1.0 + dist), dist)
