import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from nosig import auditor as aud
from nosig import dynamics as dyn
from nosig.ensemble import Ensemble, density_of, random_equivalent_ensemble
from nosig.errors import BadParameter, NotEquivalent
from nosig.hilbert import SIGMA_Z, SQRT_HALF, X_MINUS, X_PLUS, Z_MINUS, Z_PLUS, trace_distance

from conftest import random_density, random_hermitian

seeds = st.integers(0, 2**32 - 1)
DEPHASE = [math.sqrt(0.5) * SIGMA_Z]
HALF_I = 0.5 * np.eye(2)
A = math.pi / 8
WITNESS = Ensemble(SQRT_HALF * np.array([[math.cos(A), math.sin(A)], [-math.sin(A), math.cos(A)]]))


def weinberg_witness_oracle(a, g, t):
    """Trace distance after evolving the rotated pair and {z+-}, by explicit exponentials."""
    def evolve(v):
        sz = np.vdot(v, SIGMA_Z @ v).real / np.vdot(v, v).real
        return scipy.linalg.expm(-1j * g * t * sz * SIGMA_Z) @ v

    rotated = [np.array([math.cos(a), math.sin(a)]), np.array([-math.sin(a), math.cos(a)])]
    rho_a = sum(0.5 * np.outer(evolve(v), evolve(v).conj()) for v in rotated)
    rho_b = sum(0.5 * np.outer(evolve(v), evolve(v).conj()) for v in (Z_PLUS, Z_MINUS))
    d = rho_a - rho_b
    return math.sqrt(abs(np.linalg.det(d).real))


def test_unitary_audit_is_consistent():
    h = random_hermitian(np.random.default_rng(0), 2)
    rep = aud.audit_no_signaling(dyn.Unitary(h), HALF_I, n_decomp=8, times=(0.5, 1.0, 2.0), seed=4)
    assert rep.verdict is aud.Verdict.NO_SIGNALING_CONSISTENT
    assert rep.max_trace_distance <= 1e-10
    assert len(rep.ensembles) == 9


def test_fig3_audit_detects_signaling(zpm, xpm):
    rep = aud.audit_no_signaling(dyn.FigureThreeTable(), HALF_I, times=(1.0,), ensembles=[zpm, xpm])
    assert rep.verdict is aud.Verdict.SIGNALING_DETECTED
    assert rep.max_trace_distance == pytest.approx(math.sqrt(2) / 4, abs=1e-12)
    assert rep.helstrom_success == pytest.approx(0.5 * (1 + math.sqrt(2) / 4), abs=1e-12)
    assert rep.helstrom_success == pytest.approx(0.676777, abs=1e-6)
    a, b, t = rep.witness
    assert {id(a), id(b)} == {id(zpm), id(xpm)} and t == 1.0


def test_weinberg_witness(zpm):
    rep = aud.audit_no_signaling(dyn.NonlinearWeinberg(1.0), HALF_I, times=(1.0,),
                                 ensembles=[WITNESS, zpm])
    closed = 0.5 * abs(math.sin(2 * A) * math.sin(2 * math.cos(2 * A)))
    assert closed == pytest.approx(0.349, abs=1e-3)
    assert rep.max_trace_distance == pytest.approx(closed, abs=1e-12)
    assert rep.max_trace_distance == pytest.approx(weinberg_witness_oracle(A, 1.0, 1.0), abs=1e-12)
    assert rep.verdict is aud.Verdict.SIGNALING_DETECTED


def test_audit_rejects_foreign_ensemble(zpm):
    with pytest.raises(NotEquivalent):
        aud.audit_no_signaling(dyn.FigureThreeTable(), HALF_I, ensembles=[zpm, Ensemble([Z_PLUS])])


def test_jump_audit_uses_monte_carlo_threshold():
    spec = dyn.JumpUnraveling(np.zeros((2, 2)), DEPHASE, dt=1e-2, trajectories=400)
    rep = aud.audit_no_signaling(spec, HALF_I, n_decomp=2, times=(0.5,), seed=1)
    assert rep.threshold == pytest.approx(5 / 20)
    assert rep.verdict is aud.Verdict.NO_SIGNALING_CONSISTENT


@settings(max_examples=8, deadline=None)
@given(seeds, st.sampled_from(["unitary", "lindblad"]), st.sampled_from([2, 3]))
def test_audit_soundness(seed, kind, dim):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, dim)
    h = random_hermitian(rng, dim)
    if kind == "unitary":
        spec = dyn.Unitary(h)
    else:
        spec = dyn.LindbladMaster(h, [random_hermitian(rng, dim, 0.4)], dt=1e-2)
    rep = aud.audit_no_signaling(spec, rho, n_decomp=3, sizes=(dim, dim + 2), times=(0.5, 1.0),
                                 seed=seed)
    assert rep.verdict is aud.Verdict.NO_SIGNALING_CONSISTENT
    assert (rep.max_trace_distance > rep.threshold) == (rep.verdict is aud.Verdict.SIGNALING_DETECTED)
    assert 0.5 <= rep.helstrom_success <= 1.0


def test_linearity_unitary_and_lindblad():
    rng = np.random.default_rng(2)
    r1, r2 = random_density(rng, 2), random_density(rng, 2)
    rep = aud.audit_linearity(dyn.Unitary(random_hermitian(rng, 2)), r1, r2, 0.3, 1.0)
    assert rep.residual <= 1e-10 and rep.passed
    spec = dyn.LindbladMaster(np.zeros((2, 2)), DEPHASE, dt=1e-3)
    rep = aud.audit_linearity(spec, np.diag([1.0, 0.0]), np.outer(X_PLUS, X_PLUS), 0.5, 1.0)
    assert rep.residual <= 1e-8 and rep.passed


@pytest.mark.parametrize("lam", [0.0, 1.0, -0.2, 1.5])
def test_linearity_rejects_endpoint_lambdas(lam):
    with pytest.raises(BadParameter):
        aud.audit_linearity(dyn.Unitary(np.zeros((2, 2))), HALF_I, HALF_I, lam, 1.0)


def test_linearity_fails_for_table_map():
    rep = aud.audit_linearity(dyn.FigureThreeTable(), np.outer(X_PLUS, X_PLUS),
                              np.outer(X_MINUS, X_MINUS), 0.5, 1.0)
    assert rep.residual == pytest.approx(math.sqrt(2) / 4, abs=1e-12)
    assert not rep.passed


def test_linearity_implies_extendability():
    rng = np.random.default_rng(8)
    spec = dyn.LindbladMaster(random_hermitian(rng, 3), [random_hermitian(rng, 3, 0.3)], dt=1e-2)
    r1, r2 = random_density(rng, 3), random_density(rng, 3)
    for lam in np.arange(1, 10) / 10:
        assert aud.audit_linearity(spec, r1, r2, lam, 0.5).passed
    rho0 = random_density(rng, 3)
    reference = dyn.evolve_density(spec, random_equivalent_ensemble(rho0, 3, 0), 0.5)
    for k in range(1, 5):
        e = random_equivalent_ensemble(rho0, 3 + k, k)
        assert trace_distance(dyn.evolve_density(spec, e, 0.5), reference) <= 1e-8


def test_unraveling_consistency_examples():
    rho = random_density(np.random.default_rng(1), 2)
    rep = aud.unraveling_consistency(np.zeros((2, 2)), [], rho, 1.0, 1e-2, 10, seed=0)
    assert rep.trace_distance <= 1e-10
    x = np.outer(X_PLUS, X_PLUS)
    rep = aud.unraveling_consistency(np.zeros((2, 2)), DEPHASE, x, 1.0, 1e-3, 1000, seed=5)
    assert rep.bound == pytest.approx(0.158, abs=1e-3)
    assert rep.passed


def test_demo_unitary_and_identical(zpm, xpm):
    h = random_hermitian(np.random.default_rng(3), 2)
    n = 3000
    tr = aud.demo_signaling_protocol(zpm, xpm, dyn.Unitary(h), 1.0, n, seed=1)
    assert tr.theoretical == pytest.approx(0.5, abs=1e-12)
    assert abs(tr.accuracy - 0.5) <= 3 * math.sqrt(0.25 / n)
    tr = aud.demo_signaling_protocol(xpm, xpm, dyn.NonlinearWeinberg(1.0), 1.0, n, seed=2)
    assert abs(tr.accuracy - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_demo_fig3_helstrom(zpm, xpm):
    n = 4000
    tr = aud.demo_signaling_protocol(zpm, xpm, dyn.FigureThreeTable(), 1.0, n, seed=7)
    assert tr.theoretical == pytest.approx(0.6767766952966369, abs=1e-12)
    assert abs(tr.accuracy - tr.theoretical) <= 3 * math.sqrt(0.25 / n)
    assert tr.trials.shape == (n, 4)
    # Bob's bit is a fair coin
    assert abs(tr.trials[:, 0].mean() - 0.5) <= 4 * math.sqrt(0.25 / n)


def test_demo_is_reproducible(zpm, xpm):
    a = aud.demo_signaling_protocol(zpm, xpm, dyn.FigureThreeTable(), 1.0, 200, seed=9)
    b = aud.demo_signaling_protocol(zpm, xpm, dyn.FigureThreeTable(), 1.0, 200, seed=9)
    np.testing.assert_array_equal(a.trials, b.trials)


def test_demo_rejects_inequivalent_pair():
    with pytest.raises(NotEquivalent):
        aud.demo_signaling_protocol(Ensemble([Z_PLUS]), Ensemble([X_PLUS]),
                                    dyn.FigureThreeTable(), 1.0, 10)


def test_mc_threshold():
    assert aud.mc_threshold(10_000) == pytest.approx(0.05)
    assert density_of(WITNESS) == pytest.approx(HALF_I)
