import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nosig import purification as pur
from nosig.ensemble import Ensemble, density_of, haar_unitary, random_equivalent_ensemble
from nosig.errors import BadBasis, DuplicateLabels, NotEquivalent
from nosig.hilbert import SIGMA_X, SIGMA_Z, SQRT_HALF, X_MINUS, X_PLUS, Z_MINUS, Z_PLUS, maxabs

from conftest import phase_align, random_density

seeds = st.integers(0, 2**32 - 1)
Z_BASIS = np.array([Z_PLUS, Z_MINUS])
X_BASIS = np.array([X_PLUS, X_MINUS])


def aligned(states):
    return np.array([phase_align(s) for s in states])


def same_up_to_phases(a, b, tol):
    return a.shape == b.shape and maxabs(aligned(a) - aligned(b)) <= tol


@st.composite
def equivalent_pair(draw, max_dim=4, max_size=6):
    seed = draw(seeds)
    dim = draw(st.integers(1, max_dim))
    rank = draw(st.integers(1, dim))
    n1 = draw(st.integers(rank, max(rank, max_size)))
    n2 = draw(st.integers(rank, max(rank, max_size)))
    rho = random_density(np.random.default_rng(seed), dim, rank)
    e1 = random_equivalent_ensemble(rho, n1, [seed, 1])
    e2 = random_equivalent_ensemble(rho, n2, [seed, 2])
    return rho, e1, e2


def test_purify_examples(zpm, xpm):
    p = pur.purify(xpm)
    assert maxabs(p.alpha @ p.alpha.conj().T - np.eye(2)) <= 1e-12
    assert pur.expansion_residual(p, xpm, p.alpha) <= 1e-12
    np.testing.assert_allclose(p.reduced_density(), 0.5 * np.eye(2), atol=1e-15)

    prod = pur.purify(Ensemble([Z_PLUS]))
    np.testing.assert_allclose(prod.v, [1, 0])
    assert prod.bob_dim == 1

    p = pur.purify(zpm)
    np.testing.assert_allclose(p.alpha, np.eye(2), atol=1e-15)


def test_joint_purification_fig4(zpm, xpm):
    p = pur.joint_purification(zpm, xpm)
    np.testing.assert_allclose(p.alpha, Z_BASIS, atol=1e-15)
    assert same_up_to_phases(p.beta, X_BASIS, 1e-15)
    assert pur.expansion_residual(p, zpm, p.alpha) <= 1e-15
    assert pur.expansion_residual(p, xpm, p.beta) <= 1e-15
    bell = SQRT_HALF * (np.kron(Z_PLUS, Z_PLUS) + np.kron(Z_MINUS, Z_MINUS))
    np.testing.assert_allclose(p.v, bell, atol=1e-15)
    bell_x = SQRT_HALF * (np.kron(X_PLUS, X_PLUS) + np.kron(X_MINUS, X_MINUS))
    np.testing.assert_allclose(p.v, bell_x, atol=1e-15)


def test_joint_purification_identical_ensembles(xpm):
    p = pur.joint_purification(xpm, xpm)
    np.testing.assert_array_equal(p.alpha, p.beta)


def test_joint_purification_with_five_state_partner(zpm):
    e5 = random_equivalent_ensemble(0.5 * np.eye(2), 5, 11)
    p = pur.joint_purification(zpm, e5)
    assert p.bob_dim == 5
    assert pur.expansion_residual(p, zpm, p.alpha) <= 1e-9
    assert pur.expansion_residual(p, e5, p.beta) <= 1e-9


def test_joint_purification_rejects_inequivalent():
    with pytest.raises(NotEquivalent) as info:
        pur.joint_purification(Ensemble([Z_PLUS]), Ensemble([X_PLUS]))
    assert info.value.distance == pytest.approx(SQRT_HALF, abs=1e-12)


def test_remote_prepare_fig4(zpm, xpm):
    p = pur.joint_purification(zpm, xpm)
    vx = SQRT_HALF * (np.kron(X_PLUS, Z_PLUS) + np.kron(X_MINUS, Z_MINUS))
    fig4 = pur.Purification(vx, 2, 2, Z_BASIS)
    got = pur.remote_prepare(fig4, Z_BASIS)
    assert same_up_to_phases(got.states, xpm.states, 1e-15)
    got = pur.remote_prepare(fig4, X_BASIS)
    assert same_up_to_phases(got.states, zpm.states, 1e-15)
    assert same_up_to_phases(pur.remote_prepare(p, p.alpha).states, zpm.states, 1e-8)
    assert same_up_to_phases(pur.remote_prepare(p, p.beta).states, xpm.states, 1e-8)


def test_remote_prepare_product_state():
    p = pur.purify(Ensemble([Z_PLUS]))
    padded = pur.Purification(np.kron(Z_PLUS, [1, 0]), 2, 2, np.eye(2))
    basis = haar_unitary(2, np.random.default_rng(5))
    e = pur.remote_prepare(padded, basis.T)
    np.testing.assert_allclose(e.weights, np.abs(basis[0]) ** 2, atol=1e-14)
    np.testing.assert_allclose(np.abs(e.unit_states()[:, 1]), 0, atol=1e-14)
    assert len(pur.remote_prepare(p, [[1]])) == 1


def test_remote_prepare_rejects_bad_basis(zpm, xpm):
    p = pur.joint_purification(zpm, xpm)
    with pytest.raises(BadBasis):
        pur.remote_prepare(p, [[1, 1], [0, 1]])
    with pytest.raises(BadBasis):
        pur.remote_prepare(p, [[1, 0]])


def test_bob_observable_examples():
    np.testing.assert_allclose(pur.bob_observable(Z_BASIS, [1, -1]).matrix, SIGMA_Z, atol=1e-15)
    np.testing.assert_allclose(pur.bob_observable(X_BASIS, [1, -1]).matrix, SIGMA_X, atol=1e-15)
    np.testing.assert_allclose(pur.bob_observable(np.eye(3)).matrix, np.diag([1, 2, 3]))
    with pytest.raises(DuplicateLabels):
        pur.bob_observable(Z_BASIS, [1, 1])


@settings(max_examples=100, deadline=None)
@given(equivalent_pair())
def test_joint_purification_reconstructs_both_expansions(case):
    rho, e1, e2 = case
    p = pur.joint_purification(e1, e2)
    assert abs(np.vdot(p.v, p.v) - 1) <= 1e-10
    assert pur.expansion_residual(p, e1, p.alpha) <= 1e-9
    assert pur.expansion_residual(p, e2, p.beta) <= 1e-9
    assert maxabs(p.reduced_density() - rho) <= 1e-9
    k = p.bob_dim
    assert maxabs(p.alpha @ p.alpha.conj().T - np.eye(k)) <= 1e-9
    assert maxabs(p.beta @ p.beta.conj().T - np.eye(k)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(equivalent_pair())
def test_remote_prepare_recovers_each_ensemble(case):
    _, e1, e2 = case
    p = pur.joint_purification(e1, e2)
    assert same_up_to_phases(pur.remote_prepare(p, p.alpha).states, e1.states, 1e-8)
    assert same_up_to_phases(pur.remote_prepare(p, p.beta).states, e2.states, 1e-8)


@settings(max_examples=60, deadline=None)
@given(equivalent_pair(), seeds)
def test_any_bob_basis_leaves_alice_density_unchanged(case, seed):
    rho, e1, e2 = case
    p = pur.joint_purification(e1, e2)
    basis = haar_unitary(p.bob_dim, np.random.default_rng(seed)).T
    e = pur.remote_prepare(p, basis)
    assert e.weights.sum() == pytest.approx(1.0, abs=1e-10)
    assert maxabs(density_of(e) - rho) <= 1e-9
