"""Pure numpy implementations of the hot loops, vectorised over a batch."""
import numpy as np


def _rhs(rho, g, ops):
    # G rho + rho G^dagger + sum_k L_k rho L_k^dagger, with G = -iH - 1/2 sum L^dagger L
    out = g @ rho
    out += np.conj(np.swapaxes(out, -1, -2))
    for op in ops:
        out += op @ rho @ np.conj(op.T)
    return out


def _rk4_step(rho, g, ops, h):
    k1 = _rhs(rho, g, ops)
    k2 = _rhs(rho + 0.5 * h * k1, g, ops)
    k3 = _rhs(rho + 0.5 * h * k2, g, ops)
    k4 = _rhs(rho + h * k3, g, ops)
    rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def rk4_lindblad(rhos, g, ops, dt, n_full, dt_last, num_threads=1):
    """Propagate a stack of density matrices ``rhos`` (B, d, d) in place semantics.

    Takes ``n_full`` steps of ``dt`` followed by one step of ``dt_last`` when
    ``dt_last > 0``. Returns the propagated stack.
    """
    rho = np.array(rhos, dtype=complex)
    g = np.asarray(g, dtype=complex)
    ops = np.asarray(ops, dtype=complex)
    for _ in range(n_full):
        rho = _rk4_step(rho, g, ops, dt)
    if dt_last > 0.0:
        rho = _rk4_step(rho, g, ops, dt_last)
    return rho


def jump_trajectories(psi0, props, ops, dt, dt_last, n_full, uniforms, num_threads=1):
    """Quantum-jump trajectories for a batch sharing one initial state.

    ``props[0]`` / ``props[1]`` are the no-jump propagators for ``dt`` and
    ``dt_last``; ``uniforms`` has shape (B, n_steps, 2). Returns the final
    unit states (B, d) and the largest single-channel jump probability seen.
    """
    uniforms = np.asarray(uniforms, dtype=float)
    batch, n_steps, _ = uniforms.shape
    ops = np.asarray(ops, dtype=complex)
    n_ops = ops.shape[0]
    psi = np.tile(np.asarray(psi0, dtype=complex), (batch, 1))
    max_p = 0.0
    rows = np.arange(batch)
    for s in range(n_steps):
        last = s >= n_full
        h = dt_last if last else dt
        u = props[1] if last else props[0]
        evolved = psi @ u.T
        evolved /= np.linalg.norm(evolved, axis=1)[:, None]
        if n_ops == 0:
            psi = evolved
            continue
        lk = np.einsum("kab,nb->nka", ops, psi)
        pk = h * np.sum(lk.real ** 2 + lk.imag ** 2, axis=2)
        max_p = max(max_p, float(pk.max()))
        cum = np.cumsum(pk, axis=1)
        total = cum[:, -1]
        jump = uniforms[:, s, 0] < total
        if np.any(jump):
            r = uniforms[:, s, 1] * total
            k = np.minimum(np.sum(cum <= r[:, None], axis=1), n_ops - 1)
            jumped = lk[rows, k]
            nrm = np.linalg.norm(jumped, axis=1)
            jumped = jumped / np.where(nrm > 0, nrm, 1.0)[:, None]
            psi = np.where(jump[:, None], jumped, evolved)
        else:
            psi = evolved
    return psi, max_p
