"""Hot loops (RK4 Lindblad stepping, quantum-jump trajectories).

The compiled Cython module is used when it was built and imports cleanly;
otherwise the numpy fallback is used. Set ``NOSIG_PURE_PYTHON=1`` to force the
fallback. ``NOSIG_THREADS`` caps the number of OpenMP threads of the compiled
backend; results do not depend on it.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("NOSIG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        _impl = _ckernels
        BACKEND = "cython"


def num_threads() -> int:
    cap = os.environ.get("NOSIG_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def rk4_lindblad(rhos, g, ops, dt, n_full, dt_last):
    return _impl.rk4_lindblad(rhos, g, ops, dt, n_full, dt_last, num_threads())


def jump_trajectories(psi0, props, ops, dt, dt_last, n_full, uniforms):
    return _impl.jump_trajectories(psi0, props, ops, dt, dt_last, n_full, uniforms, num_threads())


__all__ = ["BACKEND", "num_threads", "rk4_lindblad", "jump_trajectories"]
