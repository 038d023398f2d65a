"""
Stencil kernels for the two explicit time integrators in the package.

Every kernel has two implementations with identical signatures: a numba
``@njit`` loop and a vectorised numpy version.  The active backend is picked
once at import time from the ``SGLAB_BACKEND`` environment variable
(``numba`` or ``numpy``); if unset, numba is used when it imports cleanly.
Call :func:`use_backend` to switch at runtime (tests and the benchmark do).

Both integrators solve a chain of the form

    x_i'' = K (x_{i+1} - 2 x_i + x_{i-1}) - F_i(x_i)

with velocity Verlet.  ``periodic`` wraps the chain; otherwise the chain is
closed by two fixed ghost values ``left`` and ``right``.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False


def _requested_backend() -> str:
    name = os.environ.get("SGLAB_BACKEND", "").strip().lower()
    if name in ("numpy", "python", "0", "off"):
        return "numpy"
    if name in ("", "numba", "1", "on"):
        return "numba" if HAS_NUMBA else "numpy"
    raise ValueError(f"SGLAB_BACKEND must be 'numba' or 'numpy', got {name!r}")


# --------------------------------------------------------------------------
# numpy path
# --------------------------------------------------------------------------

def _laplacian_np(x, periodic, left, right):
    out = np.empty_like(x)
    out[1:-1] = x[2:] - 2.0 * x[1:-1] + x[:-2]
    if periodic:
        out[0] = x[1] - 2.0 * x[0] + x[-1]
        out[-1] = x[0] - 2.0 * x[-1] + x[-2]
    else:
        out[0] = x[1] - 2.0 * x[0] + left
        out[-1] = right - 2.0 * x[-1] + x[-2]
    return out


def _sine_chain_np(x, v, steps, dt, coupling, amp, freq, periodic, left, right):
    half = 0.5 * dt
    acc = coupling * _laplacian_np(x, periodic, left, right) - amp * np.sin(freq * x)
    for _ in range(steps):
        v += half * acc
        x += dt * v
        acc = coupling * _laplacian_np(x, periodic, left, right) - amp * np.sin(freq * x)
        v += half * acc


def _linear_chain_np(x, v, dt, coupling, weight_now, weight_next, periodic):
    half = 0.5 * dt
    v += half * (coupling * _laplacian_np(x, periodic, 0.0, 0.0) - weight_now * x)
    x += dt * v
    v += half * (coupling * _laplacian_np(x, periodic, 0.0, 0.0) - weight_next * x)


def _linear_chain_frozen_np(x, v, steps, dt, coupling, weight, periodic):
    for _ in range(steps):
        _linear_chain_np(x, v, dt, coupling, weight, weight, periodic)


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _sine_acc_nb(x, acc, coupling, amp, freq, periodic, left, right):
        n = x.shape[0]
        for i in range(n):
            if i == 0:
                lo = x[n - 1] if periodic else left
            else:
                lo = x[i - 1]
            if i == n - 1:
                hi = x[0] if periodic else right
            else:
                hi = x[i + 1]
            acc[i] = coupling * (hi - 2.0 * x[i] + lo) - amp * np.sin(freq * x[i])

    @njit(cache=True)
    def _sine_chain_nb(x, v, steps, dt, coupling, amp, freq, periodic, left, right):
        n = x.shape[0]
        half = 0.5 * dt
        acc = np.empty(n)
        _sine_acc_nb(x, acc, coupling, amp, freq, periodic, left, right)
        for _ in range(steps):
            for i in range(n):
                v[i] += half * acc[i]
                x[i] += dt * v[i]
            _sine_acc_nb(x, acc, coupling, amp, freq, periodic, left, right)
            for i in range(n):
                v[i] += half * acc[i]

    @njit(cache=True)
    def _linear_acc_nb(x, acc, coupling, weight, periodic):
        n = x.shape[0]
        for i in range(n):
            if i == 0:
                lo = x[n - 1] if periodic else 0.0
            else:
                lo = x[i - 1]
            if i == n - 1:
                hi = x[0] if periodic else 0.0
            else:
                hi = x[i + 1]
            acc[i] = coupling * (hi - 2.0 * x[i] + lo) - weight[i] * x[i]

    @njit(cache=True)
    def _linear_chain_nb(x, v, dt, coupling, weight_now, weight_next, periodic):
        n = x.shape[0]
        half = 0.5 * dt
        acc = np.empty(n)
        _linear_acc_nb(x, acc, coupling, weight_now, periodic)
        for i in range(n):
            v[i] += half * acc[i]
            x[i] += dt * v[i]
        _linear_acc_nb(x, acc, coupling, weight_next, periodic)
        for i in range(n):
            v[i] += half * acc[i]

    @njit(cache=True)
    def _linear_chain_frozen_nb(x, v, steps, dt, coupling, weight, periodic):
        n = x.shape[0]
        half = 0.5 * dt
        acc = np.empty(n)
        _linear_acc_nb(x, acc, coupling, weight, periodic)
        for _ in range(steps):
            for i in range(n):
                v[i] += half * acc[i]
                x[i] += dt * v[i]
            _linear_acc_nb(x, acc, coupling, weight, periodic)
            for i in range(n):
                v[i] += half * acc[i]


_IMPLS = {
    "numpy": {
        "sine_chain": _sine_chain_np,
        "linear_step": _linear_chain_np,
        "linear_frozen": _linear_chain_frozen_np,
    },
}
if HAS_NUMBA:
    _IMPLS["numba"] = {
        "sine_chain": _sine_chain_nb,
        "linear_step": _linear_chain_nb,
        "linear_frozen": _linear_chain_frozen_nb,
    }

_active = _requested_backend()


def backend() -> str:
    """Name of the active backend."""
    return _active


def available_backends() -> tuple[str, ...]:
    return tuple(_IMPLS)


def use_backend(name: str) -> str:
    """Switch backend; returns the previous one so callers can restore it."""
    global _active
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} not available (have {sorted(_IMPLS)})")
    previous, _active = _active, name
    return previous


def sine_chain(x, v, steps, dt, coupling, amp, freq, periodic, left=0.0, right=0.0):
    """Advance ``steps`` velocity-Verlet steps of the sine chain, in place.

    The restoring force is ``amp * sin(freq * x_i)``.
    """
    if steps <= 0:
        return
    _IMPLS[_active]["sine_chain"](
        x, v, int(steps), float(dt), float(coupling), float(amp), float(freq),
        bool(periodic), float(left), float(right),
    )


def linear_chain(x, v, steps, dt, coupling, weight, periodic):
    """Velocity Verlet for ``x'' = K lap(x) - weight * x`` with a frozen weight."""
    if steps <= 0:
        return
    _IMPLS[_active]["linear_frozen"](
        x, v, int(steps), float(dt), float(coupling),
        np.ascontiguousarray(weight, dtype=np.float64), bool(periodic),
    )


def linear_chain_step(x, v, dt, coupling, weight_now, weight_next, periodic):
    """One step with a weight that changes between the two half kicks."""
    _IMPLS[_active]["linear_step"](
        x, v, float(dt), float(coupling),
        np.ascontiguousarray(weight_now, dtype=np.float64),
        np.ascontiguousarray(weight_next, dtype=np.float64), bool(periodic),
    )
