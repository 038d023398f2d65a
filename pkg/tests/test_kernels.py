import os
import subprocess
import sys

import numpy as np
import pytest

from sglab import _kernels


def _chain_case(periodic):
    rng = np.random.default_rng(7)
    x = rng.normal(size=64)
    v = rng.normal(size=64)
    return x, v, dict(steps=50, dt=0.01, coupling=30.0, amp=1.3, freq=0.9, periodic=periodic,
                      left=-0.4, right=2.0)


@pytest.mark.parametrize("periodic", [True, False])
def test_backends_agree_on_sine_chain(periodic):
    if "numba" not in _kernels.available_backends():
        pytest.skip("numba not installed")
    results = {}
    for name in ("numpy", "numba"):
        x, v, kw = _chain_case(periodic)
        prev = _kernels.use_backend(name)
        try:
            _kernels.sine_chain(x, v, **kw)
        finally:
            _kernels.use_backend(prev)
        results[name] = (x, v)
    np.testing.assert_allclose(results["numba"][0], results["numpy"][0], rtol=0, atol=1e-12)
    np.testing.assert_allclose(results["numba"][1], results["numpy"][1], rtol=0, atol=1e-11)


@pytest.mark.parametrize("periodic", [True, False])
def test_backends_agree_on_linear_chain(periodic):
    if "numba" not in _kernels.available_backends():
        pytest.skip("numba not installed")
    rng = np.random.default_rng(3)
    w = rng.uniform(-1, 1, 40)
    out = {}
    for name in ("numpy", "numba"):
        x = np.sin(np.linspace(0, 3, 40))
        v = np.zeros(40)
        prev = _kernels.use_backend(name)
        try:
            _kernels.linear_chain(x, v, 30, 0.02, 10.0, w, periodic)
            _kernels.linear_chain_step(x, v, 0.02, 10.0, w, 0.5 * w, periodic)
        finally:
            _kernels.use_backend(prev)
        out[name] = x
    np.testing.assert_allclose(out["numba"], out["numpy"], rtol=0, atol=1e-13)


def test_zero_steps_is_noop(kernel_backend):
    x = np.ones(10)
    v = np.ones(10)
    _kernels.sine_chain(x, v, 0, 0.1, 1.0, 1.0, 1.0, True)
    assert np.all(x == 1.0) and np.all(v == 1.0)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _kernels.use_backend("fortran")


@pytest.mark.parametrize("flag, expected", [("numpy", "numpy"), ("numba", "numba")])
def test_env_flag_selects_backend(flag, expected):
    if expected == "numba" and not _kernels.HAS_NUMBA:
        pytest.skip("numba not installed")
    env = dict(os.environ, SGLAB_BACKEND=flag)
    out = subprocess.run([sys.executable, "-c", "from sglab import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
