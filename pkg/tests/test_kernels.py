import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from gkpbreed import kernels

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")

coeff_arrays = hnp.arrays(
    np.complex128,
    st.integers(1, 30),
    elements=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
)


@needs_compiled
@given(coeff_arrays, st.floats(0.1, 20), st.floats(-5, 5), st.floats(-4, 4))
@settings(max_examples=60, deadline=None)
def test_gausspoly_backends_agree(coeffs, a, b, mu):
    q = np.linspace(-8, 8, 257)
    outs = []
    for mod in (BACKENDS["python"], BACKENDS["cython"]):
        out = np.zeros(q.shape, dtype=np.complex128)
        mod.gausspoly_eval(coeffs, a, b, mu, q, out)
        outs.append(out)
    scale = max(1.0, float(np.max(np.abs(outs[0]))))
    assert np.max(np.abs(outs[0] - outs[1])) <= 1e-12 * scale


@needs_compiled
@given(st.integers(1, 9), st.integers(2, 60), st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_zak_backends_agree(S, N, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(S, N)) + 1j * rng.normal(size=(S, N))
    w = rng.uniform(0, 1, size=N)
    K = rng.normal(size=2 * S - 1)
    K = 0.5 * (K + K[::-1])  # the window kernel is even in the shift difference
    a = BACKENDS["python"].zak_window_mass(v, w, K)
    b = BACKENDS["cython"].zak_window_mass(np.ascontiguousarray(v), w, K)
    assert abs(a - b) <= 1e-11 * max(1.0, abs(a))


def test_gausspoly_matches_direct_formula():
    coeffs = np.array([1.0, -0.5j, 0.25], dtype=np.complex128)
    q = np.linspace(-3, 3, 11)
    out = np.zeros(q.shape, dtype=np.complex128)
    kernels.gausspoly_eval(coeffs, 1.3, 0.7, 0.2, q, out)
    ref = (1 - 0.5j * q + 0.25 * q**2) * np.exp(-0.65 * (q - 0.2) ** 2 + 0.7j * q)
    np.testing.assert_allclose(out, ref, rtol=1e-13, atol=1e-15)


def test_pure_python_switch():
    env = dict(os.environ, GKPBREED_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from gkpbreed import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
