import os
import subprocess
import sys

import numpy as np
import pytest

from polygevrey import _kernels_py, kernels

compiled = pytest.importorskip("polygevrey._kernels")

rng = np.random.default_rng(3)


def rel_dev(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


def test_horner_agrees():
    c = rng.normal(size=(3, 40)) + 1j * rng.normal(size=(3, 40))
    z = rng.normal(size=500) + 1j * rng.normal(size=500)
    assert rel_dev(compiled.horner_eval(c, z), _kernels_py.horner_eval(c, z)) < 1e-13


def test_horner_against_monomials():
    c = rng.normal(size=(2, 6)) + 0j
    z = np.array([0.3 + 0.4j, -1.1j])
    ref = sum(c[p, q] * z ** q * np.conj(z) ** p for p in range(2) for q in range(6))
    assert np.allclose(_kernels_py.horner_eval(c, z), ref, rtol=1e-14)


def test_dft_agrees_and_matches_fft():
    v = rng.normal(size=64) + 1j * rng.normal(size=64)
    modes = np.arange(-5, 20)
    a, b = compiled.dft_direct(v, modes), _kernels_py.dft_direct(v, modes)
    assert rel_dev(a, b) < 1e-13
    ref = np.fft.fft(v)[modes % 64] / 64
    assert rel_dev(a, ref) < 1e-13


def test_pompeiu_and_kernel_sums_agree():
    z = rng.uniform(-0.5, 0.5, 5) + 1j * rng.uniform(-0.5, 0.5, 5)
    zeta = rng.uniform(-1, 1, 300) + 1j * rng.uniform(-1, 1, 300)
    w = rng.normal(size=300) + 0j
    for order in (1, 2, 4):
        assert rel_dev(compiled.pompeiu_sum(z, zeta, w, order),
                       _kernels_py.pompeiu_sum(z, zeta, w, order)) < 1e-12
    assert rel_dev(compiled.kernel_sum(z, zeta, w, 2, 3),
                   _kernels_py.kernel_sum(z, zeta, w, 2, 3)) < 1e-12


def test_read_only_inputs_accepted():
    c = rng.normal(size=(2, 5)) + 0j
    z = rng.normal(size=7) + 0j
    c.flags.writeable = False
    z.flags.writeable = False
    assert np.allclose(compiled.horner_eval(c, z), _kernels_py.horner_eval(c, z))


def test_compiled_backend_selected():
    assert kernels.BACKEND == "cython"


def test_pure_env_forces_numpy():
    env = dict(os.environ, POLYGEVREY_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import polygevrey; print(polygevrey.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
