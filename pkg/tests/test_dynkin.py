import math

import numpy as np
import pytest

from polygevrey import NAnalyticPoly, dbar_pow, dz_pow
from polygevrey.decompose import CoefficientTable
from polygevrey.errors import DomainError, GridTooCoarse, InsufficientData, SingularPoint
from polygevrey.expansion import build_blocks, certify_norms, synthesize
from polygevrey.dynkin import (
    BumpFunction,
    CutoffSpec,
    Extension,
    ExtensionField,
    Grid2D,
    build_extension,
    bump_corpus,
    converse_membership,
    dbar_decay_fit,
    kernel_derivative_coeff,
    pompeiu_derivatives,
    pompeiu_reconstruct,
    psi_kernel_bound,
    richardson_derivative,
    transition_jet,
    vN_kernel,
)
from polygevrey.sampling import polar_grid

from conftest import gevrey_table

EPS = np.finfo(float).eps


def wirtinger(f, z, h=1e-4, bar=True):
    dx = (f(z + h) - f(z - h)) / (2 * h)
    dy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return (dx + 1j * dy) / 2 if bar else (dx - 1j * dy) / 2


@pytest.fixture(scope="module")
def small_exp():
    def get(N, k=1, q_max=128):
        return certify_norms(build_blocks(gevrey_table(k, N, q_max), k))
    return get


def test_kernel_values():
    assert vN_kernel(1.0, 1) == pytest.approx(1 / math.pi)
    assert vN_kernel(1j, 2) == pytest.approx(-1 / math.pi)
    with pytest.raises(SingularPoint):
        vN_kernel(0.0, 1)


@pytest.mark.parametrize("N", [1, 2, 3, 6])
def test_kernel_modulus_identity(N):
    rng = np.random.default_rng(N)
    z = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    ref = np.abs(z) ** (N - 2) / (math.pi * math.factorial(N - 1))
    assert np.max(np.abs(np.abs(vN_kernel(z, N)) / ref - 1)) <= 4 * EPS * N


def test_kernel_large_order_log_path():
    z = 0.7 + 0.2j
    direct = np.conj(z) ** 24 / (math.pi * math.factorial(24) * z)
    assert vN_kernel(z, 25) == pytest.approx(direct, rel=1e-12)


@pytest.mark.parametrize("N,l,m", [(1, 1, 0), (2, 0, 1), (3, 2, 1), (2, 1, 1)])
def test_kernel_derivative_coeff_against_fd(N, l, m):
    z = 0.6 - 0.4j
    f = lambda w: vN_kernel(w, N)
    for _ in range(m):
        f = (lambda g: lambda w: wirtinger(g, w, 1e-3))(f)
    for _ in range(l):
        f = (lambda g: lambda w: wirtinger(g, w, 1e-3, bar=False))(f)
    ref = kernel_derivative_coeff(N, l, m) * z ** (-l - 1) * np.conj(z) ** (N - 1 - m)
    assert f(z) == pytest.approx(ref, rel=1e-4)
    assert kernel_derivative_coeff(2, 0, 2) == 0.0


def test_transition_jet_against_richardson():
    t = np.array([0.2, 0.5, 0.8])
    jet = transition_jet(t, 3)
    S = lambda x: transition_jet(np.atleast_1d(x), 0)[0]
    for order in (1, 2, 3):
        ref = np.array([richardson_derivative(S, x, order, 1e-3) for x in t]).ravel()
        assert np.allclose(jet[order], ref, rtol=1e-5, atol=1e-6)
    assert np.allclose(transition_jet(np.array([0.0, 1.0]), 0)[0], [0.0, 1.0])


def test_cutoff_plateau_and_support():
    c = CutoffSpec(0.5, 0.9)
    assert np.all(c(np.array([0, 0.3, 0.5 + 0j])) == 1.0)
    assert np.all(c(np.array([0.9, 1.5j])) == 0.0)
    assert 0 < c(0.7) < 1
    with pytest.raises(DomainError):
        CutoffSpec(0.9, 0.5)


def test_cutoff_dbar_against_fd():
    c = CutoffSpec(0.5, 0.9)
    z = np.array([0.6 + 0.2j, -0.5 - 0.4j])
    jets = c.dbar(z, 2)
    f = lambda w: c(w)
    assert np.allclose(jets[1], wirtinger(f, z, 1e-5), rtol=1e-6, atol=1e-8)
    assert np.allclose(jets[2], wirtinger(lambda w: wirtinger(f, w, 1e-4), z, 1e-4), rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("N", [1, 2])
def test_bump_dbar_against_fd(N):
    bf = bump_corpus()[1]
    z = np.array([0.7 + 0.1j])
    f = lambda w: bf(w)
    for _ in range(N):
        f = (lambda g: lambda w: wirtinger(g, w, 1e-3))(f)
    assert np.allclose(bf.dbarN(z, N), f(z), rtol=1e-4)


def test_pompeiu_zero_function():
    g = Grid2D(1.0, 128)
    est, ind = pompeiu_reconstruct(None, lambda z: np.zeros(np.shape(z), complex), 0.2j, g, 2)
    assert est == 0 and ind == 0


def test_pompeiu_bump_conj_z_at_origin():
    bf = BumpFunction(NAnalyticPoly.from_coefficients({(1, 0): 1}, 2))
    inds = []
    for res in (128, 256, 512):
        est, ind = pompeiu_reconstruct(bf, lambda z: bf.dbarN(z, 1), 0.0, Grid2D(1.0, res), 1)
        inds.append(ind)
    assert abs(est - bf(0.0)) <= 5e-3
    assert inds[-1] < 1e-3


def test_pompeiu_too_coarse_raises():
    bf = bump_corpus()[1]
    with pytest.raises(GridTooCoarse) as exc:
        pompeiu_reconstruct(bf, lambda z: bf.dbarN(z, 3), 0.3 + 0.1j, Grid2D(1.0, 128), 3, tol=1e-4)
    assert exc.value.details["indicator"] > 1e-3


def test_grid_basics():
    g = Grid2D(2.0, 128)
    assert g.h == pytest.approx(1 / 32)
    assert g.nodes().shape == (128, 128)
    assert g.coarsen().resolution == 64
    with pytest.raises(DomainError):
        Grid2D(1.0, 32)


def test_extension_agrees_with_blocks(small_exp):
    exp = small_exp(2)
    fld = build_extension(exp, 0.5, Grid2D(1.6, 128))
    z = fld.grid.nodes()
    inside = np.abs(z) <= 1
    _, tail = synthesize(exp, 0.0, len(exp.blocks) - 1)
    assert np.abs(fld.values[inside] - exp.partial_sum(z[inside])).max() <= tail + 1e-9
    assert np.abs(fld.dbarN[np.abs(z) <= 1 - 2 / 128]).max() < 1e-10
    outside = np.abs(z) >= 1.5
    assert np.all(fld.values[outside] == 0) and np.all(fld.dbarN[outside] == 0)


def test_extension_dbar_against_fd(small_exp):
    ext = Extension(small_exp(1), 0.5)
    z = np.array([1.1 * np.exp(0.4j)])
    fd = wirtinger(ext.value, z, 1e-6)
    assert np.allclose(ext.dbarN(z), fd, rtol=1e-5)


def test_extension_domain(small_exp):
    with pytest.raises(DomainError):
        Extension(small_exp(1), 1.5)
    with pytest.raises(DomainError):
        build_extension(small_exp(1), 0.5, Grid2D(1.2, 64))


def test_field_round_trip(tmp_path, small_exp):
    fld = build_extension(small_exp(1), 0.5, Grid2D(1.6, 64))
    fld.write(tmp_path / "f")
    back = ExtensionField.read(tmp_path / "f")
    assert np.array_equal(back.values, fld.values)
    assert np.array_equal(back.dbarN, fld.dbarN)
    assert back.header() == fld.header()


@pytest.mark.parametrize("N", [1, 2])
def test_decay_fit_members(small_exp, N):
    fld = build_extension(small_exp(N), 0.5, Grid2D(1.6, 128))
    fit = dbar_decay_fit(fld, 1)
    assert fit.C2 > 0 and fit.residual <= 0.5


def test_decay_fit_finite_table():
    exp = certify_norms(build_blocks(CoefficientTable([[1.0, 0, 0, 0]]), 1))
    fld = build_extension(exp, 0.5, Grid2D(1.6, 64))
    with pytest.raises(InsufficientData):
        dbar_decay_fit(fld, 1)


def test_decay_rate_falls_with_narrower_support(small_exp):
    # narrower shells sit closer to the circle, where (|z|-1)^-k is larger, so
    # the fitted rate per unit of (|z|-1)^-k drops with A
    exp = small_exp(1)
    c2 = [dbar_decay_fit(build_extension(exp, A, Grid2D(1.6, 128)), 1).C2 for A in (0.5, 0.25)]
    assert c2[1] < c2[0]


def test_psi_kernel_bound():
    g = psi_kernel_bound(0, 1.0, 1, 0.5)
    assert math.isfinite(g["sup"]) and g["holds"]
    assert all(psi_kernel_bound(l, 1.0, 1, 0.5)["holds"] for l in range(11))
    assert psi_kernel_bound(2, 50.0, 1, 0.5)["sup"] < 1e-10


def test_psi_kernel_log_growth():
    sups = [math.log(psi_kernel_bound(l, 1.0, 1, 0.5)["sup"]) for l in range(1, 11)]
    D2 = psi_kernel_bound(10, 1.0, 1, 0.5)["D2"]
    for l, s in zip(range(1, 11), sups):
        assert s <= 2 * l * math.log(l) + (l + 1) * math.log(D2) + 1e-9


def test_pompeiu_consistency_on_probes(small_exp):
    ext = Extension(small_exp(2), 0.5)
    probes = polar_grid(0.2, 0.8, 2, 8)
    vals = pompeiu_derivatives(ext, probes, 0, gl_order=24)[(0, 0)]
    assert probes.size == 16
    assert np.abs(vals - ext.value(probes)).max() <= 5e-3


def test_polyanalytic_polynomial_derivatives():
    # a block expansion of a polynomial: derivatives at interior points equal dz_pow/dbar_pow
    arr = np.array([[1, 0.5, -0.25j, 0.1], [0.3, 0, 0.2, 0]], dtype=complex)
    exp = certify_norms(build_blocks(CoefficientTable(arr), 1))
    ext = Extension(exp, 0.5)
    P = NAnalyticPoly.from_array(arr)
    z = np.array([0.0, 0.3 - 0.2j])
    der = pompeiu_derivatives(ext, z, 3, gl_order=64)
    for (l, m), v in der.items():
        ref = dz_pow(dbar_pow(P, m), l)(z)
        assert np.allclose(v, ref, atol=1e-8)


@pytest.mark.parametrize("N", [1, 2])
def test_converse_membership_series_derivatives(small_exp, N):
    exp = small_exp(N)
    fld = build_extension(exp, 0.5, Grid2D(1.6, 128))
    fit = dbar_decay_fit(fld, 1)
    cm = converse_membership(fld.extension, fit.C1, fit.C2, max_order=4)
    assert cm.verdict and all(g["holds"] for g in cm.gate)
    table = exp.to_table().coeffs
    for (l, m), v in cm.derivatives.items():
        ref = math.factorial(l) * math.factorial(m) * table[m, l] if m < N else 0.0
        assert abs(v[0] - ref) <= 1e-4


def test_converse_membership_needs_positive_rate(small_exp):
    with pytest.raises(DomainError):
        converse_membership(Extension(small_exp(1), 0.5), 1.0, 0.0)
