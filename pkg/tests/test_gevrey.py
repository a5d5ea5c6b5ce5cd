import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polygevrey.decompose import CoefficientTable
from polygevrey.errors import InsufficientData, NegativeBeta
from polygevrey.gevrey import fit_decay, lemma_infimum, lemma_infimum_candidates, membership_report

p = np.arange(513)


def exhaustive_infimum(pp, P0, k):
    x = (1 + math.e * P0) / pp
    cands, _ = lemma_infimum_candidates(pp, P0, k)
    top = max(50, 2 * max(cands, default=1) + 2)
    n = np.arange(1, top + 1, dtype=float)
    return float(np.exp(((1 + 1 / k) * n * np.log(n) + n * math.log(x)).min()))


def test_recovers_generating_parameters():
    m = fit_decay(np.exp(-np.sqrt(p)), 1)
    assert m.accepted and m.reason == "ok"
    assert m.alpha == pytest.approx(1.0, rel=1e-10)
    assert m.beta == pytest.approx(1.0, rel=1e-10)
    assert abs(m.residual) < 1e-10
    assert m.fit_range == (8, 512)


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_beta_within_two_percent(k, c):
    m = fit_decay(np.exp(-c * p ** (k / (k + 1))), k)
    assert m.beta == pytest.approx(c, rel=0.02)


def test_geometric_accepted():
    m = fit_decay(2.0 ** -p, 1)
    assert m.accepted


def test_polynomial_decay_rejected():
    m = fit_decay(1 / (p + 1.0), 1)
    assert not m.accepted
    assert m.reason in ("tail flattens", "residual above tolerance")


def test_growing_sequence_negative_beta():
    with pytest.raises(NegativeBeta) as exc:
        fit_decay(np.exp(0.1 * np.sqrt(p)), 1)
    assert exc.value.details["beta"] < 0
    assert exc.value.code == "NEGATIVE_BETA"


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        fit_decay([1, 0.5, 0.25], 1)
    with pytest.raises(InsufficientData):
        fit_decay(np.r_[np.ones(8), np.zeros(50)], 1)


def test_zeros_skipped():
    a = np.exp(-np.sqrt(p))
    a[::3] = 0
    assert fit_decay(a, 1).beta == pytest.approx(1.0, rel=1e-10)


@given(st.floats(1e-6, 1e6), st.sampled_from([0.5, 1.0, 2.0]), st.floats(0.2, 3.0))
def test_scaling_moves_alpha_only(lam, k, c):
    a = np.exp(-c * p ** (k / (k + 1))) * (1 + 0.3 * np.cos(p))
    m1, m2 = fit_decay(a, k), fit_decay(lam * a, k)
    assert m2.beta == pytest.approx(m1.beta, rel=1e-12, abs=1e-12)
    assert m2.alpha == pytest.approx(lam * m1.alpha, rel=1e-10)


def test_lemma_infimum_example():
    cands, _ = lemma_infimum_candidates(100, 1, 1)
    assert cands == [1, 2]
    assert lemma_infimum(100, 1, 1) == pytest.approx(0.02212, abs=5e-6)
    assert lemma_infimum(100, 1, 1) == pytest.approx(16 * ((1 + math.e) / 100) ** 2, rel=1e-14)


@given(st.integers(1, 10_000), st.sampled_from([1, 2, 5]), st.sampled_from([0.5, 1.0, 2.0]))
def test_lemma_infimum_is_exhaustive_minimum(pp, P0, k):
    assert lemma_infimum(pp, P0, k) == pytest.approx(exhaustive_infimum(pp, P0, k), rel=1e-12)


def test_lemma_infimum_decays_like_stretched_exponential():
    ps = np.arange(100, 10_001, 100)
    logs = np.log([lemma_infimum(int(q), 1, 1) for q in ps])
    slope, icpt = np.polyfit(np.sqrt(ps), logs, 1)
    assert slope < 0
    assert np.max(logs - (icpt + slope * np.sqrt(ps))) < 0.5


def test_membership_geometric_components():
    tab = CoefficientTable(np.array([0.5 ** p, 0.7 ** p]))
    for k in (0.5, 1.0, 3.0):
        rep = membership_report(tab, k)
        assert rep.verdict and rep.offending == []


def test_membership_flags_offending_component():
    tab = CoefficientTable(np.array([np.exp(-np.sqrt(p)), 1 / (p + 1.0)]))
    rep = membership_report(tab, 1)
    assert not rep.verdict
    assert rep.offending == [1]
    assert rep.to_dict()["verdict"] == "rejected"


def test_membership_finite_table_trivial():
    tab = CoefficientTable(np.array([[1, 2, 3, 0, 0, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0, 0, 0, 0]]))
    rep = membership_report(tab, 1)
    assert rep.verdict and rep.trivial == [0, 1]


def test_membership_uncertainty_floor():
    a = np.exp(-np.sqrt(p))
    noisy = a + 1e-9 * np.cos(7 * p)
    tab = CoefficientTable(np.array([noisy]))
    assert not membership_report(tab, 1, use_noise=False).verdict
    rep = membership_report(tab, 1, uncertainty=1e-9)
    assert rep.verdict
    assert rep.models[0].beta == pytest.approx(1.0, rel=0.02)
