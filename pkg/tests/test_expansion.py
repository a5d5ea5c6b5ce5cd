import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polygevrey import NAnalyticPoly, degree
from polygevrey.decompose import CoefficientTable
from polygevrey.errors import NoGeometricDecay, Uncertified
from polygevrey.expansion import (
    BlockExpansion,
    block_range,
    build_blocks,
    certify_norms,
    converse_verify,
    dilated_radius,
    fit_geometric,
    measure_norms,
    n_blocks_for,
    synthesize,
    tail_bound,
)

from conftest import gevrey_table

p = np.arange(513)


def test_block_ranges_k1():
    got = [list(block_range(n, 1)) for n in range(5)]
    assert got == [[0], [], [1, 2], [3], [4, 5, 6]]


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 3.0])
def test_blocks_partition_integers(k):
    top = 100_000
    seen = np.zeros(top + 1, dtype=int)
    n = 0
    while block_range(n, k).start <= top:
        r = block_range(n, k)
        seen[r.start:min(r.stop, top + 1)] += 1
        if n >= 1 and len(r):
            assert r.stop - 1 < n ** ((k + 1) / k)
        n += 1
    assert np.all(seen == 1)


def test_dilated_radius_block_zero():
    assert dilated_radius(1, 0.5, 0) == dilated_radius(1, 0.5, 1) == 1.5
    assert dilated_radius(2, 0.5, 4) == pytest.approx(1.25)


def test_single_coefficient_table():
    tab = CoefficientTable([[1.0, 0, 0, 0, 0, 0, 0]])
    exp = build_blocks(tab, 1)
    assert exp.blocks[0] == NAnalyticPoly([[1.0]])
    assert all(P.is_zero() for P in exp.blocks[1:])


def test_geometric_partial_sums():
    tab = CoefficientTable([0.5 ** np.arange(65)])
    exp = build_blocks(tab, 1)
    assert exp(0.5) == pytest.approx(4 / 3, abs=1e-12)


@given(st.integers(1, 4), st.integers(0, 300), st.sampled_from([0.5, 1.0, 2.0]), st.integers(0, 2 ** 31))
def test_build_blocks_round_trip(N, q_max, k, seed):
    rng = np.random.default_rng(seed)
    arr = rng.normal(size=(N, q_max + 1)) + 1j * rng.normal(size=(N, q_max + 1))
    exp = build_blocks(CoefficientTable(arr), k)
    assert np.array_equal(exp.to_table().coeffs, arr)
    for n, P in enumerate(exp.blocks):
        if n >= 1 and not P.is_zero():
            assert degree(P) <= n ** ((k + 1) / k)


def test_certify_gevrey_k1(certified):
    exp = certified(1)
    assert exp.cert.delta < math.exp(-1 / 8) * 1.05
    assert exp.cert.residual <= 0.3
    assert not exp.cert.finite
    # C covers every block
    n = np.arange(len(exp.blocks))
    assert np.all(exp.cert.norms <= exp.cert.C * exp.cert.delta ** n * (1 + 1e-12))


def test_certify_fixed_quarter_radius():
    exp = certify_norms(build_blocks(gevrey_table(1), 1), R=0.25)
    assert exp.cert.R == 0.25
    assert exp.cert.delta <= math.exp(-1 / 8) * 1.05


@pytest.mark.parametrize("R", [0.25, 1.0])
def test_polynomial_decay_not_certified(R):
    tab = CoefficientTable([1 / (p + 1.0)])
    with pytest.raises(NoGeometricDecay) as exc:
        certify_norms(build_blocks(tab, 1), R=R)
    assert exc.value.details["delta"] >= 1


def test_finite_table_certified():
    exp = certify_norms(build_blocks(CoefficientTable([[1, 2, 3, 4]]), 1))
    assert exp.cert.finite and exp.cert.delta < 1


def test_fit_geometric_exact():
    norms = 3.0 * 0.7 ** np.arange(40)
    C, delta, resid, start, finite = fit_geometric(norms)
    assert delta == pytest.approx(0.7, rel=1e-12)
    assert C == pytest.approx(3.0, rel=1e-12)
    assert abs(resid) < 1e-12 and start == 16 and not finite


def test_norms_stable_under_grid_doubling(certified):
    exp = certified(1)
    a = measure_norms(exp, exp.cert.R, 1024)
    b = measure_norms(exp, exp.cert.R, 2048)
    live = a > 0
    assert np.all(np.abs(b[live] / a[live] - 1) < 0.01)


def test_synthesize_geometric():
    tab = CoefficientTable([0.5 ** np.arange(65)])
    exp = certify_norms(build_blocks(tab, 1))
    for n_terms in (2, 4, 6):
        val, bound = synthesize(exp, 0.5, n_terms)
        assert abs(val - 4 / 3) <= bound + 1e-15


def test_synthesize_at_zero():
    exp = certify_norms(build_blocks(gevrey_table(1, 2), 1))
    val, _ = synthesize(exp, 0.0, 5)
    assert val == pytest.approx(1.0)


def test_tail_bound_halves(certified):
    cert = certified(1).cert
    step = math.log(2) / math.log(1 / cert.delta)
    assert tail_bound(cert, 10 + step) == pytest.approx(tail_bound(cert, 10) / 2, rel=1e-12)


def test_synthesize_uncertified():
    with pytest.raises(Uncertified):
        synthesize(build_blocks(gevrey_table(1), 1), 0.5, 3)


def test_json_round_trip(certified):
    exp = certified(1)
    back = BlockExpansion.from_json_dict(json.loads(json.dumps(exp.to_json_dict())))
    assert back.k == exp.k and back.q_max == exp.q_max
    assert all(a == b for a, b in zip(back.blocks, exp.blocks))
    assert back.cert.delta == exp.cert.delta


def test_n_blocks_for():
    assert n_blocks_for(6, 1) == 5
    assert n_blocks_for(512, 1) == 46


def test_converse_accepts_gevrey(certified):
    rep = converse_verify(certified(1))
    assert rep.verdict
    assert rep.worst_ratio <= 1
    assert rep.membership.models[0].beta == pytest.approx(1.0, rel=0.2)


def test_converse_mixed_components(certified):
    exp = certified(1, 3)
    rep = converse_verify(exp)
    assert rep.component_ok and rep.verdict
    assert rep.worst_ratio <= 1


def test_converse_zero_expansion():
    exp = certify_norms(build_blocks(CoefficientTable(np.zeros((2, 64))), 1))
    rep = converse_verify(exp)
    assert rep.verdict
    assert rep.membership.trivial == [0, 1]
