import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polygevrey.decompose import CoefficientTable
from polygevrey.expansion import build_blocks, certify_norms

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def gevrey_table(k, order=1, q_max=512, c=1.0, step=0.25):
    """a[p, q] = exp(-(c + step p) q^(k/(k+1)))."""
    q = np.arange(q_max + 1)
    rows = [np.exp(-(c + step * p) * q ** (k / (k + 1))) for p in range(order)]
    return CoefficientTable(np.array(rows, dtype=np.complex128))


@pytest.fixture(scope="session")
def certified():
    """Certified expansions of the Gevrey corpus, keyed by (k, N)."""
    cache = {}

    def get(k, order=1):
        if (k, order) not in cache:
            cache[(k, order)] = certify_norms(build_blocks(gevrey_table(k, order), k))
        return cache[(k, order)]

    return get


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
