"""Pure numpy implementations of the hot loops.

These are the reference versions; the compiled module in ``_kernels.pyx``
must agree with them to rounding.
"""

import numpy as np


def horner_eval(coeffs, z):
    """Evaluate sum_p Q_p(z) conj(z)^p for every point of ``z``.

    ``coeffs`` has shape (N, D): row p holds the coefficients of Q_p in
    increasing powers of z.
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z = np.ascontiguousarray(z, dtype=np.complex128)
    n_comp, width = coeffs.shape
    zb = np.conj(z)
    out = np.zeros_like(z)
    for p in range(n_comp - 1, -1, -1):
        acc = np.zeros_like(z)
        for q in range(width - 1, -1, -1):
            acc = acc * z + coeffs[p, q]
        out = out * zb + acc
    return out


def dft_direct(values, modes):
    """Normalized DFT (1/M) sum_j values[j] exp(-2 pi i j m / M) at given modes."""
    values = np.ascontiguousarray(values, dtype=np.complex128)
    modes = np.asarray(modes, dtype=np.int64)
    m_pts = values.shape[0]
    j = np.arange(m_pts, dtype=np.int64)
    out = np.empty(modes.shape[0], dtype=np.complex128)
    # exact integer reduction of j*m keeps the phases accurate for large M
    for i, m in enumerate(modes):
        phase = (j * m) % m_pts
        out[i] = np.sum(values * np.exp(-2j * np.pi * phase / m_pts)) / m_pts
    return out


def kernel_sum(z, zeta, weights, conj_power, inv_power):
    """sum_j conj(z - zeta_j)^conj_power / (z - zeta_j)^inv_power * weights_j.

    Evaluated for each z; terms with z == zeta_j are skipped, the caller
    accounts for that cell.
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    zeta = np.ascontiguousarray(zeta, dtype=np.complex128)
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    out = np.empty(z.shape[0], dtype=np.complex128)
    for i, zi in enumerate(z):
        d = zi - zeta
        mask = d != 0
        d = d[mask]
        out[i] = np.sum(np.conj(d) ** conj_power / d ** inv_power * weights[mask])
    return out


def pompeiu_sum(z, zeta, weights, order):
    """sum_j conj(z - zeta_j)^(order-1) / (z - zeta_j) * weights_j for each z."""
    return kernel_sum(z, zeta, weights, order - 1, 1)
