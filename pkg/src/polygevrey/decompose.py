"""Holomorphic components of a polyanalytic function from samples on circles.

On a circle of radius r the mode-m Fourier coefficient of
sum_{p,q} a_{p,q} z^q conj(z)^p is phi_m(r) = sum_p a_{p,m+p} r^(m+2p).
Sampling N circles gives, for each m, a small linear system in the
unknowns a_{p,m+p}; after dividing row j by r_j^m it is a Vandermonde
system in the nodes r_j^2.
"""

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .core import HoloPoly, NAnalyticPoly
from .errors import IllConditioned, IndexOutOfRange, SingularSystem

COND_WARN = 1e10
EPS = np.finfo(float).eps


def unit_roots(M):
    """exp(2 pi i j / M), exact at the quarter turns."""
    j = np.arange(M)
    t = 2 * np.pi * j / M
    w = np.cos(t) + 1j * np.sin(t)
    quarter = (4 * j) % M == 0
    w[quarter] = np.array([1, 1j, -1, -1j])[(4 * j[quarter]) // M]
    return w


@dataclass(frozen=True)
class CircleSamples:
    radius: float
    values: np.ndarray

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        vals = np.asarray(self.values, dtype=np.complex128)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def M(self):
        return self.values.shape[0]

    def nodes(self):
        return self.radius * unit_roots(self.M)


@dataclass
class CoefficientTable:
    """Taylor coefficients a[p, q] of the components, truncated at q_max."""

    coeffs: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=np.complex128))

    @property
    def order(self):
        return self.coeffs.shape[0]

    @property
    def q_max(self):
        return self.coeffs.shape[1] - 1

    @property
    def entries(self):
        return {
            (int(p), int(q)): complex(self.coeffs[p, q]) for p, q in zip(*np.nonzero(self.coeffs))
        }

    def moduli(self, p):
        return np.abs(self.coeffs[p])

    def to_poly(self):
        return NAnalyticPoly.from_array(self.coeffs)

    @classmethod
    def from_poly(cls, P, q_max=None):
        arr = P.to_array()
        if q_max is not None:
            out = np.zeros((P.order, q_max + 1), dtype=np.complex128)
            w = min(q_max + 1, arr.shape[1])
            out[:, :w] = arr[:, :w]
            arr = out
        return cls(arr)

    @classmethod
    def from_entries(cls, entries, order, q_max=None):
        if q_max is None:
            q_max = max((q for (_, q) in entries), default=0)
        arr = np.zeros((order, q_max + 1), dtype=np.complex128)
        for (p, q), v in entries.items():
            arr[p, q] = v
        return cls(arr)

    def evaluate(self, z):
        return self.to_poly()(z)


def sample_circle(f, radius, M):
    """Values of f at radius * exp(2 pi i j / M), j = 0..M-1."""
    if M < 4:
        raise ValueError("M must be at least 4")
    if isinstance(f, NAnalyticPoly):
        return CircleSamples(radius, _poly_on_circle(f, radius, M))
    z = radius * unit_roots(M)
    return CircleSamples(radius, np.asarray(f(z), dtype=np.complex128))


def _poly_on_circle(P, radius, M):
    # On the circle a_{p,q} z^q conj(z)^p = a_{p,q} r^(q+p) w^(q-p): fill the
    # mode spectrum and invert it, which rounds like one FFT instead of a
    # Horner sweep of growing terms.
    a = P.to_array()
    p, q = np.indices(a.shape)
    spec = np.zeros(M, dtype=np.complex128)
    np.add.at(spec, (q - p) % M, a * float(radius) ** (q + p))
    return np.fft.ifft(spec) * M


def _mode_values(samples, modes, fast=None):
    M = samples.M
    if fast is None:
        fast = M >= 64
    if fast:
        spec = np.fft.fft(samples.values) / M
        return spec[np.asarray(modes) % M]
    return kernels.dft_direct(samples.values, np.asarray(modes, dtype=np.int64))


def fourier_modes(samples, fast=None):
    """Mapping m -> phi_m for |m| <= M/2 - 1.

    ``fast=False`` forces the direct O(M^2) sum; by default the FFT is used
    once M >= 64.
    """
    half = samples.M // 2 - 1
    modes = np.arange(-half, half + 1)
    vals = _mode_values(samples, modes, fast)
    return {int(m): complex(v) for m, v in zip(modes, vals)}


def solve_partial_pivot(A, b):
    """Solve a batch of square systems A[k] x[k] = b[k] by Gaussian elimination.

    Returns (x, cond) where cond is the ratio of the largest to the smallest
    column norm of the eliminated upper-triangular factor.
    """
    A = np.array(A, dtype=np.complex128)
    b = np.array(b, dtype=np.complex128)
    squeeze = A.ndim == 2
    if squeeze:
        A, b = A[None], b[None]
    nb, n, _ = A.shape
    rows = np.arange(nb)
    for k in range(n):
        piv = k + np.argmax(np.abs(A[:, k:, k]), axis=1)
        if np.any(A[rows, piv, k] == 0):
            raise SingularSystem("zero pivot in elimination", column=k)
        A[rows, k], A[rows, piv] = A[rows, piv].copy(), A[rows, k].copy()
        b[rows, k], b[rows, piv] = b[rows, piv].copy(), b[rows, k].copy()
        f = A[:, k + 1 :, k] / A[:, k, k][:, None]
        A[:, k + 1 :, k:] -= f[:, :, None] * A[:, k, k:][:, None, :]
        b[:, k + 1 :] -= f * b[:, k][:, None]
    x = np.zeros_like(b)
    for k in range(n - 1, -1, -1):
        x[:, k] = (b[:, k] - np.sum(A[:, k, k + 1 :] * x[:, k + 1 :], axis=1)) / A[:, k, k]
    norms = np.linalg.norm(np.triu(A), axis=1)
    cond = norms.max(axis=1) / norms.min(axis=1)
    return (x[0], cond[0]) if squeeze else (x, cond)


def default_radii(order, degree=None):
    """Circle radii for recovery.

    Without a degree: r_j = 0.95 (0.5 + 0.5 j / (N-1)). With the degree of a
    polynomial (an entire function) the circles straddle the unit circle
    with a width shrinking like 1/degree, which keeps high powers of r near
    one while the Vandermonde nodes stay separated.
    """
    if order == 1:
        return np.array([0.95 if degree is None else 1.0])
    if degree is None:
        return 0.95 * (0.5 + 0.5 * np.arange(order) / (order - 1))
    w = min(0.45, 6.4 / max(degree, 1))
    return np.linspace(1 - 0.7 * w, 1 + 0.3 * w, order)


def components_from_circles(samples, q_max=None, fast=None):
    """Recover a[p, q] for 0 <= p < N, 0 <= q <= q_max from N sampled circles.

    The returned table's ``diagnostics`` holds per-mode residuals, the
    largest condition estimate, warnings and a per-coefficient noise
    estimate (DFT rounding pushed through the inverse system).
    """
    samples = list(samples)
    n = len(samples)
    radii = np.array([s.radius for s in samples])
    M = samples[0].M
    if any(s.M != M for s in samples):
        raise ValueError("all circles need the same number of samples")
    if len(np.unique(radii)) != n:
        raise SingularSystem("radii are not distinct", radii=radii.tolist())
    if np.any(np.diff(radii) < 0):
        raise ValueError("radii must be increasing")
    if q_max is None:
        q_max = M // 2 - n
    if q_max + n > M // 2:
        raise ValueError("q_max too large for M samples")

    modes = np.arange(-(n - 1), q_max + 1)
    phi = np.array([_mode_values(s, modes, fast) for s in samples])  # (n, n_modes)
    scale_err = np.array([4 * EPS * max(np.abs(s.values).max(), 1e-300) for s in samples])

    coeffs = np.zeros((n, q_max + 1), dtype=np.complex128)
    noise = np.zeros((n, q_max + 1))
    residuals = np.zeros(modes.size)
    conds = np.ones(modes.size)
    logr = np.log(radii)

    def unknowns(m):
        return [p for p in range(n) if 0 <= m + p <= q_max]

    full = np.array([len(unknowns(m)) == n for m in modes])
    # full-rank modes share the same Vandermonde matrix in r^2
    V = radii[:, None] ** (2 * np.arange(n))[None, :]
    if full.any():
        mf = modes[full]
        rhs = (phi[:, full] * np.exp(-np.outer(logr, mf))).T
        x, cond = solve_partial_pivot(np.broadcast_to(V, (mf.size, n, n)), rhs)
        amp = np.exp(-np.outer(mf, logr)) @ (np.abs(np.linalg.inv(V)) * scale_err).T
        for p in range(n):
            coeffs[p, mf + p] = x[:, p]
            noise[p, mf + p] = amp[:, p]
        residuals[full] = np.abs(np.einsum("ij,kj->ki", V, x) - rhs).max(axis=1)
        conds[full] = cond
    for idx in np.flatnonzero(~full):
        m = int(modes[idx])
        ps = unknowns(m)
        if not ps:
            continue
        A = radii[:, None] ** (2 * np.array(ps))[None, :]
        rhs = phi[:, idx] * np.exp(-m * logr)
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        pinv = np.linalg.pinv(A)
        for i, p in enumerate(ps):
            coeffs[p, m + p] = sol[i]
            noise[p, m + p] = np.sum(np.abs(pinv[i]) * scale_err * np.exp(-m * logr))
        residuals[idx] = np.abs(A @ sol - rhs).max()
        sv = np.linalg.svd(A, compute_uv=False)
        conds[idx] = sv[0] / sv[-1]

    warns = []
    if conds.max() > COND_WARN:
        warns.append(IllConditioned.code)
        warnings.warn(
            f"condition estimate {conds.max():.3e} exceeds {COND_WARN:g}", IllConditioned, stacklevel=2
        )
    diag = {
        "radii": radii.tolist(),
        "M": M,
        "modes": modes,
        "residuals": residuals,
        "max_residual": float(residuals.max()) if residuals.size else 0.0,
        "max_condition": float(conds.max()),
        "noise": noise,
        "warnings": warns,
    }
    return CoefficientTable(coeffs, diag)


def recover(f, order, q_max, radii=None, M=None, fast=None):
    """Sample f on ``order`` circles and recover its coefficient table."""
    if radii is None:
        radii = default_radii(order)
    if M is None:
        M = 1 << int(np.ceil(np.log2(2 * q_max + 2 * order + 4)))
    samples = [sample_circle(f, r, M) for r in radii]
    return components_from_circles(samples, q_max=q_max, fast=fast)


def kp_extract(P, p):
    """Holomorphic component Q_p of P."""
    if not 0 <= p < P.order:
        raise IndexOutOfRange(f"component {p} outside 0..{P.order - 1}")
    return P.components[p]


def holo_sum(components):
    """Rebuild sum_p Q_p conj(z)^p from a list of HoloPoly."""
    return NAnalyticPoly([c if isinstance(c, HoloPoly) else HoloPoly(c) for c in components])


def write_samples(path, samples):
    """CSV ``theta_index,re,im`` plus a JSON sidecar {radius, M}."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("theta_index", "re", "im"))
        for j, v in enumerate(samples.values):
            w.writerow((j, repr(float(v.real)), repr(float(v.imag))))
    path.with_suffix(".json").write_text(json.dumps({"radius": samples.radius, "M": samples.M}))


def read_samples(path):
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    with open(path, newline="") as fh:
        rows = sorted(csv.DictReader(fh), key=lambda r: int(r["theta_index"]))
    vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    if vals.size != meta["M"]:
        raise ValueError("sample count does not match sidecar M")
    return CircleSamples(float(meta["radius"]), vals)
