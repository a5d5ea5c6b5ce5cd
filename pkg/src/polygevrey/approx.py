"""Uniform approximation of polyanalytic functions by N-analytic polynomials.

Two estimates of the best approximation error E_{N,n}(f) on the closed unit
disk are provided: a constructive one from a certified block expansion and a
discrete minimax solve (Lawson's reweighted least squares). The decay law
E_n ~ alpha exp(-beta n^(k/(k+1))) is fitted from a sequence of records, and
a sequence of approximants can be turned back into a block expansion.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import NAnalyticPoly
from .decompose import unit_roots
from .errors import InsufficientData, NegativeBeta, NoGeometricDecay, Uncertified
from .expansion import BlockExpansion, Certificate, converse_verify
from .bounds import bw_constant
from .gevrey import TAIL_FLATTENING, TOLERANCE
from .sampling import sup_boundary_plus_interior

N_RADII = 24
N_ANGLES = 256
MAX_ITER = 200
LAWSON_TOL = 1e-4
ABS_TOL = 1e-12
MIN_RECORDS = 12


@dataclass
class ApproxRecord:
    n: int
    e_value: float
    method: str
    approximant: NAnalyticPoly
    bound: float = math.nan
    flag: str = ""
    caveat: str = ""
    lower: float = math.nan

    def row(self):
        return {"n": self.n, "method": self.method, "e_value": self.e_value,
                "bound": self.bound, "flag": self.flag}


@dataclass(frozen=True)
class DiskGrid:
    """The center plus concentric circles with ``n_angles`` equispaced points each."""

    radii: tuple
    n_angles: int

    def points(self):
        w = unit_roots(self.n_angles)
        return np.concatenate([[0j], (np.array(self.radii)[:, None] * w[None, :]).ravel()])

    @property
    def size(self):
        return 1 + len(self.radii) * self.n_angles


def approx_grid(n_radii=N_RADII, n_angles=N_ANGLES):
    """Boundary-biased grid on the closed unit disk.

    Half the circles lie in (0.9, 1], the other half in (0, 0.9].
    """
    half = n_radii // 2
    inner = np.linspace(0.0, 0.9, n_radii - half + 1)[1:]
    outer = np.linspace(0.9, 1.0, half + 1)[1:]
    return DiskGrid(tuple(float(r) for r in np.concatenate([inner, outer])), int(n_angles))


def _as_grid(grid):
    if grid is None:
        return approx_grid()
    if isinstance(grid, tuple):
        return approx_grid(*grid)
    return grid


def _points(grid):
    return grid.points() if isinstance(grid, DiskGrid) else np.asarray(grid, dtype=np.complex128)


def _caveat(z):
    return f"discrete sup over {z.size} points of the closed disk; not the exact E_(N,n)"


def _blocks_upto(exp, n):
    """Indices j with j^((k+1)/k) <= n."""
    a = (exp.k + 1) / exp.k
    return [j for j in range(len(exp.blocks)) if j ** a <= n + 1e-12]


def constructive_approximant(exp, n, grid=None):
    """Q_n = sum of the blocks P_j with j^((k+1)/k) <= n, and its sup error.

    The error is sampled on the disk grid against the full (truncated) block
    sum; the bound C delta^(n^(k/(k+1)))/(1-delta) comes from the
    certificate.
    """
    if exp.cert is None:
        raise Uncertified("expansion has no certificate")
    z = _points(_as_grid(grid))
    keep = set(_blocks_upto(exp, n))
    Q = NAnalyticPoly.zero(exp.order)
    tail = np.zeros((exp.order, 1), dtype=np.complex128)
    for j, P in enumerate(exp.blocks):
        if j in keep:
            Q = Q + P
        elif not P.is_zero():
            arr = P.to_array()
            lo = exp.block_start(j)
            if arr.shape[1] > tail.shape[1]:
                tail = np.pad(tail, ((0, 0), (0, arr.shape[1] - tail.shape[1])))
            tail[:, lo:arr.shape[1]] += arr[:, lo:]
    err = np.abs(kernels.horner_eval(tail, z)).max()
    cert = exp.cert
    bound = cert.C * cert.delta ** (n ** (exp.k / (exp.k + 1))) / (1 - cert.delta)
    return ApproxRecord(n, float(err), "constructive", Q, float(bound),
                        caveat=_caveat(z))


def _basis(z, N, n):
    zb = np.conj(z)
    zq = z[:, None] ** np.arange(n + 1)[None, :]
    return np.concatenate([zq * (zb ** p)[:, None] for p in range(N)], axis=1)


class _DenseLS:
    """Weighted least squares for an arbitrary point set."""

    def __init__(self, z, N, n):
        self.A = _basis(z, N, n)

    def solve(self, w, f):
        sw = np.sqrt(w)
        c, *_ = np.linalg.lstsq(self.A * sw[:, None], f * sw, rcond=None)
        return c

    def apply(self, c):
        return self.A @ c


class _CircleLS:
    """Weighted least squares on a DiskGrid through angular FFTs.

    The basis function z^q conj(z)^p is r^(q+p) exp(i(q-p)theta) on a
    circle, so Gram entries and right-hand sides are Fourier sums of the
    weights along each circle.
    """

    def __init__(self, grid, N, n):
        p, q = np.divmod(np.arange(N * (n + 1)), n + 1)
        self.L = grid.n_angles
        self.r = np.array(grid.radii)
        self.rpow = self.r[:, None] ** (p + q)[None, :]
        self.m = (q - p) % self.L
        self.d = (self.m[None, :] - self.m[:, None]) % self.L
        self.const = (p == 0) & (q == 0)

    def solve(self, w, f):
        C, L = self.r.size, self.L
        wc = w[1:].reshape(C, L)
        S = L * np.fft.ifft(wc, axis=1)
        G = np.einsum("ck,cl,ckl->kl", self.rpow, self.rpow, S[:, self.d])
        F = np.fft.fft(wc * f[1:].reshape(C, L), axis=1)
        b = np.einsum("ck,ck->k", self.rpow, F[:, self.m])
        G[np.ix_(self.const, self.const)] += w[0]
        b[self.const] += w[0] * f[0]
        vals, vecs = np.linalg.eigh(G)
        keep = vals > vals.max() * 1e-15
        return vecs[:, keep] @ ((vecs[:, keep].conj().T @ b) / vals[keep])

    def apply(self, c):
        C, L = self.r.size, self.L
        H = np.zeros((C, L), dtype=np.complex128)
        for k in range(c.size):
            H[:, self.m[k]] += self.rpow[:, k] * c[k]
        vals = L * np.fft.ifft(H, axis=1)
        return np.concatenate([[np.sum(c[self.const])], vals.ravel()])


def minimax_estimate(f, N, n, grid=None, max_iter=MAX_ITER, tol=LAWSON_TOL):
    """Discrete minimax min_P max_grid |f - P| over N-analytic P of degree <= n.

    Lawson's iteration: weighted least squares, then weights multiplied by
    the current error modulus. The weighted L2 error is a lower bound for the
    discrete optimum; iteration stops when the sup error is within ``tol``
    (relative) of it, or below ABS_TOL. The best iterate is returned; the
    record is flagged NONCONVERGED when max_iter is reached first.

    ``grid`` is a DiskGrid, a (n_radii, n_angles) pair for ``approx_grid``,
    or an array of points.
    """
    grid = _as_grid(grid)
    z = _points(grid)
    fz = f(z) if callable(f) else f
    fz = np.asarray(fz, dtype=np.complex128)
    ls = _CircleLS(grid, N, n) if isinstance(grid, DiskGrid) else _DenseLS(z, N, n)
    scale = max(float(np.abs(fz).max()), 1.0)
    w = np.full(z.size, 1.0 / z.size)
    best_e, best_c, lower = math.inf, np.zeros(N * (n + 1), dtype=np.complex128), 0.0
    flag = "NONCONVERGED"
    for _ in range(max_iter):
        c = ls.solve(w, fz)
        r = np.abs(fz - ls.apply(c))
        e = float(r.max())
        lower = max(lower, float(np.sqrt(np.sum(w * r * r))))
        if e < best_e:
            best_e, best_c = e, c
        if best_e <= ABS_TOL * scale or best_e - lower <= tol * best_e:
            flag = ""
            break
        w = w * r
        total = w.sum()
        if not total > 0:
            flag = ""
            break
        w = w / total
    P = NAnalyticPoly.from_array(best_c.reshape(N, n + 1))
    return ApproxRecord(n, best_e, "minimax", P, flag=flag, caveat=_caveat(z), lower=lower)


@dataclass
class ThetaFit:
    alpha: float
    beta: float
    residual: float
    tail_beta: float
    accepted: bool
    reason: str
    n_range: tuple

    def __iter__(self):
        return iter((self.alpha, self.beta, self.residual))

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "residual": self.residual,
                "tail_beta": self.tail_beta, "accepted": self.accepted,
                "reason": self.reason, "n_range": list(self.n_range)}


def _line(x, y):
    A = np.column_stack([np.ones_like(x), -x])
    (c0, c1), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(c0), float(c1)


def fit_theta(records, k, tol=TOLERANCE):
    """Fit ln e_n ~ ln alpha - beta n^(k/(k+1)) over records with e_n > 0.

    Acceptance follows the coefficient-decay rule: the slope over the last
    half of the records must not flatten, and either the one-sided residual
    is within ``tol`` or the tail decays at least as fast as the fit.
    """
    pts = sorted((r.n, r.e_value) for r in records if r.e_value > 0)
    if len(pts) < MIN_RECORDS:
        raise InsufficientData(f"need at least {MIN_RECORDS} records with positive error",
                               count=len(pts))
    n = np.array([p[0] for p in pts], dtype=float)
    x = n ** (k / (k + 1))
    y = np.log([p[1] for p in pts])
    c0, beta = _line(x, y)
    if not beta > 0:
        raise NegativeBeta("fitted decay rate is not positive", beta=beta)
    resid = float(np.max(y - (c0 - beta * x)))
    half = x.size // 2
    tail_beta = _line(x[half:], y[half:])[1]
    steady = tail_beta >= TAIL_FLATTENING * beta
    accepted = bool(steady and (resid <= tol or tail_beta >= beta))
    reason = "ok" if accepted else ("tail flattens" if not steady else "residual above tolerance")
    return ThetaFit(float(math.exp(c0)), beta, resid, tail_beta, accepted, reason,
                    (int(n[0]), int(n[-1])))


def y_block_indices(n, k):
    """Integers j with n^((k+1)/k) <= j < (n+1)^((k+1)/k)."""
    a = (k + 1) / k
    lo = math.ceil(n ** a - 1e-9)
    hi = math.ceil((n + 1) ** a - 1e-9)
    return range(lo, hi)


def required_indices(k, n_blocks):
    """Indices of W needed to form Y_1 .. Y_{n_blocks-1} by telescoping."""
    need = {0}
    for n in range(1, n_blocks):
        r = y_block_indices(n, k)
        need.update({r.start - 1, r.stop - 1})
    return sorted(need)


@dataclass
class ConverseBlocksReport:
    k: float
    beta: float
    ratio: float
    ratio_limit: float
    bw_ok: bool
    direct_norms: list
    bw_bounds: list
    converse: object = None
    details: dict = field(default_factory=dict)

    @property
    def decay_ok(self):
        return self.ratio <= self.ratio_limit

    @property
    def verdict(self):
        return bool(self.decay_ok and self.bw_ok and (self.converse is None or self.converse.verdict))

    def to_dict(self):
        return {
            "k": self.k, "beta": self.beta, "ratio": self.ratio, "ratio_limit": self.ratio_limit,
            "bw_ok": self.bw_ok, "direct_norms": self.direct_norms, "bw_bounds": self.bw_bounds,
            "verdict": "accepted" if self.verdict else "rejected",
            "converse": None if self.converse is None else self.converse.to_dict(),
            **self.details,
        }


def _lookup(W, j):
    return W[max(j, 0)]


def converse_blocks(W, k, beta, alpha=None, n_blocks=None, tol=0.05, grid=1024, verify=True):
    """Turn approximants W_n into blocks Y_n and check their geometric decay.

    Y_n = sum over n^((k+1)/k) <= j < (n+1)^((k+1)/k) of (W_j - W_(j-1)),
    which telescopes to W_(hi-1) - W_(lo-1); W_(-1) is taken equal to W_0,
    so Y_0 = 0 and W_0 enters as the base block. Norms of Y_n on the disk
    of radius 1 + (beta/3) n^(-1/k) are sampled directly and compared with
    the Bernstein-Walsh extrapolation of the unit-disk norm. The fitted
    ratio of the direct norms must not exceed exp(-beta/4)(1 + tol). The
    resulting certified expansion is then passed to ``converse_verify``.

    ``W`` is a sequence or a mapping from index to NAnalyticPoly; only the
    indices from ``required_indices`` are read. ``alpha`` and ``beta`` are
    the error certificate sup|f - W_n| <= alpha exp(-beta n^(k/(k+1))); the
    error of the last approximant used bounds the coefficient uncertainty
    of the limit. Without ``alpha`` the certificate's tail bound is used.
    """
    if n_blocks is None:
        top = max(W.keys()) if isinstance(W, dict) else len(W) - 1
        n_blocks = 1
        while y_block_indices(n_blocks, k).stop - 1 <= top:
            n_blocks += 1
    W0 = _lookup(W, 0)
    N = W0.order
    blocks = [W0]
    for n in range(1, n_blocks):
        r = y_block_indices(n, k)
        Y = _lookup(W, r.stop - 1) - _lookup(W, r.start - 1)
        N = max(N, Y.order)
        blocks.append(Y)
    blocks = [b if b.order == N else b + NAnalyticPoly.zero(N) for b in blocks]

    R = beta / 3
    direct, bw = [0.0], [0.0]
    bw_ok = True
    for n in range(1, n_blocks):
        Y = blocks[n]
        if Y.is_zero():
            direct.append(0.0)
            bw.append(0.0)
            continue
        rho = 1 + R * n ** (-1 / k)
        deg = Y.to_array().shape[1] - 1
        d = sup_boundary_plus_interior(Y, rho, grid)
        unit = sup_boundary_plus_interior(Y, 1.0, grid)
        b = bw_constant(N) * unit * rho ** (deg + N - 1)
        direct.append(d)
        bw.append(b)
        bw_ok &= d <= b * (1 + 1e-12)

    d = np.array(direct)
    idx = np.arange(d.size)
    pos = (idx >= 1) & (d > 1e-300)
    limit = math.exp(-beta / 4) * (1 + tol)
    if pos.sum() >= 2:
        x = idx[pos].astype(float)
        y = np.log(d[pos])
        A = np.column_stack([np.ones_like(x), x])
        (c0, c1), *_ = np.linalg.lstsq(A, y, rcond=None)
        ratio = float(math.exp(c1))
    else:
        ratio = 0.0
    details = {"n_blocks": n_blocks}
    if ratio > limit:
        raise NoGeometricDecay(f"Y-block ratio {ratio:.6g} exceeds {limit:.6g}",
                               ratio=ratio, limit=limit)
    report = ConverseBlocksReport(float(k), float(beta), ratio, limit, bool(bw_ok),
                                  [float(v) for v in direct], [float(v) for v in bw],
                                  details=details)
    if not verify:
        return report

    # certificate on the dilated disks; block 0 is measured on the max(n,1) disk
    delta = ratio if 0 < ratio < 1 else 0.5
    norms = np.array(direct)
    norms[0] = sup_boundary_plus_interior(blocks[0], 1 + R, grid)
    n_arr = np.arange(norms.size, dtype=float)
    pos = norms > 1e-300
    C = float(np.max(norms[pos] * delta ** (-n_arr[pos]))) if pos.any() else 1e-300
    cert = Certificate(R, C, delta, norms, 0.0, 1, False)
    exp = BlockExpansion(k, N, blocks, cert, aligned=False)
    last = y_block_indices(n_blocks - 1, k).stop - 1
    if alpha is None:
        uncertainty = C * delta ** n_blocks / (1 - delta)
    else:
        uncertainty = alpha * math.exp(-beta * last ** (k / (k + 1)))
    report.details["uncertainty"] = float(uncertainty)
    report.converse = converse_verify(exp, k, uncertainty=uncertainty)
    return report
