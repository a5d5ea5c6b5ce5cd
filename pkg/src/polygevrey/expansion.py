"""Coefficient-block expansions f = sum_n P_n with certified geometric norms.

Block n carries the Taylor powers q with c n^a <= q < c (n+1)^a, where
a = (k+1)/k and c = 2^-a, for every component. Norms of P_n are measured on
the dilated disk of radius 1 + R max(n,1)^(-1/k) and fitted by C delta^n.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import jm
from .core import NAnalyticPoly, translate
from .decompose import CoefficientTable, components_from_circles, sample_circle, unit_roots
from .errors import DomainError, InsufficientData, NegativeBeta, NoGeometricDecay, Uncertified
from .gevrey import fit_decay, membership_report

FIT_SKIP = 16
MIN_FIT_POINTS = 8
FLOOR = 1e-300
N_INTERIOR = 8


def _block_start(n, k):
    a = (k + 1) / k
    return math.ceil(2.0 ** (-a) * n ** a - 1e-9)


def block_range(n, k):
    """Powers q with 2^-a n^a <= q < 2^-a (n+1)^a, a = (k+1)/k."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return range(_block_start(n, k), _block_start(n + 1, k))


def n_blocks_for(q_max, k):
    n = 0
    while _block_start(n, k) <= q_max:
        n += 1
    return n


def dilated_radius(k, R, n):
    return 1.0 + R * max(n, 1) ** (-1.0 / k)


@dataclass
class Certificate:
    R: float
    C: float
    delta: float
    norms: np.ndarray
    residual: float
    fit_start: int
    finite: bool = False

    def to_dict(self):
        return {
            "R": self.R,
            "C": self.C,
            "delta": self.delta,
            "residual": self.residual,
            "fit_start": self.fit_start,
            "finite": self.finite,
            "norms": [float(x) for x in self.norms],
        }


@dataclass
class BlockExpansion:
    k: float
    order: int
    blocks: list
    cert: Certificate = None
    q_max: int = None
    aligned: bool = True

    def __post_init__(self):
        if self.q_max is None:
            if self.aligned:
                self.q_max = _block_start(len(self.blocks), self.k) - 1
            else:
                self.q_max = max([0] + [P.to_array().shape[1] - 1 for P in self.blocks])

    def block_start(self, n):
        """Lowest power of z block n may hold (0 for blocks not cut by power ranges)."""
        return _block_start(n, self.k) if self.aligned else 0

    @property
    def ranges_start(self):
        return [self.block_start(n) for n in range(len(self.blocks))]

    def ranges(self):
        return [block_range(n, self.k) for n in range(len(self.blocks))]

    def eval_block(self, n, z):
        """P_n(z), factoring out z^lo so only the block's own powers are summed."""
        z = np.asarray(z, dtype=np.complex128)
        P = self.blocks[n]
        if P.is_zero():
            return np.zeros(z.shape, dtype=np.complex128)
        lo = self.block_start(n)
        arr = P.to_array()[:, lo:]
        return z ** lo * NAnalyticPoly.from_array(arr)(z)

    def partial_sum(self, z, n_last=None):
        """sum_{n <= n_last} P_n(z) (all blocks when n_last is None)."""
        z = np.asarray(z, dtype=np.complex128)
        last = len(self.blocks) - 1 if n_last is None else min(n_last, len(self.blocks) - 1)
        out = np.zeros(z.shape, dtype=np.complex128)
        for n in range(last + 1):
            out = out + self.eval_block(n, z)
        return out

    def __call__(self, z):
        return self.partial_sum(z)

    def to_table(self):
        """Reassemble the coefficient table (exact inverse of build_blocks)."""
        arr = np.zeros((self.order, self.q_max + 1), dtype=np.complex128)
        for P in self.blocks:
            a = P.to_array()
            w = min(a.shape[1], arr.shape[1])
            arr[:, :w] += a[:, :w]
        return CoefficientTable(arr)

    def to_json_dict(self):
        blocks = []
        for P in self.blocks:
            blocks.append([[p, q, repr(v.real), repr(v.imag)] for (p, q), v in sorted(P.to_coefficients().items())])
        out = {"k": self.k, "N": self.order, "q_max": self.q_max, "aligned": self.aligned, "blocks": blocks}
        if self.cert is not None:
            out.update({"R": self.cert.R, "C": self.cert.C, "delta": self.cert.delta, "cert": self.cert.to_dict()})
        return out

    @classmethod
    def from_json_dict(cls, d):
        blocks = []
        for rows in d["blocks"]:
            entries = {(int(p), int(q)): complex(float(re), float(im)) for p, q, re, im in rows}
            blocks.append(NAnalyticPoly.from_coefficients(entries, d["N"]))
        cert = None
        if "cert" in d:
            c = d["cert"]
            cert = Certificate(c["R"], c["C"], c["delta"], np.array(c["norms"]), c["residual"],
                               c["fit_start"], c.get("finite", False))
        return cls(d["k"], d["N"], blocks, cert, d.get("q_max"), d.get("aligned", True))


def build_blocks(table, k):
    """Split a coefficient table into the blocks P_n (every component at once)."""
    n_blocks = n_blocks_for(table.q_max, k)
    blocks = []
    for n in range(n_blocks):
        r = block_range(n, k)
        arr = np.zeros((table.order, min(r.stop, table.q_max + 1)), dtype=np.complex128)
        arr[:, r.start:] = table.coeffs[:, r.start:r.stop]
        blocks.append(NAnalyticPoly.from_array(arr))
    return BlockExpansion(k, table.order, blocks, None, table.q_max)


def measure_norms(exp, R, grid=1024, n_interior=N_INTERIOR):
    """Sampled sup of |P_n| on the disk of radius 1 + R max(n,1)^(-1/k).

    The boundary circle and ``n_interior`` interior circles are sampled.
    """
    w = unit_roots(grid)
    frac = np.arange(1, n_interior + 2) / (n_interior + 1)
    norms = np.zeros(len(exp.blocks))
    for n in range(len(exp.blocks)):
        if exp.blocks[n].is_zero():
            continue
        rho = dilated_radius(exp.k, R, n)
        z = ((rho * frac)[:, None] * w[None, :]).ravel()
        norms[n] = np.abs(exp.eval_block(n, z)).max()
    return norms


def fit_geometric(norms, skip=FIT_SKIP):
    """Fit ln m_n ~ ln C + n ln delta over the asymptotic blocks.

    The regression uses blocks n >= skip when at least MIN_FIT_POINTS of them
    are nonzero (early blocks hold only a handful of powers, so their norms
    jitter with the integer rounding of the block boundaries), otherwise all
    nonzero blocks. C is lifted so that C delta^n >= m_n for every block.
    Returns (C, delta, residual, fit_start, finite).
    """
    norms = np.asarray(norms, dtype=float)
    n = np.arange(norms.size)
    pos = norms > FLOOR
    if pos.sum() == 0:
        return FLOOR, 0.5, 0.0, 0, True
    sel = pos & (n >= skip)
    if sel.sum() < MIN_FIT_POINTS:
        # nonzero norms stop before the asymptotic range: a finite sequence,
        # certified with any ratio in (0, 1)
        delta = 0.5
        C = float(np.max(norms[pos] * delta ** (-n[pos].astype(float))))
        return C, delta, 0.0, 0, True
    x = n[sel].astype(float)
    y = np.log(norms[sel])
    A = np.column_stack([np.ones_like(x), x])
    (c0, c1), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.max(y - (c0 + c1 * x)))
    lift = float(np.max(np.log(norms[pos]) - (c0 + c1 * n[pos])))
    return float(math.exp(c0 + max(lift, 0.0))), float(math.exp(c1)), resid, int(x[0]), False


def default_R(exp):
    """R = beta/4 with beta the smallest accepted decay rate of the components.

    Capped at 0.5: any smaller R is valid, and the converse check needs R < 1.
    """
    table = exp.to_table()
    betas = []
    for p in range(table.order):
        try:
            m = fit_decay(table.moduli(p), exp.k)
        except (InsufficientData, NegativeBeta):
            continue
        if m.accepted:
            betas.append(m.beta)
    return min(min(betas) / 4, 0.5) if betas else 0.25


def certify_norms(exp, R=None, grid=1024, skip=FIT_SKIP):
    """Measure block norms on the dilated disks and attach (R, C, delta)."""
    if R is None:
        R = default_R(exp)
    if R <= 0:
        raise DomainError("R must be positive")
    norms = measure_norms(exp, R, grid)
    C, delta, resid, start, finite = fit_geometric(norms, skip)
    if delta >= 1:
        raise NoGeometricDecay(f"fitted delta = {delta:.6g} >= 1", delta=delta, residual=resid, R=R)
    return replace(exp, cert=Certificate(R, C, delta, norms, resid, start, finite))


def tail_bound(cert, n_last):
    """Bound on sum_{n > n_last} |P_n| on the unit disk: C delta^(n_last+1)/(1-delta)."""
    return cert.C * cert.delta ** (n_last + 1) / (1 - cert.delta)


def synthesize(exp, z, n_terms):
    """Partial sum over blocks n <= n_terms and its certified tail bound."""
    if exp.cert is None:
        raise Uncertified("expansion has no certificate")
    return exp.partial_sum(z, n_terms), tail_bound(exp.cert, n_terms)


@dataclass
class ConverseReport:
    k: float
    component_ok: bool
    Q: list
    worst_ratio: float
    membership: object
    details: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return bool(self.component_ok and self.membership.verdict)

    def to_dict(self):
        return {
            "k": self.k,
            "verdict": "accepted" if self.verdict else "rejected",
            "component_ok": self.component_ok,
            "Q": self.Q,
            "worst_ratio": self.worst_ratio,
            "membership": self.membership.to_dict(),
            **self.details,
        }


def recovery_radii(order):
    """Circles just inside the unit circle for recovering the limit function."""
    if order == 1:
        return np.array([0.999])
    return np.linspace(0.999 - 0.05 * (order - 1), 0.999, order)


def converse_verify(exp, k=None, grid=1024, radii=None, M=None, uncertainty=0.0):
    """Check the converse chain on a certified expansion.

    1. For each block and component, the sup of |K_p(P_n)| on the radius
       1 + (R/2) max(n,1)^(-1/k) disk is compared with the bound obtained from
       the component max-modulus estimate and the certificate,
       b_{n,p} = J_N(r0, r) C delta^n / r0^p. Q_p = max_n b_{n,p} / sqrt(delta)^n
       must be attained before the last decade of blocks (no growth).
    2. The limit sum_n P_n is sampled on circles inside the disk, its
       coefficient table recovered, and every component fitted for decay.
       ``uncertainty`` bounds the distance of the available partial sum from
       the limit; coefficients below it are not fitted.
    """
    if exp.cert is None:
        raise Uncertified("expansion has no certificate")
    k = exp.k if k is None else k
    cert = exp.cert
    R = cert.R
    if not R < 1:
        raise DomainError("the converse check needs R < 1")
    N = exp.order
    w = unit_roots(grid)
    nb = len(exp.blocks)
    sq = math.sqrt(cert.delta)
    worst = 0.0
    log_q = np.full((N, nb), -np.inf)
    for n in range(nb):
        r0 = 1 + 0.5 * R * max(n, 1) ** (-1 / k)
        r = 1 + R * max(n, 1) ** (-1 / k)
        J = jm(N, r0, r)
        P = exp.blocks[n]
        for p in range(N):
            bound = J * cert.C * cert.delta ** n / r0 ** p
            log_q[p, n] = math.log(bound) - n * math.log(sq)
            Kp = P.components[p]
            if Kp.is_zero():
                continue
            lo = exp.block_start(n)
            zz = r0 * w
            val = np.abs(zz ** lo * NAnalyticPoly([Kp.coeffs[lo:]])(zz)).max()
            worst = max(worst, val / bound)
    Q = [float(math.exp(row.max())) for row in log_q]
    tail_start = max(1, nb - max(1, nb // 10))
    settled = all(row[tail_start:].max() <= row[:tail_start].max() for row in log_q) if nb > 1 else True
    component_ok = bool(worst <= 1 + 1e-9 and settled)

    if radii is None:
        radii = recovery_radii(N)
    q_max = exp.q_max
    if M is None:
        M = 1 << int(math.ceil(math.log2(2 * q_max + 2 * N + 4)))
    samples = [sample_circle(exp.partial_sum, rr, M) for rr in radii]
    table = components_from_circles(samples, q_max=q_max)
    report = membership_report(table, k, uncertainty=uncertainty)
    return ConverseReport(k, component_ok, Q, float(worst), report,
                          {"settled": bool(settled), "radii": [float(x) for x in radii], "M": M})
