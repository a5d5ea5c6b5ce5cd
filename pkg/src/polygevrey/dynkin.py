"""Fundamental solution of dbar^N, Pompeiu reconstruction and smooth extensions.

The extension of a certified block expansion is F = sum_n h_n P_n, where
h_n is a radial C-infinity cutoff equal to 1 on the disk of radius
1 + (A/4) max(n,1)^(-1/k) and 0 outside radius 1 + (A/3) max(n,1)^(-1/k).
Since each P_n is N-analytic, dbar^N F only lives in the cutoff shells.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .bounds import check_appendix_82, log_factorial
from .core import NAnalyticPoly, dbar_pow
from .decompose import unit_roots
from .errors import DomainError, GridTooCoarse, InsufficientData, SingularPoint, Uncertified
from .sampling import polar_grid

FLOOR = 1e-300
MAX_GL_ORDER = 96


# ---------------------------------------------------------------- kernel

def vN_kernel(z, N):
    """conj(z)^(N-1) / (pi (N-1)! z)."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z == 0):
        raise SingularPoint("kernel is singular at z = 0")
    if N <= 20:
        out = np.conj(z) ** (N - 1) / (math.pi * math.factorial(N - 1) * z)
    else:
        out = np.exp((N - 1) * np.log(np.conj(z)) - np.log(z) - math.lgamma(N) - math.log(math.pi))
    return complex(out) if out.ndim == 0 else out


def kernel_derivative_coeff(N, l, m):
    """Constant c with d^l/dz^l d^m/dconj(z)^m V_N(z) = c z^(-l-1) conj(z)^(N-1-m).

    Zero when m >= N.
    """
    if m >= N:
        return 0.0
    return (-1) ** l * math.factorial(l) / (math.pi * math.factorial(N - 1 - m))


def centered_disk_integral(N, radius):
    """Integral of V_N over a disk centred at the singularity.

    In polar form V_N(r e^{it}) = r^(N-2) e^{-iNt} / (pi (N-1)!), whose angular
    mean vanishes for every N >= 1, so the integral is zero.
    """
    return 0.0


# ---------------------------------------------------------------- grids

@dataclass(frozen=True)
class Grid2D:
    half_width: float
    resolution: int

    def __post_init__(self):
        if self.resolution < 64:
            raise DomainError("resolution must be at least 64")

    @property
    def h(self):
        return 2 * self.half_width / self.resolution

    @property
    def cell_area(self):
        return self.h ** 2

    def axis(self):
        return -self.half_width + (np.arange(self.resolution) + 0.5) * self.h

    def nodes(self):
        x = self.axis()
        return x[None, :] + 1j * x[:, None]  # [iy, ix]

    def cell_index(self, z):
        i = int(math.floor((z.real + self.half_width) / self.h))
        j = int(math.floor((z.imag + self.half_width) / self.h))
        return j, i

    def coarsen(self):
        return Grid2D(self.half_width, self.resolution // 2)


# ---------------------------------------------------------------- smooth cutoff

def _jet_mul(a, b):
    out = np.zeros_like(a)
    for j in range(a.shape[0]):
        out[j] = np.sum(a[: j + 1] * b[j::-1], axis=0)
    return out


def _jet_recip(a):
    out = np.zeros_like(a)
    out[0] = 1 / a[0]
    for j in range(1, a.shape[0]):
        out[j] = -out[0] * np.sum(a[1 : j + 1] * out[j - 1 :: -1], axis=0)
    return out


def _jet_exp(a):
    out = np.zeros_like(a)
    out[0] = np.exp(a[0])
    for j in range(1, a.shape[0]):
        i = np.arange(1, j + 1)[:, None]
        out[j] = np.sum(i * a[1 : j + 1] * out[j - 1 :: -1], axis=0) / j
    return out


def _g_jet(u):
    """Taylor jet of exp(-1/u) (zero for u <= 0) given the jet of u."""
    out = np.zeros_like(u)
    live = u[0] > 1.0 / 700
    if live.any():
        out[:, live] = _jet_exp(-_jet_recip(u[:, live]))
    return out


def transition_jet(t, order):
    """Derivatives 0..order of S(t) = g(t)/(g(t)+g(1-t)), g(t) = exp(-1/t).

    Computed by Taylor-mode arithmetic, so they are exact up to rounding.
    Returns an array of shape (order+1,) + t.shape.
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    ones = np.zeros((order + 1, flat.size))
    tj = ones.copy()
    tj[0] = flat
    if order >= 1:
        tj[1] = 1.0
    uj = -tj
    uj[0] = 1 - flat
    g0 = _g_jet(tj)
    g1 = _g_jet(uj)
    coef = _jet_mul(g0, _jet_recip(g0 + g1))
    fact = np.array([math.factorial(j) for j in range(order + 1)], dtype=float)[:, None]
    return (coef * fact).reshape((order + 1,) + t.shape)


def richardson_derivative(f, x, order, h):
    """Centered finite-difference derivative of ``order`` with two-level Richardson."""
    from math import comb

    def fd(step):
        acc = 0.0
        for i in range(order + 1):
            acc = acc + (-1) ** i * comb(order, i) * f(x + (order / 2 - i) * step)
        return acc / step ** order

    return (4 * fd(h / 2) - fd(h)) / 3


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoff, 1 for |z| <= inner and 0 for |z| >= outer.

    The transition runs in s = |z|^2, which keeps dbar derivatives simple:
    dbar^j h = h^(j)(s) z^j.
    """

    inner: float
    outer: float
    profile: str = "exp(-1/t)"

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise DomainError("need 0 < inner < outer")

    def s_jet(self, s, order):
        """Derivatives of h with respect to s = |z|^2, shape (order+1,) + s.shape."""
        s0, s1 = self.inner ** 2, self.outer ** 2
        t = (np.asarray(s, dtype=float) - s0) / (s1 - s0)
        jet = -transition_jet(np.clip(t, 0.0, 1.0), order)
        jet[0] += 1.0
        scale = (1.0 / (s1 - s0)) ** np.arange(order + 1)
        return jet * scale.reshape((-1,) + (1,) * t.ndim)

    def __call__(self, z):
        return self.s_jet(np.abs(z) ** 2, 0)[0]

    def dbar(self, z, order):
        """[dbar^j h](z) for j = 0..order."""
        z = np.asarray(z, dtype=np.complex128)
        jet = self.s_jet(np.abs(z) ** 2, order)
        zp = z[None] ** np.arange(order + 1).reshape((-1,) + (1,) * z.ndim)
        return jet * zp


@dataclass(frozen=True)
class BumpFunction:
    """phi = B(|z|) g(z) with B a CutoffSpec and g a polyanalytic polynomial.

    phi is smooth with compact support, and dbar^N phi is exact through the
    Leibniz rule, so it serves as a test function for the Pompeiu formula.
    """

    g: NAnalyticPoly
    cutoff: CutoffSpec = CutoffSpec(0.5, 0.9)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return self.cutoff(z) * self.g(z)

    def dbarN(self, z, N):
        z = np.asarray(z, dtype=np.complex128)
        hj = self.cutoff.dbar(z, N)
        out = np.zeros(z.shape, dtype=np.complex128)
        for j in range(N + 1):
            gj = dbar_pow(self.g, N - j) if N - j > 0 else self.g
            if not gj.is_zero():
                out += math.comb(N, j) * hj[j] * gj(z)
        return out


def bump_corpus():
    """Test functions B(|z|) g(z) with g in {conj(z), z conj(z)^2 + 1, z^3 - 2i conj(z)}."""
    gs = [
        NAnalyticPoly.from_coefficients({(1, 0): 1}, 2),
        NAnalyticPoly.from_coefficients({(2, 1): 1, (0, 0): 1}, 3),
        NAnalyticPoly.from_coefficients({(0, 3): 1, (1, 0): -2j}, 2),
    ]
    return [BumpFunction(g) for g in gs]


# ---------------------------------------------------------------- Pompeiu

def _grid_estimate(dbarN_phi, z, grid, N):
    """Midpoint rule with singularity subtraction.

    The kernel integrates any radial weight centred at z to zero, so the
    density d(zeta) may be replaced by d(zeta) - d(z) chi(|zeta - z|) for a
    smooth radial bump chi with chi(0) = 1. The modified integrand is bounded
    near z, which removes the O(h) error of the near-singular cells.
    """
    nodes = grid.nodes()
    zeta = nodes.ravel()
    dens = np.asarray(dbarN_phi(nodes), dtype=np.complex128).ravel()
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    dz = np.asarray(dbarN_phi(z), dtype=np.complex128)
    out = np.empty(z.size, dtype=np.complex128)
    for i, zi in enumerate(z):
        edge = grid.half_width - max(abs(zi.real), abs(zi.imag))
        rho = min(0.25 * grid.half_width, edge)
        w = dens
        if rho > 4 * grid.h and dz[i] != 0:
            chi = CutoffSpec(0.5 * rho, rho)(zeta - zi)
            w = dens - dz[i] * chi
        # a node at z itself carries a zero weight after subtraction and is skipped
        s = kernels.pompeiu_sum(np.array([zi]), zeta, w * grid.cell_area, N)[0]
        out[i] = s / (math.pi * math.factorial(N - 1)) + dz[i] * centered_disk_integral(N, rho)
    return out


def pompeiu_reconstruct(phi, dbarN_phi, z, grid, N, tol=5e-3):
    """Midpoint-rule estimate of the integral of V_N(z - zeta) dbar^N phi(zeta).

    Returns (estimate, indicator), where the indicator is the change against
    the grid with half the resolution. Raises GridTooCoarse when the
    indicator exceeds 10 tol. ``phi`` is only used for its support and may be
    None.
    """
    est = _grid_estimate(dbarN_phi, z, grid, N)
    coarse = _grid_estimate(dbarN_phi, z, grid.coarsen(), N) if grid.resolution >= 128 else est
    ind = np.abs(est - coarse)
    if np.any(ind > 10 * tol):
        raise GridTooCoarse(f"indicator {ind.max():.3e} exceeds {10 * tol:g}", indicator=float(ind.max()))
    if np.ndim(z) == 0:
        return complex(est[0]), float(ind[0])
    return est, ind


# ---------------------------------------------------------------- extension

def _eval_from(P, lo, z):
    """P(z) for a polynomial whose powers of z all lie at or above ``lo``."""
    arr = P.to_array()[:, lo:]
    return z ** lo * NAnalyticPoly.from_array(arr)(z)


class Extension:
    """F = sum_n h_n P_n evaluable anywhere, with its exact dbar^N field."""

    def __init__(self, exp, A):
        if exp.cert is None:
            raise Uncertified("expansion has no certificate")
        if not 0 < A < 1:
            raise DomainError("A must lie in (0, 1)")
        self.exp = exp
        self.A = A
        self.N = exp.order
        self.k = exp.k
        self.cutoffs = []
        for n in range(len(exp.blocks)):
            sc = max(n, 1) ** (-1.0 / exp.k)
            self.cutoffs.append(CutoffSpec(1 + 0.25 * A * sc, 1 + A / 3 * sc))
        self.support_radius = 1 + A
        # dbar^(N-j) of every block, computed once
        self._dbar_blocks = [[dbar_pow(P, self.N - j) for j in range(self.N + 1)] for P in exp.blocks]

    def value(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        r = np.abs(z)
        for n, cut in enumerate(self.cutoffs):
            if self.exp.blocks[n].is_zero():
                continue
            live = r < cut.outer
            if live.any():
                zl = z[live]
                out[live] += cut(zl) * self.exp.eval_block(n, zl)
        return out

    def dbarN(self, z):
        """Exact dbar^N F by the Leibniz rule against the cutoff jets."""
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        r = np.abs(z)
        N = self.N
        for n, cut in enumerate(self.cutoffs):
            if self.exp.blocks[n].is_zero():
                continue
            shell = (r > cut.inner) & (r < cut.outer)
            if not shell.any():
                continue
            zs = z[shell]
            hj = cut.dbar(zs, N)
            acc = np.zeros(zs.shape, dtype=np.complex128)
            for j in range(1, N + 1):
                Pj = self._dbar_blocks[n][j]
                if Pj.is_zero():
                    continue
                acc += math.comb(N, j) * hj[j] * _eval_from(Pj, self.exp.ranges_start[n], zs)
            out[shell] += acc
        return out

    def breakpoints(self):
        pts = {1.0, self.support_radius}
        for cut in self.cutoffs:
            pts.update((cut.inner, cut.outer))
        return np.array(sorted(pts))


@dataclass
class ExtensionField:
    grid: Grid2D
    values: np.ndarray
    dbarN: np.ndarray
    support_radius: float
    N: int
    k: float
    n_shells: int = 0
    extension: Extension = field(default=None, repr=False, compare=False)

    def header(self):
        return {
            "half_width": self.grid.half_width,
            "resolution": self.grid.resolution,
            "support_radius": self.support_radius,
            "N": self.N,
            "k": self.k,
            "n_shells": self.n_shells,
        }

    def write(self, prefix):
        """Write ``prefix.json`` (header) and ``prefix.csv`` (nonzero nodes)."""
        prefix = Path(prefix)
        prefix.with_suffix(".json").write_text(json.dumps(self.header(), indent=2, sort_keys=True))
        lines = ["ix,iy,re,im,dbar_re,dbar_im"]
        iy, ix = np.nonzero((self.values != 0) | (self.dbarN != 0))
        for y, x in zip(iy, ix):
            v, d = complex(self.values[y, x]), complex(self.dbarN[y, x])
            lines.append(f"{x},{y},{v.real!r},{v.imag!r},{d.real!r},{d.imag!r}")
        prefix.with_suffix(".csv").write_text("\n".join(lines) + "\n")

    @classmethod
    def read(cls, prefix):
        prefix = Path(prefix)
        h = json.loads(prefix.with_suffix(".json").read_text())
        grid = Grid2D(h["half_width"], h["resolution"])
        vals = np.zeros((grid.resolution, grid.resolution), dtype=np.complex128)
        dbar = np.zeros_like(vals)
        rows = prefix.with_suffix(".csv").read_text().splitlines()[1:]
        for row in rows:
            x, y, a, b, c, d = row.split(",")
            vals[int(y), int(x)] = complex(float(a), float(b))
            dbar[int(y), int(x)] = complex(float(c), float(d))
        return cls(grid, vals, dbar, h["support_radius"], h["N"], h["k"], h.get("n_shells", 0))


def build_extension(exp, A, grid):
    """Evaluate the cutoff extension and its dbar^N field on a square grid."""
    ext = Extension(exp, A)
    if grid.half_width < ext.support_radius:
        raise DomainError("grid square must contain the support disk")
    nodes = grid.nodes()
    return ExtensionField(grid, ext.value(nodes), ext.dbarN(nodes), ext.support_radius,
                          ext.N, ext.k, len(ext.cutoffs), ext)


# ---------------------------------------------------------------- decay fit

@dataclass
class DecayFit:
    C1: float
    C2: float
    residual: float
    n_points: int

    def to_dict(self):
        return {"C1": self.C1, "C2": self.C2, "residual": self.residual, "n_points": self.n_points}


def shell_bounds(A, k, n_shells):
    """(inner, outer) radii of the cutoff transition shells."""
    sc = np.maximum(np.arange(n_shells), 1) ** (-1.0 / k)
    return 1 + 0.25 * A * sc, 1 + A / 3 * sc


def shell_peaks(fld, k, n_radial=100, n_angles=64):
    """Largest |dbar^N F| in each cutoff shell and the radius where it occurs.

    With the live extension attached, each shell is sampled exactly on
    ``n_radial`` radii times ``n_angles`` angles; otherwise the grid nodes
    falling inside each shell are used (thin shells may then be missed).
    """
    A = fld.support_radius - 1
    ext = fld.extension
    if ext is not None:
        inner = np.array([c.inner for c in ext.cutoffs])
        outer = np.array([c.outer for c in ext.cutoffs])
    else:
        inner, outer = shell_bounds(A, k, max(fld.n_shells, 1))
    radii, peaks = [], []
    if ext is not None:
        w = unit_roots(n_angles)
        frac = np.linspace(0, 1, n_radial + 2)[1:-1]
        u = inner[:, None] + (outer - inner)[:, None] * frac[None, :]
        d = np.abs(ext.dbarN(u[:, :, None] * w[None, None, :])).max(axis=2)
        i = np.argmax(d, axis=1)
        radii = list(u[np.arange(u.shape[0]), i])
        peaks = list(d[np.arange(u.shape[0]), i])
    else:
        r = np.abs(fld.grid.nodes())
        mag = np.abs(fld.dbarN)
        for a, b in zip(inner, outer):
            s = (r > a) & (r < b)
            if not s.any():
                radii.append(np.nan)
                peaks.append(0.0)
                continue
            i = int(np.argmax(np.where(s, mag, -1.0)))
            radii.append(r.ravel()[i])
            peaks.append(mag.ravel()[i])
    return np.array(radii), np.array(peaks)


def dbar_decay_fit(fld, k, skip=16):
    """Fit |dbar^N F| <= C1 exp(-C2 (|z|-1)^-k) off the closed disk.

    The field is reduced to one point per cutoff shell, its peak modulus, and
    ln(peak) is regressed against -(|z|-1)^-k over the shells n >= skip
    (the first shells overlap and form a plateau below the asymptotic line),
    or over all shells when fewer than 3 lie there. C1 is lifted so the bound
    covers every shell; the reported residual is the one-sided residual on
    the fit range.
    """
    rad, peaks = shell_peaks(fld, k)
    n = np.arange(peaks.size)
    ok = (peaks > FLOOR) & np.isfinite(rad)
    if ok.sum() < 3:
        raise InsufficientData("fewer than 3 cutoff shells carry dbar^N data")
    sel = ok & (n >= skip)
    if sel.sum() < 3:
        sel = ok
    x = (rad[sel] - 1) ** (-k)
    y = np.log(peaks[sel])
    Am = np.column_stack([np.ones_like(x), -x])
    (c0, c2), *_ = np.linalg.lstsq(Am, y, rcond=None)
    resid = float(np.max(y - (c0 - c2 * x)))
    xa = (rad[ok] - 1) ** (-k)
    lift = max(0.0, float(np.max(np.log(peaks[ok]) - (c0 - c2 * xa))))
    return DecayFit(float(math.exp(c0 + lift)), float(c2), resid, int(sel.sum()))


# ---------------------------------------------------------------- converse side

def psi_kernel_bound(l, B, k, R0, N=1, n_u=2000, n_z_radii=24, n_z_angles=96):
    """Sampled sup of exp(-B(|zeta|-1)^-k) l! max(|z-zeta|,1)^(N-1) / (pi |z-zeta|^(l+1)).

    z runs over the closed unit disk and zeta over 1 < |zeta| <= 1 + 2 R0/3;
    rotation invariance puts zeta on the positive axis. Returns a dict with
    the sup, the envelope D2^(l+1) l^((1+1/k) l) max(2 + 2R0/3, 1)^(N-1) / pi
    (D2 fitted over 0..max(l,1)) and the verdict.
    """
    u = (2 * R0 / 3) * np.geomspace(1e-4, 1.0, n_u)
    z = polar_grid(0.0, 1.0, n_z_radii, n_z_angles)
    d = np.abs((1 + u)[:, None] - z[None, :])
    logv = (-B * u[:, None] ** (-k) + log_factorial(l) - (l + 1) * np.log(d)
            + (N - 1) * np.log(np.maximum(d, 1.0)) - math.log(math.pi))
    log_sup = float(logv.max())
    # D2 is fitted on the same samples, so the envelope is attained exactly where it is fitted
    rep = check_appendix_82(B, R0, k, max(l, 1), n_u, n_z_radii, n_z_angles)
    D2 = rep.parameters["D2"]
    pw = (1 + 1 / k) * l * math.log(l) if l > 0 else 0.0
    log_env = (l + 1) * math.log(D2) + pw + (N - 1) * math.log(2 + 2 * R0 / 3) - math.log(math.pi)
    return {"l": l, "sup": math.exp(log_sup), "envelope": math.exp(log_env), "D2": D2,
            "holds": bool(log_sup <= log_env + 1e-12)}


def polar_rule(ext, n_angles=None, gl_order=12):
    """Nodes and weights on the annulus 1 <= |zeta| <= 1 + A, split at every cutoff edge.

    Gauss-Legendre panels in the radius resolve every cutoff shell; the
    trapezoid rule in the angle is exact for the trigonometric content of the
    blocks once n_angles exceeds twice the top power.
    """
    if n_angles is None:
        n_angles = 1 << int(math.ceil(math.log2(2 * (ext.exp.q_max + ext.N + 16))))
    x, wx = np.polynomial.legendre.leggauss(gl_order)
    bp = ext.breakpoints()
    rs, wr = [], []
    for a, b in zip(bp[:-1], bp[1:]):
        rs.append(0.5 * (b - a) * x + 0.5 * (a + b))
        wr.append(0.5 * (b - a) * wx)
    rs = np.concatenate(rs)
    wr = np.concatenate(wr)
    w = unit_roots(n_angles)
    zeta = (rs[:, None] * w[None, :]).ravel()
    weights = ((wr * rs)[:, None] * np.full(n_angles, 2 * math.pi / n_angles)[None, :]).ravel()
    return zeta, weights


@dataclass
class ConverseMembership:
    verdict: bool
    P: float
    derivatives: dict
    gate: list
    indicator: float
    points: list

    def to_dict(self):
        return {
            "verdict": "accepted" if self.verdict else "rejected",
            "P": self.P,
            "indicator": self.indicator,
            "gate": self.gate,
            "derivatives": {f"{l},{m}": [abs(v) for v in vals] for (l, m), vals in self.derivatives.items()},
        }


def pompeiu_derivatives(ext, z, max_order=6, n_angles=None, gl_order=12):
    """d^l/dz^l d^m/dconj(z)^m of F at interior points by differentiating under the integral."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    zeta, w = polar_rule(ext, n_angles, gl_order)
    dens = ext.dbarN(zeta) * w
    live = dens != 0
    zeta, dens = zeta[live], dens[live]
    N = ext.N
    out = {}
    for order in range(max_order + 1):
        for m in range(order + 1):
            l = order - m
            c = kernel_derivative_coeff(N, l, m)
            if c == 0.0:
                out[(l, m)] = np.zeros(z.shape, dtype=np.complex128)
                continue
            out[(l, m)] = c * kernels.kernel_sum(z, zeta, dens, N - 1 - m, l + 1)
    return out


def converse_membership(ext, C1, C2, k=None, points=None, max_order=6, gl_order=None, tol=1e-4):
    """Decay certificate implies membership: derivative growth of the reconstruction.

    The psi-kernel envelope is checked first for every order used (the gate);
    then mixed derivatives up to ``max_order`` are computed under the integral
    sign at interior points and a constant P with
    |d^(l+m) f| <= P^(l+m+1) (l+m)^((1+1/k)(l+m)) is fitted. The indicator is
    the largest change when the radial rule is coarsened. Without an explicit
    ``gl_order`` the radial panels start at 12 nodes and double (up to
    MAX_GL_ORDER) until the indicator meets ``tol``.
    """
    k = ext.k if k is None else k
    if C2 <= 0:
        raise DomainError("decay certificate needs C2 > 0")
    gate = [psi_kernel_bound(l, C2, k, ext.A, ext.N) for l in range(max_order + 1)]
    if not all(g["holds"] for g in gate):
        return ConverseMembership(False, math.inf, {}, gate, math.nan, [])
    if points is None:
        points = np.concatenate([[0j], polar_grid(0.3, 0.6, 2, 8, include_center=False)])
    orders = [gl_order] if gl_order is not None else [12, 24, 48, MAX_GL_ORDER]
    coarse = pompeiu_derivatives(ext, points, max_order, gl_order=orders[0] // 2)
    for g in orders:
        der = pompeiu_derivatives(ext, points, max_order, gl_order=g)
        scale = max(1.0, max(np.abs(v).max() for v in der.values()))
        ind = max(np.abs(der[key] - coarse[key]).max() for key in der) / scale
        if ind <= tol:
            break
        coarse = der
    if ind > tol:
        raise GridTooCoarse(f"radial rule change {ind:.3e} exceeds {tol:g}", indicator=float(ind))
    logP = 0.0
    for (l, m), v in der.items():
        j = l + m
        mx = np.abs(v).max()
        if mx > 0:
            pw = (1 + 1 / k) * j * math.log(j) if j > 0 else 0.0
            logP = max(logP, (math.log(mx) - pw) / (j + 1))
    verdict = bool(math.isfinite(logP))
    return ConverseMembership(verdict, math.exp(logP), der, gate, float(ind), [complex(p) for p in points])
