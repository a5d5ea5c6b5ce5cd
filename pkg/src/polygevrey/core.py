"""Holomorphic and N-analytic polynomials.

An N-analytic polynomial is stored as N holomorphic polynomials Q_0..Q_{N-1}
and represents P(z) = sum_p Q_p(z) conj(z)^p. Coefficients are dense complex
arrays, trimmed so that the zero polynomial has a unique (empty) form.
"""

import csv
import math
from functools import total_ordering

import numpy as np

from . import kernels


@total_ordering
class _NegInf:
    """Degree of the zero polynomial; below every nonnegative integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEG_INF"

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("NEG_INF")

    def __reduce__(self):
        return (_NegInf, ())


NEG_INF = _NegInf()


def _trim(c):
    c = np.asarray(c, dtype=np.complex128).ravel()
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1].copy() if nz.size else np.zeros(0, dtype=np.complex128)
    c.setflags(write=False)
    return c


class HoloPoly:
    """Holomorphic polynomial sum_q coeffs[q] z^q."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("HoloPoly is immutable")

    @property
    def degree(self):
        return NEG_INF if self.coeffs.size == 0 else self.coeffs.size - 1

    def is_zero(self):
        return self.coeffs.size == 0

    def __call__(self, z):
        if self.is_zero():
            return np.zeros_like(np.asarray(z, dtype=np.complex128))[()] + 0j
        return eval(NAnalyticPoly([self]), z)

    def derivative(self, m=1):
        c = self.coeffs
        if m == 0:
            return self
        if c.size <= m:
            return HoloPoly()
        fac = np.array([float(math.perm(q, m)) for q in range(m, c.size)])
        return HoloPoly(c[m:] * fac)

    def __eq__(self, other):
        return isinstance(other, HoloPoly) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __add__(self, other):
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=np.complex128)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return HoloPoly(out)

    def __neg__(self):
        return HoloPoly(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __repr__(self):
        return f"HoloPoly({self.coeffs.tolist()!r})"


class NAnalyticPoly:
    """N-analytic polynomial sum_p Q_p(z) conj(z)^p with exactly N components."""

    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(c if isinstance(c, HoloPoly) else HoloPoly(c) for c in components)
        if not comps:
            raise ValueError("order must be at least 1")
        object.__setattr__(self, "components", comps)

    def __setattr__(self, name, value):
        raise AttributeError("NAnalyticPoly is immutable")

    @classmethod
    def zero(cls, order):
        return cls([HoloPoly()] * order)

    @classmethod
    def from_array(cls, arr):
        """Build from an (N, D) array whose row p holds Q_p."""
        arr = np.atleast_2d(np.asarray(arr, dtype=np.complex128))
        return cls([HoloPoly(row) for row in arr])

    @classmethod
    def from_coefficients(cls, entries, order):
        """Build from a mapping (p, q) -> coefficient."""
        width = 1 + max((q for (_, q) in entries), default=-1)
        arr = np.zeros((order, max(width, 1)), dtype=np.complex128)
        for (p, q), v in entries.items():
            arr[p, q] += v
        return cls.from_array(arr)

    @property
    def order(self):
        return len(self.components)

    def to_array(self, width=None):
        """Dense (N, width) coefficient array, zero padded."""
        if width is None:
            width = max(1, max(c.coeffs.size for c in self.components))
        arr = np.zeros((self.order, width), dtype=np.complex128)
        for p, c in enumerate(self.components):
            arr[p, : c.coeffs.size] = c.coeffs[:width]
        return arr

    def to_coefficients(self):
        """Mapping (p, q) -> a_{p,q} over nonzero coefficients."""
        return {
            (p, q): complex(v)
            for p, c in enumerate(self.components)
            for q, v in enumerate(c.coeffs)
            if v != 0
        }

    def is_zero(self):
        return all(c.is_zero() for c in self.components)

    def __call__(self, z):
        return eval(self, z)

    def __eq__(self, other):
        return isinstance(other, NAnalyticPoly) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def _binary(self, other, sign):
        n = max(self.order, other.order)
        zero = HoloPoly()
        a = self.components + (zero,) * (n - self.order)
        b = other.components + (zero,) * (n - other.order)
        return NAnalyticPoly([x + y if sign > 0 else x - y for x, y in zip(a, b)])

    def __add__(self, other):
        return self._binary(other, 1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __neg__(self):
        return NAnalyticPoly([-c for c in self.components])

    def scale(self, s):
        return NAnalyticPoly([HoloPoly(c.coeffs * s) for c in self.components])

    def __repr__(self):
        return f"NAnalyticPoly(order={self.order}, degree={degree(self)!r})"


def eval(P, z):
    """Evaluate P at z (scalar or array); Horner in z per component, then in conj(z)."""
    z_arr = np.asarray(z, dtype=np.complex128)
    if P.is_zero():
        out = np.zeros(z_arr.shape, dtype=np.complex128)
    else:
        flat = kernels.horner_eval(P.to_array(), z_arr.ravel())
        out = np.asarray(flat).reshape(z_arr.shape)
    return complex(out) if out.ndim == 0 else out


def degree(P):
    degs = [c.degree for c in P.components if not c.is_zero()]
    return max(degs) if degs else NEG_INF


def dbar_pow(P, m):
    """Apply (d/d conj z)^m exactly; the result has order max(N - m, 1)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return P
    n = P.order
    comps = []
    for p in range(m, n):
        comps.append(HoloPoly(P.components[p].coeffs * float(math.perm(p, m))))
    comps += [HoloPoly()] * (max(n - m, 1) - len(comps))
    return NAnalyticPoly(comps)


def dz_pow(P, m):
    """Apply (d/dz)^m exactly to every component."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return NAnalyticPoly([c.derivative(m) for c in P.components])


def _taylor_shift(c, center):
    """Coefficients of Q(center + w) in powers of w."""
    out = np.zeros_like(c)
    for q in range(c.size - 1, -1, -1):
        # Horner on polynomials: out <- out * (center + w) + c[q]
        out[1:] = out[1:] * center + out[:-1]
        out[0] = out[0] * center + c[q]
    return out


def translate(P, center):
    """The N-analytic polynomial w -> P(center + w)."""
    n = P.order
    width = max(1, max(c.coeffs.size for c in P.components))
    shifted = [_taylor_shift(P.to_array(width)[p], center) for p in range(n)]
    cb = np.conj(center)
    comps = []
    for i in range(n):
        acc = np.zeros(width, dtype=np.complex128)
        for p in range(i, n):
            acc += math.comb(p, i) * cb ** (p - i) * shifted[p]
        comps.append(acc)
    return NAnalyticPoly.from_array(np.array(comps))


def random_poly(order, max_degree, seed):
    """Random P with coefficients uniform on [0,1) + i[0,1); deterministic in seed."""
    if order < 1 or max_degree < 0:
        raise ValueError("need order >= 1 and max_degree >= 0")
    rng = np.random.default_rng(seed)
    shape = (order, max_degree + 1)
    return NAnalyticPoly.from_array(rng.random(shape) + 1j * rng.random(shape))


COEFF_HEADER = ("component", "power", "re", "im")


def write_coefficient_csv(path, entries):
    """Write mapping (p, q) -> value as ``component,power,re,im`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COEFF_HEADER)
        for (p, q) in sorted(entries):
            v = complex(entries[(p, q)])
            if v != 0:
                w.writerow((p, q, repr(v.real), repr(v.imag)))


def read_coefficient_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    out = {}
    for r in rows:
        key = (int(r["component"]), int(r["power"]))
        out[key] = out.get(key, 0) + complex(float(r["re"]), float(r["im"]))
    return out
