"""Explicit constants L_m, J_m and numeric verifiers for the inequalities.

Every check returns a :class:`BoundReport`. Quantities that overflow doubles
(factorials, l^l) are handled in log space.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, logsumexp

from .core import degree, translate
from .errors import DomainError
from .sampling import polar_grid, sup_on_annulus, sup_on_circle, sup_on_disk

REL_SLACK = 1e-12


@dataclass
class BoundReport:
    name: str
    parameters: dict
    lhs: float
    rhs: float
    margin: float = field(init=False)
    holds: bool = field(init=False)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.margin = self.rhs - self.lhs
        self.holds = bool(self.lhs <= self.rhs * (1 + REL_SLACK))

    def to_dict(self):
        params = {k: (float(v) if isinstance(v, (int, float, np.floating, np.integer)) else v)
                  for k, v in self.parameters.items()}
        return {
            "name": self.name,
            "parameters": params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "holds": self.holds,
        }


@dataclass(frozen=True)
class DilatedDiskSpec:
    k: float
    R: float
    n: int

    def __post_init__(self):
        if self.k <= 0 or self.R <= 0 or self.n < 1:
            raise DomainError("need k > 0, R > 0, n >= 1")

    def radius(self):
        return 1.0 + self.R * self.n ** (-1.0 / self.k)


def log_factorial(n):
    return float(gammaln(n + 1.0))


def lm(s):
    """L_m(s_1..s_{m-1}) for 1 < s_1 < ... < s_{m-1}."""
    s = np.asarray(s, dtype=float).ravel()
    if s.size == 0:
        raise DomainError("L_m needs m >= 2 (at least one node)")
    if np.any(s <= 1) or np.any(np.diff(s) <= 0):
        raise DomainError("nodes must satisfy 1 < s_1 < ... < s_{m-1}")
    m = s.size + 1
    s2 = s * s
    pref = np.prod((s2 + 1) / (s2 - 1))
    total = 0.0
    for p in range(s.size):
        others = np.delete(np.arange(s.size), p)
        total += s[p] ** (m - 1) * np.prod((s2[others] + 1) / np.abs(s2[others] - s2[p]))
    return float(pref * total)


def jm_nodes(m, r0, r):
    return 1 + np.arange(1, m) * (r - r0) / (m * r0)


def jm(m, r0, r):
    """J_m(r0, r) = L_m at nodes 1 + j (r - r0)/(m r0); J_1 = 1."""
    if not (r > r0 > 0):
        raise DomainError("need r > r0 > 0")
    if m < 1:
        raise DomainError("m must be >= 1")
    if m == 1:
        return 1.0
    return lm(jm_nodes(m, r0, r))


def check_estm1(m, eps):
    if m < 2:
        raise DomainError("the estimate is checked for m >= 2 only")
    if eps <= 0:
        raise DomainError("eps must be positive")
    lhs = jm(m, 1 + eps / 2, 1 + eps)
    log_rhs = math.log(m - 1) + (2 * m - 2) * (math.log(2.5 * m) + math.log1p(2 / eps))
    return BoundReport("estm1", {"m": m, "eps": eps}, lhs, math.exp(log_rhs))


def log_sup_power_decay(l, k, rho):
    if l == 0:
        return 0.0
    a = (l / k) * (math.log(2.0 / (math.e * k * math.log(1.0 / rho))) + math.log(l))
    return a


def sup_power_decay(l, k, rho):
    """sup_{t >= 0} t^(l/k) rho^(t/2), in closed form."""
    if not (0 < rho < 1) or k <= 0 or l < 0:
        raise DomainError("need l >= 0, k > 0, 0 < rho < 1")
    return math.exp(log_sup_power_decay(l, k, rho))


def sup_power_decay_grid(l, k, rho, n_grid=4001):
    """The same supremum by grid search plus bounded Brent refinement in log space."""
    if l == 0:
        return 1.0
    lr = math.log(rho)
    t_hi = 10 * l / (k * math.log(1 / rho)) + 10

    def neg(t):
        return -((l / k) * math.log(t) + 0.5 * t * lr) if t > 0 else math.inf

    ts = np.linspace(0, t_hi, n_grid)[1:]
    vals = (l / k) * np.log(ts) + 0.5 * ts * lr
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return math.exp(max(-res.fun, vals[i]))


def _rhs_constant_maxp0(order, r0, radii):
    if order == 1:
        return 1.0
    return lm(np.asarray(radii[1:], dtype=float) / r0)


def check_max_modulus(f, center=0j, r0=0.5, r=1.0, variant="maxp1", grid=1024,
                      radii=None, component=None, n_radii=32):
    """Sampled check of the max-modulus estimates for an N-analytic polynomial.

    maxp0: sup over the closed r0-disk vs L_N(r_1/r0, ..., r_{N-1}/r0) times
           the largest circle sup over radii r0 = r_0 < ... < r_{N-1} < r.
    maxp1: sup over the closed r0-disk vs J_N(r0, r) times the annulus sup.
    maxp2: sup of the p-th component about ``center`` vs J_N(r0, r) times the
           annulus sup divided by r0^p (every p unless ``component`` given).
    """
    if not (r > r0 > 0):
        raise DomainError("need r > r0 > 0")
    N = f.order
    params = {"N": N, "r0": r0, "r": r, "grid": grid, "center_re": center.real, "center_im": center.imag}
    if variant == "maxp0":
        if radii is None:
            radii = r0 + np.arange(N) * (r - r0) / N
        radii = np.asarray(radii, dtype=float)
        if radii.size != N or radii[0] != r0 or np.any(np.diff(radii) <= 0) or radii[-1] >= r:
            raise DomainError("maxp0 needs N radii r0 = r_0 < ... < r_{N-1} < r")
        lhs = sup_on_disk(f, r0, n_radii, grid, center)
        circ = max(sup_on_circle(f, rho, grid, center) for rho in radii)
        rhs = _rhs_constant_maxp0(N, r0, radii) * circ
        params.update({f"r_{j}": float(x) for j, x in enumerate(radii)})
        return BoundReport("maxp0", params, lhs, rhs)
    ann = sup_on_annulus(f, r0, r, n_radii, grid, center)
    J = jm(N, r0, r)
    if variant == "maxp1":
        return BoundReport("maxp1", params, sup_on_disk(f, r0, n_radii, grid, center), J * ann)
    if variant == "maxp2":
        local = translate(f, center)
        comps = range(N) if component is None else [component]
        pts = polar_grid(0.0, r0, n_radii, grid)
        # worst ratio over components, reported as a single lhs/rhs pair
        best = None
        for p in comps:
            Kp = local.components[p]
            lhs = float(np.abs(Kp(pts)).max()) if not Kp.is_zero() else 0.0
            rhs = J * ann / r0 ** p
            ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
            if best is None or ratio > best[0]:
                best = (ratio, p, lhs, rhs)
        params["component"] = best[1]
        return BoundReport("maxp2", params, best[2], best[3])
    raise DomainError(f"unknown variant {variant!r}")


def bw_constant(N):
    """(2^(N+1) - 1) J_N(1/2, 1)."""
    return (2 ** (N + 1) - 1) * jm(N, 0.5, 1.0)


def bw_constant_tight(N):
    """(2^N - 1) J_N(1/2, 1), the constant the geometric sum actually yields."""
    return (2 ** N - 1) * jm(N, 0.5, 1.0)


def check_bw(P, n, z, grid=1024, n_radii=32, constant="stated", disk_sup=None):
    """|P(z)| against C_N sup_{closed unit disk}|P| |z|^(n+N-1) for |z| > 1."""
    z = complex(z)
    if abs(z) <= 1:
        raise DomainError("need |z| > 1")
    if degree(P) > n:
        raise DomainError("degree(P) exceeds n")
    N = P.order
    C = bw_constant(N) if constant == "stated" else bw_constant_tight(N)
    if disk_sup is None:
        disk_sup = sup_on_disk(P, 1.0, n_radii, grid)
    lhs = abs(P(z))
    rhs = C * disk_sup * abs(z) ** (n + N - 1)
    name = "bw" if constant == "stated" else "bw_tight"
    return BoundReport(name, {"N": N, "n": n, "abs_z": abs(z), "constant": C}, lhs, rhs)


def _tail_vs_head(log_vals, ns):
    """Compare the max over the last decade of n against the max before it."""
    n_max = ns[-1]
    tail = ns > n_max / 10
    head = ~tail
    if not head.any():
        head = np.arange(ns.size) < max(1, ns.size // 2)
        tail = ~head
    return float(log_vals[tail].max()), float(log_vals[head].max())


def check_appendix_81(B, k, n_max):
    """g(n) e^{Bn/4} stays bounded: the last-decade max never exceeds the earlier max.

    parameters["D1"] is the overall max of g(n) e^{Bn/4}.
    """
    n = np.arange(1, n_max + 1, dtype=float)
    a = (k + 1) / k
    log_g = (-B * n + np.log((n + 1) ** a - n ** a + 1)
             + n ** a * np.log1p(0.5 * B * n ** (-1 / k)))
    vals = log_g + B * n / 4
    tail, head = _tail_vs_head(vals, n)
    D1 = math.exp(vals.max())
    return BoundReport("appendix_81", {"B": B, "k": k, "n_max": n_max, "D1": D1,
                                       "argmax_n": int(n[np.argmax(vals)])},
                       math.exp(tail), math.exp(head))


def appendix_82_sup(B, R, k, l, n_u=4000, n_z_radii=32, n_z_angles=64):
    """Sampled sup of exp(-B(|zeta|-1)^-k) l! / |z - zeta|^(l+1).

    The expression is invariant under a common rotation of z and zeta, so
    zeta is taken on the positive real axis, zeta = 1 + u with u sampled in
    (0, 2R/3]; z runs over a polar grid of the closed unit disk. Returns
    (log sup, u at the maximum).
    """
    u_max = 2 * R / 3
    u = u_max * np.geomspace(1e-4, 1.0, n_u)
    z = polar_grid(0.0, 1.0, n_z_radii, n_z_angles)
    # nearest grid point to each zeta dominates the kernel
    dist = np.min(np.abs((1 + u)[:, None] - z[None, :]), axis=1)
    logv = -B * u ** (-k) + log_factorial(l) - (l + 1) * np.log(dist)
    i = int(np.argmax(logv))
    return float(logv[i]), float(u[i])


def appendix_82_closed_form(B, k, l):
    """log of l! B^{-(l+1)/k} sup_t t^{(l+1)/k} e^{-t} (unconstrained in u)."""
    return log_factorial(l) + log_sup_power_decay(l + 1, k, math.exp(-2.0)) - (l + 1) / k * math.log(B)


def check_appendix_82(B, R, k, l_max, n_u=4000, n_z_radii=32, n_z_angles=64):
    """Fit D2 with sup_l <= D2^(l+1) l^((1+1/k) l) and check the envelope.

    lhs is the worst ratio sup_l / envelope_l (1 at the fitted D2); the
    closed-form route is an upper bound for every l and agrees with the grid
    whenever the maximizing u lies inside (0, 2R/3).
    """
    logs, implied, agree = [], [], []
    for l in range(l_max + 1):
        ls, u_star = appendix_82_sup(B, R, k, l, n_u, n_z_radii, n_z_angles)
        cf = appendix_82_closed_form(B, k, l)
        u_opt = (B * k / (l + 1)) ** (1 / k)
        interior = u_opt < 2 * R / 3
        agree.append(bool(ls <= cf + 1e-9 and (not interior or cf - ls < 1e-3)))
        logs.append(ls)
        pw = (1 + 1 / k) * l * math.log(l) if l > 0 else 0.0
        implied.append((ls - pw) / (l + 1))
    implied = np.array(implied)
    log_D2 = max(0.0, float(implied.max()))
    ratios = [logs[l] - (l + 1) * log_D2 - ((1 + 1 / k) * l * math.log(l) if l > 0 else 0.0)
              for l in range(l_max + 1)]
    steps = np.abs(np.diff(implied))
    params = {"B": B, "R": R, "k": k, "l_max": l_max, "D2": math.exp(log_D2),
              "closed_form_consistent": all(agree),
              "settling": bool(steps.size < 2 or steps[-1] <= steps[0])}
    return BoundReport("appendix_82", params, math.exp(max(ratios)), 1.0)


def check_appendix_83(B, k, N, n_max):
    """h(n) e^{Bn/4} stays bounded: last-decade max never exceeds the earlier max."""
    a = (k + 1) / k
    b = k / (k + 1)
    vals = np.empty(n_max)
    ratio_tail = []
    for n in range(1, n_max + 1):
        lo = math.ceil(n ** a - 1e-9)
        hi = math.ceil((n + 1) ** a - 1e-9)
        j = np.arange(lo, hi, dtype=float)
        if j.size == 0:
            vals[n - 1] = -np.inf
            continue
        first = np.logaddexp(0.0, B * (j ** b - (j - 1) ** b))
        second = (j + N) * math.log1p(B / 3 * n ** (-1 / k))
        vals[n - 1] = -B * n + logsumexp(first + second) + B * n / 4
    ns = np.arange(1, n_max + 1, dtype=float)
    tail, head = _tail_vs_head(vals, ns)
    fin = np.isfinite(vals)
    lh = vals[fin] - B * ns[fin] / 4
    ratio_tail = float(np.exp(lh[-1] - lh[-2])) if lh.size > 1 else 0.0
    return BoundReport("appendix_83", {"B": B, "k": k, "N": N, "n_max": n_max,
                                       "sup": float(np.exp(vals[fin].max())),
                                       "last_ratio": ratio_tail},
                       math.exp(tail), math.exp(head))
