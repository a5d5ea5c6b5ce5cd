"""Stretched-exponential coefficient decay |a_p| <= alpha exp(-beta p^(k/(k+1))).

A component is accepted when the fitted decay is genuinely of this type:
positive beta, a tail slope that does not flatten (power laws flatten on the
p^(k/(k+1)) scale, geometric decay steepens), and either a small one-sided
residual or a tail that decays at least as fast as the fit.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData, NegativeBeta

FIT_SKIP = 8
TOLERANCE = 0.5
TAIL_FLATTENING = 0.9
NOISE_FACTOR = 10.0


@dataclass
class GevreyDecayModel:
    k: float
    alpha: float
    beta: float
    fit_range: tuple
    residual: float
    tail_beta: float = math.nan
    accepted: bool = False
    reason: str = ""

    def to_dict(self):
        return {
            "k": self.k,
            "alpha": self.alpha,
            "beta": self.beta,
            "fit_range": list(self.fit_range),
            "residual": self.residual,
            "tail_beta": self.tail_beta,
            "accepted": self.accepted,
            "reason": self.reason,
        }


def _line(x, y):
    A = np.column_stack([np.ones_like(x), -x])
    (c0, c1), *_ = np.linalg.lstsq(A, y, rcond=None)
    return c0, c1


def fit_decay(moduli, k, p_min=FIT_SKIP, tol=TOLERANCE, floor=None):
    """Least-squares fit of ln|a_p| against -p^(k/(k+1)) for p >= p_min.

    Zero moduli, and moduli at or below ``floor`` (per-coefficient noise
    level) are skipped. Raises InsufficientData or NegativeBeta.
    """
    mod = np.abs(np.asarray(moduli, dtype=float))
    p = np.arange(mod.size)
    keep = mod > 0
    if floor is not None:
        keep &= mod > np.asarray(floor, dtype=float)
    if keep.sum() < 8:
        raise InsufficientData("need at least 8 nonzero moduli", count=int(keep.sum()))
    sel = keep & (p >= p_min)
    if sel.sum() < 2:
        raise InsufficientData("fewer than 2 moduli in the fit range")
    pp = p[sel]
    x = pp ** (k / (k + 1))
    y = np.log(mod[sel])
    c0, beta = _line(x, y)
    if not beta > 0:
        raise NegativeBeta("fitted slope is not positive", beta=float(beta))
    resid = float(np.max(y - (c0 - beta * x)))
    half = x.size // 2
    tail_beta = float(_line(x[half:], y[half:])[1]) if x.size - half >= 2 else float(beta)
    steady = tail_beta >= TAIL_FLATTENING * beta
    dominated = tail_beta >= beta
    accepted = bool(steady and (resid <= tol or dominated))
    if accepted:
        reason = "ok"
    elif not steady:
        reason = "tail flattens"
    else:
        reason = "residual above tolerance"
    return GevreyDecayModel(
        k=k,
        alpha=float(math.exp(c0)),
        beta=float(beta),
        fit_range=(int(pp[0]), int(pp[-1])),
        residual=resid,
        tail_beta=tail_beta,
        accepted=accepted,
        reason=reason,
    )


def _lemma_log_term(n, x, k):
    return (1 + 1 / k) * n * math.log(n) + n * math.log(x)


def lemma_infimum_candidates(p, P0, k):
    x = (1 + math.e * P0) / p
    r_p = math.floor(math.exp(-1) * (1 + math.e * P0) ** (-k / (k + 1)) * p ** (k / (k + 1)))
    return [n for n in (r_p, r_p + 1) if n >= 1], x


def lemma_infimum(p, P0, k):
    """min over n in {r_p, r_p + 1}, n >= 1, of n^{(1+1/k) n} ((1 + e P0)/p)^n."""
    cands, x = lemma_infimum_candidates(p, P0, k)
    return math.exp(min(_lemma_log_term(n, x, k) for n in cands))


@dataclass
class MembershipReport:
    k: float
    models: list
    errors: dict = field(default_factory=dict)
    trivial: list = field(default_factory=list)

    @property
    def offending(self):
        out = sorted(self.errors)
        out += [p for p, m in enumerate(self.models) if m is not None and not m.accepted]
        return sorted(set(out))

    @property
    def verdict(self):
        return not self.offending

    def to_dict(self):
        return {
            "k": self.k,
            "verdict": "accepted" if self.verdict else "rejected",
            "offending": self.offending,
            "trivial": self.trivial,
            "components": [m.to_dict() if m is not None else None for m in self.models],
            "errors": {str(p): e for p, e in self.errors.items()},
        }


def membership_report(table, k, tol=TOLERANCE, use_noise=True, uncertainty=0.0):
    """Fit every component of a coefficient table independently.

    ``uncertainty`` is a known bound on the error of every coefficient (for
    instance from truncating a convergent sequence); it joins the numerical
    noise estimate in the floor below which moduli are ignored. Components
    with fewer than 8 coefficients above the floor, or fewer than 2 of them
    in the fit range, are finite and accepted trivially.
    """
    noise = table.diagnostics.get("noise") if use_noise else None
    models, errors, trivial = [], {}, []
    for p in range(table.order):
        mod = table.moduli(p)
        level = np.maximum(noise[p] if noise is not None else 0.0, uncertainty)
        floor = NOISE_FACTOR * level if np.any(level > 0) else None
        above = mod > (floor if floor is not None else 0)
        # below the floor from FIT_SKIP on, the component is finite up to noise
        if above.sum() < 8 or above[FIT_SKIP:].sum() < 2:
            models.append(None)
            trivial.append(p)
            continue
        try:
            models.append(fit_decay(mod, k, tol=tol, floor=floor))
        except (InsufficientData, NegativeBeta) as exc:
            models.append(None)
            errors[p] = exc.code
    return MembershipReport(k, models, errors, trivial)
