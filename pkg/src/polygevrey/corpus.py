"""Deterministic test functions given by short id strings.

Accepted forms::

    gevrey:c=1,k=1,N=2,Q=512     a_q = exp(-c q^(k/(k+1)))
    geometric:r=0.5              a_q = r^q
    polynomial_decay:q=1         a_q = (q+1)^(-q_exp)
    finite:[1;1],N=2             a_q listed explicitly
    gevrey(1,1)                  positional parameters

Every component p < N carries the same sequence a_q, q <= Q, so the function
is sum_p sum_q a_q z^q conj(z)^p. Defaults: N=1, Q=512.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .core import NAnalyticPoly
from .decompose import CoefficientTable
from .errors import DomainError

DEFAULT_Q = 512
_PARAMS = {
    "gevrey": ("c", "k"),
    "geometric": ("r",),
    "polynomial_decay": ("q",),
    "finite": ("values",),
}
_DEFAULTS = {"gevrey": {"c": 1.0, "k": 1.0}, "geometric": {"r": 0.5}, "polynomial_decay": {"q": 1.0}}


@dataclass(frozen=True)
class CorpusFunction:
    id: str
    kind: str
    params: dict = field(hash=False)
    order: int = 1
    q_max: int = DEFAULT_Q

    def sequence(self):
        q = np.arange(self.q_max + 1, dtype=float)
        if self.kind == "gevrey":
            c, k = self.params["c"], self.params["k"]
            return np.exp(-c * q ** (k / (k + 1)))
        if self.kind == "geometric":
            return self.params["r"] ** q
        if self.kind == "polynomial_decay":
            return (q + 1) ** (-self.params["q"])
        vals = np.zeros(self.q_max + 1, dtype=np.complex128)
        v = self.params["values"]
        vals[: len(v)] = v
        return vals

    def table(self):
        seq = np.asarray(self.sequence(), dtype=np.complex128)
        return CoefficientTable(np.tile(seq, (self.order, 1)), {"corpus": self.id})

    def poly(self):
        return NAnalyticPoly.from_array(self.table().coeffs)

    @property
    def member(self):
        """Whether the function lies in the class for every k (untruncated)."""
        return self.kind != "polynomial_decay"

    def to_dict(self):
        out = {"id": self.id, "kind": self.kind, "N": self.order, "Q": self.q_max}
        out.update({k: (v if not isinstance(v, list) else [repr(x) for x in v])
                    for k, v in self.params.items()})
        return out


def _number(text):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return complex(text.replace("i", "j"))


def _split_top(text):
    """Split on commas outside square brackets."""
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        parts.append(cur)
    return [p.strip() for p in parts if p.strip()]


def parse_corpus(spec, order=None, q_max=None):
    """Parse a corpus id. ``order`` and ``q_max`` override the id's N and Q."""
    text = spec.strip()
    m = re.fullmatch(r"(\w+)\((.*)\)(?:,(.*))?", text)
    if m:
        kind, positional, rest = m.group(1), _split_top(m.group(2)), _split_top(m.group(3) or "")
    else:
        kind, _, body = text.partition(":")
        positional, rest = [], _split_top(body)
    kind = kind.strip()
    if kind not in _PARAMS:
        raise DomainError(f"unknown corpus kind {kind!r}")
    params = dict(_DEFAULTS.get(kind, {}))
    N, Q = 1, None
    items = [(name, val) for name, val in zip(_PARAMS[kind], positional)]
    for part in rest:
        if part.startswith("["):
            items.append(("values", part))
            continue
        key, eq, val = part.partition("=")
        if not eq:
            raise DomainError(f"expected key=value, got {part!r}")
        items.append((key.strip(), val.strip()))
    for key, val in items:
        if key == "N":
            N = int(val)
        elif key == "Q":
            Q = int(val)
        elif key == "values":
            inner = val.strip()
            if not (inner.startswith("[") and inner.endswith("]")):
                raise DomainError("finite values must be written [a;b;...]")
            params["values"] = [_number(x) for x in inner[1:-1].split(";") if x.strip()]
        elif key in _PARAMS[kind]:
            params[key] = float(val)
        else:
            raise DomainError(f"unknown parameter {key!r} for {kind}")
    if kind == "finite":
        if not params.get("values"):
            raise DomainError("finite corpus needs a value list")
        if Q is None:
            Q = len(params["values"]) - 1
    if order is not None:
        N = int(order)
    if q_max is not None:
        Q = int(q_max)
    if Q is None:
        Q = DEFAULT_Q
    if N < 1 or Q < 0:
        raise DomainError("N must be >= 1 and Q >= 0")
    if kind == "gevrey" and not (params["c"] > 0 and params["k"] > 0):
        raise DomainError("gevrey needs c > 0 and k > 0")
    if kind == "geometric" and not 0 < abs(params["r"]) < 1:
        raise DomainError("geometric needs 0 < |r| < 1")
    return CorpusFunction(text, kind, params, N, Q)
