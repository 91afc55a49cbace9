"""Sequence-space vectors: finitely many explicit entries plus a geometric tail.

The vector model is ``x_j = entries[j]`` where an entry exists, otherwise
``x_j = c * w**(j - s)`` inside the tail region ``j >= s``, otherwise ``0``.
Explicit entries override the tail.  All norm and pairing computations on
tails use closed forms, never truncation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "PNorm",
    "IndexDomain",
    "IndexSet",
    "GeometricTail",
    "SpVector",
    "norm",
    "duality_map",
    "project",
    "pairing",
    "vector_to_json",
    "vector_from_json",
]

_TAIL_RATIO_MAX = 1.0 - 1e-13


class IndexDomain(Enum):
    """Index set the vector lives over."""

    NATURALS = "naturals"
    INTEGERS = "integers"


@dataclass(frozen=True)
class PNorm:
    """Norm marker: either an l_p norm (1 <= p < inf) or the c0 sup norm."""

    kind: str  # "lp" or "c0"
    p: float = 0.0

    @staticmethod
    def lp(p: float) -> "PNorm":
        if not (1.0 <= p < math.inf):
            raise ValueError(f"p must lie in [1, inf), got {p}")
        return PNorm("lp", float(p))

    @staticmethod
    def c0() -> "PNorm":
        return PNorm("c0", 0.0)

    @property
    def is_c0(self) -> bool:
        return self.kind == "c0"

    def conjugate(self) -> "PNorm":
        """Norm used on the dual side (sup norm for p = 1 and for c0)."""
        if self.is_c0:
            return PNorm.lp(1.0)
        if self.p == 1.0:
            return PNorm.c0()
        return PNorm.lp(self.p / (self.p - 1.0))

    def label(self) -> str:
        return "c0" if self.is_c0 else f"l{self.p:g}"


@dataclass(frozen=True)
class GeometricTail:
    """Tail ``x_j = coeff * ratio**(j - start)`` for ``j >= start``."""

    start: int
    coeff: complex
    ratio: complex

    def __post_init__(self) -> None:
        if abs(self.ratio) > _TAIL_RATIO_MAX:
            raise ValueError(f"tail ratio must satisfy |w| < 1, got |w|={abs(self.ratio)}")
        if self.coeff == 0:
            raise ValueError("tail coefficient must be nonzero")

    def value(self, j: int) -> complex:
        if j < self.start:
            return 0.0
        return self.coeff * self.ratio ** (j - self.start)


@dataclass(frozen=True)
class IndexSet:
    """Finite set of indices, or the complement of one."""

    indices: tuple[int, ...]
    cofinite: bool = False

    @staticmethod
    def finite(indices: Iterable[int]) -> "IndexSet":
        return IndexSet(tuple(sorted(set(indices))), cofinite=False)

    @staticmethod
    def complement(indices: Iterable[int]) -> "IndexSet":
        return IndexSet(tuple(sorted(set(indices))), cofinite=True)

    def contains(self, j: int) -> bool:
        inside = j in set(self.indices)
        return inside != self.cofinite


def _normalized_entries(
    entries: Mapping[int, complex] | Iterable[tuple[int, complex]],
    tail: GeometricTail | None,
) -> tuple[tuple[int, complex], ...]:
    if isinstance(entries, Mapping):
        items = list(entries.items())
    else:
        items = list(entries)
    out: dict[int, complex] = {}
    for j, v in items:
        v = complex(v)
        if v == 0:
            continue
        out[int(j)] = v
    if tail is not None:
        # Drop entries that merely restate the tail value.
        for j in [j for j in out if j >= tail.start and out[j] == tail.value(j)]:
            del out[j]
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class SpVector:
    """Sparse-plus-geometric-tail vector."""

    entries: tuple[tuple[int, complex], ...] = ()
    tail: GeometricTail | None = None
    domain: IndexDomain = IndexDomain.NATURALS

    @staticmethod
    def make(
        entries: Mapping[int, complex] | Iterable[tuple[int, complex]] = (),
        tail: GeometricTail | None = None,
        domain: IndexDomain = IndexDomain.NATURALS,
    ) -> "SpVector":
        ents = _normalized_entries(entries, tail)
        if domain == IndexDomain.NATURALS:
            bad = [j for j, _ in ents if j < 0]
            if bad:
                raise ValueError(f"negative indices {bad} on the naturals domain")
            if tail is not None and tail.start < 0:
                raise ValueError("tail start must be >= 0 on the naturals domain")
        return SpVector(ents, tail, domain)

    @staticmethod
    def basis(j: int, domain: IndexDomain = IndexDomain.NATURALS) -> "SpVector":
        return SpVector.make({j: 1.0}, domain=domain)

    @staticmethod
    def zero(domain: IndexDomain = IndexDomain.NATURALS) -> "SpVector":
        return SpVector.make({}, domain=domain)

    def is_zero(self) -> bool:
        return not self.entries and self.tail is None

    def entry_map(self) -> dict[int, complex]:
        return dict(self.entries)

    def at(self, j: int) -> complex:
        for i, v in self.entries:
            if i == j:
                return v
        if self.tail is not None:
            return self.tail.value(j)
        return 0.0

    def support_is_finite(self) -> bool:
        return self.tail is None

    def min_index(self) -> int:
        """Smallest index carrying a nonzero value (0 for the zero vector)."""
        cands = [j for j, _ in self.entries]
        if self.tail is not None:
            j = self.tail.start
            overridden = {i for i, _ in self.entries}
            while j in overridden:
                j += 1
            cands.append(j)
        return min(cands) if cands else 0

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Dense values on ``[lo, hi)``."""
        out = np.zeros(hi - lo, dtype=complex)
        if self.tail is not None:
            s = self.tail.start
            j0 = max(lo, s)
            if j0 < hi:
                k = np.arange(j0 - s, hi - s)
                out[j0 - lo :] = self.tail.coeff * self.tail.ratio ** k
        for j, v in self.entries:
            if lo <= j < hi:
                out[j - lo] = v
        return out

    def scale(self, a: complex) -> "SpVector":
        a = complex(a)
        if a == 0:
            return SpVector.zero(self.domain)
        tail = None
        if self.tail is not None:
            tail = GeometricTail(self.tail.start, a * self.tail.coeff, self.tail.ratio)
        return SpVector.make({j: a * v for j, v in self.entries}, tail, self.domain)

    def add(self, other: "SpVector") -> "SpVector":
        return add(self, other)

    def __add__(self, other: "SpVector") -> "SpVector":
        return add(self, other)

    def __mul__(self, a: complex) -> "SpVector":
        return self.scale(a)

    __rmul__ = __mul__

    def __sub__(self, other: "SpVector") -> "SpVector":
        return add(self, other.scale(-1.0))


def _merge_tails(a: GeometricTail | None, b: GeometricTail | None) -> tuple[GeometricTail | None, list[tuple[int, complex]]]:
    """Sum of two tails; returns the merged tail plus entries materialized
    from the unaligned prefix."""
    if a is None:
        return b, []
    if b is None:
        return a, []
    if a.ratio != b.ratio:
        raise ValueError("cannot add tails with different ratios")
    s = max(a.start, b.start)
    coeff = a.coeff * a.ratio ** (s - a.start) + b.coeff * b.ratio ** (s - b.start)
    extra: list[tuple[int, complex]] = []
    for j in range(min(a.start, b.start), s):
        extra.append((j, a.value(j) + b.value(j)))
    if coeff == 0:
        return None, extra
    return GeometricTail(s, coeff, a.ratio), extra


def add(x: SpVector, y: SpVector) -> SpVector:
    if x.domain != y.domain:
        raise ValueError("domain mismatch")
    tail, extra = _merge_tails(x.tail, y.tail)
    values: dict[int, complex] = dict(extra)
    touched = {j for j, _ in x.entries} | {j for j, _ in y.entries}
    for j in touched:
        values[j] = x.at(j) + y.at(j)
    # Positions where an explicit entry of one summand meets the other's tail
    # are already handled by .at().  Zero results inside the tail region force
    # a tail restart (explicit zeros are not stored).
    if tail is not None:
        zero_in_tail = [j for j, v in values.items() if j >= tail.start and v == 0]
        if zero_in_tail:
            cut = max(zero_in_tail) + 1
            for j in range(tail.start, cut):
                if j not in values:
                    values[j] = tail.value(j)
            coeff = tail.coeff * tail.ratio ** (cut - tail.start)
            tail = GeometricTail(cut, coeff, tail.ratio) if coeff != 0 else None
    return SpVector.make(values, tail, x.domain)


def _tail_lp_pow(t: GeometricTail, p: float, overridden: set[int]) -> float:
    """sum_{j>=s, j not overridden} |t(j)|^p, closed form minus finitely many terms."""
    q = abs(t.ratio) ** p
    total = abs(t.coeff) ** p / (1.0 - q)
    for j in overridden:
        if j >= t.start:
            total -= abs(t.value(j)) ** p
    return max(total, 0.0)


def _tail_sup(t: GeometricTail, overridden: set[int]) -> float:
    j = t.start
    while j in overridden:
        j += 1
    return abs(t.value(j))


def norm(x: SpVector, pn: PNorm) -> float:
    """Norm of ``x``; tails are summed in closed form."""
    overridden = {j for j, _ in x.entries}
    if pn.is_c0:
        best = max((abs(v) for _, v in x.entries), default=0.0)
        if x.tail is not None:
            best = max(best, _tail_sup(x.tail, overridden))
        return best
    p = pn.p
    total = sum(abs(v) ** p for _, v in x.entries)
    if x.tail is not None:
        total += _tail_lp_pow(x.tail, p, overridden)
    return total ** (1.0 / p)


def duality_map(x: SpVector, pn: PNorm) -> SpVector:
    """J(x) with coordinates ``conj(x_j) |x_j|^(p-2)``.

    Defined for 1 < p < inf (smooth range).  Satisfies
    ``pairing(J(x), x) == norm(x,p)**p`` and ``norm(J(x), p') == norm(x,p)**(p-1)``.
    """
    if pn.is_c0 or pn.p == 1.0:
        raise ValueError("duality map requires 1 < p < inf")
    p = pn.p
    ents = {j: np.conj(v) * abs(v) ** (p - 2.0) for j, v in x.entries}
    tail = None
    if x.tail is not None:
        t = x.tail
        ratio = np.conj(t.ratio) * abs(t.ratio) ** (p - 2.0)
        coeff = np.conj(t.coeff) * abs(t.coeff) ** (p - 2.0)
        tail = GeometricTail(t.start, coeff, ratio)
    return SpVector.make(ents, tail, x.domain)


def project(x: SpVector, sel: IndexSet) -> SpVector:
    """Coordinate projection onto the index set ``sel``."""
    if not sel.cofinite:
        keep = set(sel.indices)
        vals = {j: x.at(j) for j in keep}
        return SpVector.make(vals, None, x.domain)
    removed = set(sel.indices)
    vals = {j: v for j, v in x.entries if j not in removed}
    tail = x.tail
    if tail is not None:
        holes = [j for j in removed if j >= tail.start]
        if holes:
            cut = max(holes) + 1
            for j in range(tail.start, cut):
                if j not in removed and j not in {i for i, _ in x.entries}:
                    vals[j] = tail.value(j)
            coeff = tail.coeff * tail.ratio ** (cut - tail.start)
            tail = GeometricTail(cut, coeff, tail.ratio)
    return SpVector.make(vals, tail, x.domain)


def pairing(f: SpVector, x: SpVector) -> complex:
    """Bilinear pairing ``sum_j f_j x_j`` (no conjugation); tails in closed form."""
    total = 0.0 + 0.0j
    f_over = {j for j, _ in f.entries}
    x_over = {j for j, _ in x.entries}
    for j, v in f.entries:
        total += v * x.at(j)
    if f.tail is not None:
        tf = f.tail
        for j, v in x.entries:
            if j not in f_over:
                total += tf.value(j) * v
        if x.tail is not None:
            tx = x.tail
            r = tf.ratio * tx.ratio
            s = max(tf.start, tx.start)
            a = tf.value(s) * tx.value(s)
            # Geometric series over j >= s minus overridden positions.
            total += a / (1.0 - r)
            for j in f_over | x_over:
                if j >= s:
                    total -= tf.value(j) * tx.value(j)
    elif x.tail is not None:
        # f finitely supported: tail positions of x already covered above
        # only where f has entries.
        pass
    return total


def _c2f(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def vector_to_json(x: SpVector) -> str:
    obj: dict = {
        "entries": [[j] + _c2f(v) for j, v in x.entries],
        "tail": None,
    }
    if x.tail is not None:
        t = x.tail
        obj["tail"] = {
            "s": t.start,
            "c_re": float(np.real(t.coeff)),
            "c_im": float(np.imag(t.coeff)),
            "w_re": float(np.real(t.ratio)),
            "w_im": float(np.imag(t.ratio)),
        }
    if x.domain != IndexDomain.NATURALS:
        obj["domain"] = x.domain.value
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def vector_from_json(text: str) -> SpVector:
    obj = json.loads(text)
    entries = {int(j): complex(re, im) for j, re, im in obj.get("entries", [])}
    tail = None
    if obj.get("tail") is not None:
        t = obj["tail"]
        tail = GeometricTail(int(t["s"]), complex(t["c_re"], t["c_im"]), complex(t["w_re"], t["w_im"]))
    domain = IndexDomain(obj.get("domain", "naturals"))
    if domain == IndexDomain.NATURALS and (
        any(j < 0 for j in entries) or (tail is not None and tail.start < 0)
    ):
        domain = IndexDomain.INTEGERS
    return SpVector.make(entries, tail, domain)
