"""Closed subintervals of [0, inf) with exact square-root-of-rational endpoints.

Distance sets of grid sets have endpoints of the form sqrt(q) with q a
nonnegative rational, so ordering and merging are decided exactly on the
squared values.
"""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

__all__ = ["Rad", "NormRange", "IntervalSet", "box_norm_range"]


class Rad:
    """The nonnegative real sqrt(sq), sq a nonnegative rational."""

    __slots__ = ("sq",)

    def __init__(self, sq):
        self.sq = Fraction(sq)
        if self.sq < 0:
            raise ValueError("negative square")

    @classmethod
    def of(cls, value) -> "Rad":
        """Exact Rad for a rational value >= 0 (value itself, not its square)."""
        v = Fraction(value)
        if v < 0:
            raise ValueError("Rad.of needs a nonnegative value")
        return cls(v * v)

    def __float__(self):
        return float(np.sqrt(np.float64(self.sq.numerator / self.sq.denominator)))

    def _cmp(self, other) -> int:
        o = other.sq if isinstance(other, Rad) else Fraction(other) ** 2 if Fraction(other) >= 0 else None
        if o is None:
            return 1
        return (self.sq > o) - (self.sq < o)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, Rad):
            return self.sq == other.sq
        try:
            return self._cmp(other) == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(("Rad", self.sq))

    def scale(self, factor) -> "Rad":
        f = Fraction(factor)
        if f < 0:
            raise ValueError("scale must be nonnegative")
        return Rad(self.sq * f * f)

    def __repr__(self):
        return f"Rad(sqrt({self.sq}))"


class NormRange:
    """Exact range of |x| over an axis-aligned closed box."""

    __slots__ = ("lo_sq", "hi_sq")

    def __init__(self, lo_sq, hi_sq):
        self.lo_sq = Fraction(lo_sq)
        self.hi_sq = Fraction(hi_sq)
        if not (0 <= self.lo_sq <= self.hi_sq):
            raise ValueError("invalid norm range")

    @property
    def lo(self) -> float:
        return float(Rad(self.lo_sq))

    @property
    def hi(self) -> float:
        return float(Rad(self.hi_sq))

    def as_interval(self) -> tuple[Rad, Rad]:
        return Rad(self.lo_sq), Rad(self.hi_sq)

    def __repr__(self):
        return f"NormRange([{self.lo:.6g}, {self.hi:.6g}])"


def box_norm_range(box) -> NormRange:
    """Exact min/max of the Euclidean norm over a product of closed intervals.

    box: iterable of (a_i, b_i) rational pairs with a_i <= b_i.
    """
    lo = Fraction(0)
    hi = Fraction(0)
    for a, b in box:
        a, b = Fraction(a), Fraction(b)
        if a > b:
            raise ValueError("empty box axis")
        hi += max(a * a, b * b)
        if a > 0 or b < 0:
            lo += min(a * a, b * b)
    return NormRange(lo, hi)


class IntervalSet:
    """Sorted, disjoint, merged closed intervals in [0, inf)."""

    __slots__ = ("intervals",)

    def __init__(self, intervals=(), already_merged=False):
        ivs = [(lo if isinstance(lo, Rad) else Rad.of(lo),
                hi if isinstance(hi, Rad) else Rad.of(hi)) for lo, hi in intervals]
        for lo, hi in ivs:
            if lo > hi:
                raise ValueError("interval with lo > hi")
        if not already_merged:
            ivs = _merge(ivs)
        self.intervals: list[tuple[Rad, Rad]] = ivs

    @classmethod
    def from_norm_ranges(cls, ranges) -> "IntervalSet":
        return cls([(Rad(r.lo_sq), Rad(r.hi_sq)) for r in ranges])

    @classmethod
    def from_scaled_sq(cls, lo_sq: np.ndarray, hi_sq: np.ndarray, denom: int) -> "IntervalSet":
        """Merge intervals given by integer squared endpoints over a common denominator.

        lo_sq/denom and hi_sq/denom are the exact squared endpoints; the
        sweep runs in integer arithmetic and only the merged survivors are
        materialized as Rad endpoints.
        """
        order = np.argsort(lo_sq, kind="stable")
        lo_sq, hi_sq = lo_sq[order], hi_sq[order]
        merged = []
        cur_lo, cur_hi = int(lo_sq[0]), int(hi_sq[0])
        for i in range(1, len(lo_sq)):
            l, h = int(lo_sq[i]), int(hi_sq[i])
            if l <= cur_hi:
                if h > cur_hi:
                    cur_hi = h
            else:
                merged.append((cur_lo, cur_hi))
                cur_lo, cur_hi = l, h
        merged.append((cur_lo, cur_hi))
        den = Fraction(1, denom)
        return cls([(Rad(l * den), Rad(h * den)) for l, h in merged], already_merged=True)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, value) -> bool:
        """Exact membership for Rad or rational values."""
        x = value if isinstance(value, Rad) else Rad.of(Fraction(value))
        lo = 0
        hi = len(self.intervals)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.intervals[mid][1] < x:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(self.intervals) and self.intervals[lo][0] <= x

    def contains_interval(self, lo, hi) -> bool:
        lo = lo if isinstance(lo, Rad) else Rad.of(Fraction(lo))
        hi = hi if isinstance(hi, Rad) else Rad.of(Fraction(hi))
        for a, b in self.intervals:
            if a <= lo and hi <= b:
                return True
        return False

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(list(self.intervals) + list(other.intervals))

    def scale(self, factor) -> "IntervalSet":
        return IntervalSet([(lo.scale(factor), hi.scale(factor))
                            for lo, hi in self.intervals], already_merged=True)

    def bounds(self) -> tuple[Rad, Rad]:
        if self.is_empty():
            raise ValueError("empty interval set")
        return self.intervals[0][0], self.intervals[-1][1]

    def floats(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in self.intervals]

    def to_json(self) -> str:
        return json.dumps({"intervals": [
            {"lo": float(a), "hi": float(b),
             "loSq": str(a.sq), "hiSq": str(b.sq)} for a, b in self.intervals
        ]}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "IntervalSet":
        obj = json.loads(text)
        return cls([(Rad(Fraction(iv["loSq"])), Rad(Fraction(iv["hiSq"])))
                    for iv in obj["intervals"]])

    def __repr__(self):
        ivs = ", ".join(f"[{float(a):.5g}, {float(b):.5g}]" for a, b in self.intervals[:6])
        more = f", ... ({len(self.intervals)} total)" if len(self.intervals) > 6 else ""
        return f"IntervalSet({ivs}{more})"


def _merge(ivs):
    ivs = sorted(ivs, key=lambda p: (p[0].sq, p[1].sq))
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return out
