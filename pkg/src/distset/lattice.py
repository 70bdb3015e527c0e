"""Sum-of-squares representability: sieves, gap scans, and lattice norm sets."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RepresentabilityTable", "build_table", "bambah_chowla_scan",
    "r_set_gap_check", "is_sum_of_squares", "nearest_representable",
]

MAX_BOUND = 10 ** 8


@dataclass
class RepresentabilityTable:
    """Bitmasks marking which k <= bound are sums of m squares, m = 1..max_squares."""
    bound: int
    masks: list[np.ndarray]   # masks[m-1][k] == True iff k is a sum of m squares

    def entry(self, k: int, m: int) -> bool:
        if not (0 <= k <= self.bound) or not (1 <= m <= len(self.masks)):
            raise IndexError("table query out of range")
        return bool(self.masks[m - 1][k])

    def representable(self, m: int) -> np.ndarray:
        return self.masks[m - 1]


def build_table(bound: int, max_squares: int) -> RepresentabilityTable:
    """Sieve: sums of m squares built by shifting the (m-1)-square table."""
    if bound > MAX_BOUND:
        raise ValueError(f"bound {bound} exceeds budget {MAX_BOUND}")
    if max_squares < 1:
        raise ValueError("max_squares must be >= 1")
    squares = np.zeros(bound + 1, dtype=bool)
    roots = np.arange(math.isqrt(bound) + 1)
    squares[roots * roots] = True
    masks = [squares]
    for _ in range(1, max_squares):
        prev = masks[-1]
        cur = prev.copy()      # a_m = 0 keeps all previous representations
        for a in roots[1:]:
            a2 = int(a) * int(a)
            cur[a2:] |= prev[: bound + 1 - a2]
        masks.append(cur)
    return RepresentabilityTable(bound, masks)


def is_sum_of_squares(k: int, m: int) -> bool:
    """Direct check without a table, exact for any k >= 0."""
    if k < 0:
        return False
    if k == 0:
        return True
    if m == 1:
        r = math.isqrt(k)
        return r * r == k
    if m == 2:
        if k > 10 ** 14:
            raise ValueError(f"two-square scan budget exceeded at k={k}")
        a_hi = math.isqrt(k)
        a_lo = math.isqrt(k // 2)
        a = np.arange(a_lo, a_hi + 1, dtype=np.int64)
        b2 = k - a * a
        r = np.sqrt(b2.astype(np.float64)).astype(np.int64)
        for rr in (r - 1, r, r + 1):   # float sqrt fixup
            if np.any(rr * rr == b2):
                return True
        return False
    if m == 3:
        # three-square criterion: representable iff not 4^a (8b + 7)
        while k % 4 == 0:
            k //= 4
        return k % 8 != 7
    return True  # four or more squares always suffice


def nearest_representable(k: int, m: int, above: bool = False) -> int | None:
    """Nearest integer representable as a sum of m squares, scanning down (or up)."""
    step = 1 if above else -1
    x = k
    while x >= 0:
        if is_sum_of_squares(x, m):
            return x
        x += step
        if above and x > k + 10 ** 6:
            return None
    return None


def bambah_chowla_scan(m_lo: int, m_hi: int) -> list[int]:
    """Violations of: the open interval (m, m + 3 m^(1/4)) contains a sum of
    two squares, for every m in [m_lo, m_hi].  Expected empty for m >= 1154."""
    if m_lo < 1154:
        raise ValueError("scan threshold is m >= 1154")
    if m_hi < m_lo:
        return []
    # u in (m, m + 3 m^(1/4))  <=>  u > m and (u - m)^4 < 81 m, exactly
    margin = int((81 * m_hi) ** 0.25) + 2
    table = build_table(m_hi + margin, 2)
    rep = table.masks[1]
    cum = np.concatenate(([0], np.cumsum(rep.astype(np.int64))))
    ms = np.arange(m_lo, m_hi + 1, dtype=np.int64)
    # largest admissible u per m: u = m + t with t^4 < 81 m, t >= 1
    t = np.floor((81.0 * ms) ** 0.25).astype(np.int64)
    over = t ** 4 >= 81 * ms          # float rounding fixup, exact integer check
    t[over] -= 1
    under = (t + 1) ** 4 < 81 * ms
    t[under] += 1
    u_hi = ms + t                      # inclusive upper end of the open interval
    counts = cum[u_hi + 1] - cum[ms + 1]
    return [int(m) for m in ms[counts == 0]]


def r_set_gap_check(q: int, sigma, d: int, range_lo: float, range_hi: float,
                    gamma: float | None = None) -> dict:
    """Max consecutive gap among lattice norms |p|, p in (Z_q - Z_q)^d with
    |p_i| < q, restricted to [range_lo, range_hi)."""
    from fractions import Fraction
    sigma = Fraction(sigma)
    coords = np.arange(q, dtype=np.int64)   # |p_i| takes values 0..q-1
    sq = coords * coords
    if d == 2:
        norms_sq = np.unique((sq[:, None] + sq[None, :]).ravel())
    elif d == 3:
        two = np.unique((sq[:, None] + sq[None, :]).ravel())
        norms_sq = np.unique((two[:, None] + sq[None, :]).ravel())
    elif d == 4:
        two = np.unique((sq[:, None] + sq[None, :]).ravel())
        norms_sq = np.unique((two[:, None] + two[None, :]).ravel())
    else:
        raise ValueError("d in {2, 3, 4}")
    norms = np.sqrt(norms_sq.astype(np.float64))
    sel = (norms >= range_lo) & (norms < range_hi)
    window = norms[sel]
    out = {"count": int(window.size), "max_gap": None, "gap_at": None,
           "threshold": None, "below_threshold": None}
    if window.size >= 2:
        gaps = np.diff(window)
        i = int(np.argmax(gaps))
        out["max_gap"] = float(gaps[i])
        out["gap_at"] = float(window[i])
        if gamma is not None:
            thr = 2.0 * gamma * float(q) ** float(1 - sigma)
            out["threshold"] = thr
            out["below_threshold"] = bool(gaps.max() <= thr)
    return out
