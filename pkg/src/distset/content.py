"""Dyadic Hausdorff content of grid sets: exact tree DP plus oracles.

Content values for a rational exponent s = u/v are integer-coefficient
combinations of powers of y = 2**(-1/v).  Since x**v - 1/2 is irreducible
over Q, the reduced coefficient vector on the basis (1, y, ..., y**(v-1))
is unique, so equality is decidable exactly and strict comparisons resolve
by interval refinement that is guaranteed to terminate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from .dyadic import Dyadic, DyadicCube, GridSet

__all__ = [
    "ContentValue", "DensityCube", "content", "content_map",
    "brute_force_content", "high_density_cubes", "boardman_difference_check",
]


class ContentValue:
    """Exact value sum_k c_k * 2**(-k*s) for rational s = u/v, c_k >= 0 rational.

    `terms` keeps the raw per-level coefficients (what the optimal cover
    uses at each cube level); `vec` is the canonical Q-vector on the basis
    (1, y, ..., y**(v-1)), y = 2**(-1/v), used for exact comparison.
    """

    __slots__ = ("s", "terms", "vec")

    def __init__(self, s: Fraction, terms=None, vec=None):
        self.s = Fraction(s)
        self.terms: dict[int, Fraction] = dict(terms) if terms else {}
        if vec is None:
            vec = self._reduce(self.terms, self.s)
        self.vec: tuple[Fraction, ...] = tuple(vec)

    @staticmethod
    def _reduce(terms, s):
        u, v = s.numerator, s.denominator
        vec = [Fraction(0)] * v
        for k, c in terms.items():
            j = k * u                      # exponent of y
            q, r = divmod(j, v)
            vec[r] += Fraction(c) / (1 << q) if q >= 0 else Fraction(c) * (1 << -q)
        return vec

    @classmethod
    def zero(cls, s) -> "ContentValue":
        return cls(Fraction(s))

    @classmethod
    def cube_power(cls, s, level: int, count=1) -> "ContentValue":
        """count * ell(Q)**s for a level-`level` cube."""
        return cls(Fraction(s), {int(level): Fraction(count)})

    def __add__(self, other: "ContentValue") -> "ContentValue":
        assert self.s == other.s
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, Fraction(0)) + c
        vec = tuple(a + b for a, b in zip(self.vec, other.vec))
        return ContentValue(self.s, terms, vec)

    def scaled(self, count) -> "ContentValue":
        c = Fraction(count)
        return ContentValue(self.s, {k: v * c for k, v in self.terms.items()},
                            tuple(v * c for v in self.vec))

    def shifted(self, levels: int) -> "ContentValue":
        """Multiply by 2**(-levels*s): content under x -> x/2**levels."""
        return ContentValue(self.s, {k + levels: c for k, c in self.terms.items()})

    # -- comparison --------------------------------------------------------

    def cmp(self, other: "ContentValue") -> int:
        assert self.s == other.s
        diff = tuple(a - b for a, b in zip(self.vec, other.vec))
        return _sign_of_combination(diff, self.s.denominator)

    def __eq__(self, other):
        return isinstance(other, ContentValue) and self.s == other.s and self.vec == other.vec

    def __hash__(self):
        return hash((self.s, self.vec))

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.vec)

    # -- evaluation ---------------------------------------------------------

    def enclosure(self, bits: int = 80) -> tuple[float, float]:
        """Certified interval [lo, hi] containing the exact value."""
        lo, hi = _eval_interval(self.vec, self.s.denominator, bits)
        return float(lo), float(hi)

    def __float__(self):
        lo, hi = self.enclosure(80)
        return 0.5 * (lo + hi)

    def symbolic(self) -> str:
        parts = [f"{c}*2^(-{k}*{self.s})" for k, c in sorted(self.terms.items()) if c]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"ContentValue({self.symbolic()})"


def _eval_interval(vec, v, bits):
    with mp.workprec(bits + 10):
        y = mp.mpf(2) ** (mp.mpf(-1) / v)
        eps = mp.mpf(2) ** (-bits)
        val = mp.mpf(0)
        mag = mp.mpf(0)
        for r, c in enumerate(vec):
            t = mp.mpf(c.numerator) / c.denominator * y ** r
            val += t
            mag += abs(t)
        err = (mag + 1) * eps * (len(vec) + 4)
        return val - err, val + err


def _sign_of_combination(vec, v) -> int:
    """Exact sign of sum_r vec[r] * 2**(-r/v) with rational coefficients."""
    if all(c == 0 for c in vec):
        return 0
    if all(c >= 0 for c in vec):
        return 1
    if all(c <= 0 for c in vec):
        return -1
    bits = 64
    while True:
        lo, hi = _eval_interval(vec, v, bits)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2
        if bits > 1 << 16:  # unreachable for a nonzero algebraic combination
            raise ArithmeticError("sign refinement failed to separate")


@dataclass
class DensityCube:
    cube: DyadicCube
    content: ContentValue
    density_lo: float
    density_hi: float


def _check_exponent(E: GridSet, s) -> Fraction:
    s = Fraction(s)
    if not (0 < s <= E.dim):
        raise ValueError(f"content exponent must satisfy 0 < s <= d, got {s}")
    return s


def content_map(E: GridSet, s) -> dict[tuple[int, tuple], ContentValue]:
    """DP table of optimal cover costs for every occupied dyadic node.

    Keys are (level, corner).  Restricting the DP to cover cubes of level
    <= resolution(E) loses nothing for s <= d: splitting a level-k cube into
    its 2^d children multiplies the cover cost bound by 2^d * 2^-s >= 1,
    so covers below cell level never improve on the cells themselves.
    """
    s = _check_exponent(E, s)
    L, d = E.resolution, E.dim
    out: dict[tuple[int, tuple], ContentValue] = {}
    if E.is_empty():
        return out

    cells = E.cells

    def rec(level: int, corner: tuple, idx: np.ndarray) -> ContentValue:
        if level == L:
            val = ContentValue.cube_power(s, L)
            out[(level, corner)] = val
            return val
        shift = L - level - 1
        child_sum = None
        key = ((cells[idx, 0] >> shift) & 1)
        for j in range(1, d):
            key = key * 2 + ((cells[idx, j] >> shift) & 1)
        for bits in np.unique(key):
            sub = idx[key == bits]
            off = tuple((int(bits) >> (d - 1 - j)) & 1 for j in range(d))
            ccorner = tuple(2 * c + o for c, o in zip(corner, off))
            cv = rec(level + 1, ccorner, sub)
            child_sum = cv if child_sum is None else child_sum + cv
        own = ContentValue.cube_power(s, level)
        best = own if own.cmp(child_sum) <= 0 else child_sum
        out[(level, corner)] = best
        return best

    rec(0, (0,) * d, np.arange(len(cells)))
    return out


def content(E: GridSet, s, root: DyadicCube | None = None) -> ContentValue:
    """Exact dyadic Hausdorff content of E relative to `root` (default [0,1]^d)."""
    s = _check_exponent(E, s)
    if root is not None:
        body = E.restrict(root)
        if body.is_empty():
            return ContentValue.zero(s)
        return content(body, s).shifted(root.level)
    if E.is_empty():
        return ContentValue.zero(s)
    table = content_map(E, s)
    return table[(0, (0,) * E.dim)]


def brute_force_content(E: GridSet, s, max_covers: int = 5_000_000) -> ContentValue:
    """Exhaustive minimum over all dyadic antichain covers of E.

    Independent of the DP: enumerates the full (deduplicated) multiset of
    cover costs by cross-products over the occupancy tree and takes the
    exact minimum.  Only accepts instances small enough to enumerate.
    """
    s = _check_exponent(E, s)
    if E.is_empty():
        return ContentValue.zero(s)
    if E.dim != 2 or E.resolution > 3:
        raise ValueError(
            f"brute force oracle limited to d=2, L<=3; got d={E.dim}, L={E.resolution} "
            f"with {E.n_cells} cells")
    L, d = E.resolution, E.dim
    cells = E.cells

    def cover_costs(level: int, idx: np.ndarray) -> set[ContentValue]:
        own = ContentValue.cube_power(s, level)
        if level == L:
            return {own}
        shift = L - level - 1
        key = ((cells[idx, 0] >> shift) & 1) * 2 + ((cells[idx, 1] >> shift) & 1)
        parts: list[set[ContentValue]] = []
        for bits in np.unique(key):
            parts.append(cover_costs(level + 1, idx[key == bits]))
        combos = {ContentValue.zero(s)}
        for p in parts:
            combos = {a + b for a in combos for b in p}
            if len(combos) > max_covers:
                raise MemoryError(f"cover enumeration over budget ({len(combos)} partial covers)")
        combos.add(own)
        return combos

    all_costs = cover_costs(0, np.arange(len(cells)))
    best = None
    for c in all_costs:
        if best is None or c.cmp(best) < 0:
            best = c
    return best


def high_density_cubes(E: GridSet, s, rho) -> list[DensityCube]:
    """All dyadic Q in [0,1]^d (level <= resolution) with content(E∩Q) > (1-rho) ell(Q)^s."""
    s = Fraction(s)
    rho = Fraction(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie in (0, 1)")
    table = content_map(E, s)
    out = []
    one_minus = Fraction(1) - rho
    for (level, corner), val in sorted(table.items()):
        threshold = ContentValue.cube_power(s, level, one_minus)
        if val.cmp(threshold) > 0:
            lo, hi = val.enclosure()
            tlo, thi = ContentValue.cube_power(s, level).enclosure()
            out.append(DensityCube(DyadicCube(E.dim, level, corner), val,
                                   lo / thi, hi / tlo))
    return out


def boardman_difference_check(E: GridSet, F: GridSet, rho, c_bits: int = 20):
    """Largest-dyadic c with (1+c)^d < 2(1-rho), then verify E - F ⊇ [0, c]^d.

    The difference-set inclusion is decided exactly on cell occupancy.
    Returns (c_rho as Fraction, holds).
    """
    rho = Fraction(rho)
    if rho >= Fraction(1, 2):
        raise ValueError("rho must be < 1/2 for this criterion")
    d = E.dim
    one = Fraction(1)
    target = 2 * (one - rho)
    for G in (E, F):
        if G.volume().as_fraction() < one - rho:
            raise ValueError(f"volume precondition fails: vol={G.volume()} < 1-rho={one - rho}")
    # bisect the largest k/2^c_bits with (1 + c)^d < 2(1 - rho), strictly
    lo_k, hi_k = 0, 1 << c_bits
    while lo_k + 1 < hi_k:
        mid = (lo_k + hi_k) // 2
        c = Fraction(mid, 1 << c_bits)
        if (1 + c) ** d < target:
            lo_k = mid
        else:
            hi_k = mid
    if lo_k == 0:
        raise ValueError("no positive dyadic c_rho at this resolution")
    c_rho = Fraction(lo_k, 1 << c_bits)

    if E.resolution != F.resolution:
        L = max(E.resolution, F.resolution)
        E, F = E.refine(L), F.refine(L)
    L = E.resolution
    diff = (E.cells[:, None, :] - F.cells[None, :, :]).reshape(-1, d)
    diff = np.unique(diff, axis=0)
    # each difference box delta + 2^-L [-1,1]^d covers unit cells delta-1, delta
    side = 1 << L
    occ = np.zeros((2 * side,) * d, dtype=bool)
    base = diff + (side - 1)           # index of cell delta-1
    for off in np.ndindex(*((2,) * d)):
        occ[tuple((base + np.array(off)).T)] = True
    # [0, c]^d covered iff all unit cells with index in [0, m]^d are present,
    # m = ceil(c * 2^L) - 1
    m = -((-c_rho * side).__floor__()) - 1  # ceil minus one
    if m < 0:
        holds = True
    elif m >= side:
        holds = False
    else:
        window = occ[tuple(slice(side - 1, side + m) for _ in range(d))]
        holds = bool(window.all())
    return c_rho, holds
