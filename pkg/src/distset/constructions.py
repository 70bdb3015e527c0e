"""Builders for the lattice-block families and their iterates.

Bodies come in two representations: explicit `GridSet`s (products of 1-d
cell sets whenever the family allows it) and symbolic `LatticeBody`s for
full lattice grids whose cell counts are far beyond enumeration (the
fast-growing block sequences force q in the millions within a few steps).
Coverage checks downstream work on per-axis arithmetic-progression data,
so nothing ever needs the cells of a symbolic body materialized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic import Dyadic, GridSet
from .intervals import Rad
from .lattice import nearest_representable

__all__ = [
    "LatticeBody", "BlockPlacement", "BlockSet",
    "building_block", "iterated_set", "lattice_grid_example",
    "steinhaus_union", "zero_density_blocks", "rice_variant",
]


def _pow_exponent(q: int, sigma: Fraction) -> int:
    """log2(q**sigma), checked to be a nonnegative integer."""
    if q < 2 or q & (q - 1):
        raise ValueError(f"q must be a power of 2, got {q}")
    n1 = q.bit_length() - 1
    n2 = Fraction(n1) * sigma
    if n2.denominator != 1:
        raise ValueError(f"q**sigma = 2**({n1}*{sigma}) is not an integer power of 2")
    return int(n2)


def building_block(q: int, sigma, d: int) -> GridSet:
    """Union of q^d cubes of side q^-sigma at the corners p/q, p in Z_q^d."""
    sigma = Fraction(sigma)
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    n2 = _pow_exponent(q, sigma)
    n1 = q.bit_length() - 1
    axis = np.arange(q, dtype=np.int64) << (n2 - n1)
    return GridSet.from_factors([axis] * d, n2)


def iterated_set(q: int, sigma, d: int, n: int, max_resolution: int = 26,
                 max_cells: int = 1 << 24) -> GridSet:
    """n-fold self-similar iterate: each basic cube carries a shrunken copy."""
    sigma = Fraction(sigma)
    if n < 1:
        raise ValueError("depth n must be >= 1")
    n2 = _pow_exponent(q, sigma)
    n1 = q.bit_length() - 1
    if n * n2 > max_resolution:
        raise ValueError(
            f"resolution overflow: depth {n} needs resolution {n * n2} > budget {max_resolution}")
    if q ** (n * d) > max_cells:
        raise ValueError(f"cell budget exceeded: q^(n*d) = {q ** (n * d)} > {max_cells}")
    axis = np.arange(q, dtype=np.int64) << (n2 - n1)
    # 1-d corners, depth k: S_1 = axis (units 2^-n2);
    # S_k = {p * 2^(k*n2 - n1) + s : p in Z_q, s in S_{k-1}} (units 2^-(k*n2))
    level = axis.copy()
    for k in range(2, n + 1):
        level = ((np.arange(q, dtype=np.int64)[:, None] << (k * n2 - n1))
                 + level[None, :]).ravel()
    return GridSet.from_factors([level] * d, n * n2)


def lattice_grid_example(rho, N: int, d: int) -> GridSet:
    """E(rho, N): boxes of side rho/N at the corners p/N; volume exactly rho^d."""
    rho = Fraction(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie in (0, 1)")
    if N < 2 or N & (N - 1):
        raise ValueError("N must be a power of 2, N >= 2")
    rho_d = Dyadic.from_fraction(rho)
    nbits = N.bit_length() - 1
    extra = -rho_d.e  # rho = m * 2^-extra with m odd
    L = nbits + extra
    run = int(rho * (1 << extra))  # cells per box per axis
    axis = []
    stride = 1 << extra
    for p in range(N):
        start = p * stride
        axis.extend(range(start, start + run))
    axis = np.array(axis, dtype=np.int64)
    return GridSet.from_factors([axis] * d, L)


@dataclass(frozen=True)
class LatticeBody:
    """Symbolic full lattice block: disjoint cubes k*spacing + [0, side]^d, k in Z_count^d."""
    dim: int
    count: int
    spacing: Fraction
    side: Fraction

    def __post_init__(self):
        if not (0 < self.side <= self.spacing):
            raise ValueError("cubes must be disjoint: need 0 < side <= spacing")

    def volume(self) -> Fraction:
        return (Fraction(self.count) ** self.dim) * self.side ** self.dim

    def extent(self) -> Fraction:
        """Per-axis length of the bounding box."""
        return (self.count - 1) * self.spacing + self.side

    @property
    def n_cells(self) -> int:
        return self.count ** self.dim


@dataclass(frozen=True)
class AxisAP:
    """Per-axis placed cell intervals [start + k*step, ... + width], 0 <= k < count."""
    start: Fraction
    step: Fraction
    count: int
    width: Fraction

    def hull(self) -> tuple[Fraction, Fraction]:
        return self.start, self.start + (self.count - 1) * self.step + self.width


@dataclass(frozen=True)
class AxisExplicit:
    """Per-axis placed cell intervals [v, v + width] for v in values (sorted Fractions)."""
    values: tuple
    width: Fraction

    def hull(self) -> tuple[Fraction, Fraction]:
        return self.values[0], self.values[-1] + self.width


@dataclass
class BlockPlacement:
    offset: tuple            # Fractions, one per axis
    scale: Fraction
    body: "GridSet | LatticeBody"

    def __post_init__(self):
        self.offset = tuple(Fraction(o) for o in self.offset)
        self.scale = Fraction(self.scale)
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def dim(self) -> int:
        return self.body.dim

    def volume(self) -> Fraction:
        v = (self.body.volume().as_fraction() if isinstance(self.body, GridSet)
             else self.body.volume())
        return v * self.scale ** self.dim

    def bounding_box(self) -> list[tuple[Fraction, Fraction]]:
        if isinstance(self.body, GridSet):
            box = self.body.bounding_box()
            return [(o + self.scale * lo, o + self.scale * hi)
                    for o, (lo, hi) in zip(self.offset, box)]
        e = self.body.extent()
        return [(o, o + self.scale * e) for o in self.offset]

    def axis_cells(self, j: int) -> "AxisAP | AxisExplicit":
        """Exact per-axis description of the placed cell intervals."""
        if isinstance(self.body, LatticeBody):
            return AxisAP(self.offset[j], self.scale * self.body.spacing,
                          self.body.count, self.scale * self.body.side)
        body = self.body
        h = body.cell_side().as_fraction() * self.scale
        if body.factors is not None:
            vals = np.asarray(body.factors[j], dtype=np.int64)
        else:
            vals = np.unique(body.cells[:, j])
        base = self.offset[j] + body.anchor[j].as_fraction() * self.scale
        return AxisExplicit(tuple(base + int(v) * h for v in vals), h)

    def is_product(self) -> bool:
        return isinstance(self.body, LatticeBody) or self.body.factors is not None


@dataclass
class BlockSet:
    dim: int
    blocks: list[BlockPlacement] = field(default_factory=list)

    def __post_init__(self):
        for b in self.blocks:
            if b.dim != self.dim:
                raise ValueError("block dimension mismatch")
        self.blocks = sorted(self.blocks, key=lambda b: b.offset[0])
        self.validate()

    def validate(self):
        boxes = [b.bounding_box() for b in self.blocks]
        for i in range(len(boxes)):
            for k in range(i + 1, len(boxes)):
                overlap = all(not (boxes[i][j][1] <= boxes[k][j][0]
                                   or boxes[k][j][1] <= boxes[i][j][0])
                              for j in range(self.dim))
                if overlap:
                    raise ValueError(f"blocks {i} and {k} overlap")

    def volume(self) -> Fraction:
        return sum((b.volume() for b in self.blocks), Fraction(0))


# ----------------------------------------------------------------------
# K*: finitely many dilated copies whose distance intervals chain up
# ----------------------------------------------------------------------

def steinhaus_union(q: int, sigma, d: int, a_rho, b_rho, n: int,
                    round_bits: int = 30) -> tuple[BlockSet, dict]:
    """Disjoint union of dilates of the depth-n iterate, sized so consecutive
    rescaled distance intervals chain into one; returns (blocks, report)."""
    sigma = Fraction(sigma)
    a_rho, b_rho = Fraction(a_rho), Fraction(b_rho)
    ratio = b_rho / a_rho
    if ratio <= 1:
        raise ValueError("need b_rho > a_rho > 0")
    q_sigma = Fraction(2) ** _pow_exponent(q, sigma)
    if q_sigma <= ratio:
        raise ValueError(f"need q^sigma > b/a, got {q_sigma} <= {ratio}")
    m = 1
    while ratio ** (m + 1) < q_sigma:
        m += 1
    # m is the largest integer with q^sigma > ratio^m
    assert q_sigma > ratio ** m and q_sigma <= ratio ** (m + 1)
    body = iterated_set(q, sigma, d, n)
    exact_u = [ratio ** k / q_sigma for k in range(1, m + 1)]
    grid = 1 << round_bits
    u = [Fraction(math.floor(v * grid), grid) for v in exact_u]  # rounded down
    scales = [Fraction(1)] + u
    report = {
        "m": m,
        "u_exact": [str(v) for v in exact_u],
        "u_rounded": [str(v) for v in u],
        "rounding_slack": [float(e - r) for e, r in zip(exact_u, u)],
        "chain_check_hint": "re-verify interval chaining numerically on the truncation",
    }
    blocks = []
    x = Fraction(0)
    pad = Fraction(1, 8)
    for k, s in enumerate(scales):
        off = [x] + [Fraction(0)] * (d - 1)
        blocks.append(BlockPlacement(tuple(off), s, body))
        x += s + pad
    return BlockSet(d, blocks), report


# ----------------------------------------------------------------------
# Zero-density unbounded set realizing every distance at every truncation
# ----------------------------------------------------------------------

def zero_density_blocks(r_seq, sigma, d: int, ell0, eta, n_max: int,
                        q_bit_step: int | None = None,
                        explicit_cell_budget: int = 1 << 18) -> tuple[BlockSet, dict]:
    """Blocks R_{n-1}e1 + r_n * F[q_n] with greedily chosen q_n.

    q_n is the smallest admissible power of 2 (with q^sigma a power of 2)
    satisfying the three selection inequalities: volumes halve, component
    sides shrink below eta, and r_n q_n^(2 sigma - 3) < 1/n.  Bodies switch
    to symbolic lattice form once q^d exceeds the explicit-cell budget.
    """
    sigma = Fraction(sigma)
    if not (1 < sigma < Fraction(3, 2)):
        raise ValueError("sigma must lie in (1, 3/2)")
    ell0 = Fraction(ell0)
    if ell0 <= 0:
        raise ValueError("ell0 must be positive")
    r = [int(x) for x in r_seq[:n_max]]
    if len(r) < n_max or any(b <= a for a, b in zip(r, r[1:])) or r[0] < 1:
        raise ValueError("need an increasing positive integer r sequence of length n_max")
    if q_bit_step is None:
        q_bit_step = sigma.denominator  # smallest k with k*sigma integral
    sqrt_d_sq = Fraction(d)

    def q_pow(qbits: int, expo: Fraction) -> Fraction:
        e = Fraction(qbits) * expo
        assert e.denominator == 1
        return Fraction(2) ** int(e)

    chosen = []
    prev_vol = None
    prev_side = None
    R = [0]
    provenance = []
    for n in range(1, n_max + 1):
        rn = r[n - 1]
        R.append(R[-1] + rn)
        qbits = q_bit_step
        while True:
            q = 1 << qbits
            vol = Fraction(rn) ** d * q_pow(qbits, d * (1 - sigma))
            side = Fraction(rn) * q_pow(qbits, -sigma)
            cond_vol = (vol < ell0 / 2) if n == 1 else (vol <= prev_vol / 2)
            eta_n = Fraction(eta(R[n]))
            # side * sqrt(d) <= eta comparison done on squares to stay rational
            cond_side = (side ** 2 * sqrt_d_sq < eta_n ** 2) and \
                        (n == 1 or side < prev_side)
            cond_gap = Fraction(rn) * q_pow(qbits, 2 * sigma - 3) < Fraction(1, n)
            if cond_vol and cond_side and cond_gap:
                break
            qbits += q_bit_step
            if qbits > 64:
                raise ValueError(f"no admissible q_n within budget at n={n}")
        chosen.append(q)
        prev_vol, prev_side = vol, side
        provenance.append({"n": n, "r": rn, "q": q, "volume": str(vol),
                           "component_side": str(side)})
    blocks = []
    for n in range(1, n_max + 1):
        q = chosen[n - 1]
        if q ** d <= explicit_cell_budget:
            body = building_block(q, sigma, d)
        else:
            n2 = _pow_exponent(q, sigma)
            body = LatticeBody(d, q, Fraction(1, q), Fraction(1, 1 << n2))
        off = [Fraction(R[n - 1])] + [Fraction(0)] * (d - 1)
        blocks.append(BlockPlacement(tuple(off), Fraction(r[n - 1]), body))
    total = sum((b.volume() for b in blocks), Fraction(0))
    report = {"q_sequence": chosen, "R_sequence": R[1:], "total_volume": str(total),
              "ell0": str(ell0), "blocks": provenance}
    assert total <= ell0
    return BlockSet(d, blocks), report


# ----------------------------------------------------------------------
# Rapidly growing blocks that avoid an infinite set of distances
# ----------------------------------------------------------------------

def _ceil_sqrt_frac(x: Fraction, bits: int) -> Fraction:
    """Smallest multiple of 2^-bits that is >= sqrt(x)."""
    scaled = x * (1 << (2 * bits))
    n = scaled.numerator // scaled.denominator
    r = math.isqrt(n)
    if r * r < n or r * r * scaled.denominator < scaled.numerator:
        r += 1
    while Fraction(r * r, 1 << (2 * bits)) < x:
        r += 1
    return Fraction(r, 1 << bits)


def rice_variant(d: int, s, n_max: int) -> tuple[BlockSet, list[Rad], dict]:
    """Blocks of full lattice grids avoiding the chosen distances d_j.

    d_j are square roots of half-integers (never lattice norms); kappa_j
    shrink fast enough that every cube stays clear of every avoided
    distance by a verified margin.  Returns (blocks, avoided, report).
    """
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    s = Fraction(s)
    if not s < d:
        raise ValueError("need s < d")
    sigma = Fraction(d) / s
    if n_max > 4:
        raise ValueError(f"size error: n_max={n_max} blocks exceed the scan budget (max 4)")
    half = Fraction(1, 2)
    ds: list[Rad] = []
    kappas: list[Fraction] = []
    margins: list[Fraction] = []
    report_rows = []
    kappa_prev = Fraction(1, 4)
    for n in range(1, n_max + 1):
        if n == 1:
            lower_sq = Fraction(100)          # d_1 >= 10, any modest start
        else:
            lower_sq = Fraction((100 * d * d) ** 2) * ds[-1].sq
            # d_n^(1-sigma) <= kappa_{n-1}  <=>  d_n^2 >= (1/kappa)^(2/(sigma-1));
            # bound it by an integer power to stay rational
            e = sigma - 1
            inv_k = 1 / kappas[-1]
            pow_bound = inv_k ** (-(-2 * e.denominator // e.numerator))  # ceil exponent
            lower_sq = max(lower_sq, pow_bound)
        K = lower_sq.__ceil__()
        if K > 10 ** 14:
            raise ValueError(
                f"size error: avoided-distance scan window exhausted at n={n} (K={K}); "
                f"pick s further from d")
        dj = Rad(Fraction(K) + half)
        if n > 1:
            e = sigma - 1
            assert dj.sq ** e.numerator >= (1 / kappas[-1]) ** (2 * e.denominator)
        below, above = nearest_representable(K, d), nearest_representable(K + 1, d, above=True)
        # margin = min distance from sqrt(K + 1/2) to the two flanking lattice norms
        margin = _min_margin(dj, below, above)
        ds.append(dj)
        margins.append(margin)
        # kappa_n: largest power of two with 4 kappa sqrt(d) < min margin so far
        bound_sq = min(margins) ** 2 / Fraction(16 * d)
        kappa = min(kappa_prev / 2, Fraction(1, 4))
        while kappa * kappa >= bound_sq:
            kappa /= 2
        kappas.append(kappa)
        kappa_prev = kappa
        report_rows.append({"n": n, "d_sq": str(dj.sq), "kappa": str(kappa),
                            "margin_sq_lower": str(margin ** 2),
                            "flank_below": below, "flank_above": above})
    # verify the margin condition for every (j, n) pair exactly
    for n in range(1, n_max + 1):
        for j in range(1, n + 1):
            thr = 4 * kappas[n - 1] * _ceil_sqrt_frac(Fraction(d), 30)
            if not margins[j - 1] > thr:
                raise AssertionError("margin verification failed")
    blocks = []
    for n in range(1, n_max + 1):
        K_sq = ds[n - 1].sq
        qn = 1
        while Fraction(qn * qn) < K_sq:
            qn <<= 1
        # q_n is the power of 2 with d_n in (q_n/2, q_n]
        kappa_body = kappas[n - 2] if n >= 2 else Fraction(1, 4)
        body = LatticeBody(d, qn, Fraction(1), kappa_body)
        off1 = _ceil_sqrt_frac(Fraction(100 * d * d) * K_sq, 20)  # >= 10*d*d_n, dyadic
        off = [off1] + [Fraction(0)] * (d - 1)
        blocks.append(BlockPlacement(tuple(off), Fraction(1), body))
    bset = BlockSet(d, blocks)
    # growth sanity: d_n >= 100 d^2 d_{n-1} on squares
    for a, b in zip(ds, ds[1:]):
        assert b.sq >= Fraction((100 * d * d) ** 2) * a.sq
    return bset, ds, {"blocks": report_rows}


def _min_margin(dj: Rad, k_below: int, k_above: int) -> Fraction:
    """Rational lower bound on min(|sqrt(k) - dj|) over the flanking norms."""
    out = None
    for k in (k_below, k_above):
        if k is None:
            continue
        # |sqrt(k) - dj| = |k - dj^2| / (sqrt(k) + dj) >= |k - dj^2| / (2*ub)
        gap = abs(Fraction(k) - dj.sq)
        ub = _ceil_sqrt_frac(max(Fraction(k), dj.sq), 20)
        m = gap / (2 * ub + 1)
        out = m if out is None else min(out, m)
    return out if out is not None else Fraction(1)
