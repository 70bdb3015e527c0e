"""Exact distance sets of grid and block sets, and the structure checks on them.

Distance sets of unions of closed dyadic boxes are finite unions of closed
intervals whose squared endpoints are rational; everything here keeps those
squares exact.  Block sets (possibly with symbolic lattice bodies) are
handled per axis: cell positions along each axis are arithmetic
progressions or explicit value lists, and squared-distance membership
reduces to interval arithmetic over per-axis contributions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constructions import AxisAP, AxisExplicit, BlockPlacement, BlockSet, LatticeBody
from .content import high_density_cubes
from .dyadic import GridSet, difference_vectors
from .intervals import IntervalSet, NormRange, Rad, box_norm_range
from .lattice import is_sum_of_squares

__all__ = [
    "distance_set", "verify_block_lemma", "steinhaus_check", "coverage_check",
    "well_distributed_scales", "blockset_distance_set", "sample_pair_distance",
]


def distance_set(E: GridSet, F: GridSet | None = None,
                 max_pairs: int = 1 << 26) -> IntervalSet:
    """Exact distance set of two unit-frame grid sets at a shared resolution."""
    F = E if F is None else F
    if E.anchor != F.anchor or E.scale != F.scale:
        raise ValueError("distance_set expects identically placed sets; use block machinery")
    if E.resolution != F.resolution:
        raise ValueError("resolution mismatch: refine to a common resolution first")
    if E.is_empty() or F.is_empty():
        return IntervalSet([])
    d, L = E.dim, E.resolution
    delta = difference_vectors(E, F, max_pairs=max_pairs)
    lo, hi = _delta_sq_ranges(delta)
    scale_sq = (E.scale * E.scale).as_fraction()
    out = IntervalSet.from_scaled_sq(lo, hi, 1 << (2 * L))
    return out.scale(E.scale.as_fraction()) if scale_sq != 1 else out


def _delta_sq_ranges(delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Squared norm ranges of the boxes delta + [-1, 1]^d, in units of 2^-L."""
    a = np.abs(delta.astype(np.int64))
    lo_ax = np.where(a <= 1, 0, (a - 1) ** 2)
    hi_ax = (a + 1) ** 2
    return lo_ax.sum(axis=1), hi_ax.sum(axis=1)


def steinhaus_check(delta: IntervalSet) -> tuple[bool, Rad]:
    """(whether an interval [0, a] sits in the set, and that a; a=0 if none)."""
    if delta.is_empty():
        return False, Rad(0)
    lo, hi = delta.intervals[0]
    if lo.sq == 0 and hi.sq > 0:
        return True, hi
    return False, Rad(0)


def verify_block_lemma(q: int, sigma, d: int) -> dict:
    """Interval structure of the distance set of the lattice building block.

    Reports the disjoint prefix near 0 (count and minimal gap), the merged
    tail interval reaching the maximal norm, and the empirical constant
    tail_left / q^(2 sigma - 3).  Degenerate single-interval outcomes are
    flagged and nothing is asserted for them.
    """
    from .constructions import building_block
    sigma = Fraction(sigma)
    F = building_block(q, sigma, d)
    delta = distance_set(F, F)
    max_hi = delta.intervals[-1][1]
    report = {
        "q": q, "sigma": str(sigma), "d": d,
        "n_intervals": len(delta),
        "degenerate": False,
        "initial_disjoint_count": 0,
        "separation_min": None,
        "merged_tail": None,
        "tail_left_sq": None,
        "tail_constant": None,
        "delta": delta,
    }
    if len(delta) == 1:
        report["degenerate"] = True
        report["merged_tail"] = (float(delta.intervals[0][0]), float(delta.intervals[0][1]))
        return report
    # tail interval: the one whose right endpoint is the global maximum
    tail_lo, tail_hi = delta.intervals[-1]
    prefix = delta.intervals[:-1]
    gaps = [float(b2[0]) - float(a2[1]) for a2, b2 in zip(prefix, prefix[1:])]
    gaps.append(float(tail_lo) - float(prefix[-1][1]))
    report["initial_disjoint_count"] = len(prefix)
    report["separation_min"] = min(gaps) if gaps else None
    report["merged_tail"] = (float(tail_lo), float(tail_hi))
    report["tail_left_sq"] = tail_lo.sq
    report["tail_constant"] = float(tail_lo) / float(q) ** float(2 * sigma - 3)
    if not tail_hi == max_hi:
        raise AssertionError("tail bookkeeping broken")
    return report


# ----------------------------------------------------------------------
# Block sets: per-axis exact machinery
# ----------------------------------------------------------------------

def _axis_diff_hull(am, an) -> tuple[Fraction, Fraction]:
    """Hull of x_j - y_j over cells x in axis am, y in axis an."""
    mlo, mhi = am.hull()
    nlo, nhi = an.hull()
    return mlo - nhi, mhi - nlo


def _pair_hull_range(bm: BlockPlacement, bn: BlockPlacement) -> NormRange:
    box = [_axis_diff_hull(bm.axis_cells(j), bn.axis_cells(j)) for j in range(bm.dim)]
    return box_norm_range(box)


def _as_explicit_axis(ax, limit: int = 4096) -> AxisExplicit:
    if isinstance(ax, AxisExplicit):
        return ax
    if ax.count > limit:
        raise MemoryError("axis expansion over budget")
    return AxisExplicit(tuple(ax.start + k * ax.step for k in range(ax.count)), ax.width)


def _axis_squared_union(am, an, max_products: int = 1 << 22) -> IntervalSet:
    """Exact set of (x_j - y_j)^2 values as an interval union."""
    am, an = _as_explicit_axis(am), _as_explicit_axis(an)
    va = am.values
    vb = an.values
    if len(va) * len(vb) > max_products:
        raise MemoryError("axis product over budget")
    ivs = []
    wa, wb = am.width, an.width
    for a in va:
        for b in vb:
            lo = a - b - wb
            hi = a - b + wa
            if lo > 0:
                ivs.append((Rad(lo * lo), Rad(hi * hi)))
            elif hi < 0:
                ivs.append((Rad(hi * hi), Rad(lo * lo)))
            else:
                ivs.append((Rad(0), Rad(max(lo * lo, hi * hi))))
    return IntervalSet(ivs)


def _minkowski_contains(axis_sets: list[IntervalSet], t_sq: Fraction) -> bool:
    """Is t_sq in S_1 + ... + S_d (set sums of the squared per-axis sets)?"""
    if len(axis_sets) == 1:
        return axis_sets[0].contains(Rad(t_sq))
    first, rest = axis_sets[0], axis_sets[1:]
    for lo, hi in first.intervals:
        if lo.sq > t_sq:
            break
        sub_lo = t_sq - hi.sq
        sub_hi = t_sq - lo.sq
        if sub_hi < 0:
            continue
        sub_lo = max(sub_lo, Fraction(0))
        # does rest sum to anything in [sub_lo, sub_hi]?
        if _minkowski_hits_range(rest, sub_lo, sub_hi):
            return True
    return False


def _minkowski_hits_range(axis_sets: list[IntervalSet], lo: Fraction, hi: Fraction) -> bool:
    if len(axis_sets) == 1:
        for a, b in axis_sets[0].intervals:
            if a.sq > hi:
                return False
            if b.sq >= lo:
                return True
        return False
    first, rest = axis_sets[0], axis_sets[1:]
    for a, b in first.intervals:
        if a.sq > hi:
            return False
        if _minkowski_hits_range(rest, max(lo - b.sq, Fraction(0)), hi - a.sq):
            return True
    return False


def _explicit_pair_decide(bm: BlockPlacement, bn: BlockPlacement, t_sq: Fraction) -> bool:
    """Exact covered/not-covered for a pair of blocks with explicit axes."""
    axis_sets = [_axis_squared_union(bm.axis_cells(j), bn.axis_cells(j))
                 for j in range(bm.dim)]
    return _minkowski_contains(axis_sets, t_sq)


def _axis_snap_candidates(ax, target: Fraction, n_cand: int = 3):
    """Cell intervals [lo, hi] on one axis nearest to a target value."""
    out = []
    if isinstance(ax, AxisAP):
        if ax.step == 0:
            ks = [0]
        else:
            k0 = int(round(float((target - ax.start) / ax.step)))
            ks = [min(max(k0 + dk, 0), ax.count - 1) for dk in range(-n_cand, n_cand + 1)]
        for k in sorted(set(ks)):
            v = ax.start + k * ax.step
            out.append((v, v + ax.width))
    else:
        vals = ax.values
        lo_i = _bisect_frac(vals, target)
        for i in range(max(0, lo_i - n_cand), min(len(vals), lo_i + n_cand + 1)):
            out.append((vals[i], vals[i] + ax.width))
    return out


def _bisect_frac(vals, x) -> int:
    lo, hi = 0, len(vals)
    while lo < hi:
        mid = (lo + hi) // 2
        if vals[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _pair_witness_search(bm: BlockPlacement, bn: BlockPlacement, t_sq: Fraction,
                         sweep: int = 48) -> bool:
    """Constructive search for a cell pair realizing the target distance.

    Sweeps real decompositions of t^2 across the transverse axes, snaps to
    nearby cells and verifies containment exactly.  A True answer is a
    certificate; False only means the search failed.
    """
    d = bm.dim
    t = math.sqrt(float(t_sq))
    axes_m = [bm.axis_cells(j) for j in range(d)]
    axes_n = [bn.axis_cells(j) for j in range(d)]
    hulls = [_axis_diff_hull(a, b) for a, b in zip(axes_m, axes_n)]

    def clamp(x, lohi):
        lo, hi = float(lohi[0]), float(lohi[1])
        return min(max(x, lo), hi)

    # transverse target grids: axis 2 (and 3) values to try
    sweeps = []
    for j in range(1, d):
        lo, hi = float(hulls[j][0]), float(hulls[j][1])
        lo = max(lo, -t) if lo < 0 else lo
        hi = min(hi, t)
        pts = np.linspace(lo, min(hi, t), sweep)
        sweeps.append(pts)
    combos = np.stack(np.meshgrid(*sweeps, indexing="ij"), axis=-1).reshape(-1, d - 1) \
        if d > 1 else np.zeros((1, 0))
    for rest in combos:
        rem = float(t_sq) - float(np.sum(rest ** 2))
        if rem < 0:
            continue
        v1 = math.sqrt(rem)
        for sign in (1.0, -1.0):
            tgt = [clamp(sign * v1, hulls[0])] + [clamp(x, hulls[j + 1])
                                                  for j, x in enumerate(rest)]
            cand_axes = []
            ok = True
            for j in range(d):
                # want x_j - y_j ~ tgt[j]: snap x and y cells jointly
                cands = _joint_axis_candidates(axes_m[j], axes_n[j], Fraction(tgt[j]))
                if not cands:
                    ok = False
                    break
                cand_axes.append(cands)
            if not ok:
                continue
            if _verify_axis_combo(cand_axes, t_sq):
                return True
    return False


def _joint_axis_candidates(am, an, target: Fraction, n_cand: int = 2):
    """Candidate per-axis difference intervals x_j - y_j near a target."""
    out = []
    if isinstance(an, AxisAP) and not isinstance(am, AxisAP):
        # snap y given each candidate x near its hull midpoint
        for xlo, xhi in _axis_snap_candidates(am, target + an.hull()[0], n_cand):
            for ylo, yhi in _axis_snap_candidates(an, xlo - target, n_cand):
                out.append((xlo - yhi, xhi - ylo))
        return out
    if isinstance(am, AxisAP) and not isinstance(an, AxisAP):
        for ylo, yhi in _axis_snap_candidates(an, am.hull()[0] - target, n_cand):
            for xlo, xhi in _axis_snap_candidates(am, target + ylo, n_cand):
                out.append((xlo - yhi, xhi - ylo))
        return out
    # both AP or both explicit: anchor y at a few positions, snap x = y + target
    y_anchor_targets = []
    ylo, yhi = an.hull()
    for frac_pos in (Fraction(0), Fraction(1, 2), Fraction(1)):
        y_anchor_targets.append(ylo + (yhi - ylo) * frac_pos)
    for ya in y_anchor_targets:
        for ylo_c, yhi_c in _axis_snap_candidates(an, ya, n_cand):
            for xlo, xhi in _axis_snap_candidates(am, ylo_c + target, n_cand):
                out.append((xlo - yhi_c, xhi - ylo_c))
    return out


def _verify_axis_combo(cand_axes, t_sq: Fraction) -> bool:
    """Exact: does some choice of per-axis intervals sum squares over t_sq?"""
    def sq_iv(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
        if lo > 0:
            return lo * lo, hi * hi
        if hi < 0:
            return hi * hi, lo * lo
        return Fraction(0), max(lo * lo, hi * hi)

    def rec(j: int, acc_lo: Fraction, acc_hi: Fraction) -> bool:
        if acc_lo > t_sq:
            return False
        if j == len(cand_axes):
            return acc_lo <= t_sq <= acc_hi
        for lo, hi in cand_axes[j]:
            slo, shi = sq_iv(lo, hi)
            if rec(j + 1, acc_lo + slo, acc_hi + shi):
                return True
        return False

    return rec(0, Fraction(0), Fraction(0))


def _lattice_within_block_decide(b: BlockPlacement, t_sq: Fraction,
                                 k_budget: int = 200_000) -> bool | None:
    """Exact within-block membership for a lattice-product block.

    Distances scale to |delta + e| with delta in (Z_q - Z_q)^d and |e_i| <= w.
    Scans the integer norm window around the scaled target; returns
    True/False when the window fits the budget, None otherwise.
    """
    body = b.body
    if isinstance(body, LatticeBody):
        q, spacing, side = body.count, body.spacing, body.side
    elif body.factors is not None and _factors_are_full_lattice(body):
        q = len(body.factors[0])
        spacing = Fraction(int(body.factors[0][1] - body.factors[0][0]) if q > 1 else 1,
                           1 << body.resolution)
        side = Fraction(1, 1 << body.resolution)
    else:
        return None
    d = body.dim
    # scaled units: per-axis values delta * 1 + e, |e| <= w, delta in Z, |delta| <= q-1
    w = side / spacing
    tau_sq = t_sq / (b.scale * spacing) ** 2
    # candidate integer norms k with [sum (|dj|-w)+^2, sum (|dj|+w)^2] near tau^2:
    # conservative window |k - tau^2| <= 2 w sqrt(d k) + d w^2 around k ~ tau^2
    tau = math.sqrt(float(tau_sq))
    slack = 2.0 * float(w) * math.sqrt(d) * (tau + 1.0) + d * float(w) ** 2 + 1.0
    k_lo = max(0, math.floor(float(tau_sq) - slack))
    k_hi = math.ceil(float(tau_sq) + slack)
    if k_hi - k_lo > k_budget or k_hi > 4 * 10 ** 15:
        return None
    for k in range(k_lo, k_hi + 1):
        for parts in _square_decompositions(k, d, q - 1):
            lo = Fraction(0)
            hi = Fraction(0)
            for p in parts:
                plo = Fraction(p) - w
                phi = Fraction(p) + w
                hi += phi * phi
                if plo > 0:
                    lo += plo * plo
            if lo <= tau_sq <= hi:
                return True
    return False


def _factors_are_full_lattice(body: GridSet) -> bool:
    f0 = np.asarray(body.factors[0])
    if len(f0) < 2:
        return True
    step = f0[1] - f0[0]
    if not np.all(np.diff(f0) == step):
        return False
    return all(np.array_equal(np.asarray(f), f0) for f in body.factors)


def _square_decompositions(k: int, d: int, part_max: int):
    """All multisets of d nonnegative squares summing to k, parts <= part_max."""
    if k < 0:
        return
    if d == 1:
        r = math.isqrt(k)
        if r * r == k and r <= part_max:
            yield (r,)
        return
    a_hi = min(math.isqrt(k), part_max)
    a_lo = math.isqrt((k + d - 1) // d)
    if a_lo * a_lo * d < k:
        a_lo += 1
    for a in range(a_hi, a_lo - 1, -1):
        for rest in _square_decompositions(k - a * a, d - 1, a):
            yield (a,) + rest


def _pair_decide(bm: BlockPlacement, bn: BlockPlacement, t_sq: Fraction):
    """Returns True (covered, certified), False (excluded, certified) or None."""
    hull = _pair_hull_range(bm, bn)
    if t_sq < hull.lo_sq or t_sq > hull.hi_sq:
        return False
    same = bm is bn
    try:
        return _explicit_pair_decide(bm, bn, t_sq)
    except MemoryError:
        pass
    if same:
        res = _lattice_within_block_decide(bm, t_sq)
        if res is not None:
            return res
    if _pair_witness_search(bm, bn, t_sq):
        return True
    return None


def coverage_check(A: BlockSet, R, targets) -> dict:
    """Exact membership of each target in the distance set of A minus the
    R-ball, decided blockwise; verdicts are True / False / 'undecidable'."""
    R = Fraction(R)
    blocks = []
    partial = False
    for b in A.blocks:
        rng = box_norm_range(b.bounding_box())
        if rng.hi_sq <= R * R:
            continue  # entirely inside the removed ball
        if rng.lo_sq < R * R:
            partial = True
            continue  # partially clipped: skip for witnesses, flag for refutation
        blocks.append(b)
    out = {}
    for raw in targets:
        t_sq = raw.sq if isinstance(raw, Rad) else Fraction(raw) ** 2
        key = float(math.sqrt(float(t_sq)))
        if t_sq == 0:
            out[key] = bool(blocks) or partial
            continue
        verdict_false_ok = not partial
        any_unknown = False
        covered = False
        pairs = [(i, j) for i in range(len(blocks)) for j in range(i, len(blocks))]
        pairs.sort(key=lambda ij: _pair_cost(blocks[ij[0]], blocks[ij[1]]))
        for i, j in pairs:
            res = _pair_decide(blocks[i], blocks[j], t_sq)
            if res is True:
                covered = True
                break
            if res is None:
                any_unknown = True
        if covered:
            out[key] = True
        elif any_unknown or not verdict_false_ok:
            out[key] = "undecidable"
        else:
            out[key] = False
    return out


def _pair_cost(bm: BlockPlacement, bn: BlockPlacement) -> int:
    def c(b):
        return b.body.count if isinstance(b.body, LatticeBody) else b.body.n_cells
    return c(bm) + c(bn)


def blockset_distance_set(A: BlockSet, max_products: int = 1 << 22) -> IntervalSet:
    """Full exact distance set of a block set with explicit bodies."""
    out = IntervalSet([])
    blocks = A.blocks
    for i in range(len(blocks)):
        for j in range(i, len(blocks)):
            bm, bn = blocks[i], blocks[j]
            if i == j and isinstance(bm.body, GridSet):
                part = distance_set(bm.body, bm.body).scale(bm.scale)
            else:
                axis_sets = [_axis_squared_union(bm.axis_cells(k), bn.axis_cells(k),
                                                 max_products) for k in range(A.dim)]
                part = _minkowski_set(axis_sets, max_products)
            out = out.union(part)
    return out


def _minkowski_set(axis_sets: list[IntervalSet], budget: int) -> IntervalSet:
    cur = axis_sets[0]
    for nxt in axis_sets[1:]:
        if len(cur) * len(nxt) > budget:
            raise MemoryError("interval Minkowski sum over budget")
        ivs = [(Rad(a.sq + c.sq), Rad(b.sq + d.sq))
               for a, b in cur.intervals for c, d in nxt.intervals]
        cur = IntervalSet(ivs, already_merged=False)
    return cur


def well_distributed_scales(A: BlockSet, rho, s, C0) -> tuple[list[Fraction], bool]:
    """High-density scales scale_b * ell(Q) over isolated block truncations,
    with the consecutive-ratio growth check."""
    rho, s, C0 = Fraction(rho), Fraction(s), Fraction(C0)
    scales: set[Fraction] = set()
    for b in A.blocks:
        if not isinstance(b.body, GridSet):
            continue  # symbolic bodies are beyond the content engine's budget
        for dc in high_density_cubes(b.body, s, rho):
            scales.add(b.scale * Fraction(1, 1 << dc.cube.level))
    ordered = sorted(scales)
    if len(ordered) < 2:
        return ordered, False
    growth_ok = all(b / a <= C0 for a, b in zip(ordered, ordered[1:]))
    return ordered, growth_ok


def sample_pair_distance(E: GridSet, F: GridSet, rng: np.random.Generator,
                         extra_bits: int = 16) -> Fraction:
    """Squared distance of a random dyadic point pair, one point per set."""
    d = E.dim
    out = Fraction(0)
    ce = E.cells[rng.integers(0, E.n_cells)]
    cf = F.cells[rng.integers(0, F.n_cells)]
    for j in range(d):
        xe = Fraction(int(ce[j]) * (1 << extra_bits) + int(rng.integers(0, (1 << extra_bits) + 1)),
                      1 << (E.resolution + extra_bits))
        xf = Fraction(int(cf[j]) * (1 << extra_bits) + int(rng.integers(0, (1 << extra_bits) + 1)),
                      1 << (F.resolution + extra_bits))
        out += (xe - xf) ** 2
    return out
