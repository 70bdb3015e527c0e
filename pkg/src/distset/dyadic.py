"""Exact dyadic arithmetic: dyadic rationals, dyadic cubes, and grid sets.

Everything downstream (content computations, distance sets, measure
constructions) is built on sets that are finite unions of dyadic cells, so
all geometric predicates in this module are exact integer arithmetic.
"""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

__all__ = ["Dyadic", "Pow2", "DyadicCube", "GridSet"]


def _normalize(m: int, e: int) -> tuple[int, int]:
    if m == 0:
        return 0, 0
    while m % 2 == 0:
        m //= 2
        e += 1
    return m, e


class Dyadic:
    """A dyadic rational m * 2**e in canonical form (m odd, or m = e = 0)."""

    __slots__ = ("m", "e")

    def __init__(self, m: int = 0, e: int = 0):
        self.m, self.e = _normalize(int(m), int(e))

    @classmethod
    def from_fraction(cls, fr) -> "Dyadic":
        fr = Fraction(fr)
        den = fr.denominator
        e = 0
        while den % 2 == 0:
            den //= 2
            e += 1
        if den != 1:
            raise ValueError(f"{fr} is not a dyadic rational")
        return cls(fr.numerator, -e)

    def as_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m * (1 << self.e))
        return Fraction(self.m, 1 << (-self.e))

    def __float__(self):
        return self.m * 2.0 ** self.e

    def __bool__(self):
        return self.m != 0

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        e = min(self.e, other.e) if (self.m and other.m) else (self.e if self.m else other.e)
        return Dyadic(self.m * (1 << (self.e - e)) + other.m * (1 << (other.e - e)), e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.m, self.e)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Dyadic(self.m * other.m, self.e + other.e)

    __rmul__ = __mul__

    def _cmp(self, other) -> int:
        other = _coerce(other)
        d = self - other
        return (d.m > 0) - (d.m < 0)

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        if other is NotImplemented:
            return NotImplemented
        return self.m == other.m and self.e == other.e

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash(self.as_fraction())

    def is_power_of_two(self) -> bool:
        return self.m == 1

    def __repr__(self):
        return f"Dyadic({self.m}, {self.e})"

    def __str__(self):
        return str(self.as_fraction())


def _coerce(x):
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, int):
        return Dyadic(x, 0)
    if isinstance(x, Fraction):
        return Dyadic.from_fraction(x)
    return NotImplemented


D0 = Dyadic(0)
D1 = Dyadic(1)


class Pow2:
    """An exact power 2**x with rational exponent x.

    Products of dyadic parameters raised to rational powers (a = rho**c0,
    b = a**kappa, ...) stay in this class, so ordering and products between
    them are decided on exponents alone.
    """

    __slots__ = ("exponent",)

    def __init__(self, exponent):
        self.exponent = Fraction(exponent)

    @classmethod
    def of(cls, base: "Dyadic | int | Fraction", power=1) -> "Pow2":
        base = _coerce(base) if not isinstance(base, Pow2) else base
        if isinstance(base, Pow2):
            return Pow2(base.exponent * Fraction(power))
        if not base.is_power_of_two():
            raise ValueError(f"{base} is not a power of two")
        return cls(Fraction(base.e) * Fraction(power))

    def __float__(self):
        return float(2.0 ** float(self.exponent))

    def __mul__(self, other):
        if isinstance(other, Pow2):
            return Pow2(self.exponent + other.exponent)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Pow2):
            return Pow2(self.exponent - other.exponent)
        return NotImplemented

    def __pow__(self, power):
        return Pow2(self.exponent * Fraction(power))

    def _cmp(self, other):
        if isinstance(other, Pow2):
            return (self.exponent > other.exponent) - (self.exponent < other.exponent)
        # compare 2**x against a positive rational exactly via 2-adic bracketing
        q = Fraction(other)
        if q <= 0:
            return 1
        x = self.exponent
        lo = _floor_log2(q)
        if x < lo:
            return -1
        if x > lo + 1:
            return 1
        # narrow range: 2**x vs q  <=>  2**num vs q**den  (den > 0)
        lhs = Fraction(2) ** x.numerator
        rhs = q ** x.denominator
        return (lhs > rhs) - (lhs < rhs)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, Pow2):
            return self.exponent == other.exponent
        return self._cmp(other) == 0

    def __hash__(self):
        return hash(("Pow2", self.exponent))

    def __repr__(self):
        return f"Pow2({self.exponent})"


def _floor_log2(q: Fraction) -> int:
    n, d = q.numerator, q.denominator
    k = n.bit_length() - d.bit_length()
    if (n >> k if k >= 0 else n << -k) < d:
        k -= 1
    return k


class DyadicCube:
    """Closed dyadic cube corner*2**-level + [0, 2**-level]^d."""

    __slots__ = ("dim", "level", "corner")

    def __init__(self, dim: int, level: int, corner):
        if level < 0:
            raise ValueError("cube level must be >= 0")
        self.dim = dim
        self.level = level
        self.corner = tuple(int(c) for c in corner)
        if len(self.corner) != dim:
            raise ValueError("corner dimension mismatch")

    @classmethod
    def unit(cls, dim: int) -> "DyadicCube":
        return cls(dim, 0, (0,) * dim)

    def sidelength(self) -> Dyadic:
        return Dyadic(1, -self.level)

    def children(self) -> list["DyadicCube"]:
        kids = []
        for bits in range(1 << self.dim):
            off = tuple((bits >> j) & 1 for j in range(self.dim))
            kids.append(DyadicCube(
                self.dim, self.level + 1,
                tuple(2 * c + o for c, o in zip(self.corner, off))))
        return kids

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("unit-level cube has no parent here")
        return DyadicCube(self.dim, self.level - 1, tuple(c // 2 for c in self.corner))

    def contains_cube(self, other: "DyadicCube") -> bool:
        if other.level < self.level:
            return False
        shift = other.level - self.level
        return all((oc >> shift) == c for oc, c in zip(other.corner, self.corner))

    def volume(self) -> Dyadic:
        return Dyadic(1, -self.level * self.dim)

    def as_box(self):
        """Closed box as a list of (lo, hi) Fractions per axis."""
        h = Fraction(1, 1 << self.level)
        return [(c * h, (c + 1) * h) for c in self.corner]

    def __eq__(self, other):
        return (isinstance(other, DyadicCube) and self.dim == other.dim
                and self.level == other.level and self.corner == other.corner)

    def __hash__(self):
        return hash((self.dim, self.level, self.corner))

    def __repr__(self):
        return f"DyadicCube(d={self.dim}, k={self.level}, corner={self.corner})"


def children(cube: DyadicCube) -> list[DyadicCube]:
    """The 2^d cubes of the next level partitioning `cube`."""
    return cube.children()


class GridSet:
    """A union of level-L dyadic cells in [0,1]^d, with optional affine placement.

    `cells` is an (n, d) int64 array of cell corners (coordinates in
    [0, 2**L)), kept sorted lexicographically and deduplicated.  The placed
    set is anchor + scale * (body), where scale is a dyadic power of two and
    anchor a dyadic vector; most operations work in the unit body frame.

    When the body happens to be a Cartesian product of 1-d cell sets
    (the lattice-grid families all are), `factors` records the 1-d corner
    arrays; kernels downstream use this to cut evaluation cost.
    """

    def __init__(self, dim: int, resolution: int, cells, anchor=None,
                 scale: Dyadic | None = None, factors=None):
        if dim not in (2, 3) and dim != 1:
            raise ValueError("supported dimensions: 1 (factors), 2, 3")
        if resolution < 0:
            raise ValueError("resolution must be >= 0")
        self.dim = dim
        self.resolution = resolution
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, dim)
        if cells.size:
            if cells.min() < 0 or cells.max() >= (1 << resolution):
                raise ValueError("cells out of range for resolution")
        order = np.lexsort(cells.T[::-1]) if cells.size else np.array([], dtype=np.int64)
        cells = cells[order]
        if cells.size:
            keep = np.ones(len(cells), dtype=bool)
            keep[1:] = np.any(cells[1:] != cells[:-1], axis=1)
            cells = cells[keep]
        self.cells = cells
        self.anchor = tuple(anchor) if anchor is not None else tuple(D0 for _ in range(dim))
        self.scale = scale if scale is not None else D1
        if not self.scale.is_power_of_two():
            raise ValueError("scale must be a dyadic power of two")
        self.factors = factors

    # -- basic queries ---------------------------------------------------

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def is_empty(self) -> bool:
        return len(self.cells) == 0

    def cell_side(self) -> Dyadic:
        return Dyadic(1, -self.resolution) * self.scale

    def volume(self) -> Dyadic:
        """Exact Lebesgue measure of the placed set."""
        v = Dyadic(self.n_cells, -self.resolution * self.dim)
        s = self.scale
        for _ in range(self.dim):
            v = v * s
        return v

    def bounding_box(self):
        """Placed closed bounding box, (lo, hi) Fractions per axis."""
        h = self.cell_side().as_fraction()
        out = []
        for j in range(self.dim):
            a = self.anchor[j].as_fraction()
            if self.is_empty():
                out.append((a, a))
            else:
                out.append((a + int(self.cells[:, j].min()) * h,
                            a + (int(self.cells[:, j].max()) + 1) * h))
        return out

    def contains_point(self, point) -> bool:
        """Exact membership of a rational point in the placed (closed) set."""
        h = self.cell_side().as_fraction()
        idx_ranges = []
        for j in range(self.dim):
            x = Fraction(point[j]) if not isinstance(point[j], Dyadic) else point[j].as_fraction()
            u = (x - self.anchor[j].as_fraction()) / h
            lo = _floor_frac(u)
            # closed cells: boundary points belong to both neighbours
            cand = {lo, lo - 1} if u == lo else {lo}
            cand = {c for c in cand if 0 <= c < (1 << self.resolution)}
            if not cand:
                return False
            idx_ranges.append(cand)
        from itertools import product
        cellset = {tuple(c) for c in self.cells.tolist()}
        return any(tuple(ix) in cellset for ix in product(*idx_ranges))

    # -- structural operations -------------------------------------------

    def refine(self, to_resolution: int) -> "GridSet":
        if to_resolution < self.resolution:
            raise ValueError("cannot coarsen")
        k = to_resolution - self.resolution
        if k == 0:
            return self
        offs = np.stack(np.meshgrid(*([np.arange(1 << k)] * self.dim),
                                    indexing="ij"), axis=-1).reshape(-1, self.dim)
        cells = (self.cells[:, None, :] << k) + offs[None, :, :]
        factors = None
        if self.factors is not None:
            factors = [((np.asarray(f)[:, None] << k)
                        + np.arange(1 << k)[None, :]).ravel() for f in self.factors]
        return GridSet(self.dim, to_resolution, cells.reshape(-1, self.dim),
                       anchor=self.anchor, scale=self.scale, factors=factors)

    def restrict(self, cube: DyadicCube) -> "GridSet":
        """Cells inside `cube`, rebased so that `cube` maps onto [0,1]^d."""
        if cube.level > self.resolution:
            raise ValueError("cube finer than grid resolution")
        shift = self.resolution - cube.level
        mask = np.ones(self.n_cells, dtype=bool)
        for j in range(self.dim):
            mask &= (self.cells[:, j] >> shift) == cube.corner[j]
        sub = self.cells[mask].copy()
        for j in range(self.dim):
            sub[:, j] -= cube.corner[j] << shift
        return GridSet(self.dim, shift, sub)

    def affine(self, scale_pow2: Dyadic, shift) -> "GridSet":
        """Image under x -> u*x + v with u a dyadic power of two, v dyadic."""
        if not scale_pow2.is_power_of_two():
            raise ValueError("affine scale must be a power of two")
        new_scale = self.scale * scale_pow2
        new_anchor = tuple(scale_pow2 * a + _coerce(v) for a, v in zip(self.anchor, shift))
        return GridSet(self.dim, self.resolution, self.cells.copy(),
                       anchor=new_anchor, scale=new_scale, factors=self.factors)

    def corners_float(self) -> np.ndarray:
        """Placed cell corners as float64 (n, d)."""
        h = float(self.cell_side())
        base = np.array([float(a) for a in self.anchor])
        return base[None, :] + self.cells.astype(np.float64) * h

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        return json.dumps({
            "dim": self.dim,
            "resolution": self.resolution,
            "cells": self.cells.tolist(),
            "anchor": [str(a.as_fraction()) for a in self.anchor],
            "scale": str(self.scale.as_fraction()),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GridSet":
        obj = json.loads(text)
        anchor = tuple(Dyadic.from_fraction(Fraction(a)) for a in obj["anchor"])
        scale = Dyadic.from_fraction(Fraction(obj["scale"]))
        return cls(obj["dim"], obj["resolution"], np.array(obj["cells"], dtype=np.int64),
                   anchor=anchor, scale=scale)

    @classmethod
    def full_cube(cls, dim: int, resolution: int) -> "GridSet":
        ax = np.arange(1 << resolution, dtype=np.int64)
        cells = np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        return cls(dim, resolution, cells, factors=[ax.copy() for _ in range(dim)])

    @classmethod
    def from_factors(cls, factors, resolution: int) -> "GridSet":
        """Product grid set from 1-d corner arrays."""
        factors = [np.asarray(f, dtype=np.int64) for f in factors]
        cells = np.stack(np.meshgrid(*factors, indexing="ij"), axis=-1).reshape(-1, len(factors))
        return cls(len(factors), resolution, cells, factors=factors)

    def __eq__(self, other):
        return (isinstance(other, GridSet) and self.dim == other.dim
                and self.resolution == other.resolution
                and np.array_equal(self.cells, other.cells)
                and self.anchor == other.anchor and self.scale == other.scale)

    def __repr__(self):
        return (f"GridSet(d={self.dim}, L={self.resolution}, "
                f"n_cells={self.n_cells})")


def _floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def grid_volume(E: GridSet) -> Dyadic:
    """Exact Lebesgue measure of a grid set."""
    return E.volume()


def restrict(E: GridSet, Q: DyadicCube) -> GridSet:
    """E ∩ Q rebased to the unit cube frame of Q."""
    return E.restrict(Q)


def difference_vectors(E: GridSet, F: GridSet, max_pairs: int = 1 << 26,
                       max_grid: int = 1 << 24) -> np.ndarray:
    """Deduplicated corner differences {c_E - c_F} of two same-resolution grids.

    Small instances go through a direct broadcast; larger ones through an
    FFT cross-correlation on occupancy grids whose counts are validated to
    be near-integers before thresholding, so the support is exact.
    """
    if E.resolution != F.resolution or E.dim != F.dim:
        raise ValueError("difference_vectors requires a shared resolution; refine first")
    d = E.dim
    if E.is_empty() or F.is_empty():
        return np.zeros((0, d), dtype=np.int64)
    n_pairs = E.n_cells * F.n_cells
    if n_pairs <= max_pairs:
        diff = (E.cells[:, None, :] - F.cells[None, :, :]).reshape(-1, d)
        return np.unique(diff, axis=0)
    side = 1 << E.resolution
    if side ** d > max_grid:
        raise MemoryError(
            f"difference set over budget: {n_pairs} pairs, {side ** d} grid cells; "
            f"dedup stats: |E|={E.n_cells}, |F|={F.n_cells}")
    occ_e = np.zeros((side,) * d)
    occ_f = np.zeros((side,) * d)
    occ_e[tuple(E.cells.T)] = 1.0
    occ_f[tuple(F.cells.T)] = 1.0
    shape = tuple(2 * side - 1 for _ in range(d))
    fe = np.fft.rfftn(occ_e, shape)
    ff = np.fft.rfftn(np.flip(occ_f), shape)
    corr = np.fft.irfftn(fe * ff, shape)
    near = np.abs(corr - np.round(corr))
    if near.max() > 1e-3:
        raise ArithmeticError("FFT correlation too far from integers; refusing")
    idx = np.argwhere(np.round(corr) > 0)
    return (idx - (side - 1)).astype(np.int64)
