"""Cell measures, their Fourier analysis, and the spectral-gap construction.

A CellMeasure is piecewise uniform on the level-L cells of a grid set, so
its Fourier transform has the closed form

    mu_hat(xi) = sum_c w_c e^{-i c.xi} prod_j (1 - e^{-i xi_j h}) / (i xi_j h),

evaluated in batches by the kernels module.  The Fourier convention is the
plain e^{-i x.xi} one throughout, so Plancherel reads
int |mu_hat|^2 = (2 pi)^d int f^2 for density f; that ceiling provides the
rigorous tail bounds for every truncated frequency integral here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from . import _kernels as kernels
from .content import content_map, ContentValue
from .dyadic import DyadicCube, GridSet, Pow2
from .quadrature import QuadResult, QuadSpec, radial_profile, ball_integral

__all__ = [
    "CellMeasure", "BumpSpec", "ParamBundle", "BallSpec", "select_parameters",
    "spectral_gap_measure", "fourier", "partial_l2", "energy", "ball_condition",
    "verify_spectral_gap", "unit_cell_energy", "riesz_gamma",
]


# ----------------------------------------------------------------------
# the auxiliary bump: raised cosine tensor
# ----------------------------------------------------------------------

class BumpSpec:
    """phi(x) = prod_j (1 - cos 2 pi x_j) on [0,1]^d: nonnegative, mass one,
    cubic-decay Fourier transform, and exact box integrals per axis."""

    def __init__(self, dim: int):
        self.dim = dim
        # |phi1_hat(xi)| <= decay_c / (1 + |xi|)^3 for the 1-d factor
        self.decay_c = 16.0 * np.pi ** 2

    @staticmethod
    def value(x: np.ndarray) -> np.ndarray:
        return np.prod(1.0 - np.cos(2 * np.pi * x), axis=-1)

    @staticmethod
    def axis_integral_mp(a, b) -> mp.mpf:
        """integral of 1 - cos(2 pi t) over [a, b], high precision."""
        a = mp.mpf(a.numerator) / a.denominator if isinstance(a, Fraction) else mp.mpf(a)
        b = mp.mpf(b.numerator) / b.denominator if isinstance(b, Fraction) else mp.mpf(b)
        twopi = 2 * mp.pi
        return (b - a) - (mp.sin(twopi * b) - mp.sin(twopi * a)) / twopi

    @staticmethod
    def hat_axis(xi: np.ndarray) -> np.ndarray:
        """Fourier transform of the 1-d factor: exact closed form with the
        removable singularities at 0 and +-2 pi handled by series."""
        xi = np.asarray(xi, dtype=np.float64)
        twopi = 2 * np.pi
        out = np.empty_like(xi, dtype=np.complex128)
        phase = np.exp(-0.5j * xi)
        # g(xi) = sinc(xi / 2pi) * 4 pi^2 / (4 pi^2 - xi^2), poles cancelled
        near = np.abs(np.abs(xi) - twopi) < 1e-3
        g = np.empty_like(xi)
        safe = ~near
        g[safe] = np.sinc(xi[safe] / twopi) * (4 * np.pi ** 2) / (4 * np.pi ** 2 - xi[safe] ** 2)
        if near.any():
            # at xi = +-(2 pi + u): sinc zero cancels the pole; expanding,
            # g = [sin(u/2)/u] * 4 pi^2 / ((pi + u/2)(4 pi + u))
            u = np.abs(xi[near]) - twopi
            sin_ratio = 0.5 - u ** 2 / 48 + u ** 4 / 3840
            g[near] = sin_ratio * (4 * np.pi ** 2) / ((np.pi + u / 2) * (4 * np.pi + u))
        return phase * g

    def hat(self, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
        out = np.ones(xi.shape[0], dtype=np.complex128)
        for j in range(self.dim):
            out = out * self.hat_axis(xi[:, j])
        return out


# ----------------------------------------------------------------------
# cell measures
# ----------------------------------------------------------------------

@dataclass
class CellMeasure:
    dim: int
    resolution: int
    cells: np.ndarray                 # (n, d) int64 corners
    weights: np.ndarray               # (n,) float64, sum ~ 1
    factors: list | None = None       # optional [(corners_1d, weights_1d), ...]
    groups: dict | None = None        # level-T bookkeeping for constructed measures
    level_T: int | None = None
    s_nominal: Fraction | None = None

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=np.int64).reshape(-1, self.dim)
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(self.cells) != len(self.weights):
            raise ValueError("cells/weights length mismatch")
        total = math.fsum(self.weights.tolist())
        if abs(total - 1.0) > 2.0 ** -50:
            raise ValueError(f"weights sum to {total}, off by {total - 1.0}")

    @property
    def h(self) -> float:
        return 2.0 ** -self.resolution

    @classmethod
    def uniform(cls, E: GridSet) -> "CellMeasure":
        n = E.n_cells
        if n == 0:
            raise ValueError("cannot put a measure on an empty set")
        factors = None
        if E.factors is not None:
            factors = []
            for f in E.factors:
                f = np.asarray(f, dtype=np.int64)
                factors.append((f, np.full(len(f), 1.0 / len(f))))
        return cls(E.dim, E.resolution, E.cells.copy(), np.full(n, 1.0 / n),
                   factors=factors)

    def fourier_at(self, xi: np.ndarray) -> np.ndarray:
        """mu_hat on a batch of frequencies, shape (m, d) -> (m,) complex."""
        xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
        h = self.h
        if self.factors is not None:
            out = np.ones(xi.shape[0], dtype=np.complex128)
            for j, (c1, w1) in enumerate(self.factors):
                s = kernels.phase_sum_1d(c1 * h, w1, xi[:, j])
                out = out * s * _box_factor(xi[:, j], h)
            return out
        s = kernels.phase_sum(self.cells * h, self.weights, xi)
        box = np.ones(xi.shape[0], dtype=np.complex128)
        for j in range(self.dim):
            box = box * _box_factor(xi[:, j], h)
        return s * box

    def fourier_sq_at(self, xi: np.ndarray) -> np.ndarray:
        v = self.fourier_at(xi)
        return (v * v.conjugate()).real

    def plancherel(self) -> float:
        """int |mu_hat|^2 over R^d = (2 pi)^d sum w_c^2 / h^d, exactly (Plancherel)."""
        return (2 * np.pi) ** self.dim * float(np.sum(self.weights ** 2)) / self.h ** self.dim

    def support_diameter(self) -> float:
        lo = self.cells.min(axis=0).astype(float) * self.h
        hi = (self.cells.max(axis=0) + 1).astype(float) * self.h
        return float(np.linalg.norm(hi - lo))

    def mass_of_cube(self, cube: DyadicCube) -> float:
        shift = self.resolution - cube.level
        mask = np.ones(len(self.cells), dtype=bool)
        for j in range(self.dim):
            mask &= (self.cells[:, j] >> shift) == cube.corner[j]
        return float(self.weights[mask].sum())


def _box_factor(xi_axis: np.ndarray, h: float) -> np.ndarray:
    """(1 - e^{-i xi h}) / (i xi h) = e^{-i xi h / 2} sinc(xi h / (2 pi))."""
    return np.exp(-0.5j * xi_axis * h) * np.sinc(xi_axis * h / (2 * np.pi))


def fourier(mu: CellMeasure, xi) -> complex:
    """mu_hat at a single frequency."""
    return complex(mu.fourier_at(np.asarray(xi, dtype=np.float64).reshape(1, -1))[0])


# ----------------------------------------------------------------------
# parameter bundle
# ----------------------------------------------------------------------

@dataclass
class ParamBundle:
    d: int
    kappa: Fraction
    rho: Fraction
    N: int
    alpha: Fraction
    c0: Fraction
    T: int
    a: Pow2
    b: Pow2
    delta: Pow2
    eps: Fraction
    C0: float | None = None
    feasibility: dict = field(default_factory=dict)

    def all_feasible(self) -> bool:
        return all(self.feasibility.values())

    def c_d(self) -> float:
        return ball_volume(self.d) / (2 ** (self.d + 4) * self.d ** (self.d / 2))


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def select_parameters(d: int, kappa, rho, N: int, alpha, C0: float | None = None,
                      strict: bool = True) -> ParamBundle:
    """Derive (c0, T, a, b, delta, eps) from (d, kappa, rho, N, alpha) and
    re-verify every defining inequality; violations are listed and, in
    strict mode, raised."""
    kappa, rho, alpha = Fraction(kappa), Fraction(rho), Fraction(alpha)
    if not (0 < kappa < 1) or not (0 < rho < 1) or not (0 < alpha <= Fraction(1, 8)):
        raise ValueError("need kappa in (0,1), rho in (0,1), alpha in (0, 1/8]")
    # largest dyadic c0 with c0 (N (d+1) + 1) < 1/d
    cap = Fraction(1, d * (N * (d + 1) + 1))
    e = 0
    while Fraction(1, 1 << e) >= cap:
        e += 1
    c0 = Fraction(1, 1 << e)
    # largest T with rho <= 2^(-dT-3)
    T = 0
    while rho <= Fraction(1, 1 << (d * (T + 1) + 3)):
        T += 1
    feas = {"T_exists": T >= 1}
    if T < 1 and strict:
        raise ValueError(f"infeasible rho: no T >= 1 with rho <= 2^-(dT+3) (rho={rho})")
    # a = rho^c0 as an exact power of two when rho is dyadic
    log2_rho = _exact_log2(rho)
    a = Pow2(log2_rho * c0)
    delta = a ** (kappa / 2)
    b = a ** kappa
    feas["rho_window"] = Fraction(1, 1 << (d * (T + 1) + 3)) < rho <= Fraction(1, 1 << (d * T + 3))
    feas["N_alpha"] = Fraction(N) * alpha > Fraction(d - 1, 2)
    feas["a_lt_b"] = a.exponent < b.exponent or (a < b)
    feas["two_b_le_delta"] = Pow2(1) * b <= delta         # 2b <= delta, exact on exponents
    feas["a_lt_quarter"] = a < Fraction(1, 4)
    cd = ball_volume(d) / (2 ** (d + 4) * d ** (d / 2))
    feas["b_le_cd"] = float(b) <= cd
    if C0 is not None:
        feas["C0_term_lt_cd"] = C0 * float(b) ** (N * float(alpha) - (d - 1) / 2) < cd
    eps = c0 * Fraction(1, 1 << (d * T)) / T
    feas["epsilon_inequality"] = _epsilon_ok(d, T, eps)
    bundle = ParamBundle(d, kappa, rho, N, alpha, c0, T, a, b, delta, eps, C0, feas)
    if strict and not bundle.all_feasible():
        bad = [k for k, v in feas.items() if not v]
        raise ValueError(f"parameter bundle infeasible: {bad} "
                         f"(a={float(a):.4g}, b={float(b):.4g}, delta={float(delta):.4g})")
    return bundle


def _exact_log2(x: Fraction) -> Fraction:
    num, den = x.numerator, x.denominator
    ln = num.bit_length() - 1
    ld = den.bit_length() - 1
    if (1 << ln) != num or (1 << ld) != den:
        raise ValueError(f"{x} is not a power of two; rho must be dyadic 2^-k")
    return Fraction(ln - ld)


def _epsilon_ok(d: int, T: int, eps: Fraction) -> bool:
    """Verify 1 - 2^(-dT-3) > 2^((d-s)T) - 2^(-sT-1) over s in [d-eps, d].

    The right side is decreasing in s, so s = d - eps is the worst case.
    Checked with enough working precision for quantities near 1 - 2^(-dT)."""
    prec = 2 * d * T + 80
    with mp.workprec(prec):
        e = mp.mpf(eps.numerator) / eps.denominator
        s = d - e
        lhs = 1 - mp.mpf(2) ** (-d * T - 3)
        rhs = mp.mpf(2) ** (e * T) - mp.mpf(2) ** (-s * T - 1)
        return bool(lhs > rhs)


# ----------------------------------------------------------------------
# the spectral-gap measure
# ----------------------------------------------------------------------

def spectral_gap_measure(E: GridSet, bundle: "ParamBundle | int", s) -> CellMeasure:
    """Weighted union of uniform cell measures: one submeasure per level-T
    cube of E, weighted by the bump integral over that cube.

    Requires content(E ∩ Q, s) >= ell(Q)^s / 2 for every level-T cube Q.
    """
    T = bundle.T if isinstance(bundle, ParamBundle) else int(bundle)
    s = Fraction(s)
    if E.resolution < T:
        raise ValueError(f"grid resolution {E.resolution} below T={T}")
    d = E.dim
    table = content_map(E, s)
    half = ContentValue.cube_power(s, T, Fraction(1, 2))
    for corner in np.ndindex(*((1 << T,) * d)):
        val = table.get((T, tuple(int(c) for c in corner)))
        if val is None or val.cmp(half) < 0:
            raise ValueError(f"density precondition fails at level-{T} cube {corner}: "
                             f"content {'0' if val is None else val.symbolic()} < ell^s/2")
    shift = E.resolution - T
    if E.factors is not None:
        # product fast path: per-axis weights w1(q)/n1(q)
        factors = []
        with mp.workdps(40):
            for f in E.factors:
                f = np.asarray(f, dtype=np.int64)
                w1 = np.empty(len(f))
                for qc in np.unique(f >> shift):
                    idx = np.nonzero((f >> shift) == qc)[0]
                    a = Fraction(int(qc), 1 << T)
                    bnd = Fraction(int(qc) + 1, 1 << T)
                    wq = BumpSpec.axis_integral_mp(a, bnd)
                    w1[idx] = float(wq / len(idx))
                factors.append((f, w1))
        cells = E.cells.copy()
        weights = np.ones(len(cells))
        # cell weight = product of axis weights at the cell's coordinates
        for j, (f, w1) in enumerate(factors):
            lut = {int(c): w for c, w in zip(f, w1)}
            weights *= np.array([lut[int(c)] for c in cells[:, j]])
        groups = _group_bookkeeping(E, T, shift)
        return CellMeasure(d, E.resolution, cells, weights, factors=factors,
                           groups=groups, level_T=T, s_nominal=s)
    cells = E.cells
    weights = np.empty(len(cells))
    groups = {}
    with mp.workdps(40):
        keys = np.zeros(len(cells), dtype=np.int64)
        for j in range(d):
            keys = keys * (1 << T) + (cells[:, j] >> shift)
        for key in np.unique(keys):
            idx = np.nonzero(keys == key)[0]
            corner = []
            k = int(key)
            for j in range(d - 1, -1, -1):
                corner.append(k % (1 << T))
                k //= (1 << T)
            corner = tuple(reversed(corner))
            wq = mp.mpf(1)
            for j in range(d):
                a = Fraction(corner[j], 1 << T)
                bnd = Fraction(corner[j] + 1, 1 << T)
                wq *= BumpSpec.axis_integral_mp(a, bnd)
            weights[idx] = float(wq) / len(idx)
            groups[corner] = {"w_mp": wq, "n_cells": len(idx),
                              "share": Fraction(1, len(idx))}
    return CellMeasure(d, E.resolution, cells.copy(), weights,
                       groups=groups, level_T=T, s_nominal=s)


def _group_bookkeeping(E: GridSet, T: int, shift: int) -> dict:
    d = E.dim
    groups = {}
    keys = np.zeros(len(E.cells), dtype=np.int64)
    for j in range(d):
        keys = keys * (1 << T) + (E.cells[:, j] >> shift)
    with mp.workdps(40):
        for key in np.unique(keys):
            idx = np.nonzero(keys == key)[0]
            k = int(key)
            corner = []
            for j in range(d - 1, -1, -1):
                corner.append(k % (1 << T))
                k //= (1 << T)
            corner = tuple(reversed(corner))
            wq = mp.mpf(1)
            for j in range(d):
                wq *= BumpSpec.axis_integral_mp(Fraction(corner[j], 1 << T),
                                                Fraction(corner[j] + 1, 1 << T))
            groups[corner] = {"w_mp": wq, "n_cells": len(idx),
                              "share": Fraction(1, len(idx))}
    return groups


# ----------------------------------------------------------------------
# frequency-side functionals
# ----------------------------------------------------------------------

def partial_l2(mu: CellMeasure, T_radius: float, quad: QuadSpec = QuadSpec()) -> QuadResult:
    """F_mu(T) = integral of |mu_hat|^2 over the ball of radius T."""
    if T_radius <= 0:
        raise ValueError("radius must be positive")
    vals, errs = radial_profile(mu.fourier_sq_at, mu.dim, [T_radius], quad,
                                diam_hint=mu.support_diameter())
    return QuadResult(float(vals[0]), float(errs[0]))


def partial_l2_profile(mu: CellMeasure, radii, quad: QuadSpec = QuadSpec()
                       ) -> tuple[np.ndarray, np.ndarray]:
    return radial_profile(mu.fourier_sq_at, mu.dim, radii, quad,
                          diam_hint=mu.support_diameter())


def riesz_gamma(d: int, s: float) -> float:
    """gamma(d, s) = pi^(s - d/2) Gamma((d-s)/2) / Gamma(s/2)."""
    return math.pi ** (s - d / 2) * math.gamma((d - s) / 2) / math.gamma(s / 2)


_UNIT_ENERGY_CACHE: dict = {}


def unit_cell_energy(d: int, s: float, depth: int = 4, gl: int = 8) -> tuple[float, float]:
    """Bracket for the self-pair integral of |x - y|^-s over the unit cell.

    Subdividing both cubes in halves maps coincident sub-pairs back to the
    same integral (times 2^(s-2d) each, 2^d of them) and touching sub-pairs
    to shifted unit-cell pair integrals; the linear relation is solved with
    the unresolved touching mass bounded by the value itself.
    """
    key = (d, round(float(s), 12), depth, gl)
    if key in _UNIT_ENERGY_CACHE:
        return _UNIT_ENERGY_CACHE[key]
    s = float(s)
    if not 0 < s < d:
        raise ValueError("need 0 < s < d for a finite self-energy")
    from itertools import product as iproduct
    x, w = np.polynomial.legendre.leggauss(gl)
    x = (x + 1) / 2
    w = w / 2
    grid = np.stack(np.meshgrid(*([x] * d), indexing="ij"), -1).reshape(-1, d)
    gw = np.stack(np.meshgrid(*([w] * d), indexing="ij"), -1).reshape(-1, d).prod(1)

    def far_pair(v) -> float:
        diff = grid[:, None, :] - grid[None, :, :] + np.asarray(v, dtype=float)
        dist = np.sqrt((diff ** 2).sum(-1))
        return float((gw[:, None] * gw[None, :] / dist ** s).sum())

    def touching(v) -> bool:
        return all(abs(c) <= 1 for c in v) and any(c != 0 for c in v)

    scale = 2.0 ** (s - 2 * d)
    A = 0.0          # resolved contribution (coefficient of 1)
    coeff_I = 2.0 ** (s - d)        # coefficient of I from coincident sub-pairs
    w_rem = 0.0      # unresolved touching mass, each term bounded by I
    # weight per child offset delta: prod (2 - |delta_j|), scaled by 2^(s-2d)
    work = []
    for v in iproduct(*([(-1, 0, 1)] * d)):
        if all(c == 0 for c in v):
            continue
        mult = np.prod([2 - abs(c) for c in v])
        work.append((v, scale * mult, 0))
    while work:
        v, wt, lvl = work.pop()
        if not touching(v):
            A += wt * far_pair(v)
            continue
        if lvl >= depth:
            w_rem += wt
            continue
        for delta in iproduct(*([(-1, 0, 1)] * d)):
            mult = np.prod([2 - abs(c) for c in delta])
            child = tuple(2 * vi + di for vi, di in zip(v, delta))
            work.append((child, wt * scale * mult, lvl + 1))
    denom_lo = 1.0 - coeff_I
    denom_hi = 1.0 - coeff_I - w_rem
    if denom_hi <= 0:
        raise ArithmeticError("touching mass too large; increase depth")
    out = (A / denom_lo, A / denom_hi)
    _UNIT_ENERGY_CACHE[key] = out
    return out


def energy(mu: CellMeasure, s_exp: float, method: str = "direct",
           quad: QuadSpec = QuadSpec(), gl: int = 4, xi_max: float | None = None
           ) -> QuadResult:
    """s-energy of the measure: direct double integral over cell pairs, or
    the Riesz-kernel Fourier representation with a Plancherel tail bound."""
    s = float(s_exp)
    d = mu.dim
    if not 0 < s < d:
        raise ValueError(f"energy kernel needs 0 < s < d, got s={s}")
    if method == "direct":
        h = mu.h
        x, w = np.polynomial.legendre.leggauss(gl)
        x = (x + 1) / 2
        w = w / 2
        off = kernels.pair_energy(mu.cells * h, mu.weights, h, s, x, w)
        off_fine = kernels.pair_energy(mu.cells * h, mu.weights, h, s,
                                       *_gl_unit(2 * gl))
        lo_u, hi_u = unit_cell_energy(d, s)
        same_lo = float(np.sum(mu.weights ** 2)) * h ** (-s) * lo_u
        same_hi = float(np.sum(mu.weights ** 2)) * h ** (-s) * hi_u
        val = off_fine + 0.5 * (same_lo + same_hi)
        err = abs(off_fine - off) + 0.5 * (same_hi - same_lo)
        return QuadResult(val, err)
    if method == "fourier":
        gamma = riesz_gamma(d, s)
        P = mu.plancherel()
        xi = xi_max or 256.0

        def integrand(nodes):
            r = np.linalg.norm(nodes, axis=1)
            return mu.fourier_sq_at(nodes) * r ** (s - d)

        diam = mu.support_diameter()
        while True:
            (main,), (qerr,) = radial_profile(integrand, d, [xi], quad, diam_hint=diam)
            (f_xi,), (ferr,) = radial_profile(mu.fourier_sq_at, d, [xi], quad,
                                              diam_hint=diam)
            tail = xi ** (s - d) * max(P - f_xi + ferr, 0.0)
            if tail <= 0.05 * main or xi >= 4096.0 or (xi_max is not None):
                break
            xi *= 2
        return QuadResult(gamma * (main + 0.5 * tail), gamma * (qerr + 0.5 * tail))
    raise ValueError("method must be 'direct' or 'fourier'")


def _gl_unit(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2


# ----------------------------------------------------------------------
# ball condition
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BallSpec:
    n_centers: int = 128
    depth: int = 3
    r_min_exp: int | None = None   # default: the cell level
    r_max: float = 2.0


def ball_condition(mu: CellMeasure, s: float, spec: BallSpec = BallSpec()) -> dict:
    """sup estimate of mu(B(x, r)) / r^s over a deterministic grid of cell
    corners and dyadic radii; masses are exact up to cell-subdivision
    brackets at the given depth."""
    s = float(s)
    L = mu.resolution
    stride = max(1, len(mu.cells) // spec.n_centers)
    centers = (mu.cells[::stride].astype(np.float64)) * mu.h
    rmin = 2.0 ** -(spec.r_min_exp if spec.r_min_exp is not None else L)
    radii = []
    r = rmin
    while r <= spec.r_max:
        radii.append(r)
        r *= 2
    radii = np.array(radii)
    lo, hi = kernels.ball_mass(mu.cells.astype(np.float64), mu.weights, mu.h,
                               centers, radii, spec.depth)
    ratios_hi = hi / radii[None, :] ** s
    ratios_lo = lo / radii[None, :] ** s
    i, j = np.unravel_index(np.argmax(ratios_hi), ratios_hi.shape)
    return {
        "A_est": float(ratios_hi[i, j]),
        "A_lower": float(ratios_lo.max()),
        "worst_center": centers[i].tolist(),
        "worst_radius": float(radii[j]),
        "n_centers": len(centers),
        "depth": spec.depth,
    }


# ----------------------------------------------------------------------
# spectral gap verification
# ----------------------------------------------------------------------

def verify_spectral_gap(mu: CellMeasure, bundle: ParamBundle,
                        quad: QuadSpec = QuadSpec(), n_xi: int = 1000,
                        xi_max: float = 1e3, seed: int = 7) -> dict:
    """Gap mass F(a^-N) - F(delta/b), its pass flag, and the worst ratio of
    |mu_hat - phi_hat| against the sqrt(d) 2^(1-T) |xi| envelope."""
    if mu.level_T is None:
        raise ValueError("measure lacks level-T construction data")
    a_inv_N = float(bundle.a ** (-bundle.N))
    delta_over_b = float(bundle.delta / bundle.b)
    if a_inv_N <= delta_over_b:
        gap, gap_err = 0.0, 0.0
    else:
        vals, errs = partial_l2_profile(mu, [delta_over_b, a_inv_N], quad)
        gap = float(vals[1] - vals[0])
        gap_err = float(errs[1] + errs[0])
    a_val = float(bundle.a)
    rng = np.random.default_rng(seed)
    mags = np.logspace(-3, np.log10(xi_max), n_xi)
    dirs = rng.normal(size=(n_xi, mu.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    xi = mags[:, None] * dirs
    bump = BumpSpec(mu.dim)
    diff = np.abs(mu.fourier_at(xi) - bump.hat(xi))
    envelope = math.sqrt(mu.dim) * mags * 2.0 ** (1 - mu.level_T)
    proximity = float(np.max(diff / envelope))
    return {
        "gap_mass": gap,
        "gap_err": gap_err,
        "pass": bool(gap - gap_err <= a_val),
        "a": a_val,
        "proximity": proximity,
        "radii": (delta_over_b, a_inv_N),
    }
