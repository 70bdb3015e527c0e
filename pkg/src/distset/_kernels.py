"""Hot numeric kernels: numba-compiled with a pure-numpy fallback.

Set DISTSET_DISABLE_NUMBA=1 to force the numpy path (same signatures, same
results).  `benchmarks/bench_kernels.py` compares the two.
"""
from __future__ import annotations

import os

import numpy as np

from .special import DR1, DR2, PIO4, PP, PQ, QP, QQ, RP, RQ, SQ2OPI

_DISABLE = os.environ.get("DISTSET_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false")
USE_NUMBA = False
if not _DISABLE:
    try:
        from numba import njit, prange
        USE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay graceful
        pass


# ----------------------------------------------------------------------
# numpy reference implementations
# ----------------------------------------------------------------------

def _phase_sum_np(corners: np.ndarray, weights: np.ndarray, xi: np.ndarray,
                  chunk: int = 256) -> np.ndarray:
    """S(xi_i) = sum_c w_c exp(-i <corner_c, xi_i>), chunked over xi rows."""
    m = xi.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for a in range(0, m, chunk):
        b = min(a + chunk, m)
        phases = xi[a:b] @ corners.T           # (chunk, n)
        out[a:b] = (np.exp(-1j * phases) * weights).sum(axis=1)
    return out


def _phase_sum_1d_np(corners: np.ndarray, weights: np.ndarray, xi: np.ndarray,
                     chunk: int = 4096) -> np.ndarray:
    m = xi.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for a in range(0, m, chunk):
        b = min(a + chunk, m)
        out[a:b] = (np.exp(-1j * np.outer(xi[a:b], corners)) * weights).sum(axis=1)
    return out


def _overlap_sum_np(occ: np.ndarray, f_corners: np.ndarray, h: float,
                    shifts: np.ndarray) -> np.ndarray:
    """For each shift v: sum over F-cells f of vol(E ∩ (cell_f - v)),
    with E given by the occupancy array `occ` of its level-L cells."""
    d = f_corners.shape[1]
    side = occ.shape[0]
    m = shifts.shape[0]
    out = np.zeros(m)
    base_f = f_corners.astype(np.float64)
    for i in range(m):
        pos = base_f - shifts[None, i] / h      # F-cell corners in E grid units
        k0 = np.floor(pos).astype(np.int64)
        frac = pos - k0
        total = 0.0
        for offs in np.ndindex(*((2,) * d)):
            k = k0 + np.asarray(offs)
            lens = np.where(np.asarray(offs) == 0, 1.0 - frac, frac)
            vol = lens.prod(axis=1)
            ok = np.all((k >= 0) & (k < side), axis=1)
            if not ok.any():
                continue
            kk = k[ok]
            flat = kk[:, 0]
            for j in range(1, d):
                flat = flat * side + kk[:, j]
            total += (vol[ok] * occ.ravel()[flat]).sum()
        out[i] = total * h ** d
    return out


def _pair_energy_np(corners: np.ndarray, weights: np.ndarray, h: float, s: float,
                    nodes: np.ndarray, gl_w: np.ndarray) -> float:
    """Off-diagonal direct energy sum_{i != j} w_i w_j avg |x - y|^-s by
    tensor Gauss-Legendre on each cell pair."""
    n, d = corners.shape
    g = len(nodes)
    grids = np.stack(np.meshgrid(*([nodes] * d), indexing="ij"), -1).reshape(-1, d)
    gw = np.stack(np.meshgrid(*([gl_w] * d), indexing="ij"), -1).reshape(-1, d).prod(axis=1)
    total = 0.0
    for i in range(n):
        diff = corners[i] - corners          # (n, d)
        pts = diff[:, None, None, :] + h * (grids[None, :, None, :] - grids[None, None, :, :])
        dist = np.sqrt((pts ** 2).sum(-1))
        mask = np.arange(n) != i
        vals = (gw[None, :, None] * gw[None, None, :] / dist[mask] ** s).sum((1, 2))
        total += (weights[i] * weights[mask] * vals).sum()
    return total


def _ball_mass_np(corners: np.ndarray, weights: np.ndarray, h: float,
                  centers: np.ndarray, radii: np.ndarray, depth: int
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Bracket mu(B(x, r)) for cell measures: exact on cells fully in/out,
    recursive bisection to `depth` on boundary cells."""
    m, k = centers.shape[0], radii.shape[0]
    lo = np.zeros((m, k))
    hi = np.zeros((m, k))
    d = corners.shape[1]
    for ci in range(m):
        c = centers[ci]
        for ri in range(k):
            r2 = radii[ri] ** 2
            acc_lo, acc_hi = _ball_cells_np(corners * h, weights, h, c, r2, depth, d)
            lo[ci, ri] = acc_lo
            hi[ci, ri] = acc_hi
    return lo, hi


def _ball_cells_np(pos, weights, h, c, r2, depth, d):
    near = pos + np.clip(c - pos, 0.0, h)
    far = pos + np.where(c - pos > h / 2, 0.0, h)
    dn = ((near - c) ** 2).sum(1)
    df = ((far - c) ** 2).sum(1)
    inside = df <= r2
    outside = dn > r2
    border = ~inside & ~outside
    acc_lo = weights[inside].sum()
    acc_hi = acc_lo
    if depth == 0:
        acc_hi += weights[border].sum()
        return acc_lo, acc_hi
    for i in np.nonzero(border)[0]:
        sub = pos[i] + np.stack(np.meshgrid(*([np.array([0.0, h / 2])] * d),
                                            indexing="ij"), -1).reshape(-1, d)
        wsub = np.full(len(sub), weights[i] / (1 << d))
        l2, h2 = _ball_cells_np(sub, wsub, h / 2, c, r2, depth - 1, d)
        acc_lo += l2
        acc_hi += h2
    return acc_lo, acc_hi


# ----------------------------------------------------------------------
# numba implementations
# ----------------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _j0_scalar(x: float) -> float:
        if x < 0.0:
            x = -x
        if x < 1e-5:
            return 1.0 - x * x / 4.0
        if x <= 5.0:
            z = x * x
            p = (z - DR1) * (z - DR2)
            num = RP[0]
            for c in RP[1:]:
                num = num * z + c
            den = z + RQ[0]
            for c in RQ[1:]:
                den = den * z + c
            return p * num / den
        w = 5.0 / x
        q = w * w
        pn = PP[0]
        for c in PP[1:]:
            pn = pn * q + c
        pd = PQ[0]
        for c in PQ[1:]:
            pd = pd * q + c
        qn = QP[0]
        for c in QP[1:]:
            qn = qn * q + c
        qd = q + QQ[0]
        for c in QQ[1:]:
            qd = qd * q + c
        xn = x - PIO4
        return SQ2OPI * (pn / pd * np.cos(xn) - w * (qn / qd) * np.sin(xn)) / np.sqrt(x)

    @njit(cache=True, parallel=True)
    def _phase_sum_nb(corners, weights, xi):
        m = xi.shape[0]
        n, d = corners.shape
        out = np.empty(m, dtype=np.complex128)
        for i in prange(m):
            re = 0.0
            im = 0.0
            for c in range(n):
                ph = 0.0
                for j in range(d):
                    ph += corners[c, j] * xi[i, j]
                re += weights[c] * np.cos(ph)
                im -= weights[c] * np.sin(ph)
            out[i] = complex(re, im)
        return out

    @njit(cache=True, parallel=True)
    def _phase_sum_1d_nb(corners, weights, xi):
        m = xi.shape[0]
        n = corners.shape[0]
        out = np.empty(m, dtype=np.complex128)
        for i in prange(m):
            re = 0.0
            im = 0.0
            for c in range(n):
                ph = corners[c] * xi[i]
                re += weights[c] * np.cos(ph)
                im -= weights[c] * np.sin(ph)
            out[i] = complex(re, im)
        return out

    @njit(cache=True, parallel=True)
    def _overlap_sum_nb(occ_flat, side, d, f_corners, h, shifts):
        m = shifts.shape[0]
        nf = f_corners.shape[0]
        out = np.zeros(m)
        for i in prange(m):
            total = 0.0
            for f in range(nf):
                # shifted F-cell in E grid units; spans cells k0..k0+1 per axis
                prod = 0.0
                for bits in range(1 << d):
                    vol = 1.0
                    idx = 0
                    ok = True
                    for j in range(d):
                        pos = f_corners[f, j] - shifts[i, j] / h
                        k0 = int(np.floor(pos))
                        fr = pos - k0
                        if (bits >> j) & 1:
                            k = k0 + 1
                            ln = fr
                        else:
                            k = k0
                            ln = 1.0 - fr
                        if k < 0 or k >= side or ln <= 0.0:
                            ok = False
                            break
                        vol *= ln
                        idx = idx * side + k
                    if ok and occ_flat[idx]:
                        prod += vol
                total += prod
            out[i] = total * h ** d
        return out

    @njit(cache=True, parallel=True)
    def _pair_energy_nb(corners, weights, h, s, nodes, gl_w):
        n, d = corners.shape
        g = nodes.shape[0]
        total = 0.0
        for i in prange(n):
            acc = 0.0
            for k in range(n):
                if k == i:
                    continue
                # tensor GL over both cells
                pair = 0.0
                for a in range(g ** d):
                    aa = a
                    wa = 1.0
                    xa = np.empty(d)
                    for j in range(d):
                        na = aa % g
                        aa //= g
                        wa *= gl_w[na]
                        xa[j] = nodes[na]
                    for b in range(g ** d):
                        bb = b
                        wb = 1.0
                        dist2 = 0.0
                        for j in range(d):
                            nb = bb % g
                            bb //= g
                            wb *= gl_w[nb]
                            dj = corners[i, j] - corners[k, j] + h * (xa[j] - nodes[nb])
                            dist2 += dj * dj
                        pair += wa * wb * dist2 ** (-0.5 * s)
                acc += weights[k] * pair
            total += weights[i] * acc
        return total

    @njit(cache=True)
    def _ball_cell_bracket(px, w, h, c, r2, depth, d, out):
        # out[0] += lo, out[1] += hi for one cell at position px (phys coords)
        dn = 0.0
        df = 0.0
        for j in range(d):
            t = c[j] - px[j]
            if t < 0.0:
                t0 = 0.0
            elif t > h:
                t0 = h
            else:
                t0 = t
            dn += (px[j] + t0 - c[j]) ** 2
            tf = 0.0 if t > h / 2 else h
            df += (px[j] + tf - c[j]) ** 2
        if df <= r2:
            out[0] += w
            out[1] += w
            return
        if dn > r2:
            return
        if depth == 0:
            out[1] += w
            return
        for bits in range(1 << d):
            sub = np.empty(d)
            for j in range(d):
                sub[j] = px[j] + (h / 2 if (bits >> j) & 1 else 0.0)
            _ball_cell_bracket(sub, w / (1 << d), h / 2, c, r2, depth - 1, d, out)

    @njit(cache=True, parallel=True)
    def _ball_mass_nb(corners, weights, h, centers, radii, depth):
        m = centers.shape[0]
        k = radii.shape[0]
        n, d = corners.shape
        lo = np.zeros((m, k))
        hi = np.zeros((m, k))
        for ci in prange(m):
            for ri in range(k):
                r2 = radii[ri] ** 2
                out = np.zeros(2)
                for i in range(n):
                    px = corners[i] * h
                    _ball_cell_bracket(px, weights[i], h, centers[ci], r2, depth, d, out)
                lo[ci, ri] = out[0]
                hi[ci, ri] = out[1]
        return lo, hi

    def phase_sum(corners, weights, xi):
        return _phase_sum_nb(np.ascontiguousarray(corners, dtype=np.float64),
                             np.ascontiguousarray(weights, dtype=np.float64),
                             np.ascontiguousarray(xi, dtype=np.float64))

    def phase_sum_1d(corners, weights, xi):
        return _phase_sum_1d_nb(np.ascontiguousarray(corners, dtype=np.float64),
                                np.ascontiguousarray(weights, dtype=np.float64),
                                np.ascontiguousarray(xi, dtype=np.float64))

    def overlap_sum(occ, f_corners, h, shifts):
        side = occ.shape[0]
        d = occ.ndim
        return _overlap_sum_nb(np.ascontiguousarray(occ.ravel().astype(np.uint8)),
                               side, d,
                               np.ascontiguousarray(f_corners, dtype=np.float64),
                               float(h), np.ascontiguousarray(shifts, dtype=np.float64))

    def pair_energy(corners, weights, h, s, nodes, gl_w):
        return _pair_energy_nb(np.ascontiguousarray(corners, dtype=np.float64),
                               np.ascontiguousarray(weights, dtype=np.float64),
                               float(h), float(s),
                               np.ascontiguousarray(nodes, dtype=np.float64),
                               np.ascontiguousarray(gl_w, dtype=np.float64))

    def ball_mass(corners, weights, h, centers, radii, depth=3):
        return _ball_mass_nb(np.ascontiguousarray(corners, dtype=np.float64),
                             np.ascontiguousarray(weights, dtype=np.float64),
                             float(h),
                             np.ascontiguousarray(centers, dtype=np.float64),
                             np.ascontiguousarray(radii, dtype=np.float64), depth)

else:

    def phase_sum(corners, weights, xi):
        return _phase_sum_np(np.asarray(corners, dtype=np.float64),
                             np.asarray(weights, dtype=np.float64),
                             np.asarray(xi, dtype=np.float64))

    def phase_sum_1d(corners, weights, xi):
        return _phase_sum_1d_np(np.asarray(corners, dtype=np.float64),
                                np.asarray(weights, dtype=np.float64),
                                np.asarray(xi, dtype=np.float64))

    def overlap_sum(occ, f_corners, h, shifts):
        return _overlap_sum_np(np.asarray(occ, dtype=np.float64),
                               np.asarray(f_corners, dtype=np.int64),
                               float(h), np.asarray(shifts, dtype=np.float64))

    def pair_energy(corners, weights, h, s, nodes, gl_w):
        return _pair_energy_np(np.asarray(corners, dtype=np.float64),
                               np.asarray(weights, dtype=np.float64),
                               float(h), float(s),
                               np.asarray(nodes, dtype=np.float64),
                               np.asarray(gl_w, dtype=np.float64))

    def ball_mass(corners, weights, h, centers, radii, depth=3):
        return _ball_mass_np(np.asarray(corners, dtype=np.float64),
                             np.asarray(weights, dtype=np.float64),
                             float(h),
                             np.asarray(centers, dtype=np.float64),
                             np.asarray(radii, dtype=np.float64), depth)
