"""Ball quadrature for frequency-side integrals.

Product rule per spherical shell: Gauss-Legendre radially, equal-weight
angular nodes (trapezoid on the circle for d=2, Gauss-Legendre in cos(theta)
by equal-weight azimuth for d=3).  Shells follow a dyadic split of the
radius; node counts scale with the expected angular bandwidth (radius times
support diameter) and are doubled until the change drops below tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

__all__ = ["QuadSpec", "QuadResult", "radial_profile", "ball_integral", "sphere_nodes"]


@dataclass(frozen=True)
class QuadSpec:
    tol: float = 1e-4             # relative convergence target per integral
    max_refine: int = 2           # extra node-doubling rounds after the first pair
    base_angular: int = 32        # minimal angular node parameter
    base_radial: int = 8          # minimal radial GL nodes per shell
    core_exp: int = 12            # innermost shell at radius R * 2^-core_exp
    angular_cap: int = 1 << 16    # hard cap per shell (budget guard)
    nodes_per_wave: float = 2.5   # angular nodes per oscillation at the shell's outer radius


class QuadResult(NamedTuple):
    value: float
    err: float


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=256)
def sphere_nodes(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit-sphere nodes and weights summing to the sphere's surface measure."""
    if d == 2:
        theta = (np.arange(n) + 0.5) * (2 * np.pi / n)
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        wts = np.full(n, 2 * np.pi / n)
        return pts, wts
    if d == 3:
        m = max(2, n)
        u, wu = _leggauss(m)
        phi = (np.arange(2 * m) + 0.5) * (np.pi / m)
        su = np.sqrt(1.0 - u ** 2)
        x = su[:, None] * np.cos(phi)[None, :]
        y = su[:, None] * np.sin(phi)[None, :]
        z = np.broadcast_to(u[:, None], x.shape)
        pts = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
        wts = np.broadcast_to(wu[:, None] * (np.pi / m), x.shape).ravel()
        return pts, wts.copy()
    raise ValueError("d must be 2 or 3")


def _shell_value(f: Callable[[np.ndarray], np.ndarray], d: int,
                 a: float, b: float, n_ang: int, n_rad: int) -> float:
    x, w = _leggauss(n_rad)
    r = 0.5 * (b - a) * x + 0.5 * (b + a)
    wr = 0.5 * (b - a) * w
    pts, wa = sphere_nodes(d, n_ang)
    nodes = (r[:, None, None] * pts[None, :, :]).reshape(-1, d)
    vals = f(nodes).reshape(len(r), -1)
    ang = vals @ wa
    return float(((r ** (d - 1)) * ang) @ wr)


def _shell_plan(radii: list[float], spec: QuadSpec) -> list[tuple[float, float]]:
    r_max = radii[-1]
    bounds = {0.0, r_max}
    r = r_max
    for _ in range(spec.core_exp):
        r /= 2
        bounds.add(r)
    bounds.update(radii)
    cuts = sorted(bounds)
    return list(zip(cuts[:-1], cuts[1:]))


def radial_profile(f: Callable[[np.ndarray], np.ndarray], d: int, radii,
                   spec: QuadSpec = QuadSpec(), diam_hint: float = 2.0
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative integrals of f over balls |xi| <= r for each r in `radii`.

    Returns (values, errors); errors are the per-shell doubling deltas
    accumulated up to each radius.
    """
    radii = sorted(float(r) for r in radii)
    if radii[0] <= 0:
        raise ValueError("radii must be positive")
    shells = _shell_plan(radii, spec)
    shell_vals = np.zeros(len(shells))
    shell_errs = np.zeros(len(shells))
    for i, (a, b) in enumerate(shells):
        waves = b * diam_hint / np.pi
        n_ang = int(min(spec.angular_cap,
                        max(spec.base_angular, spec.nodes_per_wave * waves)))
        n_rad = int(max(spec.base_radial, min(256, spec.nodes_per_wave * (b - a) * diam_hint)))
        coarse = _shell_value(f, d, a, b, n_ang, n_rad)
        fine = _shell_value(f, d, a, b, min(2 * n_ang, spec.angular_cap), 2 * n_rad)
        rounds = 0
        while (abs(fine - coarse) > spec.tol * max(abs(fine), 1e-300)
               and rounds < spec.max_refine and 2 * n_ang < spec.angular_cap):
            n_ang *= 2
            n_rad *= 2
            coarse = fine
            fine = _shell_value(f, d, a, b, min(2 * n_ang, spec.angular_cap), 2 * n_rad)
            rounds += 1
        shell_vals[i] = fine
        shell_errs[i] = abs(fine - coarse)
    uppers = np.array([b for _, b in shells])
    vals = np.cumsum(shell_vals)
    errs = np.cumsum(shell_errs)
    out_v = np.empty(len(radii))
    out_e = np.empty(len(radii))
    for j, r in enumerate(radii):
        idx = np.searchsorted(uppers, r * (1 + 1e-12))
        take = min(idx, len(shells)) - 1
        out_v[j] = vals[take] if take >= 0 else 0.0
        out_e[j] = errs[take] if take >= 0 else 0.0
    return out_v, out_e


def ball_integral(f: Callable[[np.ndarray], np.ndarray], d: int, radius: float,
                  spec: QuadSpec = QuadSpec(), diam_hint: float = 2.0) -> QuadResult:
    v, e = radial_profile(f, d, [radius], spec, diam_hint)
    return QuadResult(float(v[0]), float(e[0]))
