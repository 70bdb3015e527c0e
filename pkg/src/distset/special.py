"""Bessel J0 and Fourier transforms of normalized sphere measures.

J0 follows the classic Cephes split: a rational approximation through the
first two zeros on [0, 5], and Hankel-type rational asymptotics beyond
(peak error ~4e-16 in the original error tables; we re-validate against an
arbitrary-precision series to < 1e-12 absolute in the test suite).
"""
from __future__ import annotations

import numpy as np

__all__ = ["j0", "sphere_ft", "sphere_ft_decay_constant", "j0_reference"]

SQ2OPI = 7.9788456080286535587989e-1
PIO4 = 7.85398163397448309616e-1

PP = (7.96936729297347051624e-4, 8.28352392107440799803e-2, 1.23953371646414299388e0,
      5.44725003058768775090e0, 8.74716500199817011941e0, 5.30324038235394892183e0,
      9.99999999999999997821e-1)
PQ = (9.24408810558863637013e-4, 8.56288474354474431428e-2, 1.25352743901058953537e0,
      5.47097740330417105182e0, 8.76190883237069594232e0, 5.30605288235394617618e0,
      1.00000000000000000218e0)
QP = (-1.13663838898469149931e-2, -1.28252718670509318512e0, -1.95539544257735972385e1,
      -9.32060152123768231369e1, -1.77681167980488050595e2, -1.47077505154951170175e2,
      -5.14105326766599330220e1, -6.05014350600728481186e0)
QQ = (6.43178256118178023184e1, 8.56430025976980587198e2, 3.88240183605401609683e3,
      7.24046774195652478189e3, 5.93072701187316984827e3, 2.06209331660327847417e3,
      2.42005740240291393179e2)
RP = (-4.79443220978201773821e9, 1.95617491946556577543e12, -2.49248344360967716204e14,
      9.70862251047306323952e15)
RQ = (4.99563147152651017219e2, 1.73785401676374683123e5, 4.84409658339962045305e7,
      1.11855537045356834862e10, 2.11277520115489217587e12, 3.10518229857422583814e14,
      3.18121955943204943306e16, 1.71086294081043136091e18)
DR1 = 5.78318596294678452118e0
DR2 = 3.04712623436620863991e1


def _polevl(x, coef):
    ans = np.full_like(x, coef[0])
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x, coef):
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def j0(x):
    """Bessel function of the first kind, order zero (vectorized, float64)."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)

    small = x < 1e-5
    mid = (~small) & (x <= 5.0)
    big = x > 5.0

    if small.any():
        z = x[small]
        out[small] = 1.0 - z * z / 4.0
    if mid.any():
        z = x[mid] ** 2
        p = (z - DR1) * (z - DR2)
        out[mid] = p * _polevl(z, RP) / _p1evl(z, RQ)
    if big.any():
        xb = x[big]
        w = 5.0 / xb
        q = w * w
        p = _polevl(q, PP) / _polevl(q, PQ)
        qq = _polevl(q, QP) / _p1evl(q, QQ)
        xn = xb - PIO4
        out[big] = SQ2OPI * (p * np.cos(xn) - w * qq * np.sin(xn)) / np.sqrt(xb)
    return out[0] if scalar else out


def j0_reference(x, dps: int = 40) -> float:
    """Arbitrary-precision J0 via the defining power series + Hankel tail,
    used only as the validation oracle."""
    import mpmath as mp
    with mp.workdps(dps):
        return float(mp.besselj(0, mp.mpf(x)))


def sphere_ft(r, d: int):
    """Fourier transform of the normalized surface measure on S^(d-1) at radius r."""
    r = np.asarray(r, dtype=np.float64)
    if d == 2:
        return j0(r)
    if d == 3:
        return np.sinc(r / np.pi)
    raise ValueError("d must be 2 or 3")


def sphere_ft_decay_constant(d: int) -> float:
    """C_d with |sigma_hat(r)| <= C_d (1+r)^(-(d-1)/2) for all r >= 0.

    d=2: |J0(r)| <= sqrt(2/(pi r)) gives C = sqrt(2); d=3: |sin r / r| <= 2/(1+r).
    """
    if d == 2:
        return float(np.sqrt(2.0))
    if d == 3:
        return 2.0
    raise ValueError("d must be 2 or 3")
