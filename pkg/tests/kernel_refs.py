"""Independent closed-form reference profiles for the clipped strip domains.

The library evaluates the strip-correction kernel by adaptive quadrature
whenever its dark domain is clipped by ``t = 0`` or ``t = T``.  These
reference formulas integrate the same ``psi`` coefficient over the
clipped domains analytically (antiderivatives worked out by hand and
usable with numpy arrays), so tests can cross-check the quadrature path
against a fully independent evaluation.

All functions return n!-normalized profiles; divide by ``n!`` for the
kernel normalization (the canonical multi-index ``(n, 0, ...)`` has
``n! = n!``, while e.g. ``(1, 1)`` has ``n! = 1``).

Conventions: ``beta = d/2 + n``, ``pref = (-1/2)^n (2 pi)^{-d/2}``.

Derivations (corner at ``t = 0``, spread ``w = v - u < Lambda``, valid
for ``v < Lambda`` and ``Lambda < T/2`` so the opposite horizon never
clips):

    profile = Int_0^u dt1 Int_v^{t1 + Lambda} pref (t2 - t1)^{-beta} dt2

Power case (beta != 2):
    = pref/(beta-1) [ ((v-u)^{2-beta} - v^{2-beta})/(beta-2)
                      - u Lambda^{1-beta} ]
Log case (2n = d = 2, beta = 2):
    = -(1/4 pi) [ ln v - ln(v-u) - u/Lambda ]

The corner at ``t = T`` is the time reflection (u, v) -> (T-v, T-u).
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def corner_low_profile(n: int, d: int, lam, u, v):
    """n! * rho over the dark domain clipped by t = 0 (requires v < Lambda)."""
    if d == 2 and n == 1:
        return -(np.log(v) - np.log(v - u) - u / lam) / (4.0 * math.pi)
    beta = 0.5 * d + n
    pref = (-0.5) ** n * TWO_PI ** (-0.5 * d)
    bracket = ((v - u) ** (2.0 - beta) - v ** (2.0 - beta)) / (beta - 2.0)
    return pref * (bracket - u * lam ** (1.0 - beta)) / (beta - 1.0)


def corner_high_profile(n: int, d: int, T: float, lam, u, v):
    """n! * rho over the dark domain clipped by t = T (requires u > T - Lambda)."""
    return corner_low_profile(n, d, lam, T - v, T - u)


def interior_profile(n: int, d: int, lam, w):
    """n! * rho in the unclipped configuration, as a function of the spread."""
    if d == 2 and n == 1:
        return (np.log(w / lam) + 1.0 - w / lam) / (4.0 * math.pi)
    beta = 0.5 * d + n
    pref = (-0.5) ** n * TWO_PI ** (-0.5 * d)
    bracket = (w ** (2.0 - beta) - lam ** (2.0 - beta)) / (beta - 2.0) + (
        w - lam
    ) * lam ** (1.0 - beta)
    return pref * bracket / (beta - 1.0)


def strip_profile(n: int, d: int, T: float, lam, u, v):
    """n! * rho anywhere in the strip ``v - u < Lambda`` (vectorized)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    low = v < lam
    high = u > T - lam
    out = np.empty(np.broadcast(u, v).shape, dtype=float)
    mid = ~(low | high)
    out[mid] = interior_profile(n, d, lam, (v - u)[mid])
    if np.any(low):
        out[low] = corner_low_profile(n, d, lam, u[low], v[low])
    if np.any(high):
        out[high] = corner_high_profile(n, d, T, lam, u[high], v[high])
    return out
