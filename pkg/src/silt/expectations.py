"""Closed-form expectations of regularized self-intersection local times.

For a d-dimensional Brownian motion on ``[0, T]`` the expectation of the
Gaussian-regularized local time is

    E(L_eps) = (2 pi)^{-d/2} * Integral_0^T (T - tau) (eps + tau)^{-d/2} dtau,

and the gap-regularized variant omits the near-diagonal strip
``t2 - t1 < Lambda``, replacing the lower integration limit by Lambda.
Both reduce to the band integral

    I(d, T, eps, lo, hi) = Integral_lo^hi (T - tau) (eps + tau)^{-d/2} dtau,

evaluated here with exact log/power antiderivatives per dimension.  For
``d = 2`` the expectation diverges like ``-(T / 2 pi) ln eps`` (or
``ln Lambda``); ``divergence_constant_k`` makes the O(1) constant of
that divergence explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ModelParams
from .errors import PreconditionError

__all__ = [
    "RegularizationSpec",
    "expected_gaussian_lt",
    "expected_gap_lt",
    "expected_combined_lt",
    "divergence_constant_k",
]

_VARIANTS = ("gaussian", "gap", "cut", "combined")


@dataclass(frozen=True)
class RegularizationSpec:
    """Which regularization is in force and with which parameters.

    ``epsilon`` is the Gaussian mollifier variance (gaussian/combined),
    ``lam`` the gap width Lambda (gap/cut/combined).  Parameters not
    used by the variant must be left at 0.
    """

    variant: str
    epsilon: float = 0.0
    lam: float = 0.0

    def __post_init__(self) -> None:
        if self.variant not in _VARIANTS:
            raise PreconditionError(
                "variant is one of {gaussian, gap, cut, combined}"
            )
        if self.epsilon < 0:
            raise PreconditionError("epsilon >= 0")
        if self.lam < 0:
            raise PreconditionError("Lambda >= 0")
        if self.variant in ("gap", "cut") and not self.lam > 0:
            raise PreconditionError("Lambda > 0 when variant requires it")
        if self.variant == "combined" and not (self.epsilon > 0 and self.lam > 0):
            raise PreconditionError(
                "epsilon > 0 and Lambda > 0 when variant requires them"
            )

    def validate_against(self, params: ModelParams) -> None:
        if self.lam and not self.lam < params.T:
            raise PreconditionError("Lambda < T")
        if self.variant == "gaussian" and params.d >= 2 and not self.epsilon > 0:
            raise PreconditionError("epsilon > 0 for d >= 2")


def _band_integral(d: int, T: float, eps: float, lo: float, hi: float) -> float:
    """Integral_lo^hi (T - tau) (eps + tau)^{-d/2} dtau in closed form.

    Requires ``0 <= lo <= hi <= T`` and ``eps + lo > 0`` unless
    ``d == 1`` (where the endpoint singularity tau^{-1/2} is integrable).
    """
    if hi <= lo:
        return 0.0
    a = eps + lo
    b = eps + hi
    c = T + eps
    half_d = 0.5 * d
    if d == 2:
        # antiderivative c*ln(sigma) - sigma
        return c * math.log(b / a) - (b - a)
    if d == 4:
        # antiderivative -c/sigma - ln(sigma)
        return c * (1.0 / a - 1.0 / b) - math.log(b / a)
    p1 = 1.0 - half_d
    p2 = 2.0 - half_d
    # antiderivative c*sigma^{1-d/2}/(1-d/2) - sigma^{2-d/2}/(2-d/2)
    return c * (b**p1 - a**p1) / p1 - (b**p2 - a**p2) / p2


def expected_gaussian_lt(params: ModelParams, eps: float) -> float:
    """E(L_eps): expectation of the Gaussian-regularized local time.

    Equals ``(2 pi)^{-d/2} Integral_0^T (T - tau)(eps + tau)^{-d/2} dtau``
    in closed form.  ``eps = 0`` is admitted only for ``d = 1``; for
    ``d >= 2`` the unregularized integral diverges.
    """
    d, T = params.d, params.T
    if eps < 0:
        raise PreconditionError("epsilon >= 0")
    if d >= 2 and eps == 0:
        raise PreconditionError("epsilon > 0 for d >= 2")
    return (2.0 * math.pi) ** (-0.5 * d) * _band_integral(d, T, eps, 0.0, T)


def expected_gap_lt(params: ModelParams, lam: float) -> float:
    """E(L(Lambda)): expectation of the gap-regularized local time.

    Equals ``(2 pi)^{-d/2} Integral_Lambda^T (T - tau) tau^{-d/2} dtau``;
    for ``d = 2`` this is ``(1/2pi)(T ln(T/Lambda) - (T - Lambda))``.
    """
    d, T = params.d, params.T
    if not 0 < lam < T:
        raise PreconditionError("0 < Lambda < T")
    return (2.0 * math.pi) ** (-0.5 * d) * _band_integral(d, T, 0.0, lam, T)


def expected_combined_lt(params: ModelParams, eps: float, lam: float) -> float:
    """Expectation under both regularizations: Gaussian mollifier plus gap.

    Equals ``(2 pi)^{-d/2} Integral_Lambda^T (T - tau)(eps + tau)^{-d/2} dtau``.
    """
    d, T = params.d, params.T
    if eps < 0:
        raise PreconditionError("epsilon >= 0")
    if not 0 <= lam < T:
        raise PreconditionError("0 <= Lambda < T")
    if d >= 2 and eps == 0 and lam == 0:
        raise PreconditionError("epsilon > 0 for d >= 2")
    return (2.0 * math.pi) ** (-0.5 * d) * _band_integral(d, T, eps, lam, T)


def divergence_constant_k(params: ModelParams, lam: float) -> float:
    """Smallest ``k >= 0`` with ``E(L(Lambda)) <= k + (T / 2 pi) |ln Lambda|``.

    For ``d = 2`` and ``Lambda < 1`` the closed form of the gap
    expectation gives ``k = max(0, (1 / 2 pi)(T ln T - T + Lambda))``.
    """
    if params.d != 2:
        raise PreconditionError("d = 2")
    T = params.T
    if not 0 < lam < 1:
        raise PreconditionError("0 < Lambda < 1")
    if not lam < T:
        raise PreconditionError("Lambda < T")
    return max(0.0, (T * math.log(T) - T + lam) / (2.0 * math.pi))
