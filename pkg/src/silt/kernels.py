"""Chaos-expansion kernel functions of the self-intersection local time.

All kernels of ``2n`` time arguments here depend on those arguments only
through the extremes ``u = min`` and ``v = max``, so every function takes
a :class:`~silt.core.KernelPoint`.  With ``beta = d/2 + n``:

* ``psi``   — the conditional kernel at fixed outer times ``(t1, t2)``:
  ``(1/n!)(2 pi)^{-d/2} (t2 - t1)^{-beta} (-1/2)^n`` on ``[t1, t2]``.
* ``phi``   — ``psi`` integrated over ``0 < t1 < u``, ``v < t2 < T``
  (the unregularized kernel of the centered local time).
* ``phi_eps`` — the same with the Gaussian-mollifier shift
  ``tau -> tau + eps`` in the power/log arguments.
* ``rho``   — ``psi`` integrated over the near-diagonal dark domain
  ``t1 in (max(0, v - Lambda), u)``, ``t2 in (v, min(T, t1 + Lambda))``;
  supported on ``v - u < Lambda``.
* ``gap``   — ``phi - Theta(Lambda - (v - u)) * rho``: the kernel of the
  gap-regularized local time.  Inside the strip the ``(v-u)``-singular
  terms of ``phi`` and ``rho`` cancel exactly; the fused closed form
  below performs that cancellation analytically.
* ``cut``   — ``Theta(v - u - Lambda) * phi``: hard truncation of the
  kernel near the diagonal.

The quadrature oracle integrates ``psi`` numerically over a
:class:`TimeRectangle` (optionally intersected with a diagonal-strip
constraint) and is the independent reference implementation used to
validate every closed form; it never reuses the antiderivatives above.

Conventions: the Heaviside function is ``Theta(x) = 1`` for ``x > 0``
and ``Theta(0) = 0`` (the strip boundary has measure zero and both
closed forms vanish there); gap widths obey ``0 < Lambda < T/2`` so the
two boundary subdomains near ``t = 0`` and ``t = T`` cannot overlap;
odd total orders never occur (those kernels vanish identically), and
``n = 0`` is excluded — the order-0 coefficient is the expectation,
owned by :mod:`silt.expectations`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from .core import KernelPoint, ModelParams, MultiIndex
from .errors import PreconditionError, QuadratureError

__all__ = [
    "KernelValue",
    "TimeRectangle",
    "psi_coefficient",
    "phi_kernel",
    "phi_eps_kernel",
    "rho_kernel",
    "gap_kernel",
    "cut_kernel",
    "kernel_quadrature_oracle",
    "rho_bound",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class KernelValue:
    """A kernel evaluation at a point, tagged with its total chaos order."""

    value: float
    order: int
    point: KernelPoint

    def __post_init__(self) -> None:
        if self.order < 0:
            raise PreconditionError("order n >= 0")
        if self.point.u < self.point.v and not math.isfinite(self.value):
            raise PreconditionError("value is finite whenever u < v")


@dataclass(frozen=True)
class TimeRectangle:
    """An axis-aligned (t1, t2) integration domain, optionally strip-constrained.

    ``gap`` adds the diagonal constraint ``t2 - t1 <= gap`` when
    ``gap_side == "below"`` (the near-diagonal dark domain) or
    ``t2 - t1 >= gap`` when ``gap_side == "above"`` (the light domain
    left by gap regularization).
    """

    t1_lo: float
    t1_hi: float
    t2_lo: float
    t2_hi: float
    gap: float | None = None
    gap_side: str = "below"

    def __post_init__(self) -> None:
        if not (self.t1_lo <= self.t1_hi and self.t2_lo <= self.t2_hi):
            raise PreconditionError("t1_lo <= t1_hi and t2_lo <= t2_hi")
        if self.gap is not None and not self.gap > 0:
            raise PreconditionError("gap > 0 when constrained")
        if self.gap_side not in ("below", "above"):
            raise PreconditionError("gap_side is 'below' or 'above'")

    @property
    def is_empty(self) -> bool:
        """True when the domain has zero area, the strip constraint included."""
        if self.t1_lo >= self.t1_hi or self.t2_lo >= self.t2_hi:
            return True
        if self.gap is not None:
            if self.gap_side == "below":
                return self.t2_lo - self.t1_hi >= self.gap
            return self.t2_hi - self.t1_lo <= self.gap
        return False


def _check_index(nidx: MultiIndex, d: int) -> int:
    if nidx.d != d:
        raise PreconditionError("multi-index length equals d")
    return nidx.order


def _check_even_order_point(
    nidx: MultiIndex, params: ModelParams, p: KernelPoint
) -> int:
    n = _check_index(nidx, params.d)
    if n < 1:
        raise PreconditionError("n >= 1")
    if not 2 * n > params.d - 2:
        raise PreconditionError("2n > d - 2")
    if not p.v <= params.T:
        raise PreconditionError("0 <= u <= v <= T")
    return n


def psi_coefficient(nidx: MultiIndex, d: int, t1: float, t2: float) -> float:
    """The order-2n kernel coefficient at outer times ``t1 < t2``.

    Returns ``(1/n!)(2 pi)^{-d/2} (t2 - t1)^{-(d/2 + n)} (-1/2)^n``; the
    indicator product over the inner arguments is handled by callers via
    KernelPoint containment.
    """
    n = _check_index(nidx, d)
    if not t1 < t2:
        raise PreconditionError("t1 < t2")
    tau = t2 - t1
    return (
        (-0.5) ** n
        * _TWO_PI ** (-0.5 * d)
        * tau ** (-(0.5 * d + n))
        / nidx.factorial_product()
    )


# ---------------------------------------------------------------------------
# Closed-form profiles.
#
# The profile of a kernel is its n!-normalized value, which depends on the
# multi-index only through the total order n.  Public kernels divide by n!;
# the norms module consumes the profiles directly.
# ---------------------------------------------------------------------------


def _phi_profile(n: int, d: int, T: float, u: float, v: float, eps: float) -> float:
    """n! * phi_eps at (u, v); ``eps = 0`` gives the unregularized kernel."""
    if d == 2 and n == 1:
        return -(
            math.log(v + eps)
            + math.log(T - u + eps)
            - math.log(v - u + eps)
            - math.log(T + eps)
        ) / (4.0 * math.pi)
    beta = 0.5 * d + n
    p = 2.0 - beta
    bracket = (
        (T + eps) ** p - (v + eps) ** p - (T - u + eps) ** p + (v - u + eps) ** p
    )
    return (
        (-0.5) ** n
        * _TWO_PI ** (-0.5 * d)
        * bracket
        / ((beta - 1.0) * (beta - 2.0))
    )


def _rho_interior_profile(n: int, d: int, lam: float, w: float) -> float:
    """n! * rho at spread ``w = v - u`` in the interior configuration.

    Valid for ``0 < w < Lambda`` when ``v >= Lambda`` and ``u <= T - Lambda``;
    depends on the point only through ``w``.
    """
    if d == 2 and n == 1:
        return (math.log(w / lam) + 1.0 - w / lam) / (4.0 * math.pi)
    beta = 0.5 * d + n
    p = 2.0 - beta
    bracket = (w**p - lam**p) / (beta - 2.0) + (w - lam) * lam ** (1.0 - beta)
    return (-0.5) ** n * _TWO_PI ** (-0.5 * d) * bracket / (beta - 1.0)


def _gap_strip_profile(
    n: int, d: int, T: float, lam: float, u: float, v: float
) -> float:
    """n! * (phi - rho) inside the strip, with the ``(v-u)``-singular terms
    cancelled analytically (interior configuration only)."""
    if d == 2 and n == 1:
        return -(
            math.log(v)
            + math.log(T - u)
            - math.log(T)
            - math.log(lam)
            + (lam - (v - u)) / lam
        ) / (4.0 * math.pi)
    beta = 0.5 * d + n
    p = 2.0 - beta
    bracket = (T**p - v**p - (T - u) ** p + lam**p) / (beta - 2.0) - (
        v - u - lam
    ) * lam ** (1.0 - beta)
    return (-0.5) ** n * _TWO_PI ** (-0.5 * d) * bracket / (beta - 1.0)


def _rho_domain(T: float, lam: float, u: float, v: float) -> TimeRectangle:
    """The near-diagonal dark domain for the rho kernel at (u, v)."""
    return TimeRectangle(
        t1_lo=max(0.0, v - lam),
        t1_hi=u,
        t2_lo=v,
        t2_hi=min(T, u + lam),
        gap=lam,
        gap_side="below",
    )


def _is_rho_interior(T: float, lam: float, u: float, v: float) -> bool:
    return v >= lam and u <= T - lam


def _rho_profile(
    n: int, d: int, T: float, lam: float, u: float, v: float, tol: float = 1e-9
) -> float:
    """n! * rho at (u, v): closed form in the interior configuration,
    quadrature over the exact dark domain near the horizon boundaries."""
    w = v - u
    if w >= lam:
        return 0.0
    if _is_rho_interior(T, lam, u, v):
        return _rho_interior_profile(n, d, lam, w)
    return _psi_profile_integral(n, d, _rho_domain(T, lam, u, v), tol, 0.0)


def _check_gap(lam: float, T: float) -> None:
    if not 0.0 < lam < 0.5 * T:
        raise PreconditionError("0 < Lambda < T/2")


def phi_kernel(nidx: MultiIndex, params: ModelParams, p: KernelPoint) -> float:
    """The unregularized centered-local-time kernel at (u, v).

    Closed form ``(-1)^n ((beta-1)(beta-2)(2 pi)^{d/2} 2^n n!)^{-1}
    (T^{2-beta} - v^{2-beta} - (T-u)^{2-beta} + (v-u)^{2-beta})`` with
    ``beta = d/2 + n``, dispatching to the logarithmic branch exactly
    when ``2n = d = 2``.
    """
    n = _check_even_order_point(nidx, params, p)
    if not (0.0 < p.u < p.v < params.T):
        raise PreconditionError("0 < u < v < T")
    return _phi_profile(n, params.d, params.T, p.u, p.v, 0.0) / (
        nidx.factorial_product()
    )


def phi_eps_kernel(
    nidx: MultiIndex, params: ModelParams, eps: float, p: KernelPoint
) -> float:
    """The Gaussian-regularized kernel: the closed form of ``phi`` with
    every power/log argument shifted by ``eps``.  ``u = v`` is allowed —
    the shift removes the pole."""
    n = _check_even_order_point(nidx, params, p)
    if not eps > 0:
        raise PreconditionError("epsilon > 0")
    return _phi_profile(n, params.d, params.T, p.u, p.v, eps) / (
        nidx.factorial_product()
    )


def rho_kernel(
    nidx: MultiIndex, params: ModelParams, lam: float, p: KernelPoint
) -> float:
    """The strip-correction kernel: ``psi`` integrated over the dark domain.

    Supported on ``v - u < Lambda`` (exact 0 outside).  In the interior
    configuration (``v >= Lambda`` and ``u <= T - Lambda``) the closed
    form is used; when the dark domain is clipped by ``t = 0`` or
    ``t = T`` the value comes from adaptive quadrature over the exact
    clipped domain at relative tolerance 1e-9.
    """
    n = _check_even_order_point(nidx, params, p)
    _check_gap(lam, params.T)
    return _rho_profile(n, params.d, params.T, lam, p.u, p.v) / (
        nidx.factorial_product()
    )


def gap_kernel(
    nidx: MultiIndex, params: ModelParams, lam: float, p: KernelPoint
) -> float:
    """The gap-regularized kernel ``phi - Theta(Lambda - (v-u)) rho``.

    Outside the strip this is exactly ``phi``; inside, the
    ``(v-u)``-singular terms of ``phi`` and ``rho`` cancel and the value
    stays bounded as ``v -> u``.  Continuous across ``v - u = Lambda``.
    """
    n = _check_even_order_point(nidx, params, p)
    if not (0.0 < p.u < p.v < params.T):
        raise PreconditionError("0 < u < v < T")
    _check_gap(lam, params.T)
    d, T = params.d, params.T
    w = p.v - p.u
    fact = nidx.factorial_product()
    if w >= lam:  # Theta(0) = 0: the boundary belongs to the phi region
        return _phi_profile(n, d, T, p.u, p.v, 0.0) / fact
    if _is_rho_interior(T, lam, p.u, p.v):
        return _gap_strip_profile(n, d, T, lam, p.u, p.v) / fact
    phi = _phi_profile(n, d, T, p.u, p.v, 0.0)
    rho = _rho_profile(n, d, T, lam, p.u, p.v)
    return (phi - rho) / fact


def cut_kernel(
    nidx: MultiIndex, params: ModelParams, lam: float, p: KernelPoint
) -> float:
    """The hard-truncated kernel ``Theta(v - u - Lambda) phi``: exactly 0
    on ``v - u <= Lambda``, ``phi`` beyond."""
    _check_even_order_point(nidx, params, p)
    if not (0.0 < p.u < p.v < params.T):
        raise PreconditionError("0 < u < v < T")
    _check_gap(lam, params.T)
    if p.v - p.u <= lam:
        return 0.0
    return phi_kernel(nidx, params, p)


def rho_bound(nidx: MultiIndex, d: int, p: KernelPoint) -> float:
    """Pointwise majorant of ``|rho|``, independent of Lambda.

    ``(1/(2^n n!))(2 pi)^{-d/2} ((beta-1)(beta-2))^{-1} (v-u)^{2-beta}``
    for the power cases; ``(1/4 pi) |ln(v-u)|`` when ``2n = d = 2``
    (valid for spreads below min(Lambda, 1)).

    The power form requires ``beta = d/2 + n > 2`` (equivalently
    ``d + 2n > 4``): its derivation drops a ``-Lambda^{2-beta}/(beta-2)``
    term, which only shrinks the bound when ``beta > 2``.  For
    ``beta < 2`` the stated right-hand side is negative and bounds
    nothing, so those index combinations (only ``d = 1, n = 1``, since
    ``2n = d = 2`` takes the log branch) are rejected.
    """
    n = _check_index(nidx, d)
    if n < 1:
        raise PreconditionError("n >= 1")
    if not 2 * n > d - 2:
        raise PreconditionError("2n > d - 2")
    w = p.v - p.u
    if not w > 0:
        raise PreconditionError("u < v")
    if d == 2 and n == 1:
        if not w < 1:
            raise PreconditionError("v - u < min(Lambda, 1) for the log bound")
        return abs(math.log(w)) / (4.0 * math.pi)
    if not d + 2 * n > 4:
        raise PreconditionError("d + 2n > 4 for the power-form bound")
    beta = 0.5 * d + n
    return (
        _TWO_PI ** (-0.5 * d)
        * w ** (2.0 - beta)
        / (2**n * nidx.factorial_product() * (beta - 1.0) * (beta - 2.0))
    )


# ---------------------------------------------------------------------------
# Quadrature oracle.
# ---------------------------------------------------------------------------


def _psi_profile_integral(
    n: int,
    d: int,
    domain: TimeRectangle,
    tol: float,
    eps: float,
    strict: bool = True,
) -> float:
    """Adaptive integral of the n!-normalized psi over ``domain``.

    Integrates ``(-1/2)^n (2 pi)^{-d/2} (eps + t2 - t1)^{-beta}`` as an
    iterated integral: the inner tau = t2 - t1 integral runs in
    log-tau space when ``eps = 0`` (resolving the near-diagonal power
    singularity), the outer t1 integral adaptively on top.

    With ``strict=False`` a result whose error estimate misses ``tol``
    is returned instead of raised; internal integration grids use this
    for points whose quadrature weight makes the excess irrelevant.
    """
    if domain.is_empty:
        return 0.0
    beta = 0.5 * d + n
    pref = (-0.5) ** n * _TWO_PI ** (-0.5 * d)
    lam, side = domain.gap, domain.gap_side
    inner_rel = max(tol * 1e-3, 2e-13)
    outer_rel = max(tol * 0.2, 1e-12)
    inner_errs: list[float] = []

    def inner(t1: float) -> float:
        tau_lo = domain.t2_lo - t1
        tau_hi = domain.t2_hi - t1
        if lam is not None:
            if side == "below":
                tau_hi = min(tau_hi, lam)
            else:
                tau_lo = max(tau_lo, lam)
        tau_lo = max(tau_lo, 0.0)
        if tau_hi <= tau_lo:
            return 0.0
        if eps == 0.0:
            if tau_lo == 0.0:
                if beta >= 1.0:
                    raise QuadratureError(
                        "domain touches the diagonal with non-integrable "
                        "singularity (t2 > t1 required up to a corner)"
                    )
                val, err = quad(
                    lambda t: t**-beta, tau_lo, tau_hi,
                    epsabs=0.0, epsrel=inner_rel, limit=200,
                )
            else:
                # tau = e^w:  tau^{-beta} dtau = e^{(1-beta) w} dw
                val, err = quad(
                    lambda w: math.exp((1.0 - beta) * w),
                    math.log(tau_lo), math.log(tau_hi),
                    epsabs=0.0, epsrel=inner_rel, limit=200,
                )
        else:
            val, err = quad(
                lambda t: (eps + t) ** -beta, tau_lo, tau_hi,
                epsabs=0.0, epsrel=inner_rel, limit=200,
            )
        inner_errs.append(err)
        return val

    if strict:
        with _quad_errors_raised():
            val, err = quad(
                inner, domain.t1_lo, domain.t1_hi,
                epsabs=0.0, epsrel=outer_rel, limit=400,
            )
    else:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val, err = quad(
                inner, domain.t1_lo, domain.t1_hi,
                epsabs=0.0, epsrel=outer_rel, limit=400,
            )
    total_err = abs(pref) * (err + max(inner_errs, default=0.0) * (
        domain.t1_hi - domain.t1_lo
    ))
    result = pref * val
    if not math.isfinite(result) or (
        strict and total_err > tol * max(1.0, abs(result))
    ):
        raise QuadratureError(
            f"psi quadrature did not reach tol={tol:g} "
            f"(estimated error {total_err:g} at value {result:g})"
        )
    return result


class _quad_errors_raised:
    """Context manager promoting scipy IntegrationWarning to QuadratureError."""

    def __enter__(self):
        import warnings

        self._cm = warnings.catch_warnings()
        self._cm.__enter__()
        from scipy.integrate import IntegrationWarning

        warnings.simplefilter("error", IntegrationWarning)
        return self

    def __exit__(self, exc_type, exc, tb):
        self._cm.__exit__(None, None, None)
        if exc_type is not None and exc_type.__name__ == "IntegrationWarning":
            raise QuadratureError(str(exc)) from None
        return False


def kernel_quadrature_oracle(
    nidx: MultiIndex,
    params: ModelParams,
    domain: TimeRectangle,
    tol: float,
    eps: float = 0.0,
) -> float:
    """Independent adaptive integration of ``psi`` over a time domain.

    This is the reference implementation the closed-form kernels are
    validated against: with ``domain = (0,u) x (v,T)`` it reproduces
    ``phi`` (or ``phi_eps`` when ``eps > 0``); over the dark domain with
    the ``t2 - t1 <= Lambda`` constraint it reproduces ``rho``; over the
    light domain with ``t2 - t1 >= Lambda`` it reproduces ``gap``.
    Raises :class:`QuadratureError` instead of returning a value whose
    estimated error exceeds ``tol`` (absolute or relative).
    """
    n = _check_index(nidx, params.d)
    if not tol > 0:
        raise PreconditionError("tol > 0")
    if eps < 0:
        raise PreconditionError("epsilon >= 0")
    return _psi_profile_integral(n, params.d, domain, tol, eps) / (
        nidx.factorial_product()
    )
