"""Domain types and chaos-order combinatorics.

The chaos expansion of a self-intersection local time in dimension ``d``
is indexed by multi-indices ``n = (n_1, ..., n_d)`` of nonnegative
integers with total order ``n = sum(n_i)``.  Every kernel function in
this package depends on the multi-index only through its total order and
the factorial ``n! = prod(n_i!)``, so series over multi-indices collapse
into series over the total order weighted by

    chaos_weight(d, n) = sum_{|n| = n} prod_i C(2 n_i, n_i),

which is the coefficient of ``x^n`` in ``(1 - 4x)^{-d/2}``.  All
combinatorics here use exact integer arithmetic; factorials such as
``(2n)!`` overflow 64-bit integers near ``n = 10``, so values are only
converted to floating point at the final multiplication into a series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import PreconditionError

__all__ = [
    "ModelParams",
    "MultiIndex",
    "KernelPoint",
    "enumerate_multi_indices",
    "chaos_weight",
]


@dataclass(frozen=True)
class ModelParams:
    """Ambient model parameters.

    Attributes
    ----------
    d : int
        Spatial dimension of the Brownian motion, ``d >= 1``.
    T : float
        Time horizon, ``T > 0``.
    N : int
        Chaos truncation threshold: the truncated local time keeps
        orders ``n >= N``.  Must satisfy ``2N > d - 2``; defaults to
        ``d // 2``, the smallest admissible value.
    """

    d: int
    T: float
    N: int = -1  # sentinel: replaced by d // 2 in __post_init__

    def __post_init__(self) -> None:
        if not (isinstance(self.d, int) and self.d >= 1):
            raise PreconditionError("d >= 1")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise PreconditionError("T > 0")
        if self.N == -1:
            object.__setattr__(self, "N", self.d // 2)
        if not (isinstance(self.N, int) and self.N >= 0):
            raise PreconditionError("N >= 0")
        if not 2 * self.N > self.d - 2:
            raise PreconditionError("2N > d - 2")


@dataclass(frozen=True)
class MultiIndex:
    """A d-tuple of nonnegative integers indexing per-coordinate chaos orders."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.entries) < 1:
            raise PreconditionError("multi-index length d >= 1")
        if any((not isinstance(k, int)) or k < 0 for k in self.entries):
            raise PreconditionError("multi-index entries are nonnegative integers")

    @classmethod
    def canonical(cls, n: int, d: int) -> "MultiIndex":
        """The lexicographically largest multi-index of order ``n``: (n, 0, ..., 0)."""
        if d < 1 or n < 0:
            raise PreconditionError("d >= 1, n >= 0")
        return cls((n,) + (0,) * (d - 1))

    @property
    def d(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> int:
        """Total order ``n = sum(n_i)``."""
        return sum(self.entries)

    def factorial_product(self) -> int:
        """Exact ``n! = prod_i n_i!``."""
        out = 1
        for k in self.entries:
            out *= math.factorial(k)
        return out

    def even_factorial_product(self) -> int:
        """Exact ``(2n)! = prod_i (2 n_i)!``."""
        out = 1
        for k in self.entries:
            out *= math.factorial(2 * k)
        return out


@dataclass(frozen=True)
class KernelPoint:
    """The (min, max) pair of kernel time arguments.

    Every kernel function of ``2n`` time arguments in this package
    depends on them only through ``u = min`` and ``v = max``.
    """

    u: float
    v: float

    def __post_init__(self) -> None:
        if not (0 <= self.u <= self.v):
            raise PreconditionError("0 <= u <= v")

    @property
    def width(self) -> float:
        """The spread ``v - u``."""
        return self.v - self.u


def _compositions(d: int, n: int) -> Iterator[tuple[int, ...]]:
    if d == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _compositions(d - 1, n - first):
            yield (first,) + rest


def enumerate_multi_indices(d: int, n: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of dimension ``d`` and total order ``n``.

    Returns every d-tuple of nonnegative integers summing to ``n``
    exactly once, in lexicographic order; there are ``C(n+d-1, d-1)``
    of them.
    """
    if d < 1 or n < 0:
        raise PreconditionError("d >= 1, n >= 0")
    return tuple(MultiIndex(t) for t in _compositions(d, n))


def chaos_weight(d: int, n: int) -> int:
    """Exact combinatorial weight collapsing a multi-index sum to total order.

    ``chaos_weight(d, n) = sum over multi-indices of order n of
    prod_i C(2 n_i, n_i)``, the coefficient of ``x^n`` in
    ``(1 - 4x)^{-d/2}``.  Computed by the hypergeometric recurrence
    ``c_n = c_{n-1} * (4(n-1) + 2d) / n`` in exact integer arithmetic;
    for ``d = 2`` this gives exactly ``4^n``.
    """
    if d < 1 or n < 0:
        raise PreconditionError("d >= 1, n >= 0")
    c = 1
    for k in range(1, n + 1):
        num = c * (4 * (k - 1) + 2 * d)
        q, r = divmod(num, k)
        if r:  # the running coefficient is an integer at every order
            raise AssertionError("chaos_weight recurrence lost exactness")
        c = q
    return c
