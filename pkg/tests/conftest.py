"""Shared test helpers.

The suite is oracle-first: every nontrivial expected value is either an
exact closed form evaluated independently inside the test, a frozen
constant produced by an independent oracle (adaptive quadrature, exact
combinatorial enumeration, or large-sample Monte Carlo integration), or
a statistical window derived from the sample itself.
"""

from __future__ import annotations

import math

from hypothesis import HealthCheck, settings

# Quadrature-backed properties can be slow per example; disable the
# wall-clock deadline and shrink the example counts instead.
settings.register_profile(
    "silt",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("silt")


def rel_err(value: float, reference: float) -> float:
    """|value - reference| / max(1e-300, |reference|)."""
    return abs(value - reference) / max(1e-300, abs(reference))


def assert_close(value: float, reference: float, rel: float) -> None:
    err = rel_err(value, reference)
    assert err <= rel, (
        f"value {value!r} vs reference {reference!r}: "
        f"relative error {err:.3e} > {rel:.1e}"
    )


TWO_PI = 2.0 * math.pi
