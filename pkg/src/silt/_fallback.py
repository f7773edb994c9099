"""Pure-Python (numpy) band-sum kernel, signature-identical to the
compiled one in ``silt._pairsum``.

Used when the extension is unavailable or explicitly disabled; the
active implementation is chosen by ``silt._backend``.  Per lag the pair
exponentials are evaluated vectorized, so the cost is one numpy pass per
band rather than per pair.
"""

from __future__ import annotations

import numpy as np

__all__ = ["band_exp_sum"]


def band_exp_sum(
    x: np.ndarray, inv_two_eps: float, kstart: int, halve_first: bool
) -> float:
    """Sum of trapezoid-weighted Gaussian pair bands over lags >= kstart.

    ``x`` is the (npts, dim) path, ``inv_two_eps`` the exponent scale
    1/(2 eps); when ``halve_first`` is set the ``kstart`` band enters at
    half weight.  The diagonal lag 0 is excluded by construction.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    npts = x.shape[0]
    mlast = npts - 1
    if npts < 2:
        return 0.0
    kstart = max(int(kstart), 1)
    total = 0.0
    for k in range(kstart, mlast + 1):
        diff = x[k:] - x[: npts - k]
        e = np.exp(-inv_two_eps * np.einsum("ij,ij->i", diff, diff))
        if e.shape[0] == 1:
            # single corner pair (0, M): weight w_0 w_M = 1/4
            band = 0.25 * float(e[0])
        else:
            band = float(e.sum()) - 0.5 * (float(e[0]) + float(e[-1]))
        if k == kstart and halve_first:
            band *= 0.5
        total += band
    return total
