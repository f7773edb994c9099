# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled band-sum kernel for path pair interactions.

Thin wrapper over the C routine in ``pair_sum.h``; releases the GIL so
path-level thread pools scale.  The pure-Python equivalent lives in
``silt._fallback`` and the active implementation is chosen by
``silt._backend``.
"""

cdef extern from "pair_sum.h":
    double silt_band_exp_sum(const double *x, long npts, int dim,
                             double inv_two_eps, long kstart,
                             int halve_first) nogil


def band_exp_sum(const double[:, ::1] x, double inv_two_eps, long kstart,
                 bint halve_first):
    """Sum of trapezoid-weighted Gaussian pair bands over lags >= kstart.

    ``x`` is the (npts, dim) path, ``inv_two_eps`` the exponent scale
    1/(2 eps); when ``halve_first`` is set the ``kstart`` band enters at
    half weight.  The diagonal lag 0 is excluded by construction.
    """
    cdef long npts = x.shape[0]
    cdef int dim = <int> x.shape[1]
    cdef double out
    if npts < 2:
        return 0.0
    with nogil:
        out = silt_band_exp_sum(&x[0, 0], npts, dim, inv_two_eps,
                                kstart, halve_first)
    return out
