#ifndef SILT_PAIR_SUM_H
#define SILT_PAIR_SUM_H

#include <math.h>

/* Weighted band sums of Gaussian pair interactions along a discretized
 * path.
 *
 * The path x has npts points in dim coordinates, row major.  With
 * M = npts - 1 and trapezoid endpoint weights w_0 = w_M = 1/2, w_i = 1
 * otherwise, this accumulates over index lags k = kstart .. M
 *
 *     band(k) = sum_{i=0}^{M-k} w_i w_{i+k}
 *               exp(-|x_{i+k} - x_i|^2 * inv_two_eps)
 *
 * and returns sum_k c_k band(k), where c_k = 1 except that the first
 * band enters at half weight (c_kstart = 1/2) when halve_first is
 * nonzero -- the cut-boundary band of a gap regularization.  The k = 0
 * diagonal is never included here; its value is path independent and
 * handled by the caller.
 *
 * The per-band loops are plain reductions over contiguous data so that
 * vectorizing compilers can batch the exponentials.
 */

static double silt_band_raw_sum_1d(const double *x, long n, long k,
                                   double inv_two_eps) {
  double s = 0.0;
  long i;
  for (i = 0; i < n; i++) {
    double dx = x[i + k] - x[i];
    s += exp(-dx * dx * inv_two_eps);
  }
  return s;
}

static double silt_band_raw_sum_2d(const double *x, long n, long k,
                                   double inv_two_eps) {
  double s = 0.0;
  long i;
  for (i = 0; i < n; i++) {
    double dx = x[2 * (i + k)] - x[2 * i];
    double dy = x[2 * (i + k) + 1] - x[2 * i + 1];
    s += exp(-(dx * dx + dy * dy) * inv_two_eps);
  }
  return s;
}

static double silt_band_raw_sum_nd(const double *x, long n, long k, int dim,
                                   double inv_two_eps) {
  double s = 0.0;
  long i;
  int c;
  for (i = 0; i < n; i++) {
    double r2 = 0.0;
    for (c = 0; c < dim; c++) {
      double dx = x[dim * (i + k) + c] - x[dim * i + c];
      r2 += dx * dx;
    }
    s += exp(-r2 * inv_two_eps);
  }
  return s;
}

static double silt_pair_exp(const double *x, long i, long j, int dim,
                            double inv_two_eps) {
  double r2 = 0.0;
  int c;
  for (c = 0; c < dim; c++) {
    double dx = x[dim * j + c] - x[dim * i + c];
    r2 += dx * dx;
  }
  return exp(-r2 * inv_two_eps);
}

static double silt_band_exp_sum(const double *x, long npts, int dim,
                                double inv_two_eps, long kstart,
                                int halve_first) {
  long M = npts - 1;
  double total = 0.0;
  long k;
  if (kstart < 1)
    kstart = 1;
  for (k = kstart; k <= M; k++) {
    long n = npts - k; /* number of pairs at this lag */
    double band;
    if (n == 1) {
      /* single corner pair (0, M): weight w_0 w_M = 1/4 */
      band = 0.25 * silt_pair_exp(x, 0, M, dim, inv_two_eps);
    } else {
      double s;
      if (dim == 1)
        s = silt_band_raw_sum_1d(x, n, k, inv_two_eps);
      else if (dim == 2)
        s = silt_band_raw_sum_2d(x, n, k, inv_two_eps);
      else
        s = silt_band_raw_sum_nd(x, n, k, dim, inv_two_eps);
      band = s - 0.5 * (silt_pair_exp(x, 0, k, dim, inv_two_eps) +
                        silt_pair_exp(x, M - k, M, dim, inv_two_eps));
    }
    if (k == kstart && halve_first)
      band *= 0.5;
    total += band;
  }
  return total;
}

#endif /* SILT_PAIR_SUM_H */
