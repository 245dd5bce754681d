#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace taxisentinel::kernels::scalar {

void exp(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(in[i]);
}

void accumulate_inverse_lognormal(double scale, double mu, double sigma, const double* z,
                                  double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += scale * std::exp(-(mu + sigma * z[i]));
}

void gaussian_product(const GaussianProductTerms& t, const double* u, double* out,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d1 = u[i] - t.m1;
    const double d2 = u[i] - t.m2;
    out[i] = std::exp(-u[i] - t.a1 * d1 * d1 - t.a2 * d2 * d2 - t.shift);
  }
}

double gaussian_kernel_sum(const double* x, std::size_t n, double at, double inv_bandwidth) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (at - x[i]) * inv_bandwidth;
    sum += std::exp(-0.5 * r * r);
  }
  return sum;
}

double ecdf_sup_gap(const double* cdf, std::size_t n) {
  const double inv_n = 1.0 / static_cast<double>(n);
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) * inv_n;
    const double hi = static_cast<double>(i + 1) * inv_n;
    gap = std::max(gap, std::max(hi - cdf[i], cdf[i] - lo));
  }
  return gap;
}

}  // namespace taxisentinel::kernels::scalar
