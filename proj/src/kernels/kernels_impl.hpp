#pragma once

#include "taxisentinel/kernels.hpp"

namespace taxisentinel::kernels {

namespace scalar {
void exp(const double* in, double* out, std::size_t n);
void accumulate_inverse_lognormal(double scale, double mu, double sigma, const double* z,
                                  double* acc, std::size_t n);
void gaussian_product(const GaussianProductTerms& t, const double* u, double* out, std::size_t n);
double gaussian_kernel_sum(const double* x, std::size_t n, double at, double inv_bandwidth);
double ecdf_sup_gap(const double* cdf, std::size_t n);
}  // namespace scalar

#if defined(TAXISENTINEL_HAVE_AVX2)
namespace avx2 {
void exp(const double* in, double* out, std::size_t n);
void accumulate_inverse_lognormal(double scale, double mu, double sigma, const double* z,
                                  double* acc, std::size_t n);
void gaussian_product(const GaussianProductTerms& t, const double* u, double* out, std::size_t n);
double gaussian_kernel_sum(const double* x, std::size_t n, double at, double inv_bandwidth);
double ecdf_sup_gap(const double* cdf, std::size_t n);
}  // namespace avx2
#endif

}  // namespace taxisentinel::kernels
