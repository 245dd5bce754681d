#pragma once

// Data-parallel inner loops used by the numeric modules. Every kernel has a
// scalar reference implementation; an AVX2+FMA variant is compiled when the
// toolchain supports it and selected at runtime when the CPU does. Setting
// TAXI_SENTINEL_SIMD=scalar forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace taxisentinel::kernels {

enum class Isa { kScalar, kAvx2 };

// out(u) = exp(-u - a1 (u - m1)^2 - a2 (u - m2)^2 - shift)
struct GaussianProductTerms {
  double m1 = 0.0;
  double a1 = 0.0;
  double m2 = 0.0;
  double a2 = 0.0;
  double shift = 0.0;
};

struct KernelTable {
  Isa isa;
  std::string_view name;

  // out[i] = exp(in[i])
  void (*exp)(const double* in, double* out, std::size_t n);

  // acc[i] += scale * exp(-(mu + sigma * z[i])). With z standard normal this
  // adds d / v for a log-normal speed v = exp(mu + sigma z).
  void (*accumulate_inverse_lognormal)(double scale, double mu, double sigma, const double* z,
                                       double* acc, std::size_t n);

  void (*gaussian_product)(const GaussianProductTerms& terms, const double* u, double* out,
                           std::size_t n);

  // sum_i exp(-0.5 * ((at - x[i]) * inv_bandwidth)^2)
  double (*gaussian_kernel_sum)(const double* x, std::size_t n, double at, double inv_bandwidth);

  // For ascending samples with hypothesized CDF values cdf[0..n):
  // max_i max((i + 1) / n - cdf[i], cdf[i] - i / n)
  double (*ecdf_sup_gap)(const double* cdf, std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the AVX2 variant was not compiled or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();
const KernelTable& active_table();

void exp(std::span<const double> in, std::span<double> out);
void accumulate_inverse_lognormal(double scale, double mu, double sigma,
                                  std::span<const double> z, std::span<double> acc);
void gaussian_product(const GaussianProductTerms& terms, std::span<const double> u,
                      std::span<double> out);
double gaussian_kernel_sum(std::span<const double> x, double at, double bandwidth);
double ecdf_sup_gap(std::span<const double> cdf);

}  // namespace taxisentinel::kernels
