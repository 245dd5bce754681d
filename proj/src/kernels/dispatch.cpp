#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"
#include "taxisentinel/error.hpp"

namespace taxisentinel::kernels {
namespace {

const KernelTable kScalarTable{
    Isa::kScalar,
    "scalar",
    &scalar::exp,
    &scalar::accumulate_inverse_lognormal,
    &scalar::gaussian_product,
    &scalar::gaussian_kernel_sum,
    &scalar::ecdf_sup_gap,
};

#if defined(TAXISENTINEL_HAVE_AVX2)
const KernelTable kAvx2Table{
    Isa::kAvx2,
    "avx2",
    &avx2::exp,
    &avx2::accumulate_inverse_lognormal,
    &avx2::gaussian_product,
    &avx2::gaussian_kernel_sum,
    &avx2::ecdf_sup_gap,
};

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

const KernelTable& select_table() {
  if (const char* env = std::getenv("TAXI_SENTINEL_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return kScalarTable;
  }
  if (const KernelTable* t = avx2_table()) return *t;
  return kScalarTable;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) fail(ErrorCode::kInvalidArgument, "kernel span sizes differ");
}

}  // namespace

const KernelTable& scalar_table() { return kScalarTable; }

const KernelTable* avx2_table() {
#if defined(TAXISENTINEL_HAVE_AVX2)
  static const bool available = cpu_has_avx2();
  return available ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_table() {
  static const KernelTable& table = select_table();
  return table;
}

void exp(std::span<const double> in, std::span<double> out) {
  check_sizes(in.size(), out.size());
  active_table().exp(in.data(), out.data(), in.size());
}

void accumulate_inverse_lognormal(double scale, double mu, double sigma,
                                  std::span<const double> z, std::span<double> acc) {
  check_sizes(z.size(), acc.size());
  active_table().accumulate_inverse_lognormal(scale, mu, sigma, z.data(), acc.data(), z.size());
}

void gaussian_product(const GaussianProductTerms& terms, std::span<const double> u,
                      std::span<double> out) {
  check_sizes(u.size(), out.size());
  active_table().gaussian_product(terms, u.data(), out.data(), u.size());
}

double gaussian_kernel_sum(std::span<const double> x, double at, double bandwidth) {
  if (!(bandwidth > 0.0)) fail(ErrorCode::kInvalidArgument, "bandwidth must be positive");
  return active_table().gaussian_kernel_sum(x.data(), x.size(), at, 1.0 / bandwidth);
}

double ecdf_sup_gap(std::span<const double> cdf) {
  if (cdf.empty()) return 0.0;
  return active_table().ecdf_sup_gap(cdf.data(), cdf.size());
}

}  // namespace taxisentinel::kernels
