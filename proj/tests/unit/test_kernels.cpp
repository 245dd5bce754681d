#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "taxisentinel/kernels.hpp"

using namespace taxisentinel::kernels;

namespace {

// Sizes straddle the 4-wide vector width and its remainder handling.
const std::vector<std::size_t> kSizes = {0, 1, 3, 4, 5, 7, 8, 17, 64, 1001};

std::vector<double> uniform(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

double rel_err(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_CASE("scalar exp matches libm") {
  const auto in = uniform(1001, -700.0, 700.0, 1);
  std::vector<double> out(in.size());
  scalar_table().exp(in.data(), out.data(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(rel_err(out[i], std::exp(in[i])) <= 1e-15);
}

TEST_CASE("scalar kernels against direct formulas") {
  const auto z = uniform(257, -4.0, 4.0, 2);
  std::vector<double> acc(z.size(), 1.0);
  scalar_table().accumulate_inverse_lognormal(250.0, 2.3, 0.2, z.data(), acc.data(), z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(rel_err(acc[i], 1.0 + 250.0 / std::exp(2.3 + 0.2 * z[i])) <= 1e-14);
  }

  const GaussianProductTerms t{4.1, 3.0, 4.4, 5.5, 0.7};
  const auto u = uniform(99, 3.0, 5.0, 3);
  std::vector<double> g(u.size());
  scalar_table().gaussian_product(t, u.data(), g.data(), u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double e = std::exp(-u[i] - t.a1 * (u[i] - t.m1) * (u[i] - t.m1) -
                              t.a2 * (u[i] - t.m2) * (u[i] - t.m2) - t.shift);
    CHECK(rel_err(g[i], e) <= 1e-14);
  }

  const std::vector<double> cdf = {0.1, 0.5, 0.55, 0.9};
  // gaps: max(0.25-0.1, 0.1-0)=0.15; max(0.5-0.5, 0.5-0.25)=0.25; 0.75-0.55=0.2; max(1-0.9, 0.9-0.75)=0.15
  CHECK(scalar_table().ecdf_sup_gap(cdf.data(), cdf.size()) == doctest::Approx(0.25).epsilon(1e-15));

  const std::vector<double> x = {0.0, 1.0};
  CHECK(scalar_table().gaussian_kernel_sum(x.data(), 2, 0.0, 1.0) ==
        doctest::Approx(1.0 + std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_table();
  if (v == nullptr) {
    MESSAGE("AVX2 unavailable; only the scalar path is exercised");
    return;
  }
  const KernelTable& s = scalar_table();
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    const auto in = uniform(n, -700.0, 700.0, 10 + static_cast<unsigned>(n));
    std::vector<double> a(n), b(n);
    s.exp(in.data(), a.data(), n);
    v->exp(in.data(), b.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(a[i], b[i]) <= 4e-15);

    const auto z = uniform(n, -5.0, 5.0, 20 + static_cast<unsigned>(n));
    std::vector<double> acc_s(n, 3.0), acc_v(n, 3.0);
    s.accumulate_inverse_lognormal(180.0, 1.9, 0.3, z.data(), acc_s.data(), n);
    v->accumulate_inverse_lognormal(180.0, 1.9, 0.3, z.data(), acc_v.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(acc_s[i], acc_v[i]) <= 4e-15);

    const GaussianProductTerms t{4.0, 12.5, 4.3, 8.0, -2.0};
    const auto u = uniform(n, 2.5, 6.0, 30 + static_cast<unsigned>(n));
    std::vector<double> g_s(n), g_v(n);
    s.gaussian_product(t, u.data(), g_s.data(), n);
    v->gaussian_product(t, u.data(), g_v.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      // Underflowed tails must agree absolutely.
      CHECK(std::abs(g_s[i] - g_v[i]) <= 4e-15 * std::max(1.0, std::abs(g_s[i])));
    }

    const auto x = uniform(n, -3.0, 3.0, 40 + static_cast<unsigned>(n));
    CHECK(rel_err(s.gaussian_kernel_sum(x.data(), n, 0.2, 2.0),
                  v->gaussian_kernel_sum(x.data(), n, 0.2, 2.0)) <= 1e-13);

    auto cdf = uniform(n, 0.0, 1.0, 50 + static_cast<unsigned>(n));
    std::sort(cdf.begin(), cdf.end());
    CHECK(s.ecdf_sup_gap(cdf.data(), n) == v->ecdf_sup_gap(cdf.data(), n));
  }
}

TEST_CASE("exp handles the edges of the double range") {
  const std::vector<double> in = {-1000.0, -745.2, -708.5, 0.0, 709.7, 710.0, 1000.0};
  for (const KernelTable* t : {&scalar_table(), avx2_table()}) {
    if (t == nullptr) continue;
    CAPTURE(t->name);
    std::vector<double> out(in.size());
    t->exp(in.data(), out.data(), in.size());
    CHECK(out[0] == 0.0);
    CHECK(out[3] == 1.0);
    CHECK(rel_err(out[4], std::exp(709.7)) <= 4e-15);
    CHECK(std::isinf(out[5]));
    CHECK(std::isinf(out[6]));
  }
}

TEST_CASE("span wrappers reject size mismatches") {
  std::vector<double> a(3), b(4);
  CHECK_THROWS(taxisentinel::kernels::exp(a, b));
}
