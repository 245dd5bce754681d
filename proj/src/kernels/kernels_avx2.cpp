// AVX2 + FMA kernels. Compile with: -mavx2 -mfma

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace taxisentinel::kernels::avx2 {
namespace {

// exp(x) = 2^n * exp(r), n = round(x / ln 2), |r| <= ln(2) / 2. exp(r) is a
// degree-13 Taylor polynomial (truncation < 5e-18 relative). The 2^n factor is
// applied in two halves so results in the subnormal range stay correct.
inline __m256d exp_pd(__m256d x) {
  const __m256d hi = _mm256_set1_pd(709.782712893384);
  const __m256d lo = _mm256_set1_pd(-745.1332191019412);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  __m256d xc = _mm256_min_pd(hi, _mm256_max_pd(lo, x));

  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, xc);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // n in [-1075, 1024]; split into two exponents each within [-538, 512].
  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  const __m256i magic_bits = _mm256_castpd_si256(magic);
  const __m256i bias = _mm256_set1_epi64x(1023);
  auto pow2 = [&](__m256d k) {
    __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), magic_bits);
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(ki, bias), 52));
  };
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, pow2(n1)), pow2(n2));

  result = _mm256_blendv_pd(result, _mm256_set1_pd(HUGE_VAL), over);
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), under);
  return result;
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

}  // namespace

void exp(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(in + i)));
  if (i < n) scalar::exp(in + i, out + i, n - i);
}

void accumulate_inverse_lognormal(double scale, double mu, double sigma, const double* z,
                                  double* acc, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vmu = _mm256_set1_pd(mu);
  const __m256d vsig = _mm256_set1_pd(sigma);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = _mm256_fmadd_pd(vsig, _mm256_loadu_pd(z + i), vmu);
    __m256d t = exp_pd(_mm256_xor_pd(e, sign));
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(vs, t, _mm256_loadu_pd(acc + i)));
  }
  if (i < n) scalar::accumulate_inverse_lognormal(scale, mu, sigma, z + i, acc + i, n - i);
}

void gaussian_product(const GaussianProductTerms& t, const double* u, double* out,
                      std::size_t n) {
  const __m256d m1 = _mm256_set1_pd(t.m1);
  const __m256d a1 = _mm256_set1_pd(t.a1);
  const __m256d m2 = _mm256_set1_pd(t.m2);
  const __m256d a2 = _mm256_set1_pd(t.a2);
  const __m256d shift = _mm256_set1_pd(t.shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(u + i);
    const __m256d d1 = _mm256_sub_pd(x, m1);
    const __m256d d2 = _mm256_sub_pd(x, m2);
    __m256d e = _mm256_add_pd(x, shift);
    e = _mm256_fmadd_pd(_mm256_mul_pd(a1, d1), d1, e);
    e = _mm256_fmadd_pd(_mm256_mul_pd(a2, d2), d2, e);
    _mm256_storeu_pd(out + i, exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), e)));
  }
  if (i < n) scalar::gaussian_product(t, u + i, out + i, n - i);
}

double gaussian_kernel_sum(const double* x, std::size_t n, double at, double inv_bandwidth) {
  const __m256d vat = _mm256_set1_pd(at);
  const __m256d vinv = _mm256_set1_pd(inv_bandwidth);
  const __m256d neg_half = _mm256_set1_pd(-0.5);
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d r0 = _mm256_mul_pd(_mm256_sub_pd(vat, _mm256_loadu_pd(x + i)), vinv);
    __m256d r1 = _mm256_mul_pd(_mm256_sub_pd(vat, _mm256_loadu_pd(x + i + 4)), vinv);
    s0 = _mm256_add_pd(s0, exp_pd(_mm256_mul_pd(neg_half, _mm256_mul_pd(r0, r0))));
    s1 = _mm256_add_pd(s1, exp_pd(_mm256_mul_pd(neg_half, _mm256_mul_pd(r1, r1))));
  }
  double sum = hsum(_mm256_add_pd(s0, s1));
  if (i < n) sum += scalar::gaussian_kernel_sum(x + i, n - i, at, inv_bandwidth);
  return sum;
}

double ecdf_sup_gap(const double* cdf, std::size_t n) {
  const double inv_n_s = 1.0 / static_cast<double>(n);
  const __m256d inv_n = _mm256_set1_pd(inv_n_s);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d four = _mm256_set1_pd(4.0);
  __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  __m256d gap = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d f = _mm256_loadu_pd(cdf + i);
    const __m256d lo = _mm256_mul_pd(idx, inv_n);
    const __m256d hi = _mm256_mul_pd(_mm256_add_pd(idx, one), inv_n);
    gap = _mm256_max_pd(gap, _mm256_max_pd(_mm256_sub_pd(hi, f), _mm256_sub_pd(f, lo)));
    idx = _mm256_add_pd(idx, four);
  }
  double result = hmax(gap);
  for (; i < n; ++i) {
    const double lo = static_cast<double>(i) * inv_n_s;
    const double hi = static_cast<double>(i + 1) * inv_n_s;
    result = std::max(result, std::max(hi - cdf[i], cdf[i] - lo));
  }
  return result;
}

}  // namespace taxisentinel::kernels::avx2
