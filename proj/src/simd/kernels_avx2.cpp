#include "crossplit/simd/kernels.hpp"

#include <immintrin.h>

#include <array>

namespace crossplit::simd::detail {
namespace {

void harmonic_avx2(double c, double w, double d, double sign, const double* x, double* out,
                   std::size_t n) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vw = _mm256_set1_pd(w);
  const __m256d vd = _mm256_set1_pd(d);
  const __m256d vs = _mm256_set1_pd(sign);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d y = _mm256_sub_pd(_mm256_mul_pd(vs, _mm256_loadu_pd(x + i)), vc);
    const __m256d v = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(vw, y), y), vd);
    _mm256_storeu_pd(out + i, v);
  }
  kScalarTable.harmonic(c, w, d, sign, x + i, out + i, n - i);
}

void polynomial_avx2(const double* coeffs, std::size_t ncoeff, double sign, const double* x,
                     double* out, std::size_t n) {
  if (ncoeff == 0) {
    kScalarTable.polynomial(coeffs, ncoeff, sign, x, out, n);
    return;
  }
  const __m256d vs = _mm256_set1_pd(sign);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_mul_pd(vs, _mm256_loadu_pd(x + i));
    __m256d v = _mm256_set1_pd(coeffs[ncoeff - 1]);
    for (std::size_t k = ncoeff - 1; k-- > 0;)
      v = _mm256_add_pd(_mm256_mul_pd(v, s), _mm256_set1_pd(coeffs[k]));
    _mm256_storeu_pd(out + i, v);
  }
  kScalarTable.polynomial(coeffs, ncoeff, sign, x + i, out + i, n - i);
}

// Four shifts per sweep; mirrors inertia_one() in kernels_scalar.cpp.
void inertia_lanes(const BlockTridiagonalView& a, const double* shifts, std::int64_t* counts,
                   std::uint8_t* breakdown) {
  const std::size_t n = a.d1.size();
  const __m256d sigma = _mm256_loadu_pd(shifts);
  const __m256d mt = _mm256_set1_pd(-a.t);
  const __m256d pivmin = _mm256_set1_pd(a.pivmin);
  const __m256d mpivmin = _mm256_set1_pd(-a.pivmin);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);

  __m256d p = _mm256_sub_pd(_mm256_set1_pd(a.d1[0]), sigma);
  __m256d q = _mm256_set1_pd(a.c[0]);
  __m256d s = _mm256_sub_pd(_mm256_set1_pd(a.d2[0]), sigma);
  __m256d count = zero;
  __m256d broke = zero;

  for (std::size_t i = 0;; ++i) {
    __m256d det = _mm256_sub_pd(_mm256_mul_pd(p, s), _mm256_mul_pd(q, q));
    const __m256d absdet = _mm256_andnot_pd(sign_mask, det);
    const __m256d bad = _mm256_cmp_pd(absdet, pivmin, _CMP_NGT_UQ);
    const __m256d tr = _mm256_add_pd(p, s);
    if (_mm256_movemask_pd(bad)) {
      const __m256d tr_nonzero = _mm256_cmp_pd(tr, zero, _CMP_NEQ_UQ);
      __m256d clamped = _mm256_blendv_pd(mpivmin, _mm256_mul_pd(mpivmin, tr), tr_nonzero);
      clamped = _mm256_blendv_pd(clamped, mpivmin, _mm256_cmp_pd(clamped, zero, _CMP_EQ_OQ));
      det = _mm256_blendv_pd(det, clamped, bad);
      broke = _mm256_or_pd(broke, bad);
    }
    const __m256d det_neg = _mm256_cmp_pd(det, zero, _CMP_LT_OQ);
    const __m256d tr_neg = _mm256_cmp_pd(tr, zero, _CMP_LT_OQ);
    const __m256d inc = _mm256_blendv_pd(_mm256_and_pd(tr_neg, two), one, det_neg);
    count = _mm256_add_pd(count, inc);
    if (i + 1 == n) break;

    const __m256d ia = _mm256_div_pd(s, det);
    const __m256d ib = _mm256_div_pd(_mm256_xor_pd(q, sign_mask), det);
    const __m256d ic = _mm256_div_pd(p, det);
    const __m256d u = _mm256_set1_pd(a.up[i]);
    const __m256d l = _mm256_set1_pd(a.lo[i]);
    const __m256d x00 = _mm256_add_pd(_mm256_mul_pd(ia, mt), _mm256_mul_pd(ib, l));
    const __m256d x01 = _mm256_add_pd(_mm256_mul_pd(ia, u), _mm256_mul_pd(ib, mt));
    const __m256d x10 = _mm256_add_pd(_mm256_mul_pd(ib, mt), _mm256_mul_pd(ic, l));
    const __m256d x11 = _mm256_add_pd(_mm256_mul_pd(ib, u), _mm256_mul_pd(ic, mt));
    const __m256d y00 = _mm256_add_pd(_mm256_mul_pd(mt, x00), _mm256_mul_pd(l, x10));
    const __m256d y01 = _mm256_add_pd(_mm256_mul_pd(mt, x01), _mm256_mul_pd(l, x11));
    const __m256d y11 = _mm256_add_pd(_mm256_mul_pd(u, x01), _mm256_mul_pd(mt, x11));
    p = _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(a.d1[i + 1]), sigma), y00);
    q = _mm256_sub_pd(_mm256_set1_pd(a.c[i + 1]), y01);
    s = _mm256_sub_pd(_mm256_sub_pd(_mm256_set1_pd(a.d2[i + 1]), sigma), y11);
  }

  std::array<double, 4> c{};
  _mm256_storeu_pd(c.data(), count);
  const int mask = _mm256_movemask_pd(broke);
  for (int k = 0; k < 4; ++k) {
    counts[k] = static_cast<std::int64_t>(c[k]);
    breakdown[k] = (mask >> k) & 1;
  }
}

void inertia_avx2(const BlockTridiagonalView& a, const double* shifts, std::int64_t* counts,
                  std::uint8_t* breakdown, std::size_t nshift) {
  if (a.d1.empty()) {
    kScalarTable.inertia(a, shifts, counts, breakdown, nshift);
    return;
  }
  std::size_t k = 0;
  for (; k + kShiftLanes <= nshift; k += kShiftLanes)
    inertia_lanes(a, shifts + k, counts + k, breakdown + k);
  if (k < nshift) {
    std::array<double, kShiftLanes> pad{};
    std::array<std::int64_t, kShiftLanes> c{};
    std::array<std::uint8_t, kShiftLanes> b{};
    for (std::size_t j = 0; j < kShiftLanes; ++j) pad[j] = shifts[k + (k + j < nshift ? j : 0)];
    inertia_lanes(a, pad.data(), c.data(), b.data());
    for (std::size_t j = 0; k + j < nshift; ++j) {
      counts[k + j] = c[j];
      breakdown[k + j] = b[j];
    }
  }
}

}  // namespace

const KernelTable kAvx2Table{&harmonic_avx2, &polynomial_avx2, &inertia_avx2};

}  // namespace crossplit::simd::detail
