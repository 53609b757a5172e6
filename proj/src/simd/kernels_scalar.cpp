#include "crossplit/simd/kernels.hpp"

#include "block_step.hpp"

namespace crossplit::simd::detail {
namespace {

void harmonic_scalar(double c, double w, double d, double sign, const double* x, double* out,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double y = sign * x[i] - c;
    out[i] = w * y * y + d;
  }
}

void polynomial_scalar(const double* coeffs, std::size_t ncoeff, double sign, const double* x,
                       double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sign * x[i];
    double v = ncoeff ? coeffs[ncoeff - 1] : 0.0;
    for (std::size_t k = ncoeff - (ncoeff ? 1 : 0); k-- > 0;) v = v * s + coeffs[k];
    out[i] = v;
  }
}

std::int64_t inertia_one(const BlockTridiagonalView& a, double shift, bool& broke) {
  const std::size_t n = a.d1.size();
  const double t = a.t;
  PivotBlock b{a.d1[0] - shift, a.c[0], a.d2[0] - shift};
  std::int64_t count = 0;
  for (std::size_t i = 0;; ++i) {
    const double det = pivot_determinant(b, a.pivmin, broke);
    count += negative_count(b, det);
    if (i + 1 == n) break;
    const double ia = b.s / det;
    const double ib = -b.q / det;
    const double ic = b.p / det;
    const double u = a.up[i];
    const double l = a.lo[i];
    const double x00 = ia * (-t) + ib * l;
    const double x01 = ia * u + ib * (-t);
    const double x10 = ib * (-t) + ic * l;
    const double x11 = ib * u + ic * (-t);
    const double y00 = (-t) * x00 + l * x10;
    const double y01 = (-t) * x01 + l * x11;
    const double y11 = u * x01 + (-t) * x11;
    b.p = (a.d1[i + 1] - shift) - y00;
    b.q = a.c[i + 1] - y01;
    b.s = (a.d2[i + 1] - shift) - y11;
  }
  return count;
}

void inertia_scalar(const BlockTridiagonalView& a, const double* shifts, std::int64_t* counts,
                    std::uint8_t* breakdown, std::size_t nshift) {
  for (std::size_t k = 0; k < nshift; ++k) {
    bool broke = false;
    counts[k] = a.d1.empty() ? 0 : inertia_one(a, shifts[k], broke);
    breakdown[k] = broke ? 1 : 0;
  }
}

}  // namespace

const KernelTable kScalarTable{&harmonic_scalar, &polynomial_scalar, &inertia_scalar};

}  // namespace crossplit::simd::detail
