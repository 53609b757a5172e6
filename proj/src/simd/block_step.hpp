#pragma once

// One step of the block LDL^T recursion shared by the scalar reference
// kernel.  The AVX2 kernel re-implements exactly this sequence of operations
// on four lanes; keep the two in sync.

#include <cmath>
#include <cstdint>

namespace crossplit::simd::detail {

struct PivotBlock {
  double p;
  double q;
  double s;
};

// Clamps a numerically singular pivot block; returns the determinant used
// for both inertia and inversion.
inline double pivot_determinant(const PivotBlock& b, double pivmin, bool& broke) {
  double det = b.p * b.s - b.q * b.q;
  if (!(std::fabs(det) > pivmin)) {
    broke = true;
    const double tr = b.p + b.s;
    det = (tr != 0.0) ? (-pivmin) * tr : -pivmin;
    if (det == 0.0) det = -pivmin;
  }
  return det;
}

inline std::int64_t negative_count(const PivotBlock& b, double det) {
  if (det < 0.0) return 1;
  return (b.p + b.s < 0.0) ? 2 : 0;
}

}  // namespace crossplit::simd::detail
