#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant selected at runtime.  Both variants perform the same IEEE-754
// operations in the same order (no FMA contraction), so their outputs are
// bit-identical; the equivalence tests rely on that.

#include <cstddef>
#include <cstdint>
#include <span>

namespace crossplit::simd {

enum class Isa { kScalar, kAvx2 };

const char* to_string(Isa isa) noexcept;

/// Best instruction set supported by both the build and the running CPU.
Isa detected_isa() noexcept;

/// Instruction set used by `kernels()`.  Defaults to `detected_isa()`; the
/// environment variable CROSSPLIT_SIMD=scalar forces the reference path.
Isa active_isa() noexcept;

/// Overrides the active instruction set (clamped to what the CPU supports).
void set_active_isa(Isa isa) noexcept;

/// Read-only view of the interleaved block-tridiagonal matrix
///
///   diag block i   = [[d1[i], c[i]], [c[i], d2[i]]]
///   upper block i  = [[-t, up[i]], [lo[i], -t]]      (couples node i to i+1)
///
/// with the lower blocks given by symmetry.  `up` and `lo` have n-1 entries.
struct BlockTridiagonalView {
  std::span<const double> d1;
  std::span<const double> d2;
  std::span<const double> c;
  std::span<const double> up;
  std::span<const double> lo;
  double t = 0.0;
  double pivmin = 0.0;
};

/// Number of shifts a single AVX2 inertia sweep processes.
inline constexpr std::size_t kShiftLanes = 4;

struct KernelTable {
  /// out[i] = w * (y * y) + d with y = sign * x[i] - c.
  void (*harmonic)(double c, double w, double d, double sign, const double* x, double* out,
                   std::size_t n);
  /// Horner evaluation of ascending coefficients at sign * x[i].
  void (*polynomial)(const double* coeffs, std::size_t ncoeff, double sign, const double* x,
                     double* out, std::size_t n);
  /// For each shift s, counts the eigenvalues of the matrix below s via the
  /// inertia of the block LDL^T factorization of (A - s I).  `breakdown[k]`
  /// is set when a pivot block was numerically singular and was clamped.
  void (*inertia)(const BlockTridiagonalView& a, const double* shifts, std::int64_t* counts,
                  std::uint8_t* breakdown, std::size_t nshift);
};

const KernelTable& kernels(Isa isa) noexcept;
inline const KernelTable& kernels() noexcept { return kernels(active_isa()); }

namespace detail {
extern const KernelTable kScalarTable;
#if CROSSPLIT_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace crossplit::simd
