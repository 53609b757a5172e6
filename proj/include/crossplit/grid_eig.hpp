#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossplit/model.hpp"
#include "crossplit/simd/kernels.hpp"

namespace crossplit {

/// Uniform grid of n interior points on (-X, X) with Dirichlet ends.
struct Grid {
  double x_half_width = 0.0;
  std::int64_t n = 0;
  double step() const noexcept { return 2.0 * x_half_width / static_cast<double>(n + 1); }
  double node(std::int64_t i) const noexcept {
    return -x_half_width + static_cast<double>(i + 1) * step();
  }
};

/// Discretized operator in interleaved (u1_i, u2_i) order, stored as 2x2
/// blocks (see simd::BlockTridiagonalView for the layout).  Only one triangle
/// is stored, so the matrix is symmetric by construction.
struct BandedSymmetric {
  Grid grid;
  double t = 0.0;  ///< h^2 / dx^2
  std::vector<double> d1, d2, c, up, lo;

  std::size_t dimension() const noexcept { return 2 * d1.size(); }
  /// Entry (r, c) of the full 2n x 2n matrix.
  double entry(std::size_t r, std::size_t col) const;
  simd::BlockTridiagonalView view() const;
};

/// Throws GridTooCoarse when the step exceeds h/8 and InvalidArgument for
/// n < 100.
BandedSymmetric assemble(const CrossingModel& m, double h, const Grid& g);

/// Number of eigenvalues below sigma (retrying perturbed shifts after a pivot
/// breakdown).  Returns the shift actually used through `used` when given.
std::int64_t count_below(const BandedSymmetric& a, double sigma, double* used = nullptr);

/// All eigenvalues in (lo, hi), each isolated to width 1e-12 max(1, |hi|),
/// listed with multiplicity.
std::vector<double> eigen_window(const BandedSymmetric& a, double lo, double hi, int workers = 0);

struct EigenReport {
  std::string method = "grid";
  std::vector<double> eigenvalues;     ///< Richardson-extrapolated values
  std::vector<double> error_estimate;  ///< per eigenvalue
  std::vector<std::int64_t> levels;    ///< n of every refinement level run
  std::int64_t n = 0;                  ///< finest level
  double x_half_width = 0.0;
  double h = 0.0;
  bool converged = false;  ///< false: cap reached before the target
};

struct GridOptions {
  std::int64_t n0 = 0;         ///< 0: max(100, ceil(16 X / h))
  std::int64_t n_cap = 64000;
  double half_width = 0.0;     ///< 0: solver_half_width(m, h, hi)
  int workers = 0;
};

/// Refines n -> 2n + 1 (exact step halving) until the Richardson-extrapolated
/// eigenvalues of two successive level pairs agree to target_err.  When the
/// cap is reached first the best report is returned with converged = false.
EigenReport converged_window(const CrossingModel& m, double h, double lo, double hi,
                             double target_err, const GridOptions& opt = {});

}  // namespace crossplit
