#pragma once

#include <array>
#include <vector>

#include "crossplit/model.hpp"

namespace crossplit {

/// (u1, u1', u2, u2') at one position.
using StateVec = std::array<double, 4>;

/// A state together with the accumulated renormalization: the true solution
/// is exp(log_scale) * state.
struct ScaledState {
  StateVec state{};
  double log_scale = 0.0;
};

struct OdeTolerance {
  double rtol = 1e-10;
  double atol = 1e-12;
};

/// Right-hand side of the coupled system written as a first-order 4-system.
StateVec rhs(const CrossingModel& m, double energy, double h, double x, const StateVec& s);

/// Decaying start at x = -X (left) or +X (right) for channel j; the other
/// channel is zero.  Throws TruncationTooSmall unless V_j(-+X) > E + 0.5.
StateVec decaying_init(const CrossingModel& m, Channel j, Side side, double energy, double h,
                       double half_width);

/// Adaptive Dormand-Prince 5(4) from `from` to `to`, renormalizing whenever a
/// component exceeds 1e100.  Throws StepUnderflow.
ScaledState integrate(const CrossingModel& m, double energy, double h, double from, double to,
                      ScaledState s, OdeTolerance tol = {});

struct WronskianResult {
  double value = 0.0;      ///< normalized 4x4 determinant, |value| <= 1
  double log_scale = 0.0;  ///< log of the factor removed by the normalization
};

/// det[u1, h u1', u2, h u2'] of the two left and two right decaying solutions
/// at `x_match`.  Each side's pair is carried as an orthonormal basis of its
/// span (Gram-Schmidt with positive R diagonal), so the value is the
/// determinant divided by det R_left det R_right > 0: same sign and zeros as
/// the raw Wronskian.
WronskianResult wronskian(const CrossingModel& m, double energy, double h, double half_width,
                          double x_match = 0.0, OdeTolerance tol = {});

struct ShootingOptions {
  double half_width = 0.0;  ///< 0: solver_half_width(m, h, hi)
  double x_match = 0.0;
  OdeTolerance tol{};
  bool estimate_errors = false;  ///< re-solve each root with 10x tighter ODE tolerances
  int workers = 0;
};

struct ShootingRoot {
  double energy = 0.0;
  double wronskian = 0.0;       ///< normalized Wronskian at the returned energy
  double error_estimate = 0.0;  ///< 0 unless estimate_errors
  bool double_root = false;     ///< unresolved degenerate pair (listed twice)
};

/// Zeros of the Wronskian in the closed window [lo, hi] (edges with 1e-8
/// relative slack), sorted; double roots appear twice.
std::vector<ShootingRoot> shooting_roots_in(const CrossingModel& m, double lo, double hi,
                                            double h, const ShootingOptions& opt = {});

/// shooting_roots_in over [E0 - C0 h, E0 + C0 h] (must lie inside I0).
std::vector<ShootingRoot> shooting_roots(const CrossingModel& m, double e0, double c0, double h,
                                         const ShootingOptions& opt = {});

}  // namespace crossplit
