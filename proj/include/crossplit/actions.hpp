#pragma once

#include <optional>
#include <utility>

#include "crossplit/model.hpp"

namespace crossplit {

/// Turning points alpha < beta of channel j at energy E:
/// V_j(alpha) = V_j(beta) = E with V_j'(alpha) < 0 < V_j'(beta).
struct TurningPoints {
  double alpha;
  double beta;
};

/// Every action-type quantity at one energy.
struct ActionSet {
  double energy = 0.0;
  double a1 = 0.0;   ///< action of well 1 over [alpha1, beta1]
  double a2 = 0.0;
  double a1p = 0.0;  ///< dA1/dE, from its own singular integral
  double a2p = 0.0;
  double s1l = 0.0;  ///< int_{alpha1}^0 sqrt(E - V1)
  double s1r = 0.0;  ///< int_0^{beta1} sqrt(E - V1)
  double s2l = 0.0;
  double s2r = 0.0;
  std::optional<double> b;  ///< 2 * s1r, symmetric models only
  TurningPoints tp1{};
  TurningPoints tp2{};
};

/// Brackets each sign change of V_j - E by an outward scan from the well
/// bottom, then refines to |V_j(x) - E| <= 1e-13 max(1, |E|).
/// Throws NoWell or MultipleRoots.
TurningPoints turning_points(const CrossingModel& m, Channel j, double energy);

/// int_{alpha_j}^{beta_j} sqrt(E - V_j(t)) dt.
double action(const CrossingModel& m, Channel j, double energy);

/// (1/2) int_{alpha_j}^{beta_j} (E - V_j(t))^{-1/2} dt.
double action_derivative(const CrossingModel& m, Channel j, double energy);

/// (S_{j,L}, S_{j,R}): the action split at the crossing point x = 0.
std::pair<double, double> partial_actions(const CrossingModel& m, Channel j, double energy);

/// B(E) = 2 S_{1,R}(E); requires a symmetric model.  Also verifies
/// B = A - (S_{1,L} - S_{1,R}) to 1e-10 and throws NoConvergence otherwise.
double b_action(const CrossingModel& m, double energy);

/// phi_j(x) = int_0^x sqrt(E - V_j(t)) dt for x in [alpha_j, beta_j].
double phase(const CrossingModel& m, Channel j, double energy, double x);

ActionSet action_set(const CrossingModel& m, double energy);

}  // namespace crossplit
