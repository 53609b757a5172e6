#include "crossplit/actions.hpp"

#include <array>
#include <cmath>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "crossplit/errors.hpp"
#include "crossplit/quadrature.hpp"

namespace crossplit {
namespace {

constexpr double kScanStep = 1.0 / 128.0;
constexpr double kQuadTol = 1e-14;

double refine_root(const PotentialSpec& v, double energy, double a, double b) {
  auto f = [&](double x) { return v(x) - energy; };
  const double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(53), iters);
  const double x = std::fabs(f(r.first)) <= std::fabs(f(r.second)) ? r.first : r.second;
  if (std::fabs(f(x)) > 1e-13 * std::max(1.0, std::fabs(energy)))
    throw Error(ErrorCode::kNoConvergence, "turning point refinement stalled");
  return x;
}

// Walks from the well bottom in direction `dir` up to the truncation edge;
// returns the single sign change of V - E on that side.
double outward_turning_point(const PotentialSpec& v, double energy, double bottom, double edge,
                             double dir) {
  double prev = bottom;
  std::optional<double> found;
  for (int k = 1;; ++k) {
    double x = bottom + dir * k * kScanStep;
    const bool last = dir * (x - edge) >= 0.0;
    if (last) x = edge;
    const bool above = v(x) - energy >= 0.0;
    const bool prev_above = v(prev) - energy >= 0.0;
    if (above != prev_above) {
      if (found) throw Error(ErrorCode::kMultipleRoots, "V - E changes sign more than once");
      found = dir > 0 ? refine_root(v, energy, prev, x) : refine_root(v, energy, x, prev);
    }
    prev = x;
    if (last) break;
  }
  if (!found) throw Error(ErrorCode::kNoWell, "no turning point inside the truncated domain");
  return *found;
}

enum class Weight { kSqrt, kInverseSqrt };

// Integral over the interval between `turning` and `end` (positively
// oriented) of sqrt(E - V) or 1/sqrt(E - V), using t = turning +- s^2 so
// that the square-root endpoint behaviour becomes smooth in s.
double singular_endpoint_integral(const PotentialSpec& v, double turning, double end,
                                  Weight weight) {
  if (end == turning) return 0.0;
  const double dir = end > turning ? 1.0 : -1.0;
  const double smax = std::sqrt(std::fabs(end - turning));
  // The gap V(turning) - V(t) is measured from V(turning) rather than E (the
  // refined turning point is off by ~1e-16, which would cost O(1e-8) in the
  // 1/sqrt integral).  Very close to the turning point turning + s^2 is not
  // representable, so the gap comes from the second-order Taylor expansion.
  const double level = v(turning);
  const double slope = v.with_slope(turning).slope;
  const double curv = v.second_derivative(turning);
  const double u_taylor = 1e-6 * std::max(1.0, std::fabs(turning));
  BatchIntegrand f = [&](std::span<const double> s, std::span<double> fs) {
    const std::size_t n = s.size();
    std::vector<double> t(n);
    std::vector<double> vt(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = turning + dir * (s[i] * s[i]);
    v.eval_batch(t, vt);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = s[i] * s[i];
      double gap = level - vt[i];
      if (u < u_taylor) gap = -dir * slope * u - 0.5 * curv * u * u;
      gap = std::max(gap, 0.0);
      if (weight == Weight::kSqrt) {
        fs[i] = 2.0 * s[i] * std::sqrt(gap);
      } else {
        fs[i] = gap > 0.0 ? 2.0 * s[i] / std::sqrt(gap) : 0.0;
      }
    }
  };
  return integrate_adaptive(f, 0.0, smax, kQuadTol).value;
}

struct Well {
  const PotentialSpec& v;
  TurningPoints tp;
  double bottom;
};

Well well(const CrossingModel& m, Channel j, double energy) {
  return {m.potential(j), turning_points(m, j, energy), m.well_bottom(j)};
}

}  // namespace

TurningPoints turning_points(const CrossingModel& m, Channel j, double energy) {
  const PotentialSpec& v = m.potential(j);
  const double bottom = m.well_bottom(j);
  if (v(bottom) >= energy)
    throw Error(ErrorCode::kNoWell, "energy lies below the bottom of well " +
                                        std::to_string(static_cast<int>(j)));
  const double edge = m.truncation_half_width();
  return {outward_turning_point(v, energy, bottom, -edge, -1.0),
          outward_turning_point(v, energy, bottom, edge, 1.0)};
}

double action(const CrossingModel& m, Channel j, double energy) {
  const Well w = well(m, j, energy);
  return singular_endpoint_integral(w.v, w.tp.alpha, w.bottom, Weight::kSqrt) +
         singular_endpoint_integral(w.v, w.tp.beta, w.bottom, Weight::kSqrt);
}

double action_derivative(const CrossingModel& m, Channel j, double energy) {
  const Well w = well(m, j, energy);
  return 0.5 *
         (singular_endpoint_integral(w.v, w.tp.alpha, w.bottom, Weight::kInverseSqrt) +
          singular_endpoint_integral(w.v, w.tp.beta, w.bottom, Weight::kInverseSqrt));
}

std::pair<double, double> partial_actions(const CrossingModel& m, Channel j, double energy) {
  const Well w = well(m, j, energy);
  if (!(w.tp.alpha < 0.0 && 0.0 < w.tp.beta))
    throw Error(ErrorCode::kOutsideAllowedRegion, "crossing point outside the well");
  return {singular_endpoint_integral(w.v, w.tp.alpha, 0.0, Weight::kSqrt),
          singular_endpoint_integral(w.v, w.tp.beta, 0.0, Weight::kSqrt)};
}

double b_action(const CrossingModel& m, double energy) {
  if (!m.symmetric()) throw Error(ErrorCode::kNotSymmetric, "B(E) needs a symmetric model");
  const auto [s1l, s1r] = partial_actions(m, Channel::k1, energy);
  const double b = 2.0 * s1r;
  const double via_action = action(m, Channel::k1, energy) - (s1l - s1r);
  if (std::fabs(b - via_action) > 1e-10)
    throw Error(ErrorCode::kNoConvergence, "B(E) identity check failed");
  return b;
}

double phase(const CrossingModel& m, Channel j, double energy, double x) {
  if (x == 0.0) return 0.0;
  const Well w = well(m, j, energy);
  if (x < w.tp.alpha || x > w.tp.beta)
    throw Error(ErrorCode::kOutsideAllowedRegion, "x outside [alpha_j, beta_j]");
  if (x > 0.0) {
    const double s_r = singular_endpoint_integral(w.v, w.tp.beta, 0.0, Weight::kSqrt);
    return s_r - singular_endpoint_integral(w.v, w.tp.beta, x, Weight::kSqrt);
  }
  const double s_l = singular_endpoint_integral(w.v, w.tp.alpha, 0.0, Weight::kSqrt);
  return -(s_l - singular_endpoint_integral(w.v, w.tp.alpha, x, Weight::kSqrt));
}

ActionSet action_set(const CrossingModel& m, double energy) {
  ActionSet out;
  out.energy = energy;
  out.tp1 = turning_points(m, Channel::k1, energy);
  out.tp2 = turning_points(m, Channel::k2, energy);
  out.a1 = action(m, Channel::k1, energy);
  out.a2 = action(m, Channel::k2, energy);
  out.a1p = action_derivative(m, Channel::k1, energy);
  out.a2p = action_derivative(m, Channel::k2, energy);
  std::tie(out.s1l, out.s1r) = partial_actions(m, Channel::k1, energy);
  std::tie(out.s2l, out.s2r) = partial_actions(m, Channel::k2, energy);
  if (m.symmetric()) out.b = b_action(m, energy);
  return out;
}

}  // namespace crossplit
