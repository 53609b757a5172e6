#include "crossplit/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "crossplit/actions.hpp"
#include "crossplit/errors.hpp"

namespace crossplit {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMergeTol = 1e-10;
constexpr double kRootTol = 1e-12;

// Newton on A_j(E) = target, kept inside [lo, hi] by bisection fallback.
double invert_action(const CrossingModel& m, Channel j, double target, double lo, double hi,
                     double f_lo, double f_hi) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  double e = lo + (hi - lo) * (-f_lo) / (f_hi - f_lo);
  for (int it = 0; it < 100; ++it) {
    const double f = action(m, j, e) - target;
    if (std::abs(f) <= 0.05 * kRootTol) return e;
    if ((f < 0.0) == (f_lo < 0.0)) {
      lo = e;
      f_lo = f;
    } else {
      hi = e;
      f_hi = f;
    }
    double next = e - f / action_derivative(m, j, e);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - e) <= 1e-16 * std::max(1.0, std::abs(e))) return next;
    e = next;
  }
  const double f = action(m, j, e) - target;
  if (std::abs(f) > kRootTol)
    throw Error(ErrorCode::kNoConvergence, "Bohr-Sommerfeld inversion stalled");
  return e;
}

}  // namespace

SemiclassicalWindow semiclassical_window(const CrossingModel& m, double e0, double c0, double h) {
  if (!(h > 0.0) || !(c0 >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "h must be positive and C0 non-negative");
  const SemiclassicalWindow w{e0 - c0 * h, e0 + c0 * h};
  const auto i0 = m.window();
  if (!(w.lo > i0.lo && w.hi < i0.hi))
    throw Error(ErrorCode::kWindowOutsideI0, "[E0 - C0 h, E0 + C0 h] is not inside (E1, E2)");
  return w;
}

std::vector<BsRoot> bohr_sommerfeld_roots_in(const CrossingModel& m, double lo, double hi,
                                             double h) {
  std::vector<BsRoot> roots;
  for (Channel j : {Channel::k1, Channel::k2}) {
    const double a_lo = action(m, j, lo);
    const double a_hi = action(m, j, hi);
    // A tiny slack keeps targets that sit exactly on a window edge.
    const double slack = 0.5 * kRootTol;
    const long k_min = static_cast<long>(std::ceil((a_lo - slack) / (kPi * h) - 0.5));
    const long k_max = static_cast<long>(std::floor((a_hi + slack) / (kPi * h) - 0.5));
    for (long k = k_min; k <= k_max; ++k) {
      const double target = (static_cast<double>(k) + 0.5) * kPi * h;
      double e;
      if (target <= a_lo) {
        e = lo;
      } else if (target >= a_hi) {
        e = hi;
      } else {
        e = invert_action(m, j, target, lo, hi, a_lo - target, a_hi - target);
      }
      roots.push_back({j, k, e, 1});
    }
  }
  std::stable_sort(roots.begin(), roots.end(),
                   [](const BsRoot& a, const BsRoot& b) { return a.energy < b.energy; });

  std::vector<BsRoot> merged;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (i + 1 < roots.size() && roots[i].channel != roots[i + 1].channel &&
        std::abs(roots[i + 1].energy - roots[i].energy) <= kMergeTol) {
      BsRoot r = roots[i].channel == Channel::k1 ? roots[i] : roots[i + 1];
      r.multiplicity = 2;
      merged.push_back(r);
      ++i;
    } else {
      merged.push_back(roots[i]);
    }
  }
  return merged;
}

std::vector<BsRoot> bohr_sommerfeld_roots(const CrossingModel& m, double e0, double c0, double h) {
  const auto w = semiclassical_window(m, e0, c0, h);
  return bohr_sommerfeld_roots_in(m, w.lo, w.hi, h);
}

std::complex<double> tau0(const CrossingModel& m, double energy) {
  const double gap = m.crossing_slope_gap();
  if (!(gap > 0.0)) throw Error(ErrorCode::kInvalidModel, "V1'(0) - V2'(0) must be positive");
  if (!(energy > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau0 needs E > 0");
  const std::complex<double> rot = std::polar(1.0, kPi / 4);
  const double q = std::sqrt(std::sqrt(energy));
  const std::complex<double> r(m.r0()(0.0) / q, -m.r1()(0.0) * q);
  return rot * std::sqrt(kPi / gap) * r;
}

SplittingAmplitudeForms splitting_amplitude_forms(const CrossingModel& m, double energy,
                                                  double h) {
  if (!m.symmetric())
    throw Error(ErrorCode::kNotSymmetric, "splitting amplitude requires a symmetric model");
  const double b = b_action(m, energy);
  const double theta = b / h;
  const double q = std::sqrt(std::sqrt(energy));
  const double r0 = m.r0()(0.0);
  const double r1 = m.r1()(0.0);
  const double v1p = m.v1().with_slope(0.0).slope;
  const double amp = r0 / q * std::sin(theta + kPi / 4) + r1 * q * std::cos(theta + kPi / 4);

  const std::complex<double> t = tau0(m, energy);
  const std::complex<double> phase = std::polar(1.0, theta);
  const double tau_form = 0.25 * std::norm(std::conj(t) * phase + t * std::conj(phase));
  return {kPi / (2.0 * v1p) * amp * amp, tau_form};
}

double splitting_amplitude(const CrossingModel& m, double energy, double h) {
  const auto f = splitting_amplitude_forms(m, energy, h);
  if (std::abs(f.closed_form - f.tau_form) > 1e-12)
    throw Error(ErrorCode::kNoConvergence, "splitting amplitude forms disagree");
  return f.closed_form;
}

double splitting_amplitude_bound(const CrossingModel& m, double energy) {
  const double q = std::sqrt(std::sqrt(energy));
  const double v1p = m.v1().with_slope(0.0).slope;
  const double s = std::abs(m.r0()(0.0)) / q + std::abs(m.r1()(0.0)) * q;
  return kPi / (2.0 * v1p) * s * s;
}

SplittingPrediction predict_pair(const CrossingModel& m, double center, double h) {
  SplittingPrediction p;
  p.center = center;
  p.d_value = splitting_amplitude(m, center, h);
  p.a_prime = action_derivative(m, Channel::k1, center);
  const double half = std::sqrt(p.d_value) / p.a_prime * h * std::sqrt(h);
  p.e_minus = center - half;
  p.e_plus = center + half;
  p.width = p.e_plus - p.e_minus;
  return p;
}

std::vector<SplittingPrediction> predicted_pairs(const CrossingModel& m, double e0, double c0,
                                                 double h) {
  if (!m.symmetric())
    throw Error(ErrorCode::kNotSymmetric, "predicted pairs require a symmetric model");
  std::vector<SplittingPrediction> out;
  for (const auto& r : bohr_sommerfeld_roots(m, e0, c0, h)) out.push_back(predict_pair(m, r.energy, h));
  return out;
}

QuantizationResidual quantization_residual(const CrossingModel& m, double energy, double h) {
  const double a1 = action(m, Channel::k1, energy);
  const double a2 = action(m, Channel::k2, energy);
  QuantizationResidual r;
  r.value = std::cos(a1 / h) * std::cos(a2 / h);
  if (m.symmetric()) {
    r.value -= std::cos((a1 - a2) / h) * splitting_amplitude(m, energy, h) * h;
    r.m0_evaluated = true;
  }
  return r;
}

std::pair<double, double> refine_pair(const CrossingModel& m, double center, double h) {
  if (!m.symmetric())
    throw Error(ErrorCode::kNotSymmetric, "pair refinement requires a symmetric model");
  const double reach = kPi * h / (4.0 * action_derivative(m, Channel::k1, center));
  auto f = [&](double e) { return quantization_residual(m, e, h).value; };
  const double f_mid = f(center);
  auto solve = [&](double a, double b) {
    const double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0.0) == (fb < 0.0))
      throw Error(ErrorCode::kNoConvergence, "quantization residual does not change sign");
    std::uintmax_t iters = 200;
    auto tol = boost::math::tools::eps_tolerance<double>(50);
    const auto br = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (br.first + br.second);
  };
  if (f_mid == 0.0) return {center, center};
  return {solve(center - reach, center), solve(center, center + reach)};
}

}  // namespace crossplit
