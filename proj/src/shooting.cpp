#include "crossplit/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "crossplit/errors.hpp"
#include "crossplit/parallel.hpp"
#include "crossplit/predict.hpp"

namespace crossplit {
namespace {

namespace odeint = boost::numeric::odeint;

constexpr double kRenormalizeAbove = 1e100;
constexpr double kRenormalizeBelow = 1e-100;
constexpr long kMaxSteps = 50'000'000;
// A local |W| minimum at or below this fraction of the scan maximum is a
// degenerate (unresolved) pair.
constexpr double kDoubleRootRel = 1e-6;
constexpr double kEdgeSlack = 1e-8;

double max_abs(const StateVec& s) {
  double m = 0.0;
  for (double v : s) m = std::max(m, std::abs(v));
  return m;
}

void renormalize(ScaledState& s) {
  const double m = max_abs(s.state);
  if (m > kRenormalizeAbove || (m > 0.0 && m < kRenormalizeBelow)) {
    for (double& v : s.state) v /= m;
    s.log_scale += std::log(m);
  }
}

// Determinant by Gaussian elimination with partial pivoting.
double det4(std::array<std::array<double, 4>, 4> a) {
  double det = 1.0;
  for (int c = 0; c < 4; ++c) {
    int p = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (a[p][c] == 0.0) return 0.0;
    if (p != c) {
      std::swap(a[p], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (int r = c + 1; r < 4; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

double solve_bracket(const std::function<double(double)>& f, double a, double b, double fa,
                     double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iters = 200;
  auto tol = [](double x, double y) {
    return std::abs(y - x) <= 1e-12 * std::max(1.0, std::abs(x));
  };
  const auto br = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (br.first + br.second);
}

struct Candidate {
  enum Kind { kSimple, kDouble } kind;
  double a, b;
};

class Scanner {
 public:
  Scanner(const CrossingModel& m, double h, const ShootingOptions& opt, double x)
      : m_(m), h_(h), opt_(opt), x_(x) {}

  double w(double e, OdeTolerance tol) const {
    return wronskian(m_, e, h_, x_, opt_.x_match, tol).value;
  }

  double resolve(const Candidate& c, OdeTolerance tol) const {
    auto f = [&](double e) { return w(e, tol); };
    if (c.kind == Candidate::kSimple) return solve_bracket(f, c.a, c.b, f(c.a), f(c.b));
    return stationary_point(c.a, c.b, tol);
  }

  // Minimizer of |W| inside [a, b]: root of the centred-difference slope when
  // it brackets, Brent minimization otherwise.
  double stationary_point(double a, double b, OdeTolerance tol) const {
    const double d = 1e-4 * h_;
    auto slope = [&](double e) { return (w(e + d, tol) - w(e - d, tol)) / (2.0 * d); };
    const double sa = slope(a);
    const double sb = slope(b);
    if ((sa < 0.0) != (sb < 0.0)) return solve_bracket(slope, a, b, sa, sb);
    const double sign = w(0.5 * (a + b), tol) < 0.0 ? -1.0 : 1.0;
    std::uintmax_t iters = 200;
    return boost::math::tools::brent_find_minima([&](double e) { return sign * w(e, tol); }, a, b,
                                                 40, iters)
        .first;
  }

 private:
  const CrossingModel& m_;
  double h_;
  const ShootingOptions& opt_;
  double x_;
};

}  // namespace

StateVec rhs(const CrossingModel& m, double energy, double h, double x, const StateVec& s) {
  const double h2 = h * h;
  const double v1 = m.v1()(x);
  const double v2 = m.v2()(x);
  const double r0 = m.r0()(x);
  const auto r1 = m.r1().with_slope(x);
  const double d2u1 = ((v1 - energy) * s[0] + h * r0 * s[2] + h2 * r1.value * s[3]) / h2;
  const double d2u2 =
      ((v2 - energy) * s[2] + h * r0 * s[0] - h2 * r1.slope * s[0] - h2 * r1.value * s[1]) / h2;
  return {s[1], d2u1, s[3], d2u2};
}

StateVec decaying_init(const CrossingModel& m, Channel j, Side side, double energy, double h,
                       double half_width) {
  const double x = side == Side::kLeft ? -half_width : half_width;
  const double gap = m.potential(j)(x) - energy;
  if (!(gap > 0.5))
    throw Error(ErrorCode::kTruncationTooSmall, "V_j(+-X) must exceed E + 0.5");
  const double k = std::sqrt(gap) / h;
  StateVec s{};
  const int o = 2 * index(j);
  s[o] = 1.0;
  s[o + 1] = side == Side::kLeft ? k : -k;
  return s;
}

ScaledState integrate(const CrossingModel& m, double energy, double h, double from, double to,
                      ScaledState s, OdeTolerance tol) {
  if (from == to) throw Error(ErrorCode::kInvalidArgument, "empty integration interval");
  auto sys = [&](const StateVec& y, StateVec& dy, double x) { dy = rhs(m, energy, h, x, y); };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<StateVec>>(tol.atol, tol.rtol);
  const double dir = to > from ? 1.0 : -1.0;
  double x = from;
  double dt = dir * std::min(h / 10.0, std::abs(to - from));
  renormalize(s);
  for (long steps = 0; x != to; ++steps) {
    if (steps > kMaxSteps) throw Error(ErrorCode::kStepUnderflow, "step budget exhausted");
    const bool last = dir * (x + dt - to) >= 0.0;
    if (last) dt = to - x;
    const auto res = stepper.try_step(sys, s.state, x, dt);
    if (res == odeint::fail) {
      if (std::abs(dt) < 1e-15 * std::max(1.0, std::abs(x)))
        throw Error(ErrorCode::kStepUnderflow, "ODE step size underflow");
      continue;
    }
    if (last) x = to;
    const double before = s.log_scale;
    renormalize(s);
    if (s.log_scale != before) stepper.reset();
  }
  return s;
}

namespace {

using PairState = std::array<double, 8>;

// Gram-Schmidt on the two columns in the scaled coordinates (u, h u'); the
// diagonal of R is positive, so det R > 0 and signs survive.
void orthonormalize(PairState& y, double h, double& log_det) {
  std::array<double, 4> c1{y[0], h * y[1], y[2], h * y[3]};
  std::array<double, 4> c2{y[4], h * y[5], y[6], h * y[7]};
  auto dot = [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
  };
  const double r11 = std::sqrt(dot(c1, c1));
  for (double& v : c1) v /= r11;
  const double r12 = dot(c1, c2);
  for (int i = 0; i < 4; ++i) c2[i] -= r12 * c1[i];
  const double r22 = std::sqrt(dot(c2, c2));
  for (double& v : c2) v /= r22;
  log_det += std::log(r11) + std::log(r22);
  y = {c1[0], c1[1] / h, c1[2], c1[3] / h, c2[0], c2[1] / h, c2[2], c2[3] / h};
}

bool needs_orthonormalization(const PairState& y, double h) {
  const std::array<double, 4> c1{y[0], h * y[1], y[2], h * y[3]};
  const std::array<double, 4> c2{y[4], h * y[5], y[6], h * y[7]};
  double n1 = 0.0, n2 = 0.0, d = 0.0;
  for (int i = 0; i < 4; ++i) {
    n1 += c1[i] * c1[i];
    n2 += c2[i] * c2[i];
    d += c1[i] * c2[i];
  }
  if (!(n1 < 1e100 && n2 < 1e100 && n1 > 1e-100 && n2 > 1e-100)) return true;
  return d * d > 0.25 * n1 * n2;
}

// Carries the span of two solutions from `from` to `to`, keeping the pair
// well conditioned: one channel's growing mode would otherwise swamp both
// columns under the barrier.  Returns the orthonormal pair (scaled
// coordinates) and accumulates log det R.
PairState integrate_span(const CrossingModel& m, double energy, double h, double from, double to,
                         PairState y, OdeTolerance tol, double& log_det) {
  auto sys = [&](const PairState& s, PairState& ds, double x) {
    const auto a = rhs(m, energy, h, x, {s[0], s[1], s[2], s[3]});
    const auto b = rhs(m, energy, h, x, {s[4], s[5], s[6], s[7]});
    ds = {a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]};
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<PairState>>(tol.atol, tol.rtol);
  const double dir = to > from ? 1.0 : -1.0;
  double x = from;
  double dt = dir * std::min(h / 10.0, std::abs(to - from));
  orthonormalize(y, h, log_det);
  for (long steps = 0; x != to; ++steps) {
    if (steps > kMaxSteps) throw Error(ErrorCode::kStepUnderflow, "step budget exhausted");
    const bool last = dir * (x + dt - to) >= 0.0;
    if (last) dt = to - x;
    if (stepper.try_step(sys, y, x, dt) == odeint::fail) {
      if (std::abs(dt) < 1e-15 * std::max(1.0, std::abs(x)))
        throw Error(ErrorCode::kStepUnderflow, "ODE step size underflow");
      continue;
    }
    if (last) x = to;
    if (needs_orthonormalization(y, h)) {
      orthonormalize(y, h, log_det);
      stepper.reset();
    }
  }
  orthonormalize(y, h, log_det);
  return y;
}

}  // namespace

WronskianResult wronskian(const CrossingModel& m, double energy, double h, double half_width,
                          double x_match, OdeTolerance tol) {
  std::array<std::array<double, 4>, 4> a{};
  WronskianResult out;
  int col = 0;
  for (Side side : {Side::kLeft, Side::kRight}) {
    const double from = side == Side::kLeft ? -half_width : half_width;
    const auto s1 = decaying_init(m, Channel::k1, side, energy, h, half_width);
    const auto s2 = decaying_init(m, Channel::k2, side, energy, h, half_width);
    PairState y{s1[0], s1[1], s1[2], s1[3], s2[0], s2[1], s2[2], s2[3]};
    y = integrate_span(m, energy, h, from, x_match, y, tol, out.log_scale);
    for (int k = 0; k < 2; ++k) {
      a[0][col] = y[4 * k];
      a[1][col] = h * y[4 * k + 1];
      a[2][col] = y[4 * k + 2];
      a[3][col] = h * y[4 * k + 3];
      ++col;
    }
  }
  out.value = det4(a);
  return out;
}

std::vector<ShootingRoot> shooting_roots_in(const CrossingModel& m, double lo, double hi,
                                            double h, const ShootingOptions& opt) {
  if (!(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "empty energy window");
  const double x = opt.half_width > 0.0 ? opt.half_width : solver_half_width(m, h, hi);
  const Scanner scan(m, h, opt, x);

  // The scan reaches one step past each edge so that a root sitting on an
  // edge is still bracketed; roots are kept if they lie in the closed window
  // up to kEdgeSlack.
  const double step = h / 40.0;
  const double a = lo - step;
  const double b = hi + step;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / step));
  std::vector<double> grid(n + 1), w(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = a + (b - a) * static_cast<double>(i) / n;
  grid[n] = b;
  parallel_for(grid.size(), opt.workers, [&](std::size_t i) { w[i] = scan.w(grid[i], opt.tol); });
  double w_max = 0.0;
  for (double v : w) w_max = std::max(w_max, std::abs(v));

  auto flips = [&](std::size_t i) { return w[i] == 0.0 || (w[i] < 0.0) != (w[i + 1] < 0.0); };
  std::vector<Candidate> simple;
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < n; ++i)
    if (flips(i)) simple.push_back({Candidate::kSimple, grid[i], grid[i + 1]});
  for (std::size_t i = 1; i < n; ++i) {
    if (flips(i - 1) || flips(i)) continue;
    if (std::abs(w[i]) <= std::abs(w[i - 1]) && std::abs(w[i]) < std::abs(w[i + 1]))
      minima.push_back(i);
  }

  // Classify each sampled |W| minimum: a hidden sign-changing pair, an
  // unresolved double root, or just a dip.
  std::vector<std::vector<Candidate>> from_minima(minima.size());
  parallel_for(minima.size(), opt.workers, [&](std::size_t k) {
    const std::size_t i = minima[k];
    const double a = grid[i - 1];
    const double b = grid[i + 1];
    const double c = scan.stationary_point(a, b, opt.tol);
    const double wc = scan.w(c, opt.tol);
    if ((wc < 0.0) != (w[i] < 0.0) && wc != 0.0) {
      from_minima[k] = {{Candidate::kSimple, a, c}, {Candidate::kSimple, c, b}};
    } else if (std::abs(wc) <= kDoubleRootRel * w_max) {
      from_minima[k] = {{Candidate::kDouble, a, b}};
    }
  });
  std::vector<Candidate> cands = simple;
  for (const auto& v : from_minima) cands.insert(cands.end(), v.begin(), v.end());

  std::vector<ShootingRoot> roots(cands.size());
  parallel_for(cands.size(), opt.workers, [&](std::size_t k) {
    ShootingRoot r;
    r.energy = scan.resolve(cands[k], opt.tol);
    r.wronskian = scan.w(r.energy, opt.tol);
    r.double_root = cands[k].kind == Candidate::kDouble;
    if (opt.estimate_errors) {
      const OdeTolerance tight{opt.tol.rtol / 10.0, opt.tol.atol / 10.0};
      r.error_estimate = std::abs(scan.resolve(cands[k], tight) - r.energy);
    }
    roots[k] = r;
  });

  std::vector<ShootingRoot> out;
  for (const auto& r : roots) {
    const double slack = kEdgeSlack * std::max(1.0, std::abs(r.energy));
    if (r.energy < lo - slack || r.energy > hi + slack) continue;
    out.push_back(r);
    if (r.double_root) out.push_back(r);
  }
  std::sort(out.begin(), out.end(),
            [](const ShootingRoot& a, const ShootingRoot& b) { return a.energy < b.energy; });
  return out;
}

std::vector<ShootingRoot> shooting_roots(const CrossingModel& m, double e0, double c0, double h,
                                         const ShootingOptions& opt) {
  const auto win = semiclassical_window(m, e0, c0, h);
  return shooting_roots_in(m, win.lo, win.hi, h, opt);
}

}  // namespace crossplit
