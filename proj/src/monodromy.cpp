#include "crossplit/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "crossplit/actions.hpp"
#include "crossplit/errors.hpp"
#include "crossplit/parallel.hpp"
#include "crossplit/predict.hpp"
#include "crossplit/quadrature.hpp"

namespace crossplit {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};
constexpr double kDedupe = 1e-12;

struct Partials {
  double s1l, s1r, s2l, s2r;
};

Partials partials(const CrossingModel& m, double e) {
  const auto [s1l, s1r] = partial_actions(m, Channel::k1, e);
  const auto [s2l, s2r] = partial_actions(m, Channel::k2, e);
  return {s1l, s1r, s2l, s2r};
}

cplx turning(double s, double h) { return kI * std::polar(1.0, -2.0 * s / h); }

double toms748(const std::function<double(double)>& f, double a, double b, double fa, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto br = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  return 0.5 * (br.first + br.second);
}

std::vector<double> dedupe(std::vector<double> roots) {
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || r - out.back() > kDedupe) out.push_back(r);
  return out;
}

std::vector<double> scan_grid(double lo, double hi, double h) {
  const double step = h / 20.0;
  // One extra sample past each edge so roots sitting on an edge still bracket.
  const double a = lo - step;
  const double b = hi + step;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / step));
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = a + (b - a) * static_cast<double>(i) / n;
  return grid;
}

// cos(A/h) -+ sqrt(D h): the two factors of the symmetric reduced residual.
double reduced_factor(const CrossingModel& m, double e, double h, int sign) {
  const double a = action(m, Channel::k1, e);
  const double d = std::max(leading_m0(m, e, h).real(), 0.0);
  return std::cos(a / h) - sign * std::sqrt(d);
}

std::vector<double> symmetric_roots(const CrossingModel& m, const std::vector<double>& grid,
                                    double h, int workers) {
  std::vector<double> fp(grid.size()), fm(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    fp[i] = reduced_factor(m, grid[i], h, +1);
    fm[i] = reduced_factor(m, grid[i], h, -1);
  });
  struct Bracket {
    std::size_t i;
    int sign;
  };
  std::vector<Bracket> brackets;
  for (int sign : {+1, -1}) {
    const auto& f = sign > 0 ? fp : fm;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
      if (f[i] == 0.0 || (f[i] < 0.0) != (f[i + 1] < 0.0)) brackets.push_back({i, sign});
  }
  std::vector<double> roots(brackets.size());
  parallel_for(brackets.size(), workers, [&](std::size_t k) {
    const auto [i, sign] = brackets[k];
    const auto& f = sign > 0 ? fp : fm;
    roots[k] = toms748([&](double e) { return reduced_factor(m, e, h, sign); }, grid[i],
                       grid[i + 1], f[i], f[i + 1]);
  });
  return roots;
}

std::vector<double> general_roots(const CrossingModel& m, const std::vector<double>& grid,
                                  double h, int workers) {
  std::vector<double> mag(grid.size());
  parallel_for(grid.size(), workers,
               [&](std::size_t i) { mag[i] = std::abs(monodromy_determinant(m, grid[i], h)); });
  const double scale = *std::max_element(mag.begin(), mag.end());
  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i)
    if (mag[i] <= mag[i - 1] && mag[i] < mag[i + 1]) minima.push_back(i);

  std::vector<double> roots(minima.size());
  std::vector<int> status(minima.size(), 0);
  parallel_for(minima.size(), workers, [&](std::size_t k) {
    const std::size_t i = minima[k];
    auto g = [&](double e) { return monodromy_determinant(m, e, h); };
    auto g2 = [&](double e) { return std::norm(g(e)); };
    std::uintmax_t iters = 200;
    auto [e, v] = boost::math::tools::brent_find_minima(g2, grid[i - 1], grid[i + 1], 40, iters);
    // Secant polish on the complex determinant: E <- E - Re(g / g').
    double best = std::sqrt(v);
    const double de = 1e-7 * h;
    for (int it = 0; it < 30 && best > 0.0; ++it) {
      const cplx gp = (g(e + de) - g(e - de)) / (2.0 * de);
      if (gp == 0.0) break;
      const double next = e - (g(e) / gp).real();
      if (!(next > grid[i - 1] && next < grid[i + 1])) break;
      const double val = std::abs(g(next));
      if (!(val < best)) break;
      e = next;
      best = val;
    }
    roots[k] = e;
    // The leading-order crossing matrices have det = 1 - |tau0|^2 h, so Lambda
    // is not unitary and g has no exact real zero once r != 0: at an
    // eigenvalue |g| is of the size of the defect 1 - |det Lambda|.
    const double defect = 1.0 - std::abs(lambda_matrix(m, e, h).lambda.det());
    if (best <= 1e-8 * scale + 2.0 * std::abs(defect)) {
      status[k] = 1;
    } else if (best <= 1e-3 * scale) {
      status[k] = -1;
    }
  });
  std::vector<double> out;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    if (status[k] < 0)
      throw Error(ErrorCode::kNoConvergence, "monodromy scan minimum did not refine to a root");
    if (status[k] > 0) out.push_back(roots[k]);
  }
  return out;
}

}  // namespace

Matrix2c operator*(const Matrix2c& x, const Matrix2c& y) {
  Matrix2c z;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) z(r, c) = x(r, 0) * y(0, c) + x(r, 1) * y(1, c);
  return z;
}

Matrix2c operator-(const Matrix2c& x, const Matrix2c& y) {
  Matrix2c z;
  for (int i = 0; i < 4; ++i) z.a[i] = x.a[i] - y.a[i];
  return z;
}

void check_crossing_data(const CrossingData& c) {
  if (!(c.beta * c.delta > 0.0))
    throw Error(ErrorCode::kInvalidCrossingData, "beta * delta must be positive");
  if (!(c.dbrace > 0.0)) throw Error(ErrorCode::kInvalidCrossingData, "{q1, q2} must be positive");
  const double bracket = c.beta * c.gamma - c.alpha * c.delta;
  if (std::abs(c.dbrace - bracket) > 1e-12 * std::max(1.0, std::abs(c.dbrace)))
    throw Error(ErrorCode::kInvalidCrossingData, "dbrace != beta gamma - alpha delta");
  if (c.r == 0.0) throw Error(ErrorCode::kInvalidCrossingData, "interaction vanishes");
}

std::array<cplx, 4> kappa_leading(const CrossingData& c) {
  check_crossing_data(c);
  const cplx k12 =
      -std::polar(1.0, kPi / 4) * c.r * std::sqrt(2.0 * kPi * c.delta / (c.beta * c.dbrace));
  const cplx k21 = -std::polar(1.0, -kPi / 4) * std::conj(c.r) *
                   std::sqrt(2.0 * kPi * c.beta / (c.delta * c.dbrace));
  return {1.0, k12, k21, 1.0};
}

CrossingData schrodinger_crossing_data(const CrossingModel& m, double energy, int xi_sign) {
  if (!(energy > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "crossing point needs E > V(0) = 0");
  const double xi = (xi_sign < 0 ? -1.0 : 1.0) * std::sqrt(energy);
  CrossingData c;
  c.alpha = m.v1().with_slope(0.0).slope;
  c.gamma = m.v2().with_slope(0.0).slope;
  c.beta = 2.0 * xi;
  c.delta = 2.0 * xi;
  c.dbrace = c.beta * c.gamma - c.alpha * c.delta;
  c.r = cplx(m.r0()(0.0), m.r1()(0.0) * xi);
  return c;
}

CrossingMatrices crossing_matrices(const CrossingModel& m, double energy, double h) {
  const cplx t = tau0(m, energy) * std::sqrt(h);
  return {Matrix2c{{1.0, t, std::conj(t), 1.0}}, Matrix2c{{1.0, -std::conj(t), -t, 1.0}}};
}

cplx turning_factor(const CrossingModel& m, Channel j, Side side, double energy, double h) {
  const auto [sl, sr] = partial_actions(m, j, energy);
  return turning(side == Side::kLeft ? sl : sr, h);
}

TransferData lambda_matrix(const CrossingModel& m, double energy, double h) {
  const auto p = partials(m, energy);
  const auto cm = crossing_matrices(m, energy, h);
  TransferData t;
  t.energy = energy;
  t.m_minus = cm.m_minus;
  t.m_plus = cm.m_plus;
  t.t1l = turning(p.s1l, h);
  t.t1r = turning(p.s1r, h);
  t.t2l = turning(p.s2l, h);
  t.t2r = turning(p.s2r, h);
  t.lambda = Matrix2c::diag(t.t1l, 1.0 / t.t2r) * t.m_plus *
             Matrix2c::diag(t.t1r, 1.0 / t.t2l) * t.m_minus;
  return t;
}

LambdaLeading lambda_leading(const CrossingModel& m, double energy, double h) {
  const auto p = partials(m, energy);
  const cplx t = tau0(m, energy);
  const double a1 = p.s1l + p.s1r;
  const double a2 = p.s2l + p.s2r;
  const cplx l12 =
      -(t * std::polar(1.0, -2.0 * a1 / h) + std::conj(t) * std::polar(1.0, 2.0 * (p.s2l - p.s1l) / h));
  const cplx l21 =
      -(std::conj(t) * std::polar(1.0, 2.0 * a2 / h) + t * std::polar(1.0, 2.0 * (p.s2r - p.s1r) / h));
  return {l12, l21};
}

cplx leading_m0(const CrossingModel& m, double energy, double h) {
  const auto p = partials(m, energy);
  const auto l = lambda_leading(m, energy, h);
  const double a1 = p.s1l + p.s1r;
  const double a2 = p.s2l + p.s2r;
  return 0.25 * std::polar(1.0, (a1 - a2) / h) * l.l12 * l.l21 * h;
}

cplx monodromy_determinant(const CrossingModel& m, double energy, double h) {
  return (lambda_matrix(m, energy, h).lambda - Matrix2c::identity()).det();
}

std::vector<double> monodromy_roots(const CrossingModel& m, double e0, double c0, double h,
                                    int workers) {
  const auto w = semiclassical_window(m, e0, c0, h);
  const auto grid = scan_grid(w.lo, w.hi, h);
  auto roots = m.symmetric() ? symmetric_roots(m, grid, h, workers)
                             : general_roots(m, grid, h, workers);
  // Edge samples only serve bracketing; keep what lies in the window.
  const double slack = 1e-9;
  std::erase_if(roots, [&](double e) { return e < w.lo - slack || e > w.hi + slack; });
  return dedupe(std::move(roots));
}

WkbAmplitudes wkb_leading(const CrossingModel& m, Channel j, int branch, double energy,
                          double x) {
  const auto inside = [&](Channel c) {
    const auto tp = turning_points(m, c, energy);
    return x > tp.alpha && x < tp.beta;
  };
  if (!inside(j))
    throw Error(ErrorCode::kOutsideAllowedRegion, "x is outside the classically allowed region");
  const double v1 = m.v1()(x);
  const double v2 = m.v2()(x);
  if (std::abs(v1 - v2) < 1e-8) throw Error(ErrorCode::kAtCrossing, "WKB amplitudes blow up at the crossing");
  const double r0 = m.r0()(x);
  const double r1 = m.r1()(x);
  const double s = branch < 0 ? -1.0 : 1.0;

  WkbAmplitudes w;
  if (j == Channel::k1 || inside(Channel::k1)) {
    const double g = energy - v1;
    const double q = std::sqrt(std::sqrt(g));
    w.a1 = 1.0 / q;
    w.a2 = cplx(r0, -s * r1 * std::sqrt(g)) / ((v1 - v2) * q);
    w.has_channel1 = true;
  }
  if (j == Channel::k2 || inside(Channel::k2)) {
    const double g = energy - v2;
    const double q = std::sqrt(std::sqrt(g));
    w.b2 = 1.0 / q;
    w.b1 = cplx(r0, s * r1 * std::sqrt(g)) / ((v2 - v1) * q);
    w.has_channel2 = true;
  }
  w.phase = phase(m, j, energy, x);
  return w;
}

double transport_amplitude(const SymbolEvaluator& q, const PhaseEvaluator& phi, double x) {
  if (x == 0.0) return 1.0;
  auto integrand = [&](std::span<const double> t, std::span<double> out) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto p = phi(t[i]);
      const auto jet = q(t[i], p.d1);
      if (!(std::abs(jet.d_xi) > 1e-12))
        throw Error(ErrorCode::kVanishingXiDerivative, "d_xi q vanishes on the path");
      out[i] = -(jet.d_x_xi + p.d2 * jet.d_xi_xi) / (2.0 * jet.d_xi);
    }
  };
  // Endpoints are checked too: the Kronrod nodes never touch them.
  for (double t : {0.0, x}) {
    const auto jet = q(t, phi(t).d1);
    if (!(std::abs(jet.d_xi) > 1e-12))
      throw Error(ErrorCode::kVanishingXiDerivative, "d_xi q vanishes on the path");
  }
  const auto r = integrate_adaptive(integrand, 0.0, x, 1e-14, 1e-14);
  return std::exp(r.value);
}

}  // namespace crossplit
