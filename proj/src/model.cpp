#include "crossplit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "crossplit/errors.hpp"
#include "crossplit/simd/kernels.hpp"

namespace crossplit {

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec PotentialSpec::shifted_harmonic(double center, double curvature, double offset) {
  return PotentialSpec(ShiftedHarmonic{center, curvature, offset}, false);
}

PotentialSpec PotentialSpec::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  return PotentialSpec(Polynomial{std::move(coeffs)}, false);
}

PotentialSpec PotentialSpec::constant(double value) { return polynomial({value}); }

PotentialSpec PotentialSpec::mirror(const PotentialSpec& of) {
  return PotentialSpec(of.base_, !of.mirrored_);
}

double PotentialSpec::operator()(double x) const noexcept {
  const double s = mirrored_ ? -1.0 * x : x;
  if (const auto* h = std::get_if<ShiftedHarmonic>(&base_)) {
    const double y = s - h->center;
    return h->curvature * y * y + h->offset;
  }
  const auto& c = std::get<Polynomial>(base_).coeffs;
  double v = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) v = v * s + c[k];
  return v;
}

ValueSlope PotentialSpec::with_slope(double x) const noexcept {
  const double sign = mirrored_ ? -1.0 : 1.0;
  const double s = sign * x;
  if (const auto* h = std::get_if<ShiftedHarmonic>(&base_)) {
    const double y = s - h->center;
    return {h->curvature * y * y + h->offset, sign * (2.0 * h->curvature * y)};
  }
  const auto& c = std::get<Polynomial>(base_).coeffs;
  double v = c.back();
  double dv = 0.0;
  for (std::size_t k = c.size() - 1; k-- > 0;) {
    dv = dv * s + v;
    v = v * s + c[k];
  }
  return {v, sign * dv};
}

double PotentialSpec::second_derivative(double x) const noexcept {
  const double s = mirrored_ ? -x : x;
  if (const auto* h = std::get_if<ShiftedHarmonic>(&base_)) return 2.0 * h->curvature;
  const auto& c = std::get<Polynomial>(base_).coeffs;
  double d2 = 0.0;
  for (std::size_t k = c.size(); k-- > 2;)
    d2 = d2 * s + static_cast<double>(k) * static_cast<double>(k - 1) * c[k];
  return d2;
}

void PotentialSpec::eval_batch(std::span<const double> x, std::span<double> out) const {
  const auto& k = simd::kernels();
  const double sign = mirrored_ ? -1.0 : 1.0;
  if (const auto* h = std::get_if<ShiftedHarmonic>(&base_)) {
    k.harmonic(h->center, h->curvature, h->offset, sign, x.data(), out.data(), x.size());
  } else {
    const auto& c = std::get<Polynomial>(base_).coeffs;
    k.polynomial(c.data(), c.size(), sign, x.data(), out.data(), x.size());
  }
}

bool PotentialSpec::is_zero() const noexcept {
  if (const auto* h = std::get_if<ShiftedHarmonic>(&base_))
    return h->curvature == 0.0 && h->offset == 0.0;
  const auto& c = std::get<Polynomial>(base_).coeffs;
  return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  const char* arg = mirrored_ ? "(-x)" : "x";
  if (const auto* h = std::get_if<ShiftedHarmonic>(&base_)) {
    os << h->curvature << "*(" << arg << " - " << h->center << ")^2 + " << h->offset;
  } else {
    const auto& c = std::get<Polynomial>(base_).coeffs;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) os << " + ";
      os << c[k];
      if (k) os << "*" << arg << "^" << k;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// CrossingModel

namespace {

double find_truncation(const PotentialSpec& v1, const PotentialSpec& v2, double e2) {
  const double need = e2 + 1.0;
  for (double x = 0.5; x <= CrossingModel::kMaxHalfWidth; x += 0.5) {
    if (v1(-x) >= need && v1(x) >= need && v2(-x) >= need && v2(x) >= need) return x;
  }
  throw Error(ErrorCode::kInvalidModel,
              "potentials never exceed E2 + 1 on both sides within |x| <= 1000");
}

double find_well_bottom(const PotentialSpec& v, double half_width) {
  const int n = 4000;
  const double dx = 2.0 * half_width / n;
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double val = v(-half_width + i * dx);
    if (val < best_v) {
      best_v = val;
      best = i;
    }
  }
  const double lo = -half_width + std::max(best - 1, 0) * dx;
  const double hi = -half_width + std::min(best + 1, n) * dx;
  auto r = boost::math::tools::brent_find_minima([&](double x) { return v(x); }, lo, hi, 52);
  return r.first;
}

}  // namespace

CrossingModel::CrossingModel(PotentialSpec v1, PotentialSpec v2, CouplingSpec coupling,
                             EnergyWindow window, bool symmetric)
    : v1_(std::move(v1)),
      v2_(std::move(v2)),
      coupling_(std::move(coupling)),
      window_(window),
      symmetric_(symmetric) {
  if (!(window_.lo > 0.0 && window_.lo < window_.hi))
    throw Error(ErrorCode::kInvalidModel, "energy window must satisfy 0 < E1 < E2");
  truncation_ = find_truncation(v1_, v2_, window_.hi);
  well_bottom_[0] = find_well_bottom(v1_, truncation_);
  well_bottom_[1] = find_well_bottom(v2_, truncation_);
}

double CrossingModel::crossing_slope_gap() const noexcept {
  return v1_.with_slope(0.0).slope - v2_.with_slope(0.0).slope;
}

CrossingModel CrossingModel::with_coupling(CouplingSpec coupling) const {
  return CrossingModel(v1_, v2_, std::move(coupling), window_, symmetric_);
}

namespace {

// (1/h) int_{x0}^{x} sqrt(V(t) - E) dt outward from the last point where the
// profile dips below E (direction +1: right side, -1: left side).
double outer_decay(const PotentialSpec& v, double e, double h, double x, int direction) {
  const int n = 4000;
  const double dx = x / n;
  double sum = 0.0;
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double gap = v(direction * i * dx) - e;
    if (gap <= 0.0) {
      sum = 0.0;
      prev = 0.0;
      continue;
    }
    const double cur = std::sqrt(gap);
    sum += 0.5 * (prev + cur) * dx;
    prev = cur;
  }
  return sum / h;
}

}  // namespace

double solver_half_width(const CrossingModel& m, double h, double e_max, double decay) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "h must be positive");
  for (double x = m.truncation_half_width(); x <= CrossingModel::kMaxHalfWidth; x += 0.5) {
    bool ok = true;
    for (Channel j : {Channel::k1, Channel::k2})
      for (int dir : {-1, 1}) ok = ok && outer_decay(m.potential(j), e_max, h, x, dir) >= decay;
    if (ok) return x;
  }
  throw Error(ErrorCode::kTruncationTooSmall, "no half-width up to 1000 gives enough decay");
}

CrossingModel reference_model(double r0, double r1) {
  const auto v1 = PotentialSpec::shifted_harmonic(-1.0, 1.0, -1.0);
  return CrossingModel(v1, PotentialSpec::mirror(v1),
                       CouplingSpec{PotentialSpec::constant(r0), PotentialSpec::constant(r1)},
                       EnergyWindow{0.5, 1.5}, true);
}

// ---------------------------------------------------------------------------
// Validation

ScanRange default_scan(const CrossingModel& m) {
  const double x = m.truncation_half_width();
  return {-x, x, 1e-3};
}

namespace {

struct WellScan {
  bool ok = false;
  std::string detail;
  double alpha = 0.0;
  double beta = 0.0;
  double slope_alpha = 0.0;
  double slope_beta = 0.0;
};

double refine(const PotentialSpec& v, double e, double a, double b) {
  boost::uintmax_t iters = 200;
  auto f = [&](double x) { return v(x) - e; };
  const double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                             boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

WellScan scan_well(const PotentialSpec& v, double e, const ScanRange& scan) {
  WellScan out;
  const auto n = static_cast<long>(std::floor((scan.hi - scan.lo) / scan.step));
  std::vector<double> xs(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) xs[static_cast<std::size_t>(i)] = scan.lo + i * scan.step;
  std::vector<bool> below(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) below[i] = v(xs[i]) - e < 0.0;
  if (below.front() || below.back()) {
    out.detail = "scan range does not cover the classically allowed region";
    return out;
  }
  std::vector<std::size_t> changes;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if (below[i] != below[i + 1]) changes.push_back(i);
  if (changes.size() != 2) {
    out.detail = "expected exactly one sign change of V - E on each side of the well, found " +
                 std::to_string(changes.size());
    return out;
  }
  if (changes[1] - changes[0] < 2) {
    out.detail = std::string(to_string(ErrorCode::kScanTooCoarse)) +
                 ": sign changes closer than two scan steps";
    return out;
  }
  out.alpha = refine(v, e, xs[changes[0]], xs[changes[0] + 1]);
  out.beta = refine(v, e, xs[changes[1]], xs[changes[1] + 1]);
  out.slope_alpha = v.with_slope(out.alpha).slope;
  out.slope_beta = v.with_slope(out.beta).slope;
  out.ok = true;
  return out;
}

}  // namespace

ValidationReport validate_model(const CrossingModel& m, int energy_samples, ScanRange scan) {
  if (energy_samples < 2) throw Error(ErrorCode::kInvalidArgument, "E_samples must be >= 2");
  if (!(scan.step > 0.0) || !(scan.hi > scan.lo))
    throw Error(ErrorCode::kInvalidArgument, "invalid scan range");

  ValidationReport report;
  const auto [e1, e2] = m.window();

  ValidationCheck wells{"wells", true, "", {}};
  ValidationCheck turning{"turning_point_slopes", true, "", {}};
  ValidationCheck ordering{"turning_point_ordering", true, "", {}};
  double region_lo = 0.0;
  double region_hi = 0.0;
  for (int k = 0; k < energy_samples; ++k) {
    const double e = e1 + (e2 - e1) * (k + 1) / (energy_samples + 1);
    const WellScan w1 = scan_well(m.v1(), e, scan);
    const WellScan w2 = scan_well(m.v2(), e, scan);
    for (const auto* w : {&w1, &w2}) {
      if (!w->ok && wells.passed) {
        wells.passed = false;
        wells.detail = "E = " + std::to_string(e) + " channel " +
                       std::to_string(w == &w1 ? 1 : 2) + ": " + w->detail;
      }
    }
    if (!w1.ok || !w2.ok) continue;
    for (const auto* w : {&w1, &w2}) {
      if (!(w->slope_alpha < 0.0 && w->slope_beta > 0.0) && turning.passed) {
        turning.passed = false;
        turning.detail = "degenerate turning point at E = " + std::to_string(e);
      }
    }
    if (!(w1.alpha < w2.alpha && w2.alpha < 0.0 && 0.0 < w1.beta && w1.beta < w2.beta) &&
        ordering.passed) {
      ordering.passed = false;
      ordering.detail = "alpha1 < alpha2 < 0 < beta1 < beta2 violated at E = " + std::to_string(e);
      ordering.values = {{"E", e}, {"alpha1", w1.alpha}, {"alpha2", w2.alpha},
                         {"beta1", w1.beta}, {"beta2", w2.beta}};
    }
    region_lo = std::min(region_lo, w1.alpha);
    region_hi = std::max(region_hi, w2.beta);
  }
  wells.values = {{"energy_samples", energy_samples}, {"scan_step", scan.step}};
  report.checks.push_back(wells);
  report.checks.push_back(turning);
  report.checks.push_back(ordering);

  const auto s1 = m.v1().with_slope(0.0);
  const auto s2 = m.v2().with_slope(0.0);
  ValidationCheck crossing_value{"crossing_value", std::fabs(s1.value) <= 1e-12 &&
                                                      std::fabs(s2.value) <= 1e-12,
                                 "|V1(0)|, |V2(0)| <= 1e-12",
                                 {{"V1(0)", s1.value}, {"V2(0)", s2.value}}};
  report.checks.push_back(crossing_value);
  ValidationCheck crossing_slope{"crossing_slope", s1.slope > 0.0 && s2.slope < 0.0,
                                 "V1'(0) > 0 and V2'(0) < 0",
                                 {{"V1'(0)", s1.slope}, {"V2'(0)", s2.slope}}};
  report.checks.push_back(crossing_slope);

  // {V1 = V2 < E2} must reduce to {0}; checked on the scan grid only.
  {
    int flips = 0;
    int last_sign = 0;
    double flip_at = 0.0;
    double last_x = scan.lo;
    for (double x = scan.lo; x <= scan.hi; x += scan.step) {
      const double a = m.v1()(x);
      const double b = m.v2()(x);
      if (std::min(a, b) >= e2) {
        last_sign = 0;
        continue;
      }
      const double g = a - b;
      const int sg = (g > 0.0) - (g < 0.0);
      if (sg == 0) continue;
      if (last_sign != 0 && sg != last_sign) {
        ++flips;
        flip_at = 0.5 * (x + last_x);
      }
      last_sign = sg;
      last_x = x;
    }
    const bool ok = flips == 1 && std::fabs(flip_at) <= 2.0 * scan.step;
    report.checks.push_back({"single_crossing", ok,
                             "V1 - V2 changes sign once below E2, at the origin (grid resolution " +
                                 std::to_string(scan.step) + ")",
                             {{"sign_changes", flips}, {"location", flip_at}}});
  }

  const double r00 = m.r0()(0.0);
  const double r10 = m.r1()(0.0);
  report.checks.push_back({"ellipticity", std::fabs(r00) + std::fabs(r10) > 1e-12,
                           "(r0(0), r1(0)) != (0, 0)", {{"r0(0)", r00}, {"r1(0)", r10}}});

  if (m.symmetric()) {
    double worst = 0.0;
    for (double x = region_lo; x <= region_hi; x += scan.step)
      worst = std::max(worst, std::fabs(m.v1()(x) - m.v2()(-x)));
    report.checks.push_back({"symmetry", worst <= 1e-12,
                             "|V1(x) - V2(-x)| <= 1e-12 on the classically allowed region",
                             {{"max_deviation", worst}}});
  }

  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const ValidationCheck& c) { return c.passed; });
  return report;
}

}  // namespace crossplit
