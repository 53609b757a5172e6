// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crossplit/actions.hpp"
#include "crossplit/errors.hpp"
#include "crossplit/grid_eig.hpp"
#include "crossplit/harness.hpp"
#include "crossplit/io.hpp"
#include "crossplit/monodromy.hpp"
#include "crossplit/predict.hpp"
#include "crossplit/shooting.hpp"

using namespace crossplit;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates a verdict and a short human-readable explanation.
struct Verdict {
  bool pass = true;
  std::ostringstream os;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      os << "[fail] " << what << "; ";
    }
  }
  void note(const std::string& s) { os << s << "; "; }
  Outcome done() { return {pass, os.str()}; }
};

std::string fmt(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<double> kSweepH{0.04, 0.028, 0.02, 0.014, 0.01};
constexpr double kSweepE0 = 1.0;
// Largest C0 for which no h of the sweep is excluded by an edge root.
constexpr double kSweepC0 = 4.0;

double h32(double h) { return h * std::sqrt(h); }

// ---------------------------------------------------------------------------

Outcome closed_form_actions() {
  Verdict v;
  const CrossingModel m = reference_model();
  double worst_a = 0.0, worst_ap = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double e = 0.525 + 0.05 * k;
    worst_a = std::max(worst_a, std::abs(action(m, Channel::k1, e) - pi * (e + 1.0) / 2.0));
    worst_ap = std::max(worst_ap, std::abs(action_derivative(m, Channel::k1, e) - pi / 2.0));
  }
  v.require(worst_a <= 1e-10, "action error " + fmt(worst_a) + " > 1e-10");
  v.require(worst_ap <= 1e-8, "derivative error " + fmt(worst_ap) + " > 1e-8");
  v.note("20 energies, max |A1 - pi(E+1)/2| = " + fmt(worst_a) + ", max |A1' - pi/2| = " + fmt(worst_ap));
  return v.done();
}

struct UncoupledWindow {
  double h, lo, hi;
};
const UncoupledWindow kUncoupledWindows[] = {{0.1, 0.85, 1.15}, {0.05, 0.875, 1.125}};

Outcome uncoupled_exactness() {
  Verdict v;
  const CrossingModel free = reference_model().with_coupling({});
  for (const auto& w : kUncoupledWindows) {
    std::vector<double> exact;
    for (const auto& r : bohr_sommerfeld_roots_in(free, w.lo, w.hi, w.h))
      for (int k = 0; k < r.multiplicity; ++k) exact.push_back(r.energy);
    // Independent check of the roots themselves: (2k+1)h - 1.
    for (double e : exact) {
      const double k = std::round((e + 1.0 - w.h) / (2.0 * w.h));
      v.require(std::abs(e - ((2.0 * k + 1.0) * w.h - 1.0)) <= 1e-12, "root off the harmonic ladder");
    }
    const auto coarse = eigen_window(assemble(free, w.h, Grid{5.0, 4000}), w.lo, w.hi);
    const auto fine = eigen_window(assemble(free, w.h, Grid{5.0, 8001}), w.lo, w.hi);
    v.require(coarse.size() == exact.size() && fine.size() == exact.size(),
              "h=" + fmt(w.h) + ": grid count " + std::to_string(coarse.size()) + " vs " +
                  std::to_string(exact.size()));
    if (coarse.size() != exact.size() || fine.size() != exact.size()) continue;
    double worst = 0.0, rmin = 1e300, rmax = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
      const double e1 = std::abs(coarse[i] - exact[i]), e2 = std::abs(fine[i] - exact[i]);
      worst = std::max(worst, e1);
      rmin = std::min(rmin, e1 / e2);
      rmax = std::max(rmax, e1 / e2);
    }
    v.require(worst <= 5e-4, "h=" + fmt(w.h) + ": grid error " + fmt(worst) + " > 5e-4");
    v.require(rmin >= 3.5 && rmax <= 4.5,
              "h=" + fmt(w.h) + ": convergence ratio outside [3.5, 4.5]: " + fmt(rmin) + ".." + fmt(rmax));

    const auto sh = shooting_roots_in(free, w.lo, w.hi, w.h);
    v.require(sh.size() == exact.size(), "h=" + fmt(w.h) + ": shooting count " + std::to_string(sh.size()));
    double sworst = 0.0;
    for (std::size_t i = 0; i < std::min(sh.size(), exact.size()); ++i)
      sworst = std::max(sworst, std::abs(sh[i].energy - exact[i]));
    v.require(sworst <= 1e-8, "h=" + fmt(w.h) + ": shooting error " + fmt(sworst) + " > 1e-8");
    v.note("h=" + fmt(w.h) + ": " + std::to_string(exact.size()) + " eigenvalues, grid err " + fmt(worst) +
           ", ratio " + fmt(rmin, 5) + ".." + fmt(rmax, 5) + ", shooting err " + fmt(sworst));
  }
  return v.done();
}

Outcome cross_oracle(const CrossingModel& m) {
  Verdict v;
  for (double h : {0.1, 0.05, 0.02}) {
    const auto w = semiclassical_window(m, kSweepE0, kSweepC0, h);
    ShootingOptions so;
    so.estimate_errors = true;
    const auto sh = shooting_roots(m, kSweepE0, kSweepC0, h, so);
    const double target = h32(h) / 100.0;
    const auto grid = converged_window(m, h, w.lo, w.hi, target);
    v.require(grid.converged, "h=" + fmt(h) + ": grid did not converge");
    const auto cmp = compare_oracles(sh, grid);
    v.require(cmp.agree, "h=" + fmt(h) + ": " + cmp.detail);
    double worst_tol = 0.0;
    for (const auto& s : sh) worst_tol = std::max(worst_tol, s.error_estimate);
    for (double e : grid.error_estimate) worst_tol = std::max(worst_tol, e);
    v.require(worst_tol <= target, "h=" + fmt(h) + ": reported tolerance " + fmt(worst_tol) + " > h^1.5/100");
    v.note("h=" + fmt(h) + ": " + std::to_string(sh.size()) + " roots, max diff " + fmt(cmp.max_difference) +
           " <= tol " + fmt(cmp.max_tolerance) + " (h^1.5/100 = " + fmt(target) + ")");
  }
  return v.done();
}

SweepResult sweep(const CrossingModel& m) {
  SweepConfig cfg;
  cfg.model_json = model_to_json(m);
  cfg.e0 = kSweepE0;
  cfg.c0 = kSweepC0;
  cfg.h_values = kSweepH;
  cfg.filter_d = 0.2;
  // max h / min h of this sweep is exactly 4.
  cfg.fit.min_h_span = 4.0;
  return run_sweep(cfg);
}

Outcome bijection(const SweepResult& r) {
  Verdict v;
  v.require(!r.flagged, "sweep flagged (oracle disagreement or per-h failure)");
  double lo = 1e300, hi = 0.0;
  std::ostringstream per;
  for (const auto& p : r.points) {
    if (p.exclusion.excluded) {
      per << "h=" << fmt(p.h) << " excluded ";
      continue;
    }
    v.require(!p.match.failed, "h=" + fmt(p.h) + ": count mismatch " + std::to_string(p.match.numerical_count) +
                                   " vs " + std::to_string(p.match.predicted_count));
    if (p.match.failed) continue;
    const double q = p.match.max_distance / h32(p.h);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
    per << "h=" << fmt(p.h) << ":" << fmt(q, 3) << " ";
  }
  v.require(hi > 0.0 && hi / lo <= 3.0, "largest/smallest " + fmt(hi / lo) + " > 3");
  v.note("max dist / h^1.5 per h: " + per.str() + "; largest/smallest = " + fmt(hi / lo));
  return v.done();
}

Outcome exponent(const SweepResult& r, double sweep_seconds) {
  Verdict v;
  if (!r.fit) {
    v.require(false, "no fit: " + r.fit_error);
    return v.done();
  }
  const auto& f = *r.fit;
  v.require(f.slope >= 1.4 && f.slope <= 1.6, "slope " + fmt(f.slope, 5) + " outside [1.4, 1.6]");
  v.require(sweep_seconds < 1800.0, "sweep took " + fmt(sweep_seconds) + " s");
  v.note("slope " + fmt(f.slope, 5) + " over " + std::to_string(f.points) + " filtered gaps (rms " +
         fmt(f.residual, 3) + "); with the sqrt(D)/A' prefactor divided out the slope is " +
         fmt(f.corrected_slope, 5) + "; sweep " + fmt(sweep_seconds, 3) + " s");
  return v.done();
}

Outcome prefactor(const SweepResult& r) {
  Verdict v;
  std::map<double, double, std::greater<>> dev;  // h (decreasing) -> max |ratio - 1|
  double rmin = 1e300, rmax = 0.0;
  std::size_t used = 0;
  for (const auto& p : r.points) {
    if (p.exclusion.excluded) continue;
    for (const auto& s : p.splits) {
      v.require(s.error.empty(), "h=" + fmt(p.h) + " center " + fmt(s.center, 6) + ": " + s.error);
      if (!s.ratio) continue;
      dev[p.h] = std::max(dev[p.h], std::abs(*s.ratio - 1.0));
      if (p.h <= 0.02 + 1e-15) {
        ++used;
        rmin = std::min(rmin, *s.ratio);
        rmax = std::max(rmax, *s.ratio);
      }
    }
  }
  v.require(used > 0, "no filtered centers with h <= 0.02");
  v.require(rmin >= 0.8 && rmax <= 1.2, "ratios " + fmt(rmin) + ".." + fmt(rmax) + " outside [0.8, 1.2]");

  // The remainder is O(h^{1/4}) relative, so |ratio - 1| should shrink as h
  // decreases; count the steps where it grows instead.
  std::vector<double> seq;
  std::ostringstream per;
  for (const auto& [h, d] : dev) {
    seq.push_back(d);
    per << "h=" << fmt(h) << ":" << fmt(d, 3) << " ";
  }
  int growth = 0, shrink = 0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (seq[i] > seq[i - 1]) ++growth;
    if (seq[i] < seq[i - 1]) ++shrink;
  }
  v.require(growth <= 1, std::to_string(growth) + " steps where |ratio-1| grows as h decreases (1 allowed)");
  v.note(std::to_string(used) + " ratios at h<=0.02 in " + fmt(rmin, 5) + ".." + fmt(rmax, 5) +
         "; max |ratio-1| by decreasing h: " + per.str() + "; steps growing/shrinking as h decreases: " +
         std::to_string(growth) + "/" + std::to_string(shrink));
  return v.done();
}

Outcome degenerate_coupling() {
  Verdict v;
  const CrossingModel free = reference_model().with_coupling({});
  for (double h : {0.1, 0.05, 0.02}) {
    const auto bs = bohr_sommerfeld_roots(free, kSweepE0, kSweepC0, h);
    std::vector<double> distinct, expanded;
    for (const auto& b : bs) {
      distinct.push_back(b.energy);
      for (int k = 0; k < b.multiplicity; ++k) expanded.push_back(b.energy);
    }
    const auto mono = monodromy_roots(free, kSweepE0, kSweepC0, h);
    const auto sh = shooting_roots(free, kSweepE0, kSweepC0, h);
    v.require(mono.size() == distinct.size(), "h=" + fmt(h) + ": monodromy count " + std::to_string(mono.size()));
    v.require(sh.size() == expanded.size(), "h=" + fmt(h) + ": shooting count " + std::to_string(sh.size()));
    double dm = 0.0, ds = 0.0, gap = 0.0;
    for (std::size_t i = 0; i < std::min(mono.size(), distinct.size()); ++i)
      dm = std::max(dm, std::abs(mono[i] - distinct[i]));
    for (std::size_t i = 0; i < std::min(sh.size(), expanded.size()); ++i)
      ds = std::max(ds, std::abs(sh[i].energy - expanded[i]));
    for (std::size_t i = 0; i + 1 < sh.size(); i += 2) gap = std::max(gap, sh[i + 1].energy - sh[i].energy);
    v.require(dm <= 1e-8 && ds <= 1e-8, "h=" + fmt(h) + ": mismatch " + fmt(dm) + " / " + fmt(ds));
    v.require(gap <= 1e-8, "h=" + fmt(h) + ": shooting gap " + fmt(gap) + " above the solver tolerance");

    // Grid pairs also collapse to within their own error estimates.
    const auto w = semiclassical_window(free, kSweepE0, kSweepC0, h);
    const auto g = converged_window(free, h, w.lo, w.hi, h32(h) / 100.0);
    const auto recs = measure_splittings(free, g.eigenvalues, bs, h);
    double ggap = 0.0, gtol = 0.0;
    for (const auto& rec : recs) ggap = std::max(ggap, rec.measured_gap);
    for (double e : g.error_estimate) gtol = std::max(gtol, e);
    v.require(g.converged && ggap <= 2.0 * gtol, "h=" + fmt(h) + ": grid gap " + fmt(ggap) + " > tolerance");
    v.note("h=" + fmt(h) + ": monodromy " + fmt(dm) + ", shooting " + fmt(ds) + ", gaps " + fmt(gap) + " / " +
           fmt(ggap) + " (grid tol " + fmt(gtol) + ")");
  }
  return v.done();
}

Outcome identities() {
  Verdict v;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ur(-2.0, 2.0), ue(0.5, 1.5), uh(0.004, 0.2);
  double dual = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto f = splitting_amplitude_forms(reference_model(ur(rng), ur(rng)), ue(rng), uh(rng));
    dual = std::max(dual, std::abs(f.closed_form - f.tau_form));
  }
  v.require(dual <= 1e-12, "dual form mismatch " + fmt(dual));

  std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.1, 3.0);
  double kprod = 0.0;
  int tested = 0;
  while (tested < 1000) {
    CrossingData c;
    const double s = u(rng) < 0.0 ? -1.0 : 1.0;
    c.beta = s * pos(rng);
    c.delta = s * pos(rng);
    c.alpha = u(rng);
    c.gamma = u(rng);
    c.dbrace = c.beta * c.gamma - c.alpha * c.delta;
    c.r = cplx(u(rng), u(rng));
    if (!(c.dbrace > 1e-3) || std::abs(c.r) < 1e-3) continue;
    const auto k = kappa_leading(c);
    const double expect = 2.0 * pi * std::norm(c.r) / c.dbrace;
    kprod = std::max(kprod, std::abs(k[1] * k[2] - expect) / std::max(1.0, expect));
    ++tested;
  }
  v.require(kprod <= 1e-12, "kappa product mismatch " + fmt(kprod));

  double ktau = 0.0;
  for (double r1 : {0.0, 0.3, 0.7, 1.0}) {
    const CrossingModel m = reference_model(1.0 - r1, r1);
    for (int i = 0; i < 20; ++i) {
      const double e = 0.525 + 0.05 * i;
      const auto k = kappa_leading(schrodinger_crossing_data(m, e, -1));
      ktau = std::max(ktau, std::abs(std::abs(k[1]) - std::abs(tau0(m, e))));
    }
  }
  v.require(ktau <= 1e-12, "|kappa12| vs |tau0| mismatch " + fmt(ktau));
  v.note("dual form " + fmt(dual) + " (1000 cases), kappa product " + fmt(kprod) +
         " relative (1000 cases), |kappa12|-|tau0| " + fmt(ktau) + " (80 cases)");
  return v.done();
}

Outcome zero_structure() {
  Verdict v;
  for (double r0 : {0.0, 1.0}) {
    const CrossingModel m = reference_model(r0, 0.0);
    for (const auto& w : kUncoupledWindows) {
      // Zeros of cos(A1/h) cos(A2/h), counted from the actions directly.
      std::size_t zeros = 0;
      for (Channel j : {Channel::k1, Channel::k2}) {
        const double a = action(m, j, w.lo) / (pi * w.h) - 0.5;
        const double b = action(m, j, w.hi) / (pi * w.h) - 0.5;
        zeros += static_cast<std::size_t>(std::floor(b) - std::floor(a));
      }
      const auto sh = shooting_roots_in(m, w.lo, w.hi, w.h);
      v.require(sh.size() == zeros, "r0=" + fmt(r0) + " h=" + fmt(w.h) + ": " + std::to_string(sh.size()) +
                                        " Wronskian zeros vs " + std::to_string(zeros));
      const auto bs = bohr_sommerfeld_roots_in(m, w.lo, w.hi, w.h);
      const double x = solver_half_width(m, w.h, w.hi);
      double low = 1e300;
      for (std::size_t i = 1; i < bs.size(); ++i)
        low = std::min(low, std::abs(wronskian(m, 0.5 * (bs[i - 1].energy + bs[i].energy), w.h, x).value));
      v.require(bs.size() < 2 || low >= 1e-3, "midpoint |W| = " + fmt(low) + " < 1e-3");
      v.note("r0=" + fmt(r0) + " h=" + fmt(w.h) + ": " + std::to_string(zeros) + " zeros, min midpoint |W| " +
             fmt(low));
    }
  }
  return v.done();
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const std::string& title, const std::function<Outcome()>& run,
                    double limit_seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = seconds_since(t0);
    if (limit_seconds > 0.0 && dt >= limit_seconds) {
      o.pass = false;
      o.detail += "[fail] runtime " + fmt(dt) + " s over the " + fmt(limit_seconds) + " s budget; ";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s -- %s(%.2f s)\n", o.pass ? "PASS" : "FAIL", n, title.c_str(),
                o.detail.c_str(), dt);
    std::fflush(stdout);
  };

  report(1, "closed-form actions", closed_form_actions, 1.0);
  report(2, "uncoupled exactness", uncoupled_exactness, 120.0);
  report(3, "cross-oracle agreement (r0=1)", [] { return cross_oracle(reference_model(1.0, 0.0)); }, 600.0);

  auto t0 = std::chrono::steady_clock::now();
  SweepResult s0;
  try {
    s0 = sweep(reference_model(1.0, 0.0));
  } catch (const std::exception& e) {
    s0.fit_error = e.what();
    s0.flagged = true;
  }
  const double sweep0 = seconds_since(t0);
  report(4, "Bohr-Sommerfeld bijection (r0=1)", [&] { return bijection(s0); }, 0.0);
  report(5, "splitting exponent (r0=1)", [&] { return exponent(s0, sweep0); }, 0.0);
  report(6, "splitting prefactor (r0=1)", [&] { return prefactor(s0); }, 0.0);
  report(7, "degenerate-coupling consistency", degenerate_coupling, 0.0);
  report(8, "microlocal identities", identities, 0.0);
  report(9, "quantization-zero structure", zero_structure, 0.0);

  report(10, "second coupling regime r0=0, r1=1 (criteria 3-6)", [] {
    const CrossingModel m = reference_model(0.0, 1.0);
    Verdict v;
    const auto c3 = cross_oracle(m);
    const auto ts = std::chrono::steady_clock::now();
    const auto s = sweep(m);
    const double st = seconds_since(ts);
    const auto c4 = bijection(s);
    const auto c5 = exponent(s, st);
    const auto c6 = prefactor(s);
    const std::pair<const char*, const Outcome*> parts[] = {{"3", &c3}, {"4", &c4}, {"5", &c5}, {"6", &c6}};
    for (const auto& [n, o] : parts) {
      v.require(o->pass, std::string("criterion ") + n + " fails");
      v.note(std::string("<") + n + (o->pass ? " pass" : " FAIL") + "> " + o->detail);
    }
    return v.done();
  }, 0.0);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
