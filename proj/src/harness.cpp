#include "crossplit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "crossplit/actions.hpp"
#include "crossplit/errors.hpp"
#include "crossplit/parallel.hpp"

namespace crossplit {
namespace {

std::vector<double> expand(const std::vector<BsRoot>& uh) {
  std::vector<double> out;
  for (const auto& r : uh)
    for (int k = 0; k < r.multiplicity; ++k) out.push_back(r.energy);
  std::sort(out.begin(), out.end());
  return out;
}

double h32(double h) { return h * std::sqrt(h); }

struct LineFit {
  double slope, intercept, rms;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f{sxy / sxx, 0.0, 0.0};
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

Json opt_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

MatchReport match_spectra(std::vector<double> numerical, const std::vector<BsRoot>& uh, double h) {
  MatchReport r;
  r.h = h;
  std::sort(numerical.begin(), numerical.end());
  const auto predicted = expand(uh);
  r.numerical_count = numerical.size();
  r.predicted_count = predicted.size();
  if (numerical.size() != predicted.size()) {
    r.failed = true;
    // Name the surplus entries of the longer list: those farthest from every
    // entry of the shorter one.
    const auto& longer = numerical.size() > predicted.size() ? numerical : predicted;
    const auto& shorter = numerical.size() > predicted.size() ? predicted : numerical;
    std::vector<std::pair<double, double>> far;
    for (double e : longer) {
      double d = std::numeric_limits<double>::infinity();
      for (double f : shorter) d = std::min(d, std::abs(e - f));
      far.emplace_back(d, e);
    }
    std::stable_sort(far.begin(), far.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; k < longer.size() - shorter.size(); ++k) r.unmatched.push_back(far[k].second);
    std::sort(r.unmatched.begin(), r.unmatched.end());
    return r;
  }
  for (std::size_t i = 0; i < numerical.size(); ++i) {
    const double d = std::abs(numerical[i] - predicted[i]);
    r.pairs.push_back({numerical[i], predicted[i], d});
    r.max_distance = std::max(r.max_distance, d);
  }
  return r;
}

double capture_radius(double h) { return 10.0 * h32(h) + 10.0 * h * h; }

std::vector<SplitRecord> measure_splittings(const CrossingModel& m, std::vector<double> numerical,
                                            const std::vector<BsRoot>& uh, double h,
                                            double filter_d) {
  std::sort(numerical.begin(), numerical.end());
  const double radius = capture_radius(h);
  std::vector<SplitRecord> out;
  for (const auto& root : uh) {
    SplitRecord rec;
    rec.h = h;
    rec.center = root.energy;
    if (root.multiplicity != 2) {
      rec.error = std::string(to_string(ErrorCode::kPairNotFound)) + ": root is not a double root";
      out.push_back(rec);
      continue;
    }
    const auto pred = predict_pair(m, root.energy, h);
    rec.d_value = pred.d_value;
    rec.a_prime = pred.a_prime;
    rec.predicted_gap = pred.width;
    std::vector<std::pair<double, double>> near;
    for (double e : numerical) {
      const double d = std::abs(e - root.energy);
      if (d <= radius) near.emplace_back(d, e);
    }
    std::stable_sort(near.begin(), near.end());
    if (near.size() < 2) {
      rec.error = std::string(to_string(ErrorCode::kPairNotFound)) + ": fewer than two eigenvalues in range";
      out.push_back(rec);
      continue;
    }
    rec.measured_gap = std::abs(near[1].second - near[0].second);
    const double threshold = filter_d * splitting_amplitude_bound(m, root.energy);
    if (threshold > 0.0 && rec.d_value >= threshold && rec.predicted_gap > 0.0)
      rec.ratio = rec.measured_gap / rec.predicted_gap;
    out.push_back(rec);
  }
  return out;
}

FitResult fit_scaling(const std::vector<SplitRecord>& records, const FitOptions& opt,
                      double filter_d) {
  std::vector<double> lx, ly, lc;
  double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
  for (const auto& r : records) {
    if (!r.ratio || r.excluded || !(r.measured_gap > 0.0)) continue;
    lx.push_back(std::log(r.h));
    ly.push_back(std::log(r.measured_gap));
    lc.push_back(std::log(r.measured_gap / (2.0 * std::sqrt(r.d_value) / r.a_prime)));
    hmin = std::min(hmin, r.h);
    hmax = std::max(hmax, r.h);
  }
  if (lx.size() < opt.min_points)
    throw Error(ErrorCode::kInsufficientData, "need at least " + std::to_string(opt.min_points) +
                                                  " filtered records, have " +
                                                  std::to_string(lx.size()));
  if (!(hmax / hmin >= opt.min_h_span * (1.0 - 1e-12)))
    throw Error(ErrorCode::kInsufficientData, "filtered records span too small a range of h");
  const auto f = least_squares(lx, ly);
  const auto c = least_squares(lx, lc);
  FitResult r;
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.residual = f.rms;
  r.corrected_slope = c.slope;
  r.corrected_intercept = c.intercept;
  r.points = lx.size();
  r.filter_d = filter_d;
  return r;
}

ExclusionCheck exclusion(const CrossingModel& m, double lo, double hi, double h) {
  const auto i0 = m.window();
  const double pad = 10.0 * h32(h);
  const double plo = std::max(lo - pad, 0.5 * (i0.lo + lo));
  const double phi = std::min(hi + pad, 0.5 * (i0.hi + hi));
  const auto roots = bohr_sommerfeld_roots_in(m, plo, phi, h);
  ExclusionCheck ex;
  std::ostringstream why;
  for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
    const auto& a = roots[i];
    const auto& b = roots[i + 1];
    if (a.multiplicity == 1 && b.multiplicity == 1 && a.channel != b.channel &&
        b.energy - a.energy < 10.0 * h32(h)) {
      ex.excluded = true;
      why << "roots " << a.energy << " and " << b.energy << " of different wells are closer than 10 h^1.5; ";
    }
  }
  for (const auto& r : roots) {
    const double half = std::sqrt(splitting_amplitude_bound(m, r.energy)) /
                            action_derivative(m, r.channel, r.energy) * h32(h) +
                        std::pow(h, 1.75);
    if (std::abs(r.energy - lo) < half || std::abs(r.energy - hi) < half) {
      ex.excluded = true;
      why << "root " << r.energy << " lies within " << half << " of a window edge; ";
    }
  }
  ex.reason = why.str();
  return ex;
}

SweepConfig sweep_config_from_json(const Json& j) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (!j.is_object()) bad("sweep config must be an object");
  SweepConfig c;
  if (!j.contains("model")) bad("sweep config needs 'model'");
  c.model_json = j.at("model");
  c.e0 = j.value("e0", 1.0);
  c.c0 = j.value("c0", 1.0);
  if (!j.contains("h_values") || !j.at("h_values").is_array() || j.at("h_values").empty())
    bad("sweep config needs a non-empty 'h_values' array");
  for (const auto& v : j.at("h_values")) {
    if (!v.is_number() || !(v.get<double>() > 0.0)) bad("h_values must be positive numbers");
    c.h_values.push_back(v.get<double>());
  }
  c.filter_d = j.value("filter_d", 0.2);
  c.out_dir = j.value("out_dir", std::string());
  c.run_shooting = j.value("shooting", true);
  c.grid_target_factor = j.value("grid_target_factor", 0.01);
  c.n_cap = j.value("n_cap", static_cast<std::int64_t>(64000));
  c.fit.min_points = j.value("fit_min_points", static_cast<std::size_t>(4));
  c.fit.min_h_span = j.value("fit_min_h_span", 8.0);
  return c;
}

OracleComparison compare_oracles(const std::vector<ShootingRoot>& shooting,
                                 const EigenReport& grid) {
  OracleComparison c;
  if (shooting.size() != grid.eigenvalues.size()) {
    c.agree = false;
    c.detail = "shooting found " + std::to_string(shooting.size()) + " roots, grid " +
               std::to_string(grid.eigenvalues.size());
    return c;
  }
  for (std::size_t i = 0; i < shooting.size(); ++i) {
    const double d = std::abs(shooting[i].energy - grid.eigenvalues[i]);
    const double tol = shooting[i].error_estimate + grid.error_estimate[i];
    c.max_difference = std::max(c.max_difference, d);
    c.max_tolerance = std::max(c.max_tolerance, tol);
    if (!(d <= tol)) {
      c.agree = false;
      std::ostringstream os;
      os << "eigenvalue " << i << " differs by " << d << " > " << tol << "; ";
      c.detail += os.str();
    }
  }
  return c;
}

SweepResult run_sweep(const SweepConfig& cfg) {
  const CrossingModel m = model_from_json(cfg.model_json);
  std::vector<double> hs = cfg.h_values;
  std::sort(hs.begin(), hs.end(), std::greater<>());
  SweepResult res;
  res.points.resize(hs.size());
  const int outer = std::min<int>(resolve_workers(cfg.workers), static_cast<int>(hs.size()));
  const int inner = outer > 1 ? 1 : cfg.workers;
  parallel_for(hs.size(), outer, [&](std::size_t i) {
    SweepPoint& p = res.points[i];
    p.h = hs[i];
    const double h = p.h;
    try {
      const auto w = semiclassical_window(m, cfg.e0, cfg.c0, h);
      p.lo = w.lo;
      p.hi = w.hi;
      p.uh = bohr_sommerfeld_roots(m, cfg.e0, cfg.c0, h);
      if (m.symmetric()) p.predictions = predicted_pairs(m, cfg.e0, cfg.c0, h);
      p.exclusion = exclusion(m, w.lo, w.hi, h);
      GridOptions go;
      go.n_cap = cfg.n_cap;
      go.workers = inner;
      p.grid = converged_window(m, h, w.lo, w.hi, cfg.grid_target_factor * h32(h), go);
      if (!p.grid.converged)
        p.error = std::string(to_string(ErrorCode::kResolutionCapExceeded)) +
                  ": grid target not reached within the n cap";
      if (cfg.run_shooting) {
        ShootingOptions so;
        so.estimate_errors = true;
        so.workers = inner;
        p.shooting = shooting_roots(m, cfg.e0, cfg.c0, h, so);
        p.oracles = compare_oracles(p.shooting, p.grid);
      }
      p.match = match_spectra(p.grid.eigenvalues, p.uh, h);
      if (m.symmetric()) {
        p.splits = measure_splittings(m, p.grid.eigenvalues, p.uh, h, cfg.filter_d);
        for (auto& s : p.splits) s.excluded = p.exclusion.excluded;
      }
    } catch (const Error& e) {
      p.error = e.what();
    }
  });

  std::vector<SplitRecord> all;
  for (const auto& p : res.points) {
    if (!p.error.empty() || (p.oracles && !p.oracles->agree)) res.flagged = true;
    all.insert(all.end(), p.splits.begin(), p.splits.end());
  }
  if (m.symmetric()) {
    try {
      res.fit = fit_scaling(all, cfg.fit, cfg.filter_d);
    } catch (const Error& e) {
      res.fit_error = e.what();
    }
  }
  return res;
}

Json sweep_to_json(const SweepConfig& cfg, const SweepResult& r) {
  Json j;
  j["config"] = {{"model", cfg.model_json},
                 {"e0", cfg.e0},
                 {"c0", cfg.c0},
                 {"h_values", cfg.h_values},
                 {"filter_d", cfg.filter_d},
                 {"grid_target_factor", cfg.grid_target_factor},
                 {"n_cap", cfg.n_cap}};
  Json pts = Json::array();
  for (const auto& p : r.points) {
    Json q;
    q["h"] = p.h;
    q["window"] = {p.lo, p.hi};
    Json uh = Json::array();
    for (const auto& b : p.uh)
      uh.push_back({{"j", static_cast<int>(b.channel)}, {"k", b.k}, {"E", b.energy}, {"mult", b.multiplicity}});
    q["uh"] = uh;
    Json preds = Json::array();
    for (const auto& s : p.predictions)
      preds.push_back({{"center", s.center}, {"D", s.d_value}, {"width", s.width},
                       {"Eminus", s.e_minus}, {"Eplus", s.e_plus}});
    q["predictions"] = preds;
    q["grid"] = {{"eigenvalues", p.grid.eigenvalues},
                 {"error_estimate", p.grid.error_estimate},
                 {"levels", p.grid.levels},
                 {"n", p.grid.n},
                 {"x_half_width", p.grid.x_half_width},
                 {"converged", p.grid.converged}};
    Json sh = Json::array();
    for (const auto& s : p.shooting)
      sh.push_back({{"E", s.energy}, {"wronskian", s.wronskian}, {"error_estimate", s.error_estimate},
                    {"double_root", s.double_root}});
    q["shooting"] = sh;
    if (p.oracles)
      q["oracles"] = {{"agree", p.oracles->agree},
                      {"max_difference", p.oracles->max_difference},
                      {"max_tolerance", p.oracles->max_tolerance},
                      {"detail", p.oracles->detail}};
    Json pairs = Json::array();
    for (const auto& mp : p.match.pairs)
      pairs.push_back({{"numerical", mp.numerical}, {"predicted", mp.predicted}, {"distance", mp.distance}});
    q["match"] = {{"failed", p.match.failed},
                  {"numerical_count", p.match.numerical_count},
                  {"predicted_count", p.match.predicted_count},
                  {"max_distance", p.match.max_distance},
                  {"pairs", pairs},
                  {"unmatched", p.match.unmatched}};
    q["excluded"] = p.exclusion.excluded;
    q["exclusion_reason"] = p.exclusion.reason;
    Json sp = Json::array();
    for (const auto& s : p.splits)
      sp.push_back({{"center", s.center},
                    {"measured_gap", s.measured_gap},
                    {"predicted_gap", s.predicted_gap},
                    {"d_value", s.d_value},
                    {"ratio", opt_number(s.ratio)},
                    {"error", s.error}});
    q["splits"] = sp;
    q["error"] = p.error;
    pts.push_back(q);
  }
  j["points"] = pts;
  if (r.fit) {
    j["fit"] = {{"slope", r.fit->slope},
                {"intercept", r.fit->intercept},
                {"residual", r.fit->residual},
                {"corrected_slope", r.fit->corrected_slope},
                {"corrected_intercept", r.fit->corrected_intercept},
                {"points", r.fit->points},
                {"filter_d", r.fit->filter_d}};
  } else {
    j["fit"] = nullptr;
    j["fit_error"] = r.fit_error;
  }
  j["flagged"] = r.flagged;
  return j;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "h,center,measured_gap,predicted_gap,ratio,d_value,max_bijection_distance,excluded_flag,"
        "oracle_flag\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : r.points) {
    const int oracle_flag = (!p.error.empty() || (p.oracles && !p.oracles->agree)) ? 1 : 0;
    const double maxd = p.match.failed ? nan : p.match.max_distance;
    auto tail = [&] {
      return "," + csv_double(maxd) + "," + std::to_string(p.exclusion.excluded ? 1 : 0) + "," +
             std::to_string(oracle_flag) + "\n";
    };
    if (p.splits.empty()) {
      os << csv_double(p.h) << ",nan,nan,nan,nan,nan" << tail();
      continue;
    }
    for (const auto& s : p.splits) {
      os << csv_double(p.h) << ',' << csv_double(s.center) << ','
         << csv_double(s.error.empty() ? s.measured_gap : nan) << ',' << csv_double(s.predicted_gap)
         << ',' << csv_double(s.ratio.value_or(nan)) << ',' << csv_double(s.d_value) << tail();
    }
  }
  return os.str();
}

std::string plot_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "h,center,measured_gap,log_h,log_gap,fit_log_gap\n";
  for (const auto& p : r.points) {
    for (const auto& s : p.splits) {
      if (!s.ratio || s.excluded || !(s.measured_gap > 0.0)) continue;
      const double lh = std::log(s.h);
      const double fit = r.fit ? r.fit->intercept + r.fit->slope * lh
                               : std::numeric_limits<double>::quiet_NaN();
      os << csv_double(s.h) << ',' << csv_double(s.center) << ',' << csv_double(s.measured_gap)
         << ',' << csv_double(lh) << ',' << csv_double(std::log(s.measured_gap)) << ','
         << csv_double(fit) << '\n';
    }
  }
  return os.str();
}

void write_sweep(const SweepConfig& cfg, const SweepResult& r) {
  const std::filesystem::path dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
  std::filesystem::create_directories(dir);
  write_text_file((dir / "sweep.csv").string(), sweep_csv(r));
  write_text_file((dir / "sweep.json").string(), dump_json(sweep_to_json(cfg, r)) + "\n");
  write_text_file((dir / "plot_gap_vs_h.csv").string(), plot_csv(r));
}

}  // namespace crossplit
