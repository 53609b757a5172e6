#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "crossplit/actions.hpp"
#include "crossplit/errors.hpp"
#include "crossplit/grid_eig.hpp"
#include "crossplit/harness.hpp"
#include "crossplit/io.hpp"
#include "crossplit/monodromy.hpp"
#include "crossplit/parallel.hpp"
#include "crossplit/predict.hpp"
#include "crossplit/shooting.hpp"
#include "crossplit/simd/kernels.hpp"

namespace crossplit::cli {
namespace {

struct GlobalOptions {
  std::string model_path;
  std::string format = "json";
  bool verbose = false;
  int workers = 0;
};

// Thrown for bad flag combinations detected after parsing.
struct UsageError {
  std::string message;
};

bool is_config_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidModel:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kWindowOutsideI0:
    case ErrorCode::kNotSymmetric:
      return true;
    default:
      return false;
  }
}

Json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Json matrix_json(const Matrix2c& a) {
  return Json::array({Json::array({complex_json(a(0, 0)), complex_json(a(0, 1))}),
                      Json::array({complex_json(a(1, 0)), complex_json(a(1, 1))})});
}

// Minimal CSV for a JSON array of flat objects: header from the first row.
std::string table_csv(const Json& rows) {
  std::ostringstream os;
  if (!rows.is_array() || rows.empty()) return "";
  std::vector<std::string> keys;
  for (const auto& [k, v] : rows.front().items()) keys.push_back(k);
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i) os << ',';
      const auto& v = r.at(keys[i]);
      if (v.is_number_float()) os << csv_double(v.get<double>());
      else if (v.is_null()) os << "nan";
      else if (v.is_boolean()) os << (v.get<bool>() ? 1 : 0);
      else if (v.is_string()) os << v.get<std::string>();
      else os << v.dump();
    }
    os << '\n';
  }
  return os.str();
}

class Runner {
 public:
  Runner(const GlobalOptions& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

  CrossingModel model() const {
    if (g_.model_path.empty()) throw UsageError{"--model is required"};
    return load_model(g_.model_path);
  }

  // Prints `doc` as JSON, or `table` as CSV when --format csv.
  void emit(const Json& doc, const Json& table) const {
    if (g_.format == "csv") out_ << table_csv(table);
    else out_ << dump_json(doc) << '\n';
  }

  void note(const std::string& s) const {
    if (g_.verbose) err_ << s << '\n';
  }

  int validate(int samples) const {
    const CrossingModel m = model();
    const ValidationReport rep = validate_model(m, samples, default_scan(m));
    Json checks = Json::array();
    Json rows = Json::array();
    for (const auto& c : rep.checks) {
      Json values = Json::object();
      for (const auto& [k, v] : c.values) values[k] = v;
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"values", values}});
      rows.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    emit({{"passed", rep.passed}, {"checks", checks}}, rows);
    return rep.passed ? kOk : kComputationFailure;
  }

  int actions(double energy) const {
    const ActionSet a = action_set(model(), energy);
    Json j = {{"energy", a.energy}, {"a1", a.a1},   {"a2", a.a2},   {"a1p", a.a1p},
              {"a2p", a.a2p},       {"s1l", a.s1l}, {"s1r", a.s1r}, {"s2l", a.s2l},
              {"s2r", a.s2r}};
    j["b"] = a.b ? Json(*a.b) : Json(nullptr);
    j["alpha1"] = a.tp1.alpha;
    j["beta1"] = a.tp1.beta;
    j["alpha2"] = a.tp2.alpha;
    j["beta2"] = a.tp2.beta;
    emit(j, Json::array({j}));
    return kOk;
  }

  int predict(double e0, double c0, double h) const {
    const CrossingModel m = model();
    Json roots = Json::array();
    for (const auto& r : bohr_sommerfeld_roots(m, e0, c0, h))
      roots.push_back({{"j", static_cast<int>(r.channel)}, {"k", r.k}, {"E", r.energy}, {"mult", r.multiplicity}});
    Json pairs = Json::array();
    if (m.symmetric() && !m.coupling().is_zero()) {
      for (const auto& p : predicted_pairs(m, e0, c0, h))
        pairs.push_back({{"center", p.center}, {"D", p.d_value}, {"width", p.width},
                         {"Eminus", p.e_minus}, {"Eplus", p.e_plus}});
    }
    emit({{"roots", roots}, {"pairs", pairs}}, roots);
    return kOk;
  }

  int monodromy(double e0, double c0, double h) const {
    const CrossingModel m = model();
    Json roots = Json::array();
    Json rows = Json::array();
    for (double e : monodromy_roots(m, e0, c0, h, g_.workers)) {
      const TransferData t = lambda_matrix(m, e, h);
      const cplx det = monodromy_determinant(m, e, h);
      roots.push_back({{"E", e}, {"det", complex_json(det)}, {"lambda", matrix_json(t.lambda)}});
      rows.push_back({{"E", e}, {"abs_det", std::abs(det)}});
    }
    emit({{"roots", roots}}, rows);
    return kOk;
  }

  int shoot(double e0, double c0, double h, double x, double x_match, bool errors) const {
    const CrossingModel m = model();
    ShootingOptions opt;
    opt.half_width = x;
    opt.x_match = x_match;
    opt.estimate_errors = errors;
    opt.workers = g_.workers;
    Json roots = Json::array();
    for (const auto& r : shooting_roots(m, e0, c0, h, opt))
      roots.push_back({{"E", r.energy}, {"wronskian", r.wronskian},
                       {"error_estimate", r.error_estimate}, {"double_root", r.double_root}});
    emit(roots, roots);
    return kOk;
  }

  int grid(double h, double lo, double hi, std::int64_t n, double x, double target,
           std::int64_t n_cap) const {
    const CrossingModel m = model();
    GridOptions opt;
    opt.n0 = n;
    opt.n_cap = n_cap;
    opt.half_width = x;
    opt.workers = g_.workers;
    if (!(target > 0.0)) target = std::pow(h, 1.5) / 100.0;
    const EigenReport r = converged_window(m, h, lo, hi, target, opt);
    Json j = {{"method", r.method},
              {"h", r.h},
              {"eigenvalues", r.eigenvalues},
              {"error_estimate", r.error_estimate},
              {"levels", r.levels},
              {"n", r.n},
              {"x_half_width", r.x_half_width},
              {"converged", r.converged}};
    Json rows = Json::array();
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
      rows.push_back({{"E", r.eigenvalues[i]}, {"error_estimate", r.error_estimate[i]}});
    emit(j, rows);
    return r.converged ? kOk : kComputationFailure;
  }

  int sweep(const std::string& config, const std::string& out_dir) const {
    SweepConfig cfg = sweep_config_from_json(read_json_file(config));
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!g_.model_path.empty()) cfg.model_json = read_json_file(g_.model_path);
    cfg.workers = g_.workers;
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult r = run_sweep(cfg);
    note("sweep: " + std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    if (!cfg.out_dir.empty()) write_sweep(cfg, r);
    if (g_.format == "csv") {
      out_ << sweep_csv(r);
    } else {
      Json summary = Json::array();
      for (const auto& p : r.points) {
        Json q = {{"h", p.h},
                  {"excluded", p.exclusion.excluded},
                  {"max_bijection_distance", p.match.max_distance},
                  {"oracles_agree", p.oracles ? Json(p.oracles->agree) : Json(nullptr)},
                  {"error", p.error}};
        summary.push_back(q);
      }
      Json j = {{"points", summary}, {"flagged", r.flagged}};
      if (r.fit) j["fit"] = {{"slope", r.fit->slope}, {"corrected_slope", r.fit->corrected_slope},
                             {"points", r.fit->points}};
      else j["fit_error"] = r.fit_error;
      if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir;
      out_ << dump_json(j) << '\n';
    }
    for (const auto& p : r.points) {
      if (!p.error.empty()) err_ << "h=" << format_double(p.h) << ": " << p.error << '\n';
      else if (p.oracles && !p.oracles->agree)
        err_ << "h=" << format_double(p.h) << ": oracles disagree: " << p.oracles->detail << '\n';
    }
    return r.flagged ? kComputationFailure : kOk;
  }

 private:
  const GlobalOptions& g_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  GlobalOptions g;
  CLI::App app{"Spectra of two crossing 1-D Schrodinger channels: semiclassical predictions and numerical oracles."};
  app.name("crossplit");
  app.require_subcommand(1);
  app.fallthrough();
  // -h would collide with the semiclassical parameter --h.
  app.set_help_flag("--help", "Print this help message and exit");
  app.add_option("--model", g.model_path, "Model JSON file");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("-v,--verbose", g.verbose, "Diagnostics on stderr");
  app.add_option("--workers", g.workers,
                 "Worker threads (0 = $CROSSPLIT_WORKERS or the hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  int samples = 50;
  auto* validate = app.add_subcommand("validate", "Check the structural model assumptions");
  validate->add_option("--samples", samples, "Energies sampled in the window")->check(CLI::PositiveNumber);

  double energy = 0.0;
  auto* actions = app.add_subcommand("actions", "Actions, partial actions and turning points at one energy");
  actions->add_option("--energy", energy, "Energy E")->required();

  double e0 = 0.0, c0 = 1.0, h = 0.0, x = 0.0, x_match = 0.0;
  auto add_window = [&](CLI::App* s) {
    s->add_option("--e0", e0, "Window center E0")->required();
    s->add_option("--c0", c0, "Window half-width in units of h")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--h", h, "Semiclassical parameter")->required()->check(CLI::PositiveNumber);
  };
  auto* predict = app.add_subcommand("predict", "Bohr-Sommerfeld roots and predicted split pairs");
  add_window(predict);
  auto* monodromy = app.add_subcommand("monodromy", "Roots of det(Lambda - I) with Lambda at each root");
  add_window(monodromy);
  bool errors = false;
  auto* shoot = app.add_subcommand("shoot", "Eigenvalues from the zeros of the matching Wronskian");
  add_window(shoot);
  shoot->add_option("--x", x, "Truncation half-width (0 = automatic)");
  shoot->add_option("--x-match", x_match, "Matching point");
  shoot->add_flag("--errors", errors, "Estimate errors by re-solving with tighter tolerances");

  double lo = 0.0, hi = 0.0, target = 0.0;
  std::int64_t n = 0, n_cap = 64000;
  auto* grid = app.add_subcommand("grid", "Finite-difference eigenvalues with Richardson refinement");
  grid->add_option("--h", h, "Semiclassical parameter")->required()->check(CLI::PositiveNumber);
  grid->add_option("--lo", lo, "Lower end of the energy window")->required();
  grid->add_option("--hi", hi, "Upper end of the energy window")->required();
  grid->add_option("--n", n, "Initial interior point count (0 = automatic)");
  grid->add_option("--x", x, "Truncation half-width (0 = automatic)");
  grid->add_option("--target-err", target, "Target error (default h^1.5 / 100)");
  grid->add_option("--n-cap", n_cap, "Largest grid size")->capture_default_str();

  std::string config, out_dir;
  auto* sweep = app.add_subcommand("sweep", "Convergence sweep over h; writes sweep.csv, sweep.json, plot_gap_vs_h.csv");
  sweep->add_option("--config", config, "Sweep configuration JSON")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides out_dir in the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsageError;
  }

  CLI::App* sub = app.get_subcommands().front();
  Runner run(g, out, err);
  run.note(std::string("simd: ") + simd::to_string(simd::active_isa()) +
           ", workers: " + std::to_string(resolve_workers(g.workers)));
  try {
    if (sub == validate) return run.validate(samples);
    if (sub == actions) return run.actions(energy);
    if (sub == predict) return run.predict(e0, c0, h);
    if (sub == monodromy) return run.monodromy(e0, c0, h);
    if (sub == shoot) return run.shoot(e0, c0, h, x, x_match, errors);
    if (sub == grid) return run.grid(h, lo, hi, n, x, target, n_cap);
    if (sub == sweep) return run.sweep(config, out_dir);
  } catch (const UsageError& e) {
    err << "error: " << e.message << "\n\n" << sub->help();
    return kUsageError;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return is_config_error(e.code()) ? kUsageError : kComputationFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kComputationFailure;
  }
  return kUsageError;
}

}  // namespace crossplit::cli
