#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crossplit/grid_eig.hpp"
#include "crossplit/io.hpp"
#include "crossplit/model.hpp"
#include "crossplit/predict.hpp"
#include "crossplit/shooting.hpp"

namespace crossplit {

struct MatchPair {
  double numerical;
  double predicted;
  double distance;
};

struct MatchReport {
  double h = 0.0;
  bool failed = false;
  std::size_t numerical_count = 0;
  std::size_t predicted_count = 0;  ///< with multiplicity
  std::vector<MatchPair> pairs;
  double max_distance = 0.0;
  std::vector<double> unmatched;  ///< filled when the counts differ
};

/// Sorted pairing of numerical eigenvalues with the Bohr-Sommerfeld roots
/// (each repeated by its multiplicity).  Differing counts give failed = true.
MatchReport match_spectra(std::vector<double> numerical, const std::vector<BsRoot>& uh, double h);

struct SplitRecord {
  double h = 0.0;
  double center = 0.0;
  double measured_gap = 0.0;
  double predicted_gap = 0.0;
  double d_value = 0.0;
  double a_prime = 0.0;
  std::optional<double> ratio;  ///< absent when D is below the filter threshold
  std::string error;            ///< PairNotFound message, if any
  bool excluded = false;        ///< h excluded from the bijection assertions
};

/// 10 h^{3/2} + 10 h^2.
double capture_radius(double h);

/// For each multiplicity-2 root, the two numerical eigenvalues nearest to it
/// within capture_radius(h).  `filter_d` is relative to the modulus bound of D.
std::vector<SplitRecord> measure_splittings(const CrossingModel& m, std::vector<double> numerical,
                                            const std::vector<BsRoot>& uh, double h,
                                            double filter_d = 0.2);

struct FitOptions {
  std::size_t min_points = 4;
  double min_h_span = 8.0;  ///< max h / min h over the points used
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< rms of the log residuals
  double corrected_slope = 0.0;
  double corrected_intercept = 0.0;
  std::size_t points = 0;
  double filter_d = 0.0;
};

/// Least squares of log(gap) and log(gap / (2 sqrt(D) / A')) against log h
/// over records with a ratio that are not excluded.  Throws InsufficientData.
FitResult fit_scaling(const std::vector<SplitRecord>& records, const FitOptions& opt = {},
                      double filter_d = 0.2);

struct ExclusionCheck {
  bool excluded = false;
  std::string reason;
};

/// Operational admissibility of h: roots of different wells closer than
/// 10 h^{3/2} without being merged, or a root so close to a window edge that
/// its pair may straddle it.
ExclusionCheck exclusion(const CrossingModel& m, double lo, double hi, double h);

struct SweepConfig {
  Json model_json;
  double e0 = 1.0;
  double c0 = 1.0;
  std::vector<double> h_values;
  double filter_d = 0.2;
  std::string out_dir;
  bool run_shooting = true;
  double grid_target_factor = 0.01;  ///< grid target error = factor * h^{3/2}
  std::int64_t n_cap = 64000;
  FitOptions fit{};
  int workers = 0;
};

SweepConfig sweep_config_from_json(const Json& j);

struct OracleComparison {
  bool agree = true;
  double max_difference = 0.0;
  double max_tolerance = 0.0;
  std::string detail;
};

/// Shooting vs grid: equal counts and |difference| <= sum of the estimates.
OracleComparison compare_oracles(const std::vector<ShootingRoot>& shooting,
                                 const EigenReport& grid);

struct SweepPoint {
  double h = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<BsRoot> uh;
  std::vector<SplittingPrediction> predictions;
  std::vector<ShootingRoot> shooting;
  EigenReport grid;
  std::optional<OracleComparison> oracles;
  MatchReport match;
  ExclusionCheck exclusion;
  std::vector<SplitRecord> splits;
  std::string error;  ///< per-h failure; the sweep continues
};

struct SweepResult {
  std::vector<SweepPoint> points;  ///< sorted by h, decreasing
  std::optional<FitResult> fit;
  std::string fit_error;
  bool flagged = false;  ///< oracle disagreement or a per-h failure
};

SweepResult run_sweep(const SweepConfig& cfg);

Json sweep_to_json(const SweepConfig& cfg, const SweepResult& r);
std::string sweep_csv(const SweepResult& r);
std::string plot_csv(const SweepResult& r);

/// Writes sweep.csv, sweep.json and plot_gap_vs_h.csv into cfg.out_dir.
void write_sweep(const SweepConfig& cfg, const SweepResult& r);

}  // namespace crossplit
