#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace crossplit {

/// Index of a diabatic channel (potential V_1 or V_2).
enum class Channel : int { k1 = 1, k2 = 2 };

/// Which half-line, relative to the crossing point x = 0.
enum class Side { kLeft, kRight };

inline int index(Channel j) noexcept { return static_cast<int>(j) - 1; }
inline Channel other(Channel j) noexcept { return j == Channel::k1 ? Channel::k2 : Channel::k1; }

struct ValueSlope {
  double value;
  double slope;
};

/// Closed-form scalar profile: a shifted harmonic well w (x - c)^2 + d, an
/// ascending-coefficient polynomial, or the mirror image V(-x) of another
/// profile.  Mirrors are flattened at construction; evaluation of
/// mirror(V) at x performs exactly the operations of V at -x.
class PotentialSpec {
 public:
  struct ShiftedHarmonic {
    double center;
    double curvature;
    double offset;
  };
  struct Polynomial {
    std::vector<double> coeffs;
  };

  static PotentialSpec shifted_harmonic(double center, double curvature, double offset);
  static PotentialSpec polynomial(std::vector<double> coeffs);
  static PotentialSpec constant(double value);
  static PotentialSpec mirror(const PotentialSpec& of);

  double operator()(double x) const noexcept;
  ValueSlope with_slope(double x) const noexcept;
  double second_derivative(double x) const noexcept;

  /// out[i] = V(x[i]) through the active SIMD kernel.
  void eval_batch(std::span<const double> x, std::span<double> out) const;

  /// True when the profile is identically zero.
  bool is_zero() const noexcept;
  bool is_mirrored() const noexcept { return mirrored_; }
  const std::variant<ShiftedHarmonic, Polynomial>& base() const noexcept { return base_; }

  std::string describe() const;

 private:
  PotentialSpec(std::variant<ShiftedHarmonic, Polynomial> base, bool mirrored)
      : base_(std::move(base)), mirrored_(mirrored) {}

  std::variant<ShiftedHarmonic, Polynomial> base_;
  bool mirrored_ = false;
};

/// Coupling W = r0(x) + i r1(x) h D_x between the two channels.
struct CouplingSpec {
  PotentialSpec r0 = PotentialSpec::constant(0.0);
  PotentialSpec r1 = PotentialSpec::constant(0.0);

  bool is_zero() const noexcept { return r0.is_zero() && r1.is_zero(); }
};

struct EnergyWindow {
  double lo;
  double hi;
};

/// Two diabatic potentials crossing at the origin, their coupling, and the
/// energy window I0 = (E1, E2) in which spectra are studied.  Immutable;
/// derived geometry (well bottoms, truncation half-width) is computed once at
/// construction.
class CrossingModel {
 public:
  CrossingModel(PotentialSpec v1, PotentialSpec v2, CouplingSpec coupling, EnergyWindow window,
                bool symmetric);

  const PotentialSpec& potential(Channel j) const noexcept {
    return j == Channel::k1 ? v1_ : v2_;
  }
  const PotentialSpec& v1() const noexcept { return v1_; }
  const PotentialSpec& v2() const noexcept { return v2_; }
  const CouplingSpec& coupling() const noexcept { return coupling_; }
  const PotentialSpec& r0() const noexcept { return coupling_.r0; }
  const PotentialSpec& r1() const noexcept { return coupling_.r1; }
  EnergyWindow window() const noexcept { return window_; }
  bool symmetric() const noexcept { return symmetric_; }

  /// V_1'(0) - V_2'(0), the crossing transversality constant.
  double crossing_slope_gap() const noexcept;

  /// Position of the minimum of V_j on the truncated domain.
  double well_bottom(Channel j) const noexcept { return well_bottom_[index(j)]; }

  /// Smallest half-integer X with V_j(+-X) >= E2 + 1 for both channels.
  double truncation_half_width() const noexcept { return truncation_; }

  /// Copy with a different coupling (used to build the r = 0 companion model).
  CrossingModel with_coupling(CouplingSpec coupling) const;

  /// Largest truncation half-width that the well and truncation searches consider.
  static constexpr double kMaxHalfWidth = 1000.0;

 private:
  PotentialSpec v1_;
  PotentialSpec v2_;
  CouplingSpec coupling_;
  EnergyWindow window_;
  bool symmetric_;
  double truncation_ = 0.0;
  double well_bottom_[2] = {0.0, 0.0};
};

/// Half-width used by the numerical solvers at semiclassical parameter h:
/// the model's truncation half-width, widened in steps of 1/2 until every
/// channel decays by at least `decay` e-folds, (1/h) int sqrt(V_j - E), between
/// its outermost turning point at `e_max` and +-X on both sides.
double solver_half_width(const CrossingModel& m, double h, double e_max, double decay = 36.0);

/// Builds the model used throughout the tests and examples:
/// V1 = (x+1)^2 - 1, V2 = V1(-x), window (0.5, 1.5), symmetric.
CrossingModel reference_model(double r0 = 1.0, double r1 = 0.0);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> values;
};

struct ValidationReport {
  bool passed = false;
  std::vector<ValidationCheck> checks;
};

struct ScanRange {
  double lo;
  double hi;
  double step;
};

/// Checks the structural assumptions on a model at `energy_samples` energies
/// inside the window: single wells ordered alpha1 < alpha2 < 0 < beta1 <
/// beta2 with non-degenerate turning points, the crossing at the origin, the
/// ellipticity of the coupling there, and mirror symmetry when flagged.
ValidationReport validate_model(const CrossingModel& m, int energy_samples, ScanRange scan);

/// Default scan: the truncated domain with step 1e-3.
ScanRange default_scan(const CrossingModel& m);

}  // namespace crossplit
