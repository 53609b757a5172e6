#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "crossplit/model.hpp"

namespace crossplit {

/// Root of A_j(E) = (k + 1/2) pi h.  Roots shared by both wells (within
/// 1e-10) are merged and carry multiplicity 2.
struct BsRoot {
  Channel channel = Channel::k1;
  long k = 0;
  double energy = 0.0;
  int multiplicity = 1;
};

/// Predicted eigenvalue pair around a double root e of the symmetric model.
struct SplittingPrediction {
  double center = 0.0;
  double d_value = 0.0;   ///< splitting amplitude D(e)
  double a_prime = 0.0;   ///< A'(e)
  double width = 0.0;     ///< e_plus - e_minus  (= 2 sqrt(D) / A' h^{3/2} up to rounding)
  double e_minus = 0.0;
  double e_plus = 0.0;
};

struct SemiclassicalWindow {
  double lo;
  double hi;
};

/// [E0 - C0 h, E0 + C0 h]; throws WindowOutsideI0 unless it lies inside the
/// model's energy window.
SemiclassicalWindow semiclassical_window(const CrossingModel& m, double e0, double c0, double h);

std::vector<BsRoot> bohr_sommerfeld_roots(const CrossingModel& m, double e0, double c0, double h);

/// Same enumeration over an explicit energy interval (no I0 check).
std::vector<BsRoot> bohr_sommerfeld_roots_in(const CrossingModel& m, double lo, double hi,
                                             double h);

/// Leading transition amplitude at the crossing,
/// e^{i pi/4} sqrt(pi / (V1'(0) - V2'(0))) (r0(0) E^{-1/4} - i r1(0) E^{1/4}).
std::complex<double> tau0(const CrossingModel& m, double energy);

struct SplittingAmplitudeForms {
  double closed_form;  ///< |r0 E^{-1/4} sin(B/h + pi/4) + r1 E^{1/4} cos(B/h + pi/4)|^2 pi/(2V1'(0))
  double tau_form;     ///< |conj(tau0) e^{iB/h} + tau0 e^{-iB/h}|^2 / 4
};

SplittingAmplitudeForms splitting_amplitude_forms(const CrossingModel& m, double energy,
                                                  double h);

/// D(E); symmetric models only.  Evaluates both forms and throws
/// NoConvergence if they disagree by more than 1e-12.
double splitting_amplitude(const CrossingModel& m, double energy, double h);

/// Upper bound (pi / (2 V1'(0))) (|r0(0)| E^{-1/4} + |r1(0)| E^{1/4})^2 of D(E).
double splitting_amplitude_bound(const CrossingModel& m, double energy);

std::vector<SplittingPrediction> predicted_pairs(const CrossingModel& m, double e0, double c0,
                                                 double h);

SplittingPrediction predict_pair(const CrossingModel& m, double center, double h);

struct QuantizationResidual {
  double value = 0.0;
  bool m0_evaluated = false;  ///< false for non-symmetric models (cos cos only)
};

/// cos(A1/h) cos(A2/h) - Re[e^{i(A1-A2)/h}] D(E) h for symmetric models,
/// cos(A1/h) cos(A2/h) otherwise.
QuantizationResidual quantization_residual(const CrossingModel& m, double energy, double h);

/// Roots of the symmetric quantization residual on either side of `center`:
/// (E-, E+) refined by bracketing inside center -+ pi h / (4 A'(center)).
std::pair<double, double> refine_pair(const CrossingModel& m, double center, double h);

}  // namespace crossplit
