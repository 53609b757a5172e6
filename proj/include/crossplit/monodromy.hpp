#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "crossplit/model.hpp"

namespace crossplit {

using cplx = std::complex<double>;

/// Row-major complex 2x2 matrix.
struct Matrix2c {
  std::array<cplx, 4> a{};

  cplx& operator()(int r, int c) { return a[2 * r + c]; }
  const cplx& operator()(int r, int c) const { return a[2 * r + c]; }
  cplx det() const { return a[0] * a[3] - a[1] * a[2]; }

  static Matrix2c identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
  static Matrix2c diag(cplx x, cplx y) { return {{x, 0.0, 0.0, y}}; }
};

Matrix2c operator*(const Matrix2c& x, const Matrix2c& y);
Matrix2c operator-(const Matrix2c& x, const Matrix2c& y);

/// Local data of two crossing symbols q1, q2 at a crossing point.
struct CrossingData {
  double alpha = 0.0;   ///< d_x q1
  double beta = 0.0;    ///< d_xi q1
  double gamma = 0.0;   ///< d_x q2
  double delta = 0.0;   ///< d_xi q2
  double dbrace = 0.0;  ///< {q1, q2}
  cplx r{};             ///< interaction value
};

/// Throws InvalidCrossingData unless beta delta > 0, dbrace > 0,
/// dbrace = beta gamma - alpha delta (1e-12 relative) and r != 0.
void check_crossing_data(const CrossingData& c);

/// Leading transfer coefficients {k11, k12, k21, k22}.
std::array<cplx, 4> kappa_leading(const CrossingData& c);

/// Crossing data of the Schrodinger symbols xi^2 + V_j - E at the crossing
/// point (0, xi_sign sqrt(E)).
CrossingData schrodinger_crossing_data(const CrossingModel& m, double energy, int xi_sign);

struct CrossingMatrices {
  Matrix2c m_minus;
  Matrix2c m_plus;
};

CrossingMatrices crossing_matrices(const CrossingModel& m, double energy, double h);

/// i exp(-2i S_{j,side}(E) / h).
cplx turning_factor(const CrossingModel& m, Channel j, Side side, double energy, double h);

struct TransferData {
  double energy = 0.0;
  Matrix2c m_minus;
  Matrix2c m_plus;
  cplx t1l, t1r, t2l, t2r;
  Matrix2c lambda;
};

/// Lambda = diag(T1L, 1/T2R) M+ diag(T1R, 1/T2L) M-.
TransferData lambda_matrix(const CrossingModel& m, double energy, double h);

/// Leading off-diagonal coefficients: lambda12 = lambda12_0 sqrt(h) + ...
struct LambdaLeading {
  cplx l12;
  cplx l21;
};

LambdaLeading lambda_leading(const CrossingModel& m, double energy, double h);

/// (1/4) e^{i(A1 - A2)/h} lambda12_0 lambda21_0.
cplx leading_m0(const CrossingModel& m, double energy, double h);

/// det(Lambda(E; h) - I).
cplx monodromy_determinant(const CrossingModel& m, double energy, double h);

/// Real roots of det(Lambda - I) in [E0 - C0 h, E0 + C0 h], strictly
/// increasing.  `workers` = 0 picks the default worker count.
std::vector<double> monodromy_roots(const CrossingModel& m, double e0, double c0, double h,
                                    int workers = 0);

struct WkbAmplitudes {
  cplx a1{}, a2{};  ///< channel-1 WKB pair, valid when has_channel1
  cplx b1{}, b2{};  ///< channel-2 WKB pair, valid when has_channel2
  bool has_channel1 = false;
  bool has_channel2 = false;
  double phase = 0.0;  ///< phi_j(x)
};

/// Leading WKB amplitudes for branch sign `branch` (+1 or -1) at x.  Both
/// pairs are filled wherever x is classically allowed for the channel; x
/// must be allowed for channel j.
WkbAmplitudes wkb_leading(const CrossingModel& m, Channel j, int branch, double energy, double x);

/// Symbol jet needed by the transport equation at (x, xi).
struct SymbolJet {
  double d_xi;
  double d_x_xi;
  double d_xi_xi;
};

using SymbolEvaluator = std::function<SymbolJet(double x, double xi)>;

/// Phase derivatives phi'(x), phi''(x).
struct PhaseJet {
  double d1;
  double d2;
};

using PhaseEvaluator = std::function<PhaseJet(double x)>;

/// exp(-int_0^x [d_x d_xi q + phi'' d_xi^2 q] / (2 d_xi q) dt) with the symbol
/// evaluated on (t, phi'(t)).  Throws VanishingXiDerivative.
double transport_amplitude(const SymbolEvaluator& q, const PhaseEvaluator& phi, double x);

}  // namespace crossplit
