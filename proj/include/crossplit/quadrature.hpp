#pragma once

#include <functional>
#include <span>

namespace crossplit {

/// Integrand evaluated on a batch of nodes at once, so that potential
/// evaluation can go through the SIMD kernels.
using BatchIntegrand = std::function<void(std::span<const double> x, std::span<double> fx)>;

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration of f over [a, b].
/// Panels are bisected (largest error first) until the summed |K15 - G7|
/// estimate drops below max(abs_tol, rel_tol * |I|).
QuadratureResult integrate_adaptive(const BatchIntegrand& f, double a, double b,
                                    double abs_tol = 1e-13, double rel_tol = 0.0,
                                    int max_panels = 4000);

/// Composite 7-point Gauss-Legendre rule on `panels` equal panels (order 14).
double integrate_composite_gauss(const BatchIntegrand& f, double a, double b, int panels);

/// Scalar convenience wrapper.
BatchIntegrand batched(std::function<double(double)> f);

}  // namespace crossplit
