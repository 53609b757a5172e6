#include "crossplit/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace crossplit {
namespace {

// Kronrod abscissae on [-1, 1] (positive half, descending); odd indices are
// the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const BatchIntegrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double r = 0.5 * (b - a);
  std::array<double, 15> x{};
  std::array<double, 15> fx{};
  for (int k = 0; k < 7; ++k) {
    x[2 * k] = c - r * kXgk[k];
    x[2 * k + 1] = c + r * kXgk[k];
  }
  x[14] = c;
  f(x, fx);
  double kron = kWgk[7] * fx[14];
  double gauss = kWg[3] * fx[14];
  for (int k = 0; k < 7; ++k) {
    const double pair = fx[2 * k] + fx[2 * k + 1];
    kron += kWgk[k] * pair;
    if (k % 2 == 1) gauss += kWg[k / 2] * pair;
  }
  return {a, b, kron * r, std::fabs((kron - gauss) * r)};
}

}  // namespace

QuadratureResult integrate_adaptive(const BatchIntegrand& f, double a, double b, double abs_tol,
                                    double rel_tol, int max_panels) {
  if (a == b) return {};
  std::priority_queue<Panel> work;
  Panel first = gk15(f, a, b);
  double total = first.value;
  double err = first.error;
  work.push(first);
  int panels = 1;
  while (err > std::max(abs_tol, rel_tol * std::fabs(total)) && panels < max_panels) {
    const Panel worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = gk15(f, worst.a, mid);
    const Panel right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
    ++panels;
  }
  // Re-sum to shed the drift of the incremental updates.
  double value = 0.0;
  double error = 0.0;
  while (!work.empty()) {
    value += work.top().value;
    error += work.top().error;
    work.pop();
  }
  return {value, error, panels};
}

double integrate_composite_gauss(const BatchIntegrand& f, double a, double b, int panels) {
  const double width = (b - a) / panels;
  std::array<double, 7> x{};
  std::array<double, 7> fx{};
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double c = lo + 0.5 * width;
    const double r = 0.5 * width;
    for (int k = 0; k < 3; ++k) {
      x[2 * k] = c - r * kXgk[2 * k + 1];
      x[2 * k + 1] = c + r * kXgk[2 * k + 1];
    }
    x[6] = c;
    f(x, fx);
    double g = kWg[3] * fx[6];
    for (int k = 0; k < 3; ++k) g += kWg[k] * (fx[2 * k] + fx[2 * k + 1]);
    sum += g * r;
  }
  return sum;
}

BatchIntegrand batched(std::function<double(double)> f) {
  return [f = std::move(f)](std::span<const double> x, std::span<double> fx) {
    for (std::size_t i = 0; i < x.size(); ++i) fx[i] = f(x[i]);
  };
}

}  // namespace crossplit
