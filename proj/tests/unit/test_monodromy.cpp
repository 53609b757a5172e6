#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "crossplit/actions.hpp"
#include "crossplit/errors.hpp"
#include "crossplit/monodromy.hpp"
#include "crossplit/predict.hpp"
#include "crossplit/shooting.hpp"

using namespace crossplit;
using std::numbers::pi;

namespace {

CrossingModel asymmetric_model() {
  return CrossingModel(PotentialSpec::polynomial({0.0, 2.0, 1.0}),
                       PotentialSpec::polynomial({0.0, -3.0, 1.5}),
                       {PotentialSpec::polynomial({0.8, 0.1})}, {0.5, 1.5}, false);
}

}  // namespace

TEST_CASE("kappa product identity on random crossing data") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0), pos(0.1, 3.0);
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
    CHECK(k[0] == cplx(1.0));
    CHECK(k[3] == cplx(1.0));
    const cplx prod = k[1] * k[2];
    const double expect = 2.0 * pi * std::norm(c.r) / c.dbrace;
    CHECK(std::abs(prod - expect) <= 1e-12 * std::max(1.0, expect));
    ++tested;
  }
}

TEST_CASE("kappa symmetry for real interaction and equal xi-slopes") {
  CrossingData c{1.0, 2.0, -3.0, 2.0, 2.0 * -3.0 - 1.0 * 2.0, cplx(0.7, 0.0)};
  c.beta = c.delta = -2.0;
  c.dbrace = c.beta * c.gamma - c.alpha * c.delta;
  const auto k = kappa_leading(c);
  CHECK(std::abs(k[2] - std::conj(k[1])) <= 1e-15);
}

TEST_CASE("invalid crossing data") {
  const CrossingData good{2.0, -2.0, -2.0, -2.0, 8.0, cplx(1.0, 0.0)};
  CHECK_NOTHROW(check_crossing_data(good));
  auto bad = good;
  bad.delta = 2.0;
  CHECK_THROWS_AS(check_crossing_data(bad), Error);
  bad = good;
  bad.dbrace = 7.0;
  CHECK_THROWS_AS(check_crossing_data(bad), Error);
  bad = good;
  bad.r = 0.0;
  CHECK_THROWS_AS(check_crossing_data(bad), Error);
  bad = good;
  bad.alpha = -2.0;
  bad.gamma = 2.0;
  bad.dbrace = bad.beta * bad.gamma - bad.alpha * bad.delta;
  CHECK_THROWS_AS(check_crossing_data(bad), Error);
}

TEST_CASE("Schrodinger crossing data reproduce |tau0|") {
  for (double r1 : {0.0, 0.5, 1.0}) {
    const CrossingModel m = reference_model(1.0 - r1, r1);
    for (double e = 0.55; e < 1.5; e += 0.1) {
      const auto c = schrodinger_crossing_data(m, e, -1);
      CHECK(c.beta == doctest::Approx(-2.0 * std::sqrt(e)));
      CHECK(c.dbrace == doctest::Approx(2.0 * std::sqrt(e) * 4.0));
      CHECK(std::abs(c.r - cplx(1.0 - r1, -r1 * std::sqrt(e))) <= 1e-15);
      const auto k = kappa_leading(c);
      CHECK(std::abs(std::abs(k[1]) - std::abs(tau0(m, e))) <= 1e-12);
      // At the other crossing point the bracket is negative.
      CHECK_THROWS_AS(kappa_leading(schrodinger_crossing_data(m, e, +1)), Error);
    }
  }
}

TEST_CASE("crossing matrices") {
  const CrossingModel m = reference_model(0.8, 0.3);
  const double h = 0.03;
  for (double e : {0.6, 1.0, 1.4}) {
    const auto cm = crossing_matrices(m, e, h);
    CHECK(cm.m_minus(0, 0) == cplx(1.0));
    CHECK(cm.m_plus(1, 1) == cplx(1.0));
    CHECK(std::abs(cm.m_minus.det() - (1.0 - std::norm(tau0(m, e)) * h)) <= 1e-15);
    CHECK(cm.m_plus(0, 1) == -std::conj(cm.m_minus(0, 1)));
    CHECK(cm.m_plus(1, 0) == -std::conj(cm.m_minus(1, 0)));
  }
  const auto id = crossing_matrices(m.with_coupling({}), 1.0, h);
  for (int i = 0; i < 4; ++i) {
    CHECK(id.m_minus.a[i] == Matrix2c::identity().a[i]);
    CHECK(id.m_plus.a[i] == Matrix2c::identity().a[i]);
  }
}

TEST_CASE("turning factors") {
  const CrossingModel m = reference_model();
  for (double h : {0.1, 0.013}) {
    for (double e : {0.6, 1.0, 1.3}) {
      for (Channel j : {Channel::k1, Channel::k2})
        for (Side s : {Side::kLeft, Side::kRight})
          CHECK(std::abs(std::abs(turning_factor(m, j, s, e, h)) - 1.0) <= 1e-15);
      const cplx prod = turning_factor(m, Channel::k1, Side::kLeft, e, h) *
                        turning_factor(m, Channel::k1, Side::kRight, e, h);
      CHECK(std::abs(prod + std::polar(1.0, -2.0 * action(m, Channel::k1, e) / h)) <= 1e-9);
    }
  }
}

TEST_CASE("Lambda without coupling") {
  const CrossingModel free = reference_model().with_coupling({});
  for (double h : {0.1, 0.02}) {
    for (double e : {0.7, 1.0, 1.2}) {
      const auto t = lambda_matrix(free, e, h);
      CHECK(std::abs(t.lambda(0, 1)) == 0.0);
      CHECK(std::abs(t.lambda(1, 0)) == 0.0);
      CHECK(std::abs(std::abs(t.lambda.det()) - 1.0) <= 1e-12);
      const double a = action(free, Channel::k1, e);
      CHECK(std::abs(t.lambda(0, 0) + std::polar(1.0, -2.0 * a / h)) <= 1e-9);
      CHECK(std::abs(t.lambda(1, 1) + std::polar(1.0, 2.0 * a / h)) <= 1e-9);
    }
  }
}

TEST_CASE("Lambda off-diagonal entries scale like sqrt(h)") {
  const CrossingModel m = reference_model(0.6, 0.4);
  for (double e : {0.8, 1.1}) {
    const double bound = 2.0 * std::abs(tau0(m, e));
    for (double h : {0.05, 0.02, 0.01, 0.005, 0.002}) {
      const auto t = lambda_matrix(m, e, h);
      const auto l = lambda_leading(m, e, h);
      CHECK(std::abs(t.lambda(0, 1)) / std::sqrt(h) <= bound * (1.0 + h));
      CHECK(std::abs(t.lambda(0, 1) - l.l12 * std::sqrt(h)) <= 4.0 * std::pow(h, 1.5));
      CHECK(std::abs(t.lambda(1, 0) - l.l21 * std::sqrt(h)) <= 4.0 * std::pow(h, 1.5));
      const double a1 = action(m, Channel::k1, e);
      CHECK(std::abs(t.lambda(0, 0) + std::polar(1.0, -2.0 * a1 / h)) <= 2.0 * h);
    }
  }
}

TEST_CASE("monodromy roots without coupling are the Bohr-Sommerfeld roots") {
  const CrossingModel free = reference_model().with_coupling({});
  for (double h : {0.1, 0.05, 0.031, 0.02, 0.0117}) {
    const auto roots = monodromy_roots(free, 1.0, 2.0, h);
    const auto bs = bohr_sommerfeld_roots(free, 1.0, 2.0, h);
    REQUIRE(roots.size() == bs.size());
    for (std::size_t i = 0; i < bs.size(); ++i) CHECK(std::abs(roots[i] - bs[i].energy) <= 1e-10);
  }
}

TEST_CASE("symmetric monodromy pairs straddle the Bohr-Sommerfeld roots") {
  for (double r1 : {0.0, 1.0}) {
    const CrossingModel m = reference_model(1.0 - r1, r1);
    const double h = 0.01;
    // C0 = 2.5 keeps every pair clear of the window edges.
    const auto roots = monodromy_roots(m, 1.0, 2.5, h);
    for (std::size_t i = 1; i < roots.size(); ++i) CHECK(roots[i] - roots[i - 1] > 1e-12);
    int checked = 0;
    for (const auto& p : predicted_pairs(m, 1.0, 2.5, h)) {
      if (p.d_value < 0.2 * splitting_amplitude_bound(m, p.center)) continue;
      double lo = 0.0, hi = 0.0;
      for (double r : roots) {
        if (r < p.center && p.center - r < p.width) lo = r;
        if (r > p.center && r - p.center < p.width && hi == 0.0) hi = r;
      }
      REQUIRE(lo != 0.0);
      REQUIRE(hi != 0.0);
      CHECK(std::abs((hi - lo) / p.width - 1.0) <= 0.1);
      ++checked;
    }
    CHECK(checked >= 2);
  }
}

TEST_CASE("non-symmetric monodromy roots track the shooting eigenvalues") {
  const CrossingModel m = asymmetric_model();
  for (double h : {0.05, 0.02}) {
    const auto mono = monodromy_roots(m, 1.0, 2.9, h);
    const auto shoot = shooting_roots(m, 1.0, 2.9, h);
    REQUIRE(mono.size() == shoot.size());
    for (std::size_t i = 0; i < mono.size(); ++i)
      CHECK(std::abs(mono[i] - shoot[i].energy) <= std::pow(h, 1.5));
  }
}

TEST_CASE("monodromy roots do not depend on the worker count") {
  const CrossingModel m = reference_model();
  CHECK(monodromy_roots(m, 1.0, 2.0, 0.02, 1) == monodromy_roots(m, 1.0, 2.0, 0.02, 3));
}

TEST_CASE("leading WKB amplitudes") {
  const CrossingModel m = reference_model();
  const auto w = wkb_leading(m, Channel::k1, +1, 1.0, -1.0);
  CHECK(std::abs(w.a1 - std::pow(2.0, -0.25)) <= 1e-15);
  CHECK(w.has_channel1);
  CHECK_FALSE(w.has_channel2);
  CHECK(std::abs(w.phase - phase(m, Channel::k1, 1.0, -1.0)) <= 1e-15);
  // Without r1 the amplitudes do not depend on the branch.
  const auto wm = wkb_leading(m, Channel::k1, -1, 1.0, -0.2);
  const auto wp = wkb_leading(m, Channel::k1, +1, 1.0, -0.2);
  CHECK(wm.a2 == wp.a2);
  const CrossingModel m1 = reference_model(0.0, 1.0);
  CHECK(wkb_leading(m1, Channel::k1, -1, 1.0, -0.2).a2 != wkb_leading(m1, Channel::k1, +1, 1.0, -0.2).a2);
  // a2 has a simple pole at the crossing.
  const double c1 = std::abs(wkb_leading(m, Channel::k1, 1, 1.0, -1e-3).a2) * 1e-3;
  const double c2 = std::abs(wkb_leading(m, Channel::k1, 1, 1.0, -1e-5).a2) * 1e-5;
  CHECK(c1 == doctest::Approx(c2).epsilon(1e-2));
  CHECK_THROWS_AS(wkb_leading(m, Channel::k1, 1, 1.0, 0.0), Error);
  CHECK_THROWS_AS(wkb_leading(m, Channel::k1, 1, 1.0, 1.0), Error);
}

TEST_CASE("transport amplitude reproduces the WKB amplitude") {
  const CrossingModel m = reference_model();
  const double e = 1.0;
  SymbolEvaluator q = [](double, double xi) { return SymbolJet{2.0 * xi, 0.0, 2.0}; };
  PhaseEvaluator phi = [&](double x) {
    const auto v = m.v1().with_slope(x);
    const double g = std::sqrt(e - v.value);
    return PhaseJet{g, -v.slope / (2.0 * g)};
  };
  CHECK(transport_amplitude(q, phi, 0.0) == 1.0);
  for (double x : {-2.0, -1.0, -0.5, 0.2, 0.4}) {
    const double expect = std::pow((e - m.v1()(0.0)) / (e - m.v1()(x)), 0.25);
    CHECK(std::abs(transport_amplitude(q, phi, x) - expect) <= 1e-8 * expect);
  }
  CHECK(std::abs(transport_amplitude(q, phi, 1e-4) - 1.0) <= 1e-3);
  SymbolEvaluator flat = [](double, double) { return SymbolJet{0.0, 0.0, 0.0}; };
  CHECK_THROWS_AS(transport_amplitude(flat, phi, 0.3), Error);
}
