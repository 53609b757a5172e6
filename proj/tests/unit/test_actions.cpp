#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "crossplit/actions.hpp"
#include "crossplit/errors.hpp"
#include "crossplit/quadrature.hpp"

using namespace crossplit;
using std::numbers::pi;

namespace {

// Closed forms for V1 = (x+1)^2 - 1.
double exact_action(double e) { return pi * (e + 1.0) / 2.0; }
double exact_b(double e) { return (e + 1.0) * (pi / 2.0 - std::asin(1.0 / std::sqrt(e + 1.0))) - std::sqrt(e); }

}  // namespace

TEST_CASE("turning points of the reference wells") {
  const CrossingModel m = reference_model();
  const auto t1 = turning_points(m, Channel::k1, 1.0);
  CHECK(t1.alpha == doctest::Approx(-1.0 - std::sqrt(2.0)).epsilon(1e-13));
  CHECK(t1.beta == doctest::Approx(-1.0 + std::sqrt(2.0)).epsilon(1e-13));
  const auto t2 = turning_points(m, Channel::k2, 1.0);
  CHECK(t2.alpha == doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-13));
  CHECK(t2.beta == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-13));
  const auto t3 = turning_points(m, Channel::k1, 0.5);
  CHECK(t3.alpha == doctest::Approx(-1.0 - std::sqrt(1.5)).epsilon(1e-13));
  CHECK(t3.beta == doctest::Approx(-1.0 + std::sqrt(1.5)).epsilon(1e-13));
  for (double x : {t1.alpha, t1.beta, t3.alpha, t3.beta})
    CHECK(std::abs(m.v1()(x) - (x == t3.alpha || x == t3.beta ? 0.5 : 1.0)) <= 1e-13);
  CHECK(m.v1().with_slope(t1.alpha).slope < 0.0);
  CHECK(m.v1().with_slope(t1.beta).slope > 0.0);
  CHECK_THROWS_AS(turning_points(m, Channel::k1, -2.0), Error);
}

TEST_CASE("actions match the harmonic closed form") {
  const CrossingModel m = reference_model();
  CHECK(std::abs(action(m, Channel::k1, 1.0) - pi) <= 1e-12);
  CHECK(std::abs(action(m, Channel::k1, 0.5) - 0.75 * pi) <= 1e-12);
  for (int k = 0; k < 50; ++k) {
    const double e = 0.5 + (k + 0.5) / 50.0;
    CHECK(std::abs(action(m, Channel::k1, e) - exact_action(e)) <= 1e-10);
    CHECK(std::abs(action(m, Channel::k2, e) - action(m, Channel::k1, e)) <= 1e-12);
    CHECK(std::abs(action_derivative(m, Channel::k1, e) - pi / 2.0) <= 1e-8);
    CHECK(std::abs(action_derivative(m, Channel::k2, e) - pi / 2.0) <= 1e-8);
  }
}

TEST_CASE("action derivative agrees with differenced actions") {
  const CrossingModel m(PotentialSpec::polynomial({0.0, 2.0, 1.0, 0.0, 0.05}),
                        PotentialSpec::polynomial({0.0, -3.0, 1.5}), {PotentialSpec::constant(1.0)},
                        {0.5, 1.5}, false);
  const double d = 1e-4;
  for (double e : {0.6, 0.9, 1.2, 1.4}) {
    for (Channel j : {Channel::k1, Channel::k2}) {
      const double fd = (action(m, j, e + d) - action(m, j, e - d)) / (2.0 * d);
      CHECK(std::abs(fd - action_derivative(m, j, e)) <= 1e-6);
    }
  }
}

TEST_CASE("actions increase with energy") {
  const CrossingModel m = reference_model();
  double prev = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double a = action(m, Channel::k1, 0.51 + 0.98 * k / 49.0);
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("partial actions") {
  const CrossingModel m = reference_model();
  const auto [s1l, s1r] = partial_actions(m, Channel::k1, 1.0);
  const auto [s2l, s2r] = partial_actions(m, Channel::k2, 1.0);
  CHECK(std::abs(s1l + s1r - pi) <= 1e-12);
  CHECK(std::abs(s1l - s2r) <= 1e-12);
  CHECK(std::abs(s1r - s2l) <= 1e-12);
  // int_0^{sqrt2-1} sqrt(2 - (x+1)^2) dx = pi/4 - 1/2, and an independent
  // adaptive integration of the raw integrand.
  CHECK(std::abs(s1r - (pi / 4.0 - 0.5)) <= 1e-12);
  const auto ind = integrate_adaptive(
      batched([](double x) { return std::sqrt(std::max(0.0, 2.0 - (x + 1.0) * (x + 1.0))); }), 0.0,
      std::sqrt(2.0) - 1.0, 1e-13);
  CHECK(std::abs(s1r - ind.value) <= 1e-9);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const double e = u(rng);
    for (Channel j : {Channel::k1, Channel::k2}) {
      const auto [l, r] = partial_actions(m, j, e);
      CHECK(l > 0.0);
      CHECK(r > 0.0);
      CHECK(std::abs(action(m, j, e) - l - r) <= 1e-9);
    }
  }
}

TEST_CASE("crossing action B") {
  const CrossingModel m = reference_model();
  CHECK(std::abs(b_action(m, 1.0) - exact_b(1.0)) <= 1e-12);
  CHECK(std::abs(b_action(m, 1.0) - (pi / 2.0 - 1.0)) <= 1e-12);
  for (double e = 0.55; e < 1.5; e += 0.1) {
    const double b = b_action(m, e);
    CHECK(std::abs(b - exact_b(e)) <= 1e-10);
    CHECK(b < action(m, Channel::k1, e));
    const auto [l, r] = partial_actions(m, Channel::k1, e);
    CHECK(std::abs(2.0 * r - (action(m, Channel::k1, e) - l + r)) <= 1e-10);
  }
  const CrossingModel lop(PotentialSpec::polynomial({0.0, 2.0, 1.0}),
                          PotentialSpec::polynomial({0.0, -3.0, 1.5}), {}, {0.5, 1.5}, false);
  CHECK_THROWS_AS(b_action(lop, 1.0), Error);
}

TEST_CASE("phase function") {
  const CrossingModel m = reference_model();
  const auto tp = turning_points(m, Channel::k1, 1.0);
  const auto [s1l, s1r] = partial_actions(m, Channel::k1, 1.0);
  CHECK(phase(m, Channel::k1, 1.0, 0.0) == 0.0);
  CHECK(std::abs(phase(m, Channel::k1, 1.0, tp.beta) - s1r) <= 1e-12);
  CHECK(std::abs(phase(m, Channel::k1, 1.0, tp.alpha) + s1l) <= 1e-12);
  CHECK(phase(m, Channel::k1, 1.0, -1.0) < 0.0);
  CHECK_THROWS_AS(phase(m, Channel::k1, 1.0, 3.0), Error);
}

TEST_CASE("action set bundles consistent values") {
  const CrossingModel m = reference_model();
  const ActionSet a = action_set(m, 1.2);
  CHECK(a.energy == 1.2);
  CHECK(a.a1 == doctest::Approx(exact_action(1.2)).epsilon(1e-12));
  CHECK(a.a1p == doctest::Approx(pi / 2).epsilon(1e-10));
  REQUIRE(a.b.has_value());
  CHECK(*a.b == doctest::Approx(2.0 * a.s1r).epsilon(1e-14));
  CHECK(std::abs(a.a1 - a.s1l - a.s1r) <= 1e-12);
  CHECK(a.tp1.alpha < a.tp2.alpha);
  CHECK(a.tp2.alpha < 0.0);
  CHECK(0.0 < a.tp1.beta);
  CHECK(a.tp1.beta < a.tp2.beta);
}
