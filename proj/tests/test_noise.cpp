#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "stefan/brownian.hpp"
#include "stefan/errors.hpp"
#include "stefan/sigma_profile.hpp"

using namespace stefan;

namespace {

// Composite Simpson on [a, b] with n (even) panels; independent of the
// library's Gauss-Kronrod quadrature.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

std::vector<SigmaProfile> profiles() {
  return {SigmaProfile::exponential(1.0, 1.0), SigmaProfile::exponential(2.5, 4.0),
          SigmaProfile::power_tail(1.0, 3.0, 1.0), SigmaProfile::power_tail(0.7, 4.5, 0.3),
          SigmaProfile::compact(1.0, 1.0), SigmaProfile::compact(3.0, 0.25)};
}

}  // namespace

TEST_CASE("sigma profiles integrate to c0") {
  for (const auto& s : profiles()) {
    CAPTURE(to_string(s.kind));
    CHECK(integrate_profile(s) == doctest::Approx(s.c0).epsilon(1e-8));
  }
  CHECK(integrate_profile(SigmaProfile::zero()) == 0.0);
}

TEST_CASE("sigma profile shapes") {
  const auto e = SigmaProfile::exponential(2.0, 3.0);
  CHECK(e(0.5) == doctest::Approx(2.0 * 3.0 * std::exp(-1.5)));
  const auto p = SigmaProfile::power_tail(1.0, 3.0, 2.0);
  CHECK(p(1.0) == doctest::Approx(3.0 * 8.0 / 81.0));
  const auto c = SigmaProfile::compact(2.0, 0.5);
  CHECK(c(0.25) == 4.0);
  CHECK(c(0.75) == 0.0);
  CHECK(SigmaProfile::zero()(1.0) == 0.0);
  CHECK_THROWS_AS(SigmaProfile::exponential(1.0, -1.0).validate(), InputError);
  CHECK_THROWS_AS(SigmaProfile::compact(1.0, 0.0).validate(), InputError);
}

TEST_CASE("shell mass closed forms") {
  const double pi = std::numbers::pi;
  SUBCASE("compact support") {
    const double R = 0.8, h = 0.3;
    const auto s = SigmaProfile::compact(1.0, h);
    const double expected = 4.0 * pi / h * (std::pow(R + h, 3) - std::pow(R, 3)) / 3.0;
    CHECK(shell_mass_closed_form(s, R) == doctest::Approx(expected).epsilon(1e-14));
    const double simpson_value = simpson([&](double r) { return s(r) * 4.0 * pi * (R + r) * (R + r); }, 0.0, h, 200);
    CHECK(simpson_value == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("every profile against quadrature and Simpson") {
    for (const auto& s : profiles()) {
      for (double R : {0.01, 0.5, 2.0}) {
        CAPTURE(to_string(s.kind));
        CAPTURE(R);
        const double closed = shell_mass_closed_form(s, R);
        CHECK(shell_mass_quadrature(s, R) == doctest::Approx(closed).epsilon(1e-9));
        // Map [0, inf) to [0, 1) with r = x / (1 - x) for the independent rule.
        const double upper = s.kind == SigmaKind::Compact ? s.h : 1.0;
        const auto g = [&](double x) {
          if (s.kind == SigmaKind::Compact) return s(x) * 4.0 * pi * (R + x) * (R + x);
          x = std::min(x, 1.0 - 1e-9);  // the integrand has a finite limit at x = 1
          const double r = x / (1.0 - x);
          return s(r) * 4.0 * pi * (R + r) * (R + r) / ((1.0 - x) * (1.0 - x));
        };
        CHECK(simpson(g, 0.0, upper, 20000) == doctest::Approx(closed).epsilon(1e-6));
      }
    }
  }
  SUBCASE("non-integrable power tail") {
    CHECK_THROWS_AS(shell_mass_closed_form(SigmaProfile::power_tail(1.0, 1.5, 1.0), 1.0), InputError);
  }
}

TEST_CASE("bin count") {
  CHECK(bin_count(15.0, 1e-4) == 150000);
  CHECK(bin_count(8.0, 1e-4) == 80000);
  CHECK(bin_count(1.0, 0.3) == 4);
  CHECK(bin_count(0.0, 0.1) == 0);
  CHECK_THROWS_AS(bin_count(1.0, 0.0), InputError);
}

TEST_CASE("brownian path determinism and layout") {
  const auto a = sample_path(123, 1e-3, 1.0);
  const auto b = sample_path(123, 1e-3, 1.0);
  CHECK(a.increments == b.increments);
  CHECK(a.bins() == 1000);
  CHECK(sample_path(124, 1e-3, 1.0).increments != a.increments);
  CHECK(sample_path(5, 1e-3, 0.0).empty());
  CHECK_THROWS_AS(sample_path(5, -1.0, 1.0), InputError);
  CHECK(a.value_at_bin(0) == 0.0);
  double w = 0.0;
  for (double x : a.increments) w += x;
  CHECK(a.terminal_value() == doctest::Approx(w).epsilon(1e-15));
}

TEST_CASE("forcing") {
  BrownianPath p;
  p.dt = 0.1;
  p.t_end = 0.1;
  p.increments = {0.3};
  CHECK(forcing(p, 0.05) == doctest::Approx(3.0));
  CHECK(forcing(p, 0.1) == doctest::Approx(3.0));
  CHECK_THROWS_AS(forcing(p, 0.2), InputError);
  CHECK_THROWS_AS(forcing(p, -0.01), InputError);
  BrownianPath empty;
  CHECK(forcing(empty, 0.0) == 0.0);

  const auto path = sample_path(99, 1e-3, 2.0);
  double integral = 0.0;
  for (std::size_t j = 0; j < path.bins(); ++j) integral += forcing(path, (j + 0.5) * path.dt) * path.dt;
  CHECK(integral == doctest::Approx(path.terminal_value()).epsilon(1e-12));
}

TEST_CASE("increment statistics") {
  const auto path = sample_path(2024, 1e-4, 2.0);
  REQUIRE(path.bins() >= 10000);
  double s2 = 0.0;
  for (double x : path.increments) s2 += x * x / path.dt;
  const double var = s2 / static_cast<double>(path.bins());
  // Var of the sample second moment of N(0,1) is 2/n.
  CHECK(std::abs(var - 1.0) <= 5.0 * std::sqrt(2.0 / static_cast<double>(path.bins())));
}

TEST_CASE("W(t) moments across seeds") {
  const int seeds = 10000;
  double sum1 = 0.0;
  for (int k = 0; k < seeds; ++k) sum1 += sample_path(mix_seed(7, k), 1e-3, 1.0).terminal_value();
  CHECK(std::abs(sum1 / seeds) <= 5.0 / std::sqrt(double(seeds)));

  for (double t : {0.5, 1.0, 5.0}) {
    double s = 0.0, s2 = 0.0;
    const int n = 1000;
    for (int k = 0; k < n; ++k) {
      const double w = sample_path(mix_seed(31, k), 1e-2, t).terminal_value();
      s += w;
      s2 += w * w;
    }
    const double var = (s2 - s * s / n) / (n - 1);
    CAPTURE(t);
    CHECK(std::abs(var - t) <= 0.1 * t);
  }
}

TEST_CASE("seed mixing") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 10000; ++k) seen.insert(mix_seed(1, k));
  CHECK(seen.size() == 10000);
  CHECK(mix_seed(1, 5) == mix_seed(1, 5));
  CHECK(mix_seed(1, 5) != mix_seed(2, 5));
  // First output of the published SplitMix64 generator started from state 0.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
}

TEST_CASE("normal stream moments") {
  NormalStream n(42);
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  const int count = 200000;
  for (int i = 0; i < count; ++i) {
    const double x = n.next();
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  CHECK(std::abs(s / count) < 5.0 / std::sqrt(double(count)));
  CHECK(std::abs(s2 / count - 1.0) < 5.0 * std::sqrt(2.0 / count));
  CHECK(std::abs(s4 / count - 3.0) < 5.0 * std::sqrt(96.0 / count));
}
