#include <doctest.h>

#include <cmath>

#include "wreath/errors.hpp"
#include "wreath/random_walk.hpp"
#include "wreath/stats.hpp"
#include "wreath/word_metric.hpp"

using namespace wreath;

namespace {

// Exact E|S_t| for the simple walk on Z: sum_k |2k - t| C(t, k) 2^-t.
double exact_mean_abs(Int t) {
  double mean = 0;
  for (Int k = 0; k <= t; ++k) {
    const double logc = std::lgamma(double(t + 1)) - std::lgamma(double(k + 1)) - std::lgamma(double(t - k + 1));
    mean += std::abs(double(2 * k - t)) * std::exp(logc - double(t) * std::log(2.0));
  }
  return mean;
}

}  // namespace

TEST_CASE("least squares recovers an exact line") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(0.5 - 2 * v);
  const auto fit = least_squares(x, y);
  CHECK(fit.slope == doctest::Approx(-2).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(fit.slope_stderr == doctest::Approx(0.0).epsilon(1e-9));

  const std::vector<double> px{1, 10, 100};
  const std::vector<double> py{3, 3 * std::pow(10.0, 0.75), 3 * std::pow(100.0, 0.75)};
  CHECK(log_log_fit(px, py).slope == doctest::Approx(0.75).epsilon(1e-12));

  const std::vector<double> flat{2, 2, 2};
  CHECK_THROWS_AS(least_squares(flat, y), EstimationError);
  CHECK_THROWS_AS(least_squares(std::vector<double>{1}, std::vector<double>{1}), EstimationError);
}

TEST_CASE("compensated sum keeps small terms") {
  CompensatedSum<double> s;
  s += 1e16;
  for (int i = 0; i < 10; ++i) s += 1.0;
  s += -1e16;
  CHECK(s.value() == 10.0);
}

TEST_CASE("mean displacement on Z matches the binomial law") {
  const std::vector<Int> times{1, 16, 64, 256};
  const Int trials = 4000;
  const auto sample = simulate(WalkGroup::Integers, times, trials, 11);
  const auto mean = sample.mean_displacement();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double exact = exact_mean_abs(times[i]);
    const double var = double(times[i]) - exact * exact;  // E S^2 = t
    const double se = std::sqrt(var / double(trials));
    CHECK(std::abs(mean[i] - exact) <= 3 * se + 1e-12);
  }
  CHECK(mean[0] == 1.0);
}

TEST_CASE("simulation is reproducible and independent of worker count") {
  const auto times = dyadic_times(0, 8);
  const auto a = simulate(WalkGroup::Lamplighter, times, 64, 5, 1);
  const auto b = simulate(WalkGroup::Lamplighter, times, 64, 5, 3);
  CHECK(a.displacements == b.displacements);
  const auto c = simulate(WalkGroup::Lamplighter, times, 64, 6, 1);
  CHECK(a.displacements != c.displacements);
}

TEST_CASE("dense simulation agrees with step-by-step endpoints") {
  const std::vector<Int> times{0, 3, 17, 100};
  const auto sample = simulate(WalkGroup::Lamplighter, times, 20, 123);
  for (Int trial = 0; trial < 20; ++trial) {
    for (std::size_t c = 0; c < times.size(); ++c) {
      const auto w = walk_endpoint(WalkGroup::Lamplighter, times[c], 123, trial);
      REQUIRE(word_length(w).total == sample.displacements(trial, Eigen::Index(c)));
    }
  }
  const auto zs = simulate(WalkGroup::Integers, times, 5, 9);
  for (Int trial = 0; trial < 5; ++trial) {
    const auto w = walk_endpoint(WalkGroup::Integers, 100, 9, trial);
    CHECK(w.lamps.empty());
    CHECK(std::abs(w.cursor) == zs.displacements(trial, 3));
  }
}

TEST_CASE("exponent and tail estimates") {
  const auto times = dyadic_times(4, 11);
  const auto z = simulate(WalkGroup::Integers, times, 500, 1);
  const auto fit = estimate_beta(z);
  CHECK(fit.beta == doctest::Approx(0.5).epsilon(0.1));
  CHECK(fit.beta_stderr > 0);

  const double c = rule_constant(z, 0.5, 256);
  const auto median = z.median_displacement();
  CHECK(c == doctest::Approx(0.5 * median[4] / 16.0));
  const auto tail = estimate_tail(z, c, 0.5);
  REQUIRE(tail.delta_hat.size() == times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(tail.delta_hat[i] > 0.25);
    CHECK(tail.standard_errors[i] ==
          doctest::Approx(std::sqrt(tail.delta_hat[i] * (1 - tail.delta_hat[i]) / 500.0)));
  }
  CHECK_THROWS_AS(rule_constant(z, 0.5, 300), ValidationError);
}

TEST_CASE("input validation") {
  const std::vector<Int> bad{4, 2};
  CHECK_THROWS_AS(simulate(WalkGroup::Integers, bad, 10, 0), ValidationError);
  CHECK_THROWS_AS(simulate(WalkGroup::Integers, std::vector<Int>{}, 10, 0), ValidationError);
  CHECK_THROWS_AS(simulate(WalkGroup::Integers, std::vector<Int>{1, 2}, 0, 0), ValidationError);
  CHECK_THROWS_AS(parse_walk_group("z2"), ValidationError);
  CHECK(parse_walk_group("zwrz") == WalkGroup::Lamplighter);
  const auto short_grid = simulate(WalkGroup::Integers, std::vector<Int>{0, 1, 2}, 10, 0);
  CHECK_THROWS_AS(estimate_beta(short_grid), EstimationError);
}
