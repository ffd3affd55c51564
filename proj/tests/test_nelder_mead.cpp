#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>

#include "qabom/nelder_mead.hpp"

using namespace qabom;
using Catch::Approx;

TEST_CASE("finds the minimum of a 1-D parabola", "[optimizer]") {
  NelderMeadOptions options;
  options.max_iterations = 100;
  const auto result = nelder_mead_minimize(
      [](const std::vector<double>& x) { return (x[0] - 2.0) * (x[0] - 2.0); }, {0.0}, options);
  REQUIRE(std::abs(result.best_point[0] - 2.0) < 1e-4);
}

TEST_CASE("constant objectives terminate at the iteration cap", "[optimizer]") {
  NelderMeadOptions options;
  options.max_iterations = 25;
  const auto result =
      nelder_mead_minimize([](const std::vector<double>&) { return 3.5; }, {1.0, -2.0}, options);
  REQUIRE(result.best_value == Approx(3.5));
  REQUIRE(result.iterations == 25);
}

TEST_CASE("anisotropic 2-D quadratic", "[optimizer]") {
  NelderMeadOptions options;
  options.max_iterations = 200;
  const auto result = nelder_mead_minimize(
      [](const std::vector<double>& x) { return x[0] * x[0] + 10.0 * x[1] * x[1]; }, {3.0, 3.0},
      options);
  REQUIRE(result.best_value < 1e-6);
}

TEST_CASE("best-seen trace is non-increasing", "[optimizer]") {
  NelderMeadOptions options;
  options.max_iterations = 80;
  const auto result = nelder_mead_minimize(
      [](const std::vector<double>& x) {
        return std::sin(3.0 * x[0]) + x[0] * x[0] + 0.5 * std::cos(7.0 * x[1]);
      },
      {1.5, -0.5}, options);
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    REQUIRE(result.trace[i] <= result.trace[i - 1] + 1e-15);
  REQUIRE(result.best_value <= result.trace.front());
}

TEST_CASE("deterministic for a deterministic objective", "[optimizer]") {
  auto f = [](const std::vector<double>& x) { return std::abs(x[0] - 0.3) + x[1] * x[1]; };
  const auto a = nelder_mead_minimize(f, {1.0, 1.0});
  const auto b = nelder_mead_minimize(f, {1.0, 1.0});
  REQUIRE(a.best_point == b.best_point);
  REQUIRE(a.best_value == b.best_value);
  REQUIRE(a.evaluations == b.evaluations);
}

TEST_CASE("tolerance stops a shrinking simplex early", "[optimizer]") {
  NelderMeadOptions options;
  options.max_iterations = 10000;
  options.tolerance = 1e-8;
  const auto result = nelder_mead_minimize(
      [](const std::vector<double>& x) { return x[0] * x[0]; }, {1.0}, options);
  REQUIRE(result.iterations < 10000);
  REQUIRE(std::abs(result.best_point[0]) < 1e-4);
}

TEST_CASE("non-finite objective values abort with a diagnostic", "[optimizer]") {
  REQUIRE_THROWS_AS(nelder_mead_minimize(
                        [](const std::vector<double>& x) {
                          return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
                        },
                        {0.0}),
                    std::runtime_error);
  REQUIRE_THROWS_AS(nelder_mead_minimize([](const std::vector<double>&) { return 1.0; },
                                         std::vector<double>{}),
                    std::invalid_argument);
}
