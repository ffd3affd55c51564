// Nelder-Mead simplex minimization, the derivative-free outer loop of the
// variational circuits. Vertex values are cached (no re-evaluation under
// stochastic objectives); the best point ever evaluated is returned, not the
// final simplex.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qabom {

struct NelderMeadOptions {
  int max_iterations = 100;
  double tolerance = 0.0;     // stop when the simplex diameter drops below this
  double initial_step = 0.25; // offset of the dim extra starting vertices

  static constexpr double kReflection = 1.0;
  static constexpr double kExpansion = 2.0;
  static constexpr double kContraction = 0.5;
  static constexpr double kShrink = 0.5;
};

struct NelderMeadResult {
  std::vector<double> best_point;
  double best_value = 0.0;
  std::vector<double> trace;  // best value seen, one entry per iteration
  int iterations = 0;
  int evaluations = 0;
};

template <typename Objective>
NelderMeadResult nelder_mead_minimize(Objective&& objective, const std::vector<double>& x0,
                                      const NelderMeadOptions& options = {}) {
  if (x0.empty()) throw std::invalid_argument("nelder_mead_minimize: empty start point");
  if (options.max_iterations < 1)
    throw std::invalid_argument("nelder_mead_minimize: max_iterations must be >= 1");

  const std::size_t dim = x0.size();
  NelderMeadResult result;

  auto evaluate = [&](const std::vector<double>& x) {
    const double v = objective(x);
    ++result.evaluations;
    if (!std::isfinite(v))
      throw std::runtime_error("nelder_mead_minimize: objective returned a non-finite value at evaluation " +
                               std::to_string(result.evaluations));
    if (result.best_point.empty() || v < result.best_value) {
      result.best_point = x;
      result.best_value = v;
    }
    return v;
  };

  std::vector<std::vector<double>> vertices(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) vertices[i + 1][i] += options.initial_step;
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) values[i] = evaluate(vertices[i]);

  std::vector<std::size_t> order(dim + 1);
  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  };

  auto diameter = [&] {
    double d = 0.0;
    const auto& best = vertices[order[0]];
    for (std::size_t i = 1; i <= dim; ++i)
      for (std::size_t c = 0; c < dim; ++c)
        d = std::max(d, std::abs(vertices[order[i]][c] - best[c]));
    return d;
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    sort_vertices();
    if (diameter() < options.tolerance) break;

    const std::size_t worst = order[dim];
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t c = 0; c < dim; ++c) centroid[c] += vertices[order[i]][c] / static_cast<double>(dim);

    auto along = [&](double t) {
      std::vector<double> x(dim);
      for (std::size_t c = 0; c < dim; ++c) x[c] = centroid[c] + t * (centroid[c] - vertices[worst][c]);
      return x;
    };

    const auto reflected = along(NelderMeadOptions::kReflection);
    const double fr = evaluate(reflected);

    if (fr < values[order[0]]) {
      const auto expanded = along(NelderMeadOptions::kExpansion);
      const double fe = evaluate(expanded);
      if (fe < fr) {
        vertices[worst] = expanded;
        values[worst] = fe;
      } else {
        vertices[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[order[dim - 1]]) {
      vertices[worst] = reflected;
      values[worst] = fr;
    } else {
      // Contract outside toward the reflection if it improved on the worst
      // vertex, otherwise inside; shrink when the contraction fails too.
      const bool outside = fr < values[worst];
      const auto contracted = along(outside ? NelderMeadOptions::kContraction : -NelderMeadOptions::kContraction);
      const double fc = evaluate(contracted);
      if (fc < (outside ? fr : values[worst])) {
        vertices[worst] = contracted;
        values[worst] = fc;
      } else {
        const auto& best = vertices[order[0]];
        for (std::size_t i = 1; i <= dim; ++i) {
          auto& v = vertices[order[i]];
          for (std::size_t c = 0; c < dim; ++c)
            v[c] = best[c] + NelderMeadOptions::kShrink * (v[c] - best[c]);
          values[order[i]] = evaluate(v);
        }
      }
    }

    result.trace.push_back(result.best_value);
    result.iterations = iter + 1;
  }

  return result;
}

}  // namespace qabom
