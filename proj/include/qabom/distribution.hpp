// Distributions over fixed-width bitstrings and sampled datasets.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qabom/bits.hpp"
#include "qabom/rng.hpp"

namespace qabom {

struct DataDistribution {
  int n_bits = 0;
  std::vector<double> pmf;  // indexed by basis index; bit i of the index = character i

  static DataDistribution uniform(int n_bits) {
    DataDistribution d;
    d.n_bits = n_bits;
    d.pmf.assign(1ULL << n_bits, 1.0 / static_cast<double>(1ULL << n_bits));
    return d;
  }

  void validate(double tol = 1e-12) const {
    if (n_bits < 1 || n_bits > 20) throw std::invalid_argument("DataDistribution: bad width");
    if (pmf.size() != (1ULL << n_bits)) throw std::invalid_argument("DataDistribution: bad table size");
    double sum = 0.0;
    for (double p : pmf) {
      if (p < -tol) throw std::invalid_argument("DataDistribution: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("DataDistribution: probabilities do not sum to 1");
  }

  double probability(std::uint64_t index) const { return pmf.at(index); }
  double probability(const std::string& bits) const {
    if (bits.size() != static_cast<std::size_t>(n_bits))
      throw std::invalid_argument("DataDistribution: width mismatch");
    return pmf.at(parse_bitstring(bits));
  }

  std::uint64_t sample(RngStream& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::uint64_t i = 0; i < pmf.size(); ++i) {
      acc += pmf[i];
      if (u < acc) return i;
    }
    return pmf.size() - 1;
  }

  double total_variation_distance(const DataDistribution& other) const {
    if (other.n_bits != n_bits) throw std::invalid_argument("total_variation_distance: width mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) d += std::abs(pmf[i] - other.pmf[i]);
    return 0.5 * d;
  }
};

struct Dataset {
  int n_bits = 0;
  std::vector<std::uint32_t> points;              // bitstring indices
  std::optional<DataDistribution> exact;          // generating distribution, when known

  std::size_t size() const { return points.size(); }

  void validate() const {
    if (n_bits < 1 || n_bits > 20) throw std::invalid_argument("Dataset: bad width");
    for (std::uint32_t p : points)
      if (p >> n_bits) throw std::invalid_argument("Dataset: point wider than n_bits");
    if (exact) {
      if (exact->n_bits != n_bits) throw std::invalid_argument("Dataset: distribution width mismatch");
      exact->validate(1e-9);
    }
  }

  DataDistribution empirical() const {
    if (points.empty()) throw std::invalid_argument("Dataset::empirical: empty dataset");
    DataDistribution d;
    d.n_bits = n_bits;
    d.pmf.assign(1ULL << n_bits, 0.0);
    for (std::uint32_t p : points) d.pmf[p] += 1.0 / static_cast<double>(points.size());
    return d;
  }
};

}  // namespace qabom
