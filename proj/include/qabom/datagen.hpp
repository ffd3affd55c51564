// Synthetic dataset generators with exact generating distributions, used for
// training experiments and for evaluating reconstruction KL against ground
// truth instead of a finite test sample.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qabom/distribution.hpp"
#include "qabom/rng.hpp"

namespace qabom {

// k source bits, each Bernoulli(eta), encoded by an [n, k] block repetition
// code (source bit i fills positions [i*n/k, (i+1)*n/k)), then independent
// bit-flip noise with probability flip_p on each of the n output bits.
struct CodedBernoulliParams {
  int n_bits = 4;
  int source_bits = 2;
  double eta = 0.6;
  double flip_p = 0.025;

  void validate() const {
    if (n_bits < 1 || n_bits > 20 || source_bits < 1 || source_bits > n_bits)
      throw std::invalid_argument("CodedBernoulliParams: bad widths");
    if (n_bits % source_bits != 0)
      throw std::invalid_argument("CodedBernoulliParams: n_bits must be divisible by source_bits");
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("CodedBernoulliParams: eta not in [0, 1]");
    if (!(flip_p >= 0.0 && flip_p <= 1.0))
      throw std::invalid_argument("CodedBernoulliParams: flip_p not in [0, 1]");
  }

  std::uint32_t encode(std::uint32_t word) const {
    const int rep = n_bits / source_bits;
    std::uint32_t code = 0;
    for (int i = 0; i < source_bits; ++i)
      if ((word >> i) & 1u)
        for (int r = 0; r < rep; ++r) code |= 1u << (i * rep + r);
    return code;
  }
};

inline DataDistribution coded_bernoulli_distribution(const CodedBernoulliParams& params) {
  params.validate();
  DataDistribution dist;
  dist.n_bits = params.n_bits;
  dist.pmf.assign(1ULL << params.n_bits, 0.0);
  for (std::uint32_t word = 0; word < (1u << params.source_bits); ++word) {
    double p_word = 1.0;
    for (int i = 0; i < params.source_bits; ++i)
      p_word *= ((word >> i) & 1u) ? params.eta : (1.0 - params.eta);
    const std::uint32_t code = params.encode(word);
    for (std::uint64_t x = 0; x < dist.pmf.size(); ++x) {
      const int flips = std::popcount(static_cast<std::uint32_t>(x) ^ code);
      dist.pmf[x] += p_word * std::pow(params.flip_p, flips) *
                     std::pow(1.0 - params.flip_p, params.n_bits - flips);
    }
  }
  return dist;
}

inline Dataset coded_bernoulli_sample(const CodedBernoulliParams& params, int count, RngStream& rng) {
  params.validate();
  if (count < 0) throw std::invalid_argument("coded_bernoulli_sample: negative count");
  Dataset ds;
  ds.n_bits = params.n_bits;
  ds.exact = coded_bernoulli_distribution(params);
  ds.points.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    std::uint32_t word = 0;
    for (int i = 0; i < params.source_bits; ++i)
      if (rng.bernoulli(params.eta)) word |= 1u << i;
    std::uint32_t x = params.encode(word);
    for (int b = 0; b < params.n_bits; ++b)
      if (rng.bernoulli(params.flip_p)) x ^= 1u << b;
    ds.points.push_back(x);
  }
  return ds;
}

// Mixture of "mode" strings: a sample picks a mode uniformly, then each bit
// stays equal to the mode bit with probability stay_p (flips with 1-stay_p).
// P(x) = (1/k) sum_j stay_p^(n - d(x, m_j)) (1 - stay_p)^(d(x, m_j)).
struct HiddenModeParams {
  int n_bits = 4;
  std::vector<std::uint32_t> modes;
  double stay_p = 0.9;

  void validate() const {
    if (n_bits < 1 || n_bits > 20) throw std::invalid_argument("HiddenModeParams: bad width");
    if (modes.empty()) throw std::invalid_argument("HiddenModeParams: at least one mode required");
    for (std::uint32_t m : modes)
      if (m >> n_bits) throw std::invalid_argument("HiddenModeParams: mode wider than n_bits");
    if (!(stay_p >= 0.0 && stay_p <= 1.0))
      throw std::invalid_argument("HiddenModeParams: stay_p not in [0, 1]");
  }
};

inline DataDistribution hidden_mode_distribution(const HiddenModeParams& params) {
  params.validate();
  DataDistribution dist;
  dist.n_bits = params.n_bits;
  dist.pmf.assign(1ULL << params.n_bits, 0.0);
  for (std::uint64_t x = 0; x < dist.pmf.size(); ++x) {
    double p = 0.0;
    for (std::uint32_t m : params.modes) {
      const int d = std::popcount(static_cast<std::uint32_t>(x) ^ m);
      p += std::pow(params.stay_p, params.n_bits - d) * std::pow(1.0 - params.stay_p, d);
    }
    dist.pmf[x] = p / static_cast<double>(params.modes.size());
  }
  return dist;
}

inline Dataset hidden_mode_sample(const HiddenModeParams& params, int count, RngStream& rng) {
  params.validate();
  if (count < 0) throw std::invalid_argument("hidden_mode_sample: negative count");
  Dataset ds;
  ds.n_bits = params.n_bits;
  ds.exact = hidden_mode_distribution(params);
  ds.points.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    std::uint32_t x = params.modes[rng.next_index(params.modes.size())];
    for (int b = 0; b < params.n_bits; ++b)
      if (!rng.bernoulli(params.stay_p)) x ^= 1u << b;
    ds.points.push_back(x);
  }
  return ds;
}

}  // namespace qabom
