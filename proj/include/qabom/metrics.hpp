// Evaluation metrics: the exact visible marginal of a restricted network at
// inverse temperature beta, KL divergence in nats, and the squared error of
// estimated weight updates.
#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "qabom/distribution.hpp"
#include "qabom/ising.hpp"

namespace qabom {

// p(v) = sum_h exp(-beta E(v, h)) / Z by exact enumeration over all units.
inline DataDistribution rbm_visible_marginal(const IsingModel& model, double beta) {
  model.validate();
  if (model.n_units > 20) throw std::invalid_argument("rbm_visible_marginal: more than 20 units");
  if (model.visible.empty()) throw std::invalid_argument("rbm_visible_marginal: no visible units");
  const CostHamiltonian hamiltonian(model, CostVariant::Full);
  const GibbsDistribution gibbs(hamiltonian, beta);

  DataDistribution marginal;
  marginal.n_bits = model.n_visible();
  marginal.pmf.assign(1ULL << marginal.n_bits, 0.0);
  for (std::uint64_t z = 0; z < gibbs.probabilities().size(); ++z) {
    std::uint64_t v_index = 0;
    for (std::size_t r = 0; r < model.visible.size(); ++r)
      if (bit_of(z, model.visible[r])) v_index |= 1ULL << r;
    marginal.pmf[v_index] += gibbs.probability(z);
  }
  return marginal;
}

// D(p_data || p_model) = sum p ln(p/q) in nats, with 0 ln 0 = 0. Returns
// +infinity when the data puts mass outside the model's support.
inline double kl_divergence(const DataDistribution& p_data, const DataDistribution& p_model) {
  if (p_data.n_bits != p_model.n_bits) throw std::invalid_argument("kl_divergence: width mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p_data.pmf.size(); ++i) {
    const double p = p_data.pmf[i];
    if (p <= 0.0) continue;
    const double q = p_model.pmf[i];
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    d += p * std::log(p / q);
  }
  return d;
}

// || estimated - exact ||^2
inline double update_error(std::span<const double> estimated, std::span<const double> exact) {
  if (estimated.size() != exact.size()) throw std::invalid_argument("update_error: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const double d = estimated[i] - exact[i];
    s += d * d;
  }
  return s;
}

}  // namespace qabom
