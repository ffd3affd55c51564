// Ising energy functions on a visible/hidden-partitioned unit graph, the
// full/partial cost and mixer variants used by the alternating-operator
// circuits, an exact Gibbs oracle by enumeration, and diagnostics for the
// best thermal-like state reachable by unitary evolution from the purified
// initial state.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qabom/bits.hpp"
#include "qabom/rng.hpp"

namespace qabom {

// Energy convention (used by every code path in the library):
//   E(z) = - sum_{jk} J_jk z_j z_k - sum_j B_j z_j,  z_j in {-1, +1}.
struct IsingModel {
  int n_units = 0;
  std::vector<int> visible;
  std::vector<int> hidden;
  std::map<std::pair<int, int>, double> couplings;  // key (min, max), j != k
  std::vector<double> biases;                       // one per unit

  static IsingModel restricted(int n_visible, int n_hidden) {
    if (n_visible < 1 || n_hidden < 0)
      throw std::invalid_argument("IsingModel::restricted: bad layer sizes");
    IsingModel m;
    m.n_units = n_visible + n_hidden;
    for (int v = 0; v < n_visible; ++v) m.visible.push_back(v);
    for (int h = 0; h < n_hidden; ++h) m.hidden.push_back(n_visible + h);
    m.biases.assign(static_cast<std::size_t>(m.n_units), 0.0);
    for (int v = 0; v < n_visible; ++v)
      for (int h = 0; h < n_hidden; ++h) m.couplings[{v, n_visible + h}] = 0.0;
    return m;
  }

  int n_visible() const { return static_cast<int>(visible.size()); }
  int n_hidden() const { return static_cast<int>(hidden.size()); }

  bool is_visible(int unit) const {
    return std::find(visible.begin(), visible.end(), unit) != visible.end();
  }

  void set_coupling(int j, int k, double value) {
    check_unit(j);
    check_unit(k);
    if (j == k) throw std::invalid_argument("IsingModel: self-couplings are not allowed");
    couplings[{std::min(j, k), std::max(j, k)}] = value;
  }

  void set_bias(int j, double value) {
    check_unit(j);
    biases[static_cast<std::size_t>(j)] = value;
  }

  void validate() const {
    if (n_units < 1) throw std::invalid_argument("IsingModel: empty model");
    if (biases.size() != static_cast<std::size_t>(n_units))
      throw std::invalid_argument("IsingModel: bias table size mismatch");
    std::vector<char> seen(static_cast<std::size_t>(n_units), 0);
    for (int u : visible) mark_partition(seen, u);
    for (int u : hidden) mark_partition(seen, u);
    for (int u = 0; u < n_units; ++u)
      if (!seen[static_cast<std::size_t>(u)])
        throw std::invalid_argument("IsingModel: unit " + std::to_string(u) + " unassigned");
    for (const auto& [key, J] : couplings) {
      (void)J;
      check_unit(key.first);
      check_unit(key.second);
      if (key.first >= key.second)
        throw std::invalid_argument("IsingModel: coupling keys must be ordered distinct pairs");
    }
  }

  void check_unit(int u) const {
    if (u < 0 || u >= n_units) throw std::out_of_range("IsingModel: unit index out of range");
  }

 private:
  void mark_partition(std::vector<char>& seen, int u) const {
    check_unit(u);
    if (seen[static_cast<std::size_t>(u)])
      throw std::invalid_argument("IsingModel: unit " + std::to_string(u) + " listed twice");
    seen[static_cast<std::size_t>(u)] = 1;
  }
};

enum class CostVariant { Full, Partial };

struct CostTerm {
  std::uint64_t mask = 0;  // units the Z-product acts on
  double coeff = 0.0;      // contribution = coeff * prod_{j in mask} z_j
};

// Diagonal cost function over the model's units. The partial variant keeps
// every coupling but drops the visible-unit bias terms.
class CostHamiltonian {
 public:
  CostHamiltonian(const IsingModel& model, CostVariant variant)
      : model_(&model), variant_(variant) {
    model.validate();
    for (const auto& [key, J] : model.couplings)
      terms_.push_back({(1ULL << key.first) | (1ULL << key.second), -J});
    for (int j = 0; j < model.n_units; ++j) {
      if (variant == CostVariant::Partial && model.is_visible(j)) continue;
      terms_.push_back({1ULL << j, -model.biases[static_cast<std::size_t>(j)]});
    }
  }

  const IsingModel& model() const { return *model_; }
  CostVariant variant() const { return variant_; }
  int n_units() const { return model_->n_units; }
  const std::vector<CostTerm>& terms() const { return terms_; }

  double energy_bits(std::uint64_t bits) const {
    double e = 0.0;
    for (const auto& t : terms_) e += t.coeff * z_product_sign(bits, t.mask);
    return e;
  }

  double energy(std::span<const int> spins) const {
    if (spins.size() != static_cast<std::size_t>(model_->n_units))
      throw std::invalid_argument("energy: one spin per unit required");
    std::uint64_t bits = 0;
    for (std::size_t j = 0; j < spins.size(); ++j) {
      if (spins[j] == -1)
        bits |= 1ULL << j;
      else if (spins[j] != 1)
        throw std::invalid_argument("energy: spins must be +1 or -1");
    }
    return energy_bits(bits);
  }

  std::vector<double> energy_table() const {
    if (n_units() > 20) throw std::invalid_argument("energy_table: more than 20 units");
    std::vector<double> table(1ULL << n_units(), 0.0);
    for (const auto& t : terms_)
      for (std::uint64_t z = 0; z < table.size(); ++z) table[z] += t.coeff * z_product_sign(z, t.mask);
    return table;
  }

 private:
  const IsingModel* model_;
  CostVariant variant_;
  std::vector<CostTerm> terms_;
};

// Mixer support: all units (full) or hidden units only (partial).
inline std::vector<int> mixer_units(const IsingModel& model, CostVariant variant) {
  if (variant == CostVariant::Full) {
    std::vector<int> all(static_cast<std::size_t>(model.n_units));
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  std::vector<int> h = model.hidden;
  std::sort(h.begin(), h.end());
  return h;
}

// Exact Boltzmann distribution over spin assignments, by enumeration.
class GibbsDistribution {
 public:
  GibbsDistribution(const CostHamiltonian& hamiltonian, double beta)
      : n_units_(hamiltonian.n_units()), energies_(hamiltonian.energy_table()), probs_(energies_.size()) {
    if (beta < 0.0) throw std::invalid_argument("GibbsDistribution: beta must be >= 0");
    const double e_min = *std::min_element(energies_.begin(), energies_.end());
    double z = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      probs_[i] = std::exp(-beta * (energies_[i] - e_min));
      z += probs_[i];
    }
    for (auto& p : probs_) p /= z;
    log_partition_ = std::log(z) - beta * e_min;
  }

  int n_units() const { return n_units_; }
  const std::vector<double>& probabilities() const { return probs_; }
  double probability(std::uint64_t bits) const { return probs_[bits]; }
  double log_partition() const { return log_partition_; }

  double expectation_z(int j) const { return expectation_z_product(1ULL << j); }
  double expectation_zz(int j, int k) const { return expectation_z_product((1ULL << j) | (1ULL << k)); }

  double expectation_z_product(std::uint64_t mask) const {
    double s = 0.0;
    for (std::uint64_t z = 0; z < probs_.size(); ++z) s += probs_[z] * z_product_sign(z, mask);
    return s;
  }

  double expectation_energy() const {
    double s = 0.0;
    for (std::uint64_t z = 0; z < probs_.size(); ++z) s += probs_[z] * energies_[z];
    return s;
  }

 private:
  int n_units_;
  std::vector<double> energies_;
  std::vector<double> probs_;
  double log_partition_ = 0.0;
};

inline GibbsDistribution gibbs_oracle(const CostHamiltonian& hamiltonian, double beta) {
  if (hamiltonian.n_units() > 20) throw std::invalid_argument("gibbs_oracle: more than 20 units");
  return GibbsDistribution(hamiltonian, beta);
}

// Spectrum of the traced purified initial state on q_count qubits: the
// eigenvalue indexed by bitstring k is p_max^(Q - |k|) * p_min^|k| with
// p_max/min = (1 +- tanh beta)/2, a decaying exponential in the Hamming
// weight |k|. Sums to 1; at beta = 0 every eigenvalue equals 2^-Q.
inline std::vector<double> pseudo_thermal_spectrum(double beta, int q_count) {
  if (q_count < 1 || q_count > 20)
    throw std::invalid_argument("pseudo_thermal_spectrum: qubit count out of range");
  if (beta < 0.0) throw std::invalid_argument("pseudo_thermal_spectrum: beta must be >= 0");
  const double p_max = 0.5 * (1.0 + std::tanh(beta));
  const double p_min = 0.5 * (1.0 - std::tanh(beta));
  std::vector<double> lambda(1ULL << q_count);
  for (std::uint64_t k = 0; k < lambda.size(); ++k) {
    const int w = std::popcount(k);
    lambda[k] = std::pow(p_max, q_count - w) * std::pow(p_min, w);
  }
  return lambda;
}

// Minimal-energy state reachable from the initial thermal state by unitary
// evolution: energies sorted ascending (ties by basis index) receive the
// spectrum sorted descending. Returned as diagonal probabilities in the
// computational basis (the cost function is diagonal).
inline std::vector<double> min_energy_pseudo_thermal(const CostHamiltonian& hamiltonian, double beta) {
  if (hamiltonian.n_units() > 12)
    throw std::invalid_argument("min_energy_pseudo_thermal: more than 12 units");
  const auto energies = hamiltonian.energy_table();
  auto lambda = pseudo_thermal_spectrum(beta, hamiltonian.n_units());
  std::sort(lambda.begin(), lambda.end(), std::greater<double>());

  std::vector<std::uint64_t> order(energies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return energies[a] < energies[b]; });

  std::vector<double> probs(energies.size(), 0.0);
  for (std::size_t r = 0; r < order.size(); ++r) probs[order[r]] = lambda[r];
  return probs;
}

// D(rho_min_energy || rho_Gibbs) in nats, computed directly from the two
// diagonal distributions.
inline double pseudo_thermal_divergence(const CostHamiltonian& hamiltonian, double beta) {
  if (hamiltonian.n_units() > 12)
    throw std::invalid_argument("pseudo_thermal_divergence: more than 12 units");
  const auto probs = min_energy_pseudo_thermal(hamiltonian, beta);
  const GibbsDistribution gibbs(hamiltonian, beta);
  double d = 0.0;
  for (std::uint64_t z = 0; z < probs.size(); ++z) {
    if (probs[z] <= 0.0) continue;
    d += probs[z] * (std::log(probs[z]) - std::log(gibbs.probability(z)));
  }
  return std::max(0.0, d);
}

// Same divergence via the analytic entropy of the initial spectrum:
//   D = beta <E> + ln Z_C - Q ln(2 cosh beta) + Q beta tanh(beta).
// The entropy term here corrects the normalization of the source formula;
// `pseudo_thermal_divergence` is the authoritative direct computation.
inline double pseudo_thermal_divergence_closed_form(const CostHamiltonian& hamiltonian, double beta) {
  if (hamiltonian.n_units() > 12)
    throw std::invalid_argument("pseudo_thermal_divergence_closed_form: more than 12 units");
  const auto probs = min_energy_pseudo_thermal(hamiltonian, beta);
  const auto energies = hamiltonian.energy_table();
  double mean_energy = 0.0;
  for (std::uint64_t z = 0; z < probs.size(); ++z) mean_energy += probs[z] * energies[z];
  const GibbsDistribution gibbs(hamiltonian, beta);
  const int q = hamiltonian.n_units();
  return beta * mean_energy + gibbs.log_partition() - q * std::log(2.0 * std::cosh(beta)) +
         q * beta * std::tanh(beta);
}

}  // namespace qabom
