// Quantum approximate thermalization: purified thermal preparation, the
// P-pulse alternating cost/mixer circuit, shot-based expectation estimation
// (QEE) and the derivative-free angle optimization loop. Clamped circuits
// basis-prepare the visible units (fixed string, per-shot random data point,
// or an explicit address-register superposition over a dataset).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qabom/distribution.hpp"
#include "qabom/ising.hpp"
#include "qabom/nelder_mead.hpp"
#include "qabom/noise.hpp"
#include "qabom/rng.hpp"
#include "qabom/state.hpp"

namespace qabom {

struct PulseSchedule {
  std::vector<double> gammas;
  std::vector<double> nus;

  int pulses() const { return static_cast<int>(gammas.size()); }

  void validate() const {
    if (gammas.size() != nus.size())
      throw std::invalid_argument("PulseSchedule: gamma/nu lengths differ");
  }

  // Uniform in [0, 2*pi); draws all gammas, then all nus.
  static PulseSchedule random(int pulses, RngStream rng) {
    if (pulses < 0) throw std::invalid_argument("PulseSchedule::random: negative pulse count");
    PulseSchedule s;
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int l = 0; l < pulses; ++l) s.gammas.push_back(rng.uniform(0.0, two_pi));
    for (int l = 0; l < pulses; ++l) s.nus.push_back(rng.uniform(0.0, two_pi));
    return s;
  }

  std::vector<double> flatten() const {
    std::vector<double> x = gammas;
    x.insert(x.end(), nus.begin(), nus.end());
    return x;
  }

  static PulseSchedule from_flat(int pulses, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(2 * pulses))
      throw std::invalid_argument("PulseSchedule::from_flat: wrong length");
    PulseSchedule s;
    s.gammas.assign(x.begin(), x.begin() + pulses);
    s.nus.assign(x.begin() + pulses, x.end());
    return s;
  }
};

enum class ClampMode { None, Fixed, RandomizedDataset, QramDataset };

struct ClampSource {
  ClampMode mode = ClampMode::None;
  std::uint32_t fixed_bits = 0;
  const Dataset* dataset = nullptr;

  static ClampSource none() { return {}; }
  static ClampSource fixed(std::uint32_t bits) { return {ClampMode::Fixed, bits, nullptr}; }
  static ClampSource randomized(const Dataset& ds) { return {ClampMode::RandomizedDataset, 0, &ds}; }
  static ClampSource qram(const Dataset& ds) { return {ClampMode::QramDataset, 0, &ds}; }

  bool clamped() const { return mode != ClampMode::None; }
};

struct ThermalizeConfig {
  double beta = 1.0;
  int pulses = 3;
  int shots = 500;
  int opt_iterations = 100;
  NoiseModel noise;
  ClampSource clamp;
  int max_address_qubits = 8;

  void validate() const {
    if (beta < 0.0) throw std::invalid_argument("ThermalizeConfig: beta must be >= 0");
    if (pulses < 0) throw std::invalid_argument("ThermalizeConfig: pulses must be >= 0");
    if (shots < 1) throw std::invalid_argument("ThermalizeConfig: shots must be >= 1");
    if (opt_iterations < 1) throw std::invalid_argument("ThermalizeConfig: opt_iterations must be >= 1");
    noise.validate();
    if ((clamp.mode == ClampMode::RandomizedDataset || clamp.mode == ClampMode::QramDataset) &&
        (clamp.dataset == nullptr || clamp.dataset->points.empty()))
      throw std::invalid_argument("ThermalizeConfig: dataset clamp requires a non-empty dataset");
  }
};

// ---------------------------------------------------------------------------
// Circuit representation

enum class GateKind { RotX, RotZ, RotZZ, PauliX, PauliY, PauliZ, PairPrep, BasisPrep };

struct GateOp {
  GateKind kind{};
  std::array<int, 2> targets{-1, -1};
  int n_targets = 1;
  double angle = 0.0;

  static GateOp rot_x(int q, double angle) { return {GateKind::RotX, {q, -1}, 1, angle}; }
  static GateOp rot_z(int q, double angle) { return {GateKind::RotZ, {q, -1}, 1, angle}; }
  static GateOp rot_zz(int q1, int q2, double angle) { return {GateKind::RotZZ, {q1, q2}, 2, angle}; }
  static GateOp pauli_x(int q) { return {GateKind::PauliX, {q, -1}, 1, 0.0}; }
  static GateOp pauli_y(int q) { return {GateKind::PauliY, {q, -1}, 1, 0.0}; }
  static GateOp pauli_z(int q) { return {GateKind::PauliZ, {q, -1}, 1, 0.0}; }
  static GateOp pair_prep(int system, int environment, double theta) {
    return {GateKind::PairPrep, {system, environment}, 2, theta};
  }
  // Flips q from |0> to |1>; used to basis-prepare clamped visibles.
  static GateOp basis_prep(int q) { return {GateKind::BasisPrep, {q, -1}, 1, 0.0}; }
};

inline void check_gate(const GateOp& g, int n_qubits) {
  for (int t = 0; t < g.n_targets; ++t)
    if (g.targets[t] < 0 || g.targets[t] >= n_qubits)
      throw std::out_of_range("GateOp: target out of range");
  if (g.n_targets == 2 && g.targets[0] == g.targets[1])
    throw std::invalid_argument("GateOp: targets must be distinct");
}

// Applies a gate sequence with one depolarizing-channel sample per target
// after every gate. Preparation stages are noiseless unless the model says
// otherwise; PairPrep counts as a one-qubit rotation followed by a two-qubit
// entangler, i.e. two noise sites on its way through.
inline void run_gates(StateVector& st, std::span<const GateOp> gates, const NoiseModel& noise,
                      RngStream& rng, bool prep_stage = false) {
  const bool noisy = noise.enabled() && (!prep_stage || noise.noisy_prep);
  auto noise_site = [&](int q) {
    if (noisy) apply_depolarizing_trajectory(st, q, noise.p, rng);
  };
  for (const auto& g : gates) {
    check_gate(g, st.n_qubits());
    switch (g.kind) {
      case GateKind::RotX:
        st.apply_exp_x(g.targets[0], g.angle);
        noise_site(g.targets[0]);
        break;
      case GateKind::RotZ:
        st.apply_exp_z(g.targets[0], g.angle);
        noise_site(g.targets[0]);
        break;
      case GateKind::RotZZ:
        st.apply_exp_zz(g.targets[0], g.targets[1], g.angle);
        noise_site(g.targets[0]);
        noise_site(g.targets[1]);
        break;
      case GateKind::PauliX:
        st.apply_x(g.targets[0]);
        noise_site(g.targets[0]);
        break;
      case GateKind::PauliY:
        st.apply_y(g.targets[0]);
        noise_site(g.targets[0]);
        break;
      case GateKind::PauliZ:
        st.apply_z(g.targets[0]);
        noise_site(g.targets[0]);
        break;
      case GateKind::PairPrep:
        st.apply_ry(g.targets[0], g.angle);
        noise_site(g.targets[0]);
        st.apply_cnot(g.targets[0], g.targets[1]);
        noise_site(g.targets[0]);
        noise_site(g.targets[1]);
        break;
      case GateKind::BasisPrep:
        st.apply_x(g.targets[0]);
        noise_site(g.targets[0]);
        break;
    }
  }
}

// One pulse layer l multiplies e^{-i nu_l H_M} e^{-i gamma_l H_C}: cost first
// (one ZZ rotation per coupling, one Z rotation per retained bias), then the
// mixer X rotations.
inline std::vector<GateOp> compile_pulse_gates(const CostHamiltonian& hamiltonian,
                                               const std::vector<int>& mixer,
                                               const PulseSchedule& schedule) {
  schedule.validate();
  std::vector<GateOp> gates;
  for (int l = 0; l < schedule.pulses(); ++l) {
    const double gamma = schedule.gammas[static_cast<std::size_t>(l)];
    const double nu = schedule.nus[static_cast<std::size_t>(l)];
    for (const auto& t : hamiltonian.terms()) {
      if (std::popcount(t.mask) == 2) {
        const int q1 = std::countr_zero(t.mask);
        const int q2 = 63 - std::countl_zero(t.mask);
        gates.push_back(GateOp::rot_zz(q1, q2, gamma * t.coeff));
      } else {
        gates.push_back(GateOp::rot_z(std::countr_zero(t.mask), gamma * t.coeff));
      }
    }
    for (int q : mixer) gates.push_back(GateOp::rot_x(q, nu));
  }
  return gates;
}

// ---------------------------------------------------------------------------
// Register layout

// Units always occupy qubits [0, n_units); environment partners of the
// purified units come next; address qubits (QRAM clamping only) come last.
struct CircuitPlan {
  CostVariant variant = CostVariant::Full;
  int n_units = 0;
  int n_qubits = 0;
  std::vector<int> purified_units;  // ascending
  std::vector<int> env_qubits;      // parallel to purified_units
  std::vector<int> address_qubits;  // QRAM clamping only
};

inline int address_qubit_count(std::size_t dataset_size) {
  int a = 0;
  while ((1ULL << a) < dataset_size) ++a;
  return a;
}

inline CircuitPlan plan_circuit(const IsingModel& model, CostVariant variant,
                                const ThermalizeConfig& cfg) {
  model.validate();
  cfg.validate();
  if (cfg.clamp.clamped() && variant != CostVariant::Partial)
    throw std::invalid_argument("plan_circuit: clamped runs use the partial variant");

  CircuitPlan plan;
  plan.variant = variant;
  plan.n_units = model.n_units;
  if (cfg.clamp.clamped()) {
    plan.purified_units = model.hidden;
    std::sort(plan.purified_units.begin(), plan.purified_units.end());
  } else {
    plan.purified_units.resize(static_cast<std::size_t>(model.n_units));
    std::iota(plan.purified_units.begin(), plan.purified_units.end(), 0);
  }
  int next = model.n_units;
  for (std::size_t r = 0; r < plan.purified_units.size(); ++r) plan.env_qubits.push_back(next++);
  if (cfg.clamp.mode == ClampMode::QramDataset) {
    const int a = address_qubit_count(cfg.clamp.dataset->size());
    if (a > cfg.max_address_qubits)
      throw std::invalid_argument("plan_circuit: dataset exceeds the address-register budget");
    for (int i = 0; i < a; ++i) plan.address_qubits.push_back(next++);
  }
  plan.n_qubits = next;
  if (plan.n_qubits > StateVector::kMaxQubits)
    throw std::invalid_argument("plan_circuit: register exceeds the qubit limit");
  return plan;
}

// Spreads the bits of a visible-layer string onto the model's visible units.
inline std::uint64_t visible_bits_to_units(const IsingModel& model, std::uint32_t data_bits) {
  if (model.n_visible() < 32 && (data_bits >> model.n_visible()))
    throw std::invalid_argument("clamp string wider than the visible layer");
  std::uint64_t out = 0;
  for (std::size_t r = 0; r < model.visible.size(); ++r)
    if ((data_bits >> r) & 1u) out |= 1ULL << model.visible[r];
  return out;
}

// Initial state: |0...0> with clamped visibles basis-prepared, purified units
// entangled with their environment partners; QRAM clamping starts instead
// from (1/sqrt|D|) sum_j |d_j>_V |j>_A before the pair preparations.
inline StateVector prepare_initial_state(const IsingModel& model, const CircuitPlan& plan,
                                         const ThermalizeConfig& cfg, RngStream& rng) {
  StateVector st(plan.n_qubits);
  std::vector<GateOp> prep;

  if (cfg.clamp.mode == ClampMode::QramDataset) {
    const auto& points = cfg.clamp.dataset->points;
    std::vector<cdouble> amps(st.dim(), cdouble{0.0, 0.0});
    const double w = 1.0 / std::sqrt(static_cast<double>(points.size()));
    for (std::size_t j = 0; j < points.size(); ++j) {
      std::uint64_t index = visible_bits_to_units(model, points[j]);
      for (std::size_t a = 0; a < plan.address_qubits.size(); ++a)
        if ((j >> a) & 1ULL) index |= 1ULL << plan.address_qubits[a];
      amps[index] += w;
    }
    st = StateVector::from_amplitudes(plan.n_qubits, std::move(amps));
  } else if (cfg.clamp.clamped()) {
    std::uint32_t bits = 0;
    if (cfg.clamp.mode == ClampMode::Fixed) {
      bits = cfg.clamp.fixed_bits;
    } else {
      bits = cfg.clamp.dataset->points[rng.next_index(cfg.clamp.dataset->points.size())];
    }
    const std::uint64_t unit_bits = visible_bits_to_units(model, bits);
    for (int v : model.visible)
      if ((unit_bits >> v) & 1ULL) prep.push_back(GateOp::basis_prep(v));
  }

  const double theta = thermal_pair_angle(cfg.beta);
  for (std::size_t r = 0; r < plan.purified_units.size(); ++r)
    prep.push_back(GateOp::pair_prep(plan.purified_units[r], plan.env_qubits[r], theta));

  run_gates(st, prep, cfg.noise, rng, /*prep_stage=*/true);
  return st;
}

// Full-register run: preparation followed by the P pulses (with one noise
// trajectory when p > 0). Randomized-dataset clamping draws one data point
// per call, i.e. per preparation.
inline StateVector run_circuit(const IsingModel& model, CostVariant variant,
                               const PulseSchedule& schedule, const ThermalizeConfig& cfg,
                               RngStream rng) {
  const CircuitPlan plan = plan_circuit(model, variant, cfg);
  schedule.validate();
  StateVector st = prepare_initial_state(model, plan, cfg, rng);
  const CostHamiltonian hamiltonian(model, variant);
  const auto gates = compile_pulse_gates(hamiltonian, mixer_units(model, variant), schedule);
  run_gates(st, gates, cfg.noise, rng);
  return st;
}

// ---------------------------------------------------------------------------
// Expectation estimation

struct TermEstimates {
  std::vector<double> unit_z;                      // <Z_j> per unit
  std::map<std::pair<int, int>, double> edge_zz;   // <Z_j Z_k> per coupling key
  double energy = 0.0;                             // variant-weighted estimate

  // Means of the exact state expectations over the same trajectories
  // (identical to the wavefunction values when the circuit is deterministic).
  bool has_exact = false;
  std::vector<double> unit_z_exact;
  std::map<std::pair<int, int>, double> edge_zz_exact;
  double energy_exact = 0.0;
};

namespace detail {

struct TermAccumulator {
  explicit TermAccumulator(const IsingModel& model)
      : model_(&model), unit_sum(static_cast<std::size_t>(model.n_units), 0.0) {
    for (const auto& [key, J] : model.couplings) {
      (void)J;
      edge_sum[key] = 0.0;
    }
  }

  void add_sample(std::uint64_t unit_bits) {
    for (int j = 0; j < model_->n_units; ++j)
      unit_sum[static_cast<std::size_t>(j)] += spin_of(unit_bits, j);
    for (auto& [key, sum] : edge_sum)
      sum += spin_of(unit_bits, key.first) * spin_of(unit_bits, key.second);
    ++count;
  }

  // Exact expectations of one trajectory state, weighted like one sample.
  void add_exact(const StateVector& st) {
    for (int j = 0; j < model_->n_units; ++j)
      unit_exact_sum_cached(j) += st.expectation_z_product(1ULL << j);
    for (auto& [key, sum] : edge_exact_sum)
      sum += st.expectation_z_product((1ULL << key.first) | (1ULL << key.second));
    ++exact_count;
  }

  void add_exact_repeated(const std::vector<double>& unit_vals,
                          const std::map<std::pair<int, int>, double>& edge_vals) {
    ensure_exact();
    for (std::size_t j = 0; j < unit_exact_sum.size(); ++j) unit_exact_sum[j] += unit_vals[j];
    for (auto& [key, sum] : edge_exact_sum) sum += edge_vals.at(key);
    ++exact_count;
  }

  TermEstimates finish(const CostHamiltonian& hamiltonian) const {
    if (count == 0) throw std::logic_error("TermAccumulator: no samples");
    TermEstimates est;
    est.unit_z.resize(unit_sum.size());
    for (std::size_t j = 0; j < unit_sum.size(); ++j)
      est.unit_z[j] = unit_sum[j] / static_cast<double>(count);
    for (const auto& [key, sum] : edge_sum) est.edge_zz[key] = sum / static_cast<double>(count);
    est.energy = weighted_energy(hamiltonian, est.unit_z, est.edge_zz);
    if (exact_count > 0) {
      est.has_exact = true;
      est.unit_z_exact.resize(unit_exact_sum.size());
      for (std::size_t j = 0; j < unit_exact_sum.size(); ++j)
        est.unit_z_exact[j] = unit_exact_sum[j] / static_cast<double>(exact_count);
      for (const auto& [key, sum] : edge_exact_sum)
        est.edge_zz_exact[key] = sum / static_cast<double>(exact_count);
      est.energy_exact = weighted_energy(hamiltonian, est.unit_z_exact, est.edge_zz_exact);
    }
    return est;
  }

  static double weighted_energy(const CostHamiltonian& hamiltonian, const std::vector<double>& unit_z,
                                const std::map<std::pair<int, int>, double>& edge_zz) {
    double e = 0.0;
    for (const auto& t : hamiltonian.terms()) {
      if (std::popcount(t.mask) == 2) {
        const int q1 = std::countr_zero(t.mask);
        const int q2 = 63 - std::countl_zero(t.mask);
        e += t.coeff * edge_zz.at({q1, q2});
      } else {
        e += t.coeff * unit_z[static_cast<std::size_t>(std::countr_zero(t.mask))];
      }
    }
    return e;
  }

  void ensure_exact() {
    if (!unit_exact_sum.empty()) return;
    unit_exact_sum.assign(static_cast<std::size_t>(model_->n_units), 0.0);
    for (const auto& [key, J] : model_->couplings) {
      (void)J;
      edge_exact_sum[key] = 0.0;
    }
  }

  double& unit_exact_sum_cached(int j) {
    ensure_exact();
    return unit_exact_sum[static_cast<std::size_t>(j)];
  }

  const IsingModel* model_;
  std::vector<double> unit_sum;
  std::map<std::pair<int, int>, double> edge_sum;
  long count = 0;
  std::vector<double> unit_exact_sum;
  std::map<std::pair<int, int>, double> edge_exact_sum;
  long exact_count = 0;
};

inline std::uint64_t thermal_unit_bits(const IsingModel& model, const CircuitPlan& plan,
                                       double beta, std::optional<std::uint32_t> clamp_bits,
                                       RngStream& rng) {
  std::uint64_t bits = 0;
  if (clamp_bits) bits = visible_bits_to_units(model, *clamp_bits);
  const double p1 = thermal_bit_probability(beta, 1);
  for (int u : plan.purified_units)
    if (rng.bernoulli(p1)) bits |= 1ULL << u;
  return bits;
}

}  // namespace detail

// N independent prepare-run-measure repetitions of the circuit; every
// Z-product is read off the same bitstring per shot. Deterministic circuits
// (p = 0 and a non-random clamp) are prepared once and sampled N times.
//
// Noisy trajectories run on a units-only register: the purified preparation
// is unraveled by sampling each purified unit's initial bit from its thermal
// distribution, which is equivalent in distribution because the environment
// is never touched after preparation and only unit qubits are read out.
// QRAM clamping and noisy preparation keep the full register per trajectory.
inline TermEstimates qee_estimate(const IsingModel& model, CostVariant variant,
                                  const PulseSchedule& schedule, const ThermalizeConfig& cfg,
                                  RngStream rng, bool want_exact = false) {
  const CircuitPlan plan = plan_circuit(model, variant, cfg);
  schedule.validate();
  const CostHamiltonian hamiltonian(model, variant);
  const auto mixer = mixer_units(model, variant);

  detail::TermAccumulator acc(model);
  const std::uint64_t unit_mask = (model.n_units == 64) ? ~0ULL : ((1ULL << model.n_units) - 1);

  const bool randomized =
      cfg.clamp.mode == ClampMode::RandomizedDataset && cfg.clamp.dataset->size() > 1;

  if (!cfg.noise.enabled() && !randomized) {
    RngStream prep_rng = rng.derive("state");
    const StateVector psi = run_circuit(model, variant, schedule, cfg, prep_rng);
    std::vector<double> unit_vals;
    std::map<std::pair<int, int>, double> edge_vals;
    if (want_exact) {
      for (int j = 0; j < model.n_units; ++j)
        unit_vals.push_back(psi.expectation_z_product(1ULL << j));
      for (const auto& [key, J] : model.couplings) {
        (void)J;
        edge_vals[key] = psi.expectation_z_product((1ULL << key.first) | (1ULL << key.second));
      }
    }
    for (std::uint64_t idx : psi.sample_indices(cfg.shots, rng)) {
      acc.add_sample(idx & unit_mask);
      if (want_exact) acc.add_exact_repeated(unit_vals, edge_vals);
    }
    return acc.finish(hamiltonian);
  }

  if (!cfg.noise.enabled()) {
    // Noiseless per-shot randomized clamp: cache the circuit per data point.
    const auto& points = cfg.clamp.dataset->points;
    std::vector<std::optional<StateVector>> cache(points.size());
    std::vector<std::vector<double>> unit_cache(points.size());
    std::vector<std::map<std::pair<int, int>, double>> edge_cache(points.size());
    const auto gates = compile_pulse_gates(hamiltonian, mixer, schedule);
    for (int s = 0; s < cfg.shots; ++s) {
      RngStream shot = rng.derive("shot", static_cast<std::uint64_t>(s));
      const std::uint64_t j = shot.next_index(points.size());
      if (!cache[j]) {
        ThermalizeConfig point_cfg = cfg;
        point_cfg.clamp = ClampSource::fixed(points[j]);
        RngStream unused(0);
        StateVector psi = prepare_initial_state(model, plan, point_cfg, unused);
        run_gates(psi, gates, cfg.noise, unused);
        if (want_exact) {
          for (int u = 0; u < model.n_units; ++u)
            unit_cache[j].push_back(psi.expectation_z_product(1ULL << u));
          for (const auto& [key, J] : model.couplings) {
            (void)J;
            edge_cache[j][key] = psi.expectation_z_product((1ULL << key.first) | (1ULL << key.second));
          }
        }
        cache[j] = std::move(psi);
      }
      acc.add_sample(cache[j]->sample_index(shot) & unit_mask);
      if (want_exact) acc.add_exact_repeated(unit_cache[j], edge_cache[j]);
    }
    return acc.finish(hamiltonian);
  }

  // Noisy trajectories.
  const bool full_register = cfg.clamp.mode == ClampMode::QramDataset || cfg.noise.noisy_prep;
  const auto gates = compile_pulse_gates(hamiltonian, mixer, schedule);
  StateVector traj(full_register ? plan.n_qubits : model.n_units);
  for (int s = 0; s < cfg.shots; ++s) {
    RngStream shot = rng.derive("shot", static_cast<std::uint64_t>(s));
    if (full_register) {
      traj = prepare_initial_state(model, plan, cfg, shot);
    } else {
      std::optional<std::uint32_t> clamp_bits;
      if (cfg.clamp.mode == ClampMode::Fixed) {
        clamp_bits = cfg.clamp.fixed_bits;
      } else if (cfg.clamp.mode == ClampMode::RandomizedDataset) {
        clamp_bits = cfg.clamp.dataset->points[shot.next_index(cfg.clamp.dataset->points.size())];
      }
      traj.reset_to_basis(detail::thermal_unit_bits(model, plan, cfg.beta, clamp_bits, shot));
    }
    run_gates(traj, gates, cfg.noise, shot);
    acc.add_sample(traj.sample_index(shot) & unit_mask);
    if (want_exact) acc.add_exact(traj);
  }
  return acc.finish(hamiltonian);
}

// ---------------------------------------------------------------------------
// Angle optimization

struct ThermalizerResult {
  PulseSchedule schedule;            // best angles found
  TermEstimates estimates;           // final N-shot measurement of that circuit
  std::vector<double> energy_trace;  // best estimated energy per optimizer iteration
  int objective_evaluations = 0;
};

// Product-state expectation of the cost function before any pulses: clamped
// visibles contribute their spin, purified units contribute -tanh(beta).
inline double initial_state_energy(const IsingModel& model, CostVariant variant, double beta,
                                   std::optional<std::uint32_t> clamp_bits = std::nullopt) {
  const CostHamiltonian hamiltonian(model, variant);
  std::vector<double> mean(static_cast<std::size_t>(model.n_units), -std::tanh(beta));
  if (clamp_bits) {
    const std::uint64_t unit_bits = visible_bits_to_units(model, *clamp_bits);
    for (int v : model.visible) mean[static_cast<std::size_t>(v)] = spin_of(unit_bits, v);
  }
  double e = 0.0;
  for (const auto& t : hamiltonian.terms()) {
    double m = t.coeff;
    for (int q = 0; q < model.n_units; ++q)
      if ((t.mask >> q) & 1ULL) m *= mean[static_cast<std::size_t>(q)];
    e += m;
  }
  return e;
}

// Random-start angle optimization of the estimated cost expectation, then a
// final N-shot measurement with the best schedule found.
inline ThermalizerResult thermalize(const IsingModel& model, CostVariant variant,
                                    const ThermalizeConfig& cfg, RngStream rng,
                                    bool want_exact = false,
                                    const std::optional<PulseSchedule>& start = std::nullopt) {
  cfg.validate();
  ThermalizerResult result;
  PulseSchedule init = start ? *start : PulseSchedule::random(cfg.pulses, rng.derive("angles"));
  init.validate();
  if (init.pulses() != cfg.pulses)
    throw std::invalid_argument("thermalize: start schedule has the wrong pulse count");

  if (cfg.pulses == 0) {
    RngStream final_rng = rng.derive("final");
    result.schedule = init;
    result.estimates = qee_estimate(model, variant, init, cfg, final_rng, want_exact);
    result.energy_trace = {result.estimates.energy};
    result.objective_evaluations = 1;
    return result;
  }

  int counter = 0;
  auto objective = [&](const std::vector<double>& x) {
    RngStream eval = rng.derive("qee", static_cast<std::uint64_t>(counter++));
    return qee_estimate(model, variant, PulseSchedule::from_flat(cfg.pulses, x), cfg, eval).energy;
  };

  NelderMeadOptions options;
  options.max_iterations = cfg.opt_iterations;
  const auto opt = nelder_mead_minimize(objective, init.flatten(), options);

  result.schedule = PulseSchedule::from_flat(cfg.pulses, opt.best_point);
  RngStream final_rng = rng.derive("final");
  result.estimates = qee_estimate(model, variant, result.schedule, cfg, final_rng, want_exact);
  result.energy_trace = opt.trace;
  result.objective_evaluations = opt.evaluations;
  return result;
}

}  // namespace qabom
