// Network training loop: per-epoch unclamped and clamped thermalizations,
// bound-based additive weight updates, and the randomized-clamping variants
// that serve a whole dataset (or minibatch) with a single angle optimization.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qabom/datagen.hpp"
#include "qabom/distribution.hpp"
#include "qabom/ising.hpp"
#include "qabom/metrics.hpp"
#include "qabom/rng.hpp"
#include "qabom/thermalize.hpp"

namespace qabom {

enum class ClampingScheme { Regular, QrcClassical, QrcQram };

inline const char* to_string(ClampingScheme mode) {
  switch (mode) {
    case ClampingScheme::Regular: return "regular";
    case ClampingScheme::QrcClassical: return "qrc-classical";
    case ClampingScheme::QrcQram: return "qrc-qram";
  }
  return "?";
}

enum class KlEvaluation { ExactPmf, FreshSample };

struct TrainConfig {
  int n_visible = 4;
  int n_hidden = 2;
  double beta = 1.0;
  int pulses = 3;
  int shots = 500;
  int opt_iterations = 100;
  double noise_p = 0.0;
  bool noisy_prep = false;
  int epochs = 1;
  ClampingScheme mode = ClampingScheme::QrcClassical;
  double learning_rate = 1.0;
  std::uint64_t seed = 0;
  bool warm_start = false;        // reuse the previous epoch's optimum angles
  int minibatch = 0;              // 0 = clamp against the full dataset
  double weight_init_range = 0.1;
  int max_address_qubits = 8;
  bool track_update_error = false;
  KlEvaluation kl_eval = KlEvaluation::ExactPmf;
  int kl_sample_count = 2000;

  void validate() const {
    if (n_visible < 1 || n_hidden < 0) throw std::invalid_argument("TrainConfig: bad layer sizes");
    if (beta < 0.0) throw std::invalid_argument("TrainConfig: beta must be >= 0");
    if (pulses < 0) throw std::invalid_argument("TrainConfig: pulses must be >= 0");
    if (shots < 1) throw std::invalid_argument("TrainConfig: shots must be >= 1");
    if (opt_iterations < 1) throw std::invalid_argument("TrainConfig: opt_iterations must be >= 1");
    if (!(noise_p >= 0.0 && noise_p <= 0.25))
      throw std::invalid_argument("TrainConfig: noise_p must lie in [0, 1/4]");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (minibatch < 0) throw std::invalid_argument("TrainConfig: minibatch must be >= 0");
    if (weight_init_range < 0.0) throw std::invalid_argument("TrainConfig: weight_init_range must be >= 0");
    if (kl_sample_count < 1) throw std::invalid_argument("TrainConfig: kl_sample_count must be >= 1");
  }

  ThermalizeConfig thermalize_config(ClampSource clamp) const {
    ThermalizeConfig cfg;
    cfg.beta = beta;
    cfg.pulses = pulses;
    cfg.shots = shots;
    cfg.opt_iterations = opt_iterations;
    cfg.noise.p = noise_p;
    cfg.noise.noisy_prep = noisy_prep;
    cfg.clamp = clamp;
    cfg.max_address_qubits = max_address_qubits;
    return cfg;
  }
};

struct WeightDelta {
  std::map<std::pair<int, int>, double> couplings;
  std::vector<double> biases;
};

struct EpochRecord {
  int epoch = 0;
  IsingModel weights;  // after this epoch's update (epoch 0: the initialization)
  std::optional<TermEstimates> unclamped;
  std::optional<TermEstimates> clamped;  // data-averaged
  double kl = 0.0;
  double wallclock_s = 0.0;
  std::optional<double> update_error;
};

struct TrainHistory {
  TrainConfig config;
  std::vector<EpochRecord> epochs;   // epochs[0] holds only the initialized weights
  std::optional<std::string> error;  // set when a run aborted; history is partial

  double final_kl() const {
    if (epochs.empty()) throw std::logic_error("TrainHistory: empty");
    return epochs.back().kl;
  }

  double min_kl() const {
    if (epochs.empty()) throw std::logic_error("TrainHistory: empty");
    double m = epochs.front().kl;
    for (const auto& e : epochs) m = std::min(m, e.kl);
    return m;
  }
};

// J and B i.i.d. uniform in [-range, range]; couplings are drawn in key
// order, then biases by unit index.
inline void init_weights(IsingModel& model, double range, RngStream rng) {
  for (auto& [key, J] : model.couplings) {
    (void)key;
    J = rng.uniform(-range, range);
  }
  for (auto& b : model.biases) b = rng.uniform(-range, range);
}

inline TermEstimates unclamped_expectations(const IsingModel& model, const TrainConfig& cfg,
                                            RngStream rng, bool want_exact = false,
                                            const std::optional<PulseSchedule>& start = std::nullopt,
                                            PulseSchedule* schedule_out = nullptr) {
  const auto result = thermalize(model, CostVariant::Full,
                                 cfg.thermalize_config(ClampSource::none()), rng, want_exact, start);
  if (schedule_out) *schedule_out = result.schedule;
  return result.estimates;
}

namespace detail {

inline TermEstimates average_estimates(const std::vector<TermEstimates>& parts) {
  if (parts.empty()) throw std::invalid_argument("average_estimates: nothing to average");
  TermEstimates avg = parts.front();
  const double w = 1.0 / static_cast<double>(parts.size());
  auto scale_add = [&](const TermEstimates& p, bool first) {
    if (first) return;
    for (std::size_t j = 0; j < avg.unit_z.size(); ++j) avg.unit_z[j] += p.unit_z[j];
    for (auto& [key, v] : avg.edge_zz) v += p.edge_zz.at(key);
    avg.energy += p.energy;
    if (avg.has_exact) {
      for (std::size_t j = 0; j < avg.unit_z_exact.size(); ++j) avg.unit_z_exact[j] += p.unit_z_exact[j];
      for (auto& [key, v] : avg.edge_zz_exact) v += p.edge_zz_exact.at(key);
      avg.energy_exact += p.energy_exact;
    }
  };
  bool first = true;
  for (const auto& p : parts) {
    if (p.unit_z.size() != avg.unit_z.size() || p.has_exact != avg.has_exact)
      throw std::invalid_argument("average_estimates: mismatched estimates");
    scale_add(p, first);
    first = false;
  }
  for (auto& v : avg.unit_z) v *= w;
  for (auto& [key, v] : avg.edge_zz) v *= w;
  avg.energy *= w;
  if (avg.has_exact) {
    for (auto& v : avg.unit_z_exact) v *= w;
    for (auto& [key, v] : avg.edge_zz_exact) v *= w;
    avg.energy_exact *= w;
  }
  return avg;
}

// Uniform subset of `size` distinct points (partial Fisher-Yates); returns
// the dataset itself when size is 0 or covers everything.
inline Dataset minibatch_subset(const Dataset& dataset, int size, RngStream rng) {
  if (size <= 0 || static_cast<std::size_t>(size) >= dataset.points.size()) return dataset;
  std::vector<std::uint32_t> pool = dataset.points;
  Dataset sub;
  sub.n_bits = dataset.n_bits;
  for (int i = 0; i < size; ++i) {
    const std::size_t j = i + rng.next_index(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    sub.points.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return sub;
}

}  // namespace detail

// One full angle optimization per data point with the visibles basis-prepared;
// returns the uniform average over points.
inline TermEstimates clamped_expectations_regular(const IsingModel& model, const Dataset& dataset,
                                                  const TrainConfig& cfg, RngStream rng,
                                                  bool want_exact = false,
                                                  std::vector<PulseSchedule>* starts = nullptr) {
  if (dataset.points.empty()) throw std::invalid_argument("clamped_expectations_regular: empty dataset");
  if (dataset.n_bits != cfg.n_visible)
    throw std::invalid_argument("clamped_expectations_regular: dataset width mismatch");
  std::vector<TermEstimates> parts;
  for (std::size_t j = 0; j < dataset.points.size(); ++j) {
    std::optional<PulseSchedule> start;
    if (starts && j < starts->size()) start = (*starts)[j];
    const auto result =
        thermalize(model, CostVariant::Partial,
                   cfg.thermalize_config(ClampSource::fixed(dataset.points[j])),
                   rng.derive("point", j), want_exact, start);
    if (starts) {
      if (j < starts->size())
        (*starts)[j] = result.schedule;
      else
        starts->push_back(result.schedule);
    }
    parts.push_back(result.estimates);
  }
  return detail::average_estimates(parts);
}

// A single angle optimization serving the whole dataset: classical mode draws
// a data point per shot, qram mode clamps the explicit address-register
// superposition and measures everything.
inline TermEstimates clamped_expectations_qrc(const IsingModel& model, const Dataset& dataset,
                                              const TrainConfig& cfg, RngStream rng, bool qram,
                                              bool want_exact = false,
                                              const std::optional<PulseSchedule>& start = std::nullopt,
                                              PulseSchedule* schedule_out = nullptr) {
  if (dataset.points.empty()) throw std::invalid_argument("clamped_expectations_qrc: empty dataset");
  if (dataset.n_bits != cfg.n_visible)
    throw std::invalid_argument("clamped_expectations_qrc: dataset width mismatch");
  const ClampSource clamp = qram ? ClampSource::qram(dataset) : ClampSource::randomized(dataset);
  const auto result = thermalize(model, CostVariant::Partial, cfg.thermalize_config(clamp),
                                 rng.derive("point", 0), want_exact, start);
  if (schedule_out) *schedule_out = result.schedule;
  return result.estimates;
}

// delta = learning_rate * (clamped - unclamped), per coupling and per bias.
inline WeightDelta weight_update(const TermEstimates& unclamped, const TermEstimates& clamped,
                                 double learning_rate) {
  if (unclamped.unit_z.size() != clamped.unit_z.size() ||
      unclamped.edge_zz.size() != clamped.edge_zz.size())
    throw std::invalid_argument("weight_update: mismatched index sets");
  WeightDelta delta;
  for (const auto& [key, zz] : clamped.edge_zz) {
    const auto it = unclamped.edge_zz.find(key);
    if (it == unclamped.edge_zz.end())
      throw std::invalid_argument("weight_update: mismatched index sets");
    delta.couplings[key] = learning_rate * (zz - it->second);
  }
  delta.biases.resize(clamped.unit_z.size());
  for (std::size_t j = 0; j < clamped.unit_z.size(); ++j)
    delta.biases[j] = learning_rate * (clamped.unit_z[j] - unclamped.unit_z[j]);
  return delta;
}

inline void apply_update(IsingModel& model, const WeightDelta& delta) {
  for (const auto& [key, d] : delta.couplings) {
    const auto it = model.couplings.find(key);
    if (it == model.couplings.end()) throw std::invalid_argument("apply_update: unknown coupling");
    it->second += d;
  }
  if (delta.biases.size() != model.biases.size())
    throw std::invalid_argument("apply_update: bias size mismatch");
  for (std::size_t j = 0; j < delta.biases.size(); ++j) model.biases[j] += delta.biases[j];
}

namespace detail {

inline std::vector<double> flatten_update(const WeightDelta& delta) {
  std::vector<double> theta;
  for (const auto& [key, d] : delta.couplings) {
    (void)key;
    theta.push_back(d);
  }
  theta.insert(theta.end(), delta.biases.begin(), delta.biases.end());
  return theta;
}

inline TermEstimates exact_view(const TermEstimates& est) {
  TermEstimates out;
  out.unit_z = est.unit_z_exact;
  out.edge_zz = est.edge_zz_exact;
  out.energy = est.energy_exact;
  return out;
}

inline DataDistribution evaluation_distribution(const Dataset& dataset, const TrainConfig& cfg,
                                                RngStream rng) {
  if (cfg.kl_eval == KlEvaluation::FreshSample) {
    if (!dataset.exact)
      throw std::invalid_argument("train: fresh-sample KL evaluation needs the generating distribution");
    Dataset fresh;
    fresh.n_bits = dataset.n_bits;
    for (int i = 0; i < cfg.kl_sample_count; ++i)
      fresh.points.push_back(static_cast<std::uint32_t>(dataset.exact->sample(rng)));
    return fresh.empirical();
  }
  return dataset.exact ? *dataset.exact : dataset.empirical();
}

}  // namespace detail

// Runs `epochs` rounds of (unclamped, clamped, update) and records weights,
// expectations and the reconstruction KL after every update. Fully
// deterministic for a given config and seed. On an error mid-run the partial
// history is returned with `error` set.
inline TrainHistory train(const TrainConfig& cfg, const Dataset& dataset) {
  cfg.validate();
  dataset.validate();
  if (dataset.points.empty()) throw std::invalid_argument("train: empty dataset");
  if (dataset.n_bits != cfg.n_visible) throw std::invalid_argument("train: dataset width mismatch");

  TrainHistory history;
  history.config = cfg;

  IsingModel model = IsingModel::restricted(cfg.n_visible, cfg.n_hidden);
  RngStream root(cfg.seed);
  init_weights(model, cfg.weight_init_range, root.derive("init-weights"));

  auto record_kl = [&](int epoch) {
    const auto target = detail::evaluation_distribution(dataset, cfg,
                                                        root.derive("kl-sample", static_cast<std::uint64_t>(epoch)));
    return kl_divergence(target, rbm_visible_marginal(model, cfg.beta));
  };

  EpochRecord init;
  init.epoch = 0;
  init.weights = model;
  init.kl = record_kl(0);
  history.epochs.push_back(std::move(init));

  const bool want_exact = cfg.track_update_error;
  std::optional<PulseSchedule> unclamped_start;
  std::optional<PulseSchedule> qrc_start;
  std::vector<PulseSchedule> regular_starts;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    RngStream es = root.derive("epoch", static_cast<std::uint64_t>(epoch));
    try {
      PulseSchedule unclamped_schedule;
      const TermEstimates unclamped =
          unclamped_expectations(model, cfg, es.derive("unclamped"), want_exact,
                                 cfg.warm_start ? unclamped_start : std::nullopt, &unclamped_schedule);
      if (cfg.warm_start) unclamped_start = unclamped_schedule;

      const Dataset batch = detail::minibatch_subset(dataset, cfg.minibatch, es.derive("minibatch"));
      RngStream cs = es.derive("clamped");
      TermEstimates clamped;
      if (cfg.mode == ClampingScheme::Regular) {
        clamped = clamped_expectations_regular(model, batch, cfg, cs, want_exact,
                                               cfg.warm_start ? &regular_starts : nullptr);
      } else {
        PulseSchedule clamped_schedule;
        clamped = clamped_expectations_qrc(model, batch, cfg, cs, cfg.mode == ClampingScheme::QrcQram,
                                           want_exact, cfg.warm_start ? qrc_start : std::nullopt,
                                           &clamped_schedule);
        if (cfg.warm_start) qrc_start = clamped_schedule;
      }

      const WeightDelta delta = weight_update(unclamped, clamped, cfg.learning_rate);
      apply_update(model, delta);

      EpochRecord rec;
      rec.epoch = epoch;
      rec.weights = model;
      rec.unclamped = unclamped;
      rec.clamped = clamped;
      rec.kl = record_kl(epoch);
      if (want_exact && unclamped.has_exact && clamped.has_exact) {
        const WeightDelta exact_delta =
            weight_update(detail::exact_view(unclamped), detail::exact_view(clamped), cfg.learning_rate);
        rec.update_error =
            update_error(detail::flatten_update(delta), detail::flatten_update(exact_delta));
      }
      rec.wallclock_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      history.epochs.push_back(std::move(rec));
    } catch (const std::exception& e) {
      history.error = e.what();
      break;
    }
  }
  return history;
}

}  // namespace qabom
