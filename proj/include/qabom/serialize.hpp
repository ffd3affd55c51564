// JSON and CSV interchange: model documents, run configs, training history,
// dataset and distribution files. Binary64 values round-trip exactly through
// the JSON layer.
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qabom/datagen.hpp"
#include "qabom/distribution.hpp"
#include "qabom/ising.hpp"
#include "qabom/train.hpp"
#include "qabom/version.hpp"

namespace qabom {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// IsingModel <-> {units, visible, hidden, couplings:[[j,k,J]], biases:{j:B}}

inline json model_to_json(const IsingModel& model) {
  json j;
  j["units"] = model.n_units;
  j["visible"] = model.visible;
  j["hidden"] = model.hidden;
  json couplings = json::array();
  for (const auto& [key, J] : model.couplings) couplings.push_back({key.first, key.second, J});
  j["couplings"] = std::move(couplings);
  json biases = json::object();
  for (int u = 0; u < model.n_units; ++u)
    biases[std::to_string(u)] = model.biases[static_cast<std::size_t>(u)];
  j["biases"] = std::move(biases);
  return j;
}

inline IsingModel model_from_json(const json& j) {
  IsingModel model;
  try {
    model.n_units = j.at("units").get<int>();
    model.visible = j.at("visible").get<std::vector<int>>();
    model.hidden = j.at("hidden").get<std::vector<int>>();
    model.biases.assign(static_cast<std::size_t>(model.n_units), 0.0);
    for (const auto& [unit, value] : j.at("biases").items())
      model.biases.at(static_cast<std::size_t>(std::stoi(unit))) = value.get<double>();
    for (const auto& c : j.at("couplings")) {
      if (!c.is_array() || c.size() != 3) throw ConfigError("model: coupling entries are [j, k, J]");
      model.set_coupling(c[0].get<int>(), c[1].get<int>(), c[2].get<double>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Dataset specs and files

struct DatasetSpec {
  std::string kind;  // "coded-bernoulli" | "hidden-mode" | "file"
  CodedBernoulliParams coded;
  HiddenModeParams modes;
  std::string path;       // file kind
  std::string dist_path;  // optional generating distribution for file kind
  int count = 16;
};

inline void expect_keys(const json& j, std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional, const std::string& where) {
  for (const char* k : required)
    if (!j.contains(k)) throw ConfigError(where + ": missing field '" + k + "'");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* k : required) known = known || key == k;
    for (const char* k : optional) known = known || key == k;
    if (!known) throw ConfigError(where + ": unknown field '" + key + "'");
  }
}

inline DatasetSpec dataset_spec_from_json(const json& j) {
  DatasetSpec spec;
  try {
    spec.kind = j.at("kind").get<std::string>();
    if (spec.kind == "coded-bernoulli") {
      expect_keys(j, {"kind", "bits", "source_bits"}, {"eta", "flip_p", "count"}, "dataset");
      spec.coded.n_bits = j.at("bits").get<int>();
      spec.coded.source_bits = j.at("source_bits").get<int>();
      spec.coded.eta = j.value("eta", spec.coded.eta);
      spec.coded.flip_p = j.value("flip_p", spec.coded.flip_p);
      spec.count = j.value("count", spec.count);
      spec.coded.validate();
    } else if (spec.kind == "hidden-mode") {
      expect_keys(j, {"kind", "bits", "modes"}, {"stay_p", "count"}, "dataset");
      spec.modes.n_bits = j.at("bits").get<int>();
      for (const auto& m : j.at("modes")) {
        const std::string s = m.get<std::string>();
        if (s.size() != static_cast<std::size_t>(spec.modes.n_bits))
          throw ConfigError("dataset: mode width mismatch");
        spec.modes.modes.push_back(static_cast<std::uint32_t>(parse_bitstring(s)));
      }
      spec.modes.stay_p = j.value("stay_p", spec.modes.stay_p);
      spec.count = j.value("count", spec.count);
      spec.modes.validate();
    } else if (spec.kind == "file") {
      expect_keys(j, {"kind", "path"}, {"dist_path"}, "dataset");
      spec.path = j.at("path").get<std::string>();
      spec.dist_path = j.value("dist_path", std::string{});
    } else {
      throw ConfigError("dataset: unknown kind '" + spec.kind + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
  return spec;
}

inline json dataset_spec_to_json(const DatasetSpec& spec) {
  json j;
  j["kind"] = spec.kind;
  if (spec.kind == "coded-bernoulli") {
    j["bits"] = spec.coded.n_bits;
    j["source_bits"] = spec.coded.source_bits;
    j["eta"] = spec.coded.eta;
    j["flip_p"] = spec.coded.flip_p;
    j["count"] = spec.count;
  } else if (spec.kind == "hidden-mode") {
    j["bits"] = spec.modes.n_bits;
    json modes = json::array();
    for (std::uint32_t m : spec.modes.modes) modes.push_back(to_bitstring(m, spec.modes.n_bits));
    j["modes"] = std::move(modes);
    j["stay_p"] = spec.modes.stay_p;
    j["count"] = spec.count;
  } else {
    j["path"] = spec.path;
    if (!spec.dist_path.empty()) j["dist_path"] = spec.dist_path;
  }
  return j;
}

// Newline-delimited bitstrings; lines starting with '#' are comments.
inline void write_dataset_file(const std::string& path, const Dataset& dataset,
                               const std::vector<std::string>& comments = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::uint32_t p : dataset.points) out << to_bitstring(p, dataset.n_bits) << "\n";
}

inline Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Dataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (ds.n_bits == 0)
      ds.n_bits = static_cast<int>(line.size());
    else if (line.size() != static_cast<std::size_t>(ds.n_bits))
      throw std::runtime_error(path + ": inconsistent bitstring widths");
    ds.points.push_back(static_cast<std::uint32_t>(parse_bitstring(line)));
  }
  if (ds.points.empty()) throw std::runtime_error(path + ": no data points");
  ds.validate();
  return ds;
}

inline json distribution_to_json(const DataDistribution& dist) {
  json j = json::object();
  for (std::uint64_t i = 0; i < dist.pmf.size(); ++i)
    j[to_bitstring(i, dist.n_bits)] = dist.pmf[i];
  return j;
}

inline DataDistribution distribution_from_json(const json& j) {
  DataDistribution dist;
  if (!j.is_object() || j.empty()) throw ConfigError("distribution: expected a non-empty object");
  dist.n_bits = static_cast<int>(j.begin().key().size());
  dist.pmf.assign(1ULL << dist.n_bits, 0.0);
  for (const auto& [bits, p] : j.items()) {
    if (bits.size() != static_cast<std::size_t>(dist.n_bits))
      throw ConfigError("distribution: inconsistent widths");
    dist.pmf.at(parse_bitstring(bits)) = p.get<double>();
  }
  dist.validate(1e-9);
  return dist;
}

// ---------------------------------------------------------------------------
// TrainConfig <-> JSON

inline ClampingScheme clamping_scheme_from_string(const std::string& s) {
  if (s == "regular") return ClampingScheme::Regular;
  if (s == "qrc-classical") return ClampingScheme::QrcClassical;
  if (s == "qrc-qram") return ClampingScheme::QrcQram;
  throw ConfigError("mode: expected regular | qrc-classical | qrc-qram, got '" + s + "'");
}

inline json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["topology"] = {{"visible", cfg.n_visible}, {"hidden", cfg.n_hidden}};
  j["beta"] = cfg.beta;
  j["pulses"] = cfg.pulses;
  j["shots"] = cfg.shots;
  j["opt_iterations"] = cfg.opt_iterations;
  j["noise_p"] = cfg.noise_p;
  j["noisy_prep"] = cfg.noisy_prep;
  j["epochs"] = cfg.epochs;
  j["mode"] = to_string(cfg.mode);
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["warm_start"] = cfg.warm_start;
  j["minibatch"] = cfg.minibatch;
  j["weight_init_range"] = cfg.weight_init_range;
  j["max_address_qubits"] = cfg.max_address_qubits;
  j["track_update_error"] = cfg.track_update_error;
  j["kl_eval"] = cfg.kl_eval == KlEvaluation::ExactPmf ? "exact" : "sample";
  j["kl_sample_count"] = cfg.kl_sample_count;
  return j;
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  try {
    expect_keys(j,
                {"topology"},
                {"beta", "pulses", "shots", "opt_iterations", "noise_p", "noisy_prep", "epochs",
                 "mode", "learning_rate", "seed", "warm_start", "minibatch", "weight_init_range",
                 "max_address_qubits", "track_update_error", "kl_eval", "kl_sample_count",
                 "dataset", "sweep"},
                "config");
    const json& topo = j.at("topology");
    expect_keys(topo, {"visible", "hidden"}, {}, "topology");
    cfg.n_visible = topo.at("visible").get<int>();
    cfg.n_hidden = topo.at("hidden").get<int>();
    cfg.beta = j.value("beta", cfg.beta);
    cfg.pulses = j.value("pulses", cfg.pulses);
    cfg.shots = j.value("shots", cfg.shots);
    cfg.opt_iterations = j.value("opt_iterations", cfg.opt_iterations);
    cfg.noise_p = j.value("noise_p", cfg.noise_p);
    cfg.noisy_prep = j.value("noisy_prep", cfg.noisy_prep);
    cfg.epochs = j.value("epochs", cfg.epochs);
    if (j.contains("mode")) cfg.mode = clamping_scheme_from_string(j.at("mode").get<std::string>());
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.warm_start = j.value("warm_start", cfg.warm_start);
    cfg.minibatch = j.value("minibatch", cfg.minibatch);
    cfg.weight_init_range = j.value("weight_init_range", cfg.weight_init_range);
    cfg.max_address_qubits = j.value("max_address_qubits", cfg.max_address_qubits);
    cfg.track_update_error = j.value("track_update_error", cfg.track_update_error);
    if (j.contains("kl_eval")) {
      const std::string mode = j.at("kl_eval").get<std::string>();
      if (mode == "exact")
        cfg.kl_eval = KlEvaluation::ExactPmf;
      else if (mode == "sample")
        cfg.kl_eval = KlEvaluation::FreshSample;
      else
        throw ConfigError("kl_eval: expected exact | sample");
    }
    cfg.kl_sample_count = j.value("kl_sample_count", cfg.kl_sample_count);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Training history

inline json estimates_to_json(const TermEstimates& est) {
  json j;
  j["z"] = est.unit_z;
  json zz = json::array();
  for (const auto& [key, v] : est.edge_zz) zz.push_back({key.first, key.second, v});
  j["zz"] = std::move(zz);
  j["energy"] = est.energy;
  if (est.has_exact) {
    j["z_exact"] = est.unit_z_exact;
    json zze = json::array();
    for (const auto& [key, v] : est.edge_zz_exact) zze.push_back({key.first, key.second, v});
    j["zz_exact"] = std::move(zze);
    j["energy_exact"] = est.energy_exact;
  }
  return j;
}

// One JSON document per run. `wallclock_s` is the only field that is not
// reproducible for a fixed config and seed; `kl_beta` / `kl_orientation`
// record how the reconstruction KL was evaluated.
inline json history_to_json(const TrainHistory& history) {
  json j;
  j["version"] = QABOM_VERSION;
  j["config"] = train_config_to_json(history.config);
  j["kl_beta"] = history.config.beta;
  j["kl_orientation"] = "D(data || model)";
  if (history.error) j["error"] = *history.error;
  json epochs = json::array();
  for (const auto& rec : history.epochs) {
    json e;
    e["epoch"] = rec.epoch;
    e["weights"] = model_to_json(rec.weights);
    if (rec.unclamped) e["unclamped"] = estimates_to_json(*rec.unclamped);
    if (rec.clamped) e["clamped"] = estimates_to_json(*rec.clamped);
    e["kl"] = rec.kl;
    e["wallclock_s"] = rec.wallclock_s;
    if (rec.update_error) e["update_error"] = *rec.update_error;
    epochs.push_back(std::move(e));
  }
  j["epochs"] = std::move(epochs);
  return j;
}

// ---------------------------------------------------------------------------
// CSV projections (comment lines carry the resolved config for provenance)

inline std::string provenance_comment(const json& config) {
  return "version=" QABOM_VERSION " config=" + config.dump();
}

inline void write_kl_csv(const std::string& path, const TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# " << provenance_comment(train_config_to_json(history.config)) << "\n";
  out << "epoch,kl,noise_p,mode\n";
  out.precision(17);
  for (const auto& rec : history.epochs)
    out << rec.epoch << ',' << rec.kl << ',' << history.config.noise_p << ','
        << to_string(history.config.mode) << "\n";
}

struct SweepRow {
  double value = 0.0;
  int seeds = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

inline void write_sweep_csv(const std::string& path, const std::string& axis,
                            const std::string& metric, const std::vector<SweepRow>& rows,
                            const json& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# " << provenance_comment(config) << "\n";
  out << "axis,value,seeds,metric,mean,stddev\n";
  out.precision(17);
  for (const auto& r : rows)
    out << axis << ',' << r.value << ',' << r.seeds << ',' << metric << ',' << r.mean << ','
        << r.stddev << "\n";
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return j;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace qabom
