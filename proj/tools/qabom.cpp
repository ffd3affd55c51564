// Experiment runner: config-driven training runs, parameter sweeps, dataset
// generation and standalone thermalization reports.
//
// Exit codes: 0 success, 1 runtime failure, 2 config/usage error.
#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include "qabom/qabom.hpp"

namespace fs = std::filesystem;
using namespace qabom;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out_dir = ".";
};

std::optional<std::uint64_t> env_seed() {
  if (const char* s = std::getenv("QABOM_SEED")) {
    try {
      return std::stoull(s);
    } catch (...) {
      throw ConfigError("QABOM_SEED is not a valid integer");
    }
  }
  return std::nullopt;
}

// Priority: --seed flag, config "seed" field, QABOM_SEED, default 0.
std::uint64_t resolve_seed(const GlobalArgs& args, const json& config) {
  if (args.seed) return *args.seed;
  if (config.contains("seed")) return config.at("seed").get<std::uint64_t>();
  if (auto e = env_seed()) return *e;
  return 0;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

Dataset build_dataset(const json& config) {
  if (!config.contains("dataset")) throw ConfigError("config: missing 'dataset'");
  json spec_json = config.at("dataset");
  std::uint64_t ds_seed = 12345;
  if (spec_json.contains("seed")) {
    ds_seed = spec_json.at("seed").get<std::uint64_t>();
    spec_json.erase("seed");
  }
  const DatasetSpec spec = dataset_spec_from_json(spec_json);
  RngStream rng(ds_seed);
  if (spec.kind == "coded-bernoulli") return coded_bernoulli_sample(spec.coded, spec.count, rng);
  if (spec.kind == "hidden-mode") return hidden_mode_sample(spec.modes, spec.count, rng);
  Dataset ds = read_dataset_file(spec.path);
  if (!spec.dist_path.empty()) ds.exact = distribution_from_json(load_json_file(spec.dist_path));
  return ds;
}

// Runs tasks 0..count-1 on up to `jobs` threads; results are slotted by
// index, so the output is independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(jobs, static_cast<int>(count));
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;
  for (int t = 0; t < n_threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!failed.exchange(true)) first_error = e.what();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failed.load()) throw std::runtime_error(first_error);
}

// ---------------------------------------------------------------------------

int cmd_train(const GlobalArgs& args) {
  const json config = load_json_file(args.config_path);
  TrainConfig cfg = train_config_from_json(config);
  cfg.seed = resolve_seed(args, config);
  const Dataset dataset = build_dataset(config);

  const TrainHistory history = train(cfg, dataset);

  ensure_out_dir(args.out_dir);
  write_json_file((fs::path(args.out_dir) / "history.json").string(), history_to_json(history));
  write_kl_csv((fs::path(args.out_dir) / "kl.csv").string(), history);

  if (history.error) {
    std::cerr << "training aborted: " << *history.error << "\n";
    return 1;
  }
  std::cout << "epochs: " << history.epochs.size() - 1 << "\n";
  std::cout << "final KL: " << history.final_kl() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string axis;
  std::vector<double> values;
  int seeds = 3;
};

SweepArgs resolve_sweep(const json& config, const std::string& axis_flag,
                        const std::string& values_flag, int seeds_flag) {
  SweepArgs sweep;
  if (config.contains("sweep")) {
    const json& s = config.at("sweep");
    expect_keys(s, {}, {"axis", "values", "seeds"}, "sweep");
    sweep.axis = s.value("axis", sweep.axis);
    if (s.contains("values")) sweep.values = s.at("values").get<std::vector<double>>();
    sweep.seeds = s.value("seeds", sweep.seeds);
  }
  if (!axis_flag.empty()) sweep.axis = axis_flag;
  if (!values_flag.empty()) {
    sweep.values.clear();
    std::stringstream ss(values_flag);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) sweep.values.push_back(std::stod(tok));
  }
  if (seeds_flag > 0) sweep.seeds = seeds_flag;
  if (sweep.axis != "noise_p" && sweep.axis != "pulses_P" && sweep.axis != "shots_N")
    throw ConfigError("sweep: axis must be noise_p | pulses_P | shots_N");
  if (sweep.values.empty()) throw ConfigError("sweep: no values given");
  if (sweep.seeds < 1) throw ConfigError("sweep: seeds must be >= 1");
  return sweep;
}

std::string value_tag(double v) {
  std::ostringstream os;
  os << v;
  std::string s = os.str();
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

// Update-estimation error with frozen circuits: the angle schedules come from
// one reference optimization; each (seed, N) then re-measures the same
// circuits with N shots and is compared against the exact state expectations.
double frozen_circuit_update_error(const TrainConfig& base, const Dataset& dataset,
                                   const PulseSchedule& unclamped_schedule,
                                   const PulseSchedule& clamped_schedule, int shots,
                                   std::uint64_t seed) {
  TrainConfig cfg = base;
  cfg.shots = shots;
  RngStream rng(seed);
  const IsingModel model = [&] {
    IsingModel m = IsingModel::restricted(cfg.n_visible, cfg.n_hidden);
    init_weights(m, cfg.weight_init_range, RngStream(base.seed).derive("init-weights"));
    return m;
  }();

  const auto unclamped =
      qee_estimate(model, CostVariant::Full, unclamped_schedule,
                   cfg.thermalize_config(ClampSource::none()), rng.derive("unclamped"), true);
  const ClampSource clamp = cfg.mode == ClampingScheme::QrcQram ? ClampSource::qram(dataset)
                                                                : ClampSource::randomized(dataset);
  const auto clamped = qee_estimate(model, CostVariant::Partial, clamped_schedule,
                                    cfg.thermalize_config(clamp), rng.derive("clamped"), true);

  const auto est = weight_update(unclamped, clamped, cfg.learning_rate);
  TermEstimates un_exact, cl_exact;
  un_exact.unit_z = unclamped.unit_z_exact;
  un_exact.edge_zz = unclamped.edge_zz_exact;
  cl_exact.unit_z = clamped.unit_z_exact;
  cl_exact.edge_zz = clamped.edge_zz_exact;
  const auto exact = weight_update(un_exact, cl_exact, cfg.learning_rate);

  std::vector<double> est_flat, exact_flat;
  for (const auto& [key, d] : est.couplings) {
    (void)key;
    est_flat.push_back(d);
  }
  est_flat.insert(est_flat.end(), est.biases.begin(), est.biases.end());
  for (const auto& [key, d] : exact.couplings) {
    (void)key;
    exact_flat.push_back(d);
  }
  exact_flat.insert(exact_flat.end(), exact.biases.begin(), exact.biases.end());
  return update_error(est_flat, exact_flat);
}

int cmd_sweep(const GlobalArgs& args, const std::string& axis_flag, const std::string& values_flag,
              int seeds_flag) {
  const json config = load_json_file(args.config_path);
  TrainConfig base = train_config_from_json(config);
  base.seed = resolve_seed(args, config);
  const Dataset dataset = build_dataset(config);
  const SweepArgs sweep = resolve_sweep(config, axis_flag, values_flag, seeds_flag);

  ensure_out_dir(args.out_dir);
  std::vector<SweepRow> rows(sweep.values.size());
  const std::string metric = sweep.axis == "shots_N" ? "update_error" : "min_kl";

  if (sweep.axis == "shots_N") {
    // Freeze the circuits once at the base configuration.
    TrainConfig ref = base;
    RngStream ref_rng(ref.seed);
    IsingModel model = IsingModel::restricted(ref.n_visible, ref.n_hidden);
    init_weights(model, ref.weight_init_range, ref_rng.derive("init-weights"));
    PulseSchedule unclamped_schedule;
    unclamped_expectations(model, ref, ref_rng.derive("freeze-unclamped"), false, std::nullopt,
                           &unclamped_schedule);
    PulseSchedule clamped_schedule;
    clamped_expectations_qrc(model, dataset, ref, ref_rng.derive("freeze-clamped"),
                             ref.mode == ClampingScheme::QrcQram, false, std::nullopt,
                             &clamped_schedule);

    for (std::size_t v = 0; v < sweep.values.size(); ++v) {
      const int shots = static_cast<int>(sweep.values[v]);
      if (shots < 1) throw ConfigError("sweep: shots values must be >= 1");
      std::vector<double> errors(static_cast<std::size_t>(sweep.seeds));
      parallel_for(errors.size(), args.jobs, [&](std::size_t s) {
        errors[s] = frozen_circuit_update_error(base, dataset, unclamped_schedule, clamped_schedule,
                                                shots, base.seed + 1 + s);
      });
      double mean = 0.0;
      for (double e : errors) mean += e;
      mean /= static_cast<double>(errors.size());
      double var = 0.0;
      for (double e : errors) var += (e - mean) * (e - mean);
      rows[v] = {sweep.values[v], sweep.seeds, mean,
                 errors.size() > 1 ? std::sqrt(var / static_cast<double>(errors.size() - 1)) : 0.0};
    }
  } else {
    struct Task {
      std::size_t value_index;
      int seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t v = 0; v < sweep.values.size(); ++v)
      for (int s = 0; s < sweep.seeds; ++s) tasks.push_back({v, s});
    std::vector<double> min_kl(tasks.size());
    std::vector<TrainHistory> histories(tasks.size());

    parallel_for(tasks.size(), args.jobs, [&](std::size_t t) {
      TrainConfig cfg = base;
      if (sweep.axis == "noise_p")
        cfg.noise_p = sweep.values[tasks[t].value_index];
      else
        cfg.pulses = static_cast<int>(sweep.values[tasks[t].value_index]);
      cfg.seed = base.seed + static_cast<std::uint64_t>(tasks[t].seed_index);
      cfg.validate();
      TrainHistory h = train(cfg, dataset);
      if (h.error) throw std::runtime_error("run failed: " + *h.error);
      min_kl[t] = h.min_kl();
      histories[t] = std::move(h);
    });

    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const auto& task = tasks[t];
      const std::string name = "kl_" + sweep.axis + "_" + value_tag(sweep.values[task.value_index]) +
                               "_seed" + std::to_string(task.seed_index) + ".csv";
      write_kl_csv((fs::path(args.out_dir) / name).string(), histories[t]);
    }
    for (std::size_t v = 0; v < sweep.values.size(); ++v) {
      double mean = 0.0;
      int n = 0;
      for (std::size_t t = 0; t < tasks.size(); ++t)
        if (tasks[t].value_index == v) {
          mean += min_kl[t];
          ++n;
        }
      mean /= n;
      double var = 0.0;
      for (std::size_t t = 0; t < tasks.size(); ++t)
        if (tasks[t].value_index == v) var += (min_kl[t] - mean) * (min_kl[t] - mean);
      rows[v] = {sweep.values[v], n, mean, n > 1 ? std::sqrt(var / (n - 1)) : 0.0};
    }
  }

  json resolved = train_config_to_json(base);
  resolved["sweep"] = {{"axis", sweep.axis}, {"values", sweep.values}, {"seeds", sweep.seeds}};
  const std::string out = (fs::path(args.out_dir) / "sweep.csv").string();
  write_sweep_csv(out, sweep.axis, metric, rows, resolved);
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_datagen(const std::string& kind, const GlobalArgs& args, int bits, int source_bits,
                double eta, double flip_p, const std::string& modes_csv, double stay_p, int count) {
  const std::uint64_t seed = args.seed ? *args.seed : env_seed().value_or(0);
  RngStream rng(seed);
  Dataset ds;
  json meta;
  if (kind == "coded") {
    CodedBernoulliParams params{bits, source_bits, eta, flip_p};
    params.validate();
    ds = coded_bernoulli_sample(params, count, rng);
    meta = {{"kind", "coded-bernoulli"}, {"bits", bits},   {"source_bits", source_bits},
            {"eta", eta},                {"flip_p", flip_p}, {"count", count},
            {"seed", seed}};
  } else {
    HiddenModeParams params;
    params.n_bits = bits;
    params.stay_p = stay_p;
    std::stringstream ss(modes_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) {
        if (tok.size() != static_cast<std::size_t>(bits)) throw ConfigError("datagen: mode width mismatch");
        params.modes.push_back(static_cast<std::uint32_t>(parse_bitstring(tok)));
      }
    params.validate();
    ds = hidden_mode_sample(params, count, rng);
    meta = {{"kind", "hidden-mode"}, {"bits", bits},   {"modes", modes_csv},
            {"stay_p", stay_p},      {"count", count}, {"seed", seed}};
  }

  ensure_out_dir(args.out_dir);
  write_dataset_file((fs::path(args.out_dir) / "data.txt").string(), ds,
                     {provenance_comment(meta)});
  json dist = distribution_to_json(*ds.exact);
  json dist_doc;
  dist_doc["version"] = QABOM_VERSION;
  dist_doc["params"] = meta;
  dist_doc["pmf"] = std::move(dist);
  write_json_file((fs::path(args.out_dir) / "dist.json").string(), dist_doc);
  std::cout << "wrote " << count << " samples to " << (fs::path(args.out_dir) / "data.txt").string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_thermalize(const GlobalArgs& args) {
  const json config = load_json_file(args.config_path);
  expect_keys(config,
              {"model"},
              {"beta", "pulses", "shots", "opt_iterations", "noise_p", "variant", "clamp", "seed"},
              "thermalize");
  const IsingModel model = model_from_json(config.at("model"));

  ThermalizeConfig cfg;
  cfg.beta = config.value("beta", 1.0);
  cfg.pulses = config.value("pulses", 3);
  cfg.shots = config.value("shots", 500);
  cfg.opt_iterations = config.value("opt_iterations", 100);
  cfg.noise.p = config.value("noise_p", 0.0);

  CostVariant variant = CostVariant::Full;
  if (config.contains("variant")) {
    const std::string v = config.at("variant").get<std::string>();
    if (v == "partial")
      variant = CostVariant::Partial;
    else if (v != "full")
      throw ConfigError("thermalize: variant must be full | partial");
  }
  std::optional<std::uint32_t> clamp_bits;
  if (config.contains("clamp")) {
    const std::string s = config.at("clamp").get<std::string>();
    if (s.size() != static_cast<std::size_t>(model.n_visible()))
      throw ConfigError("thermalize: clamp string length must equal the visible count");
    clamp_bits = static_cast<std::uint32_t>(parse_bitstring(s));
    cfg.clamp = ClampSource::fixed(*clamp_bits);
    variant = CostVariant::Partial;
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }

  const std::uint64_t seed = resolve_seed(args, config);
  RngStream rng(seed);
  const auto result = thermalize(model, variant, cfg, rng.derive("thermalize"), true);

  const CostHamiltonian hamiltonian(model, variant);
  const GibbsDistribution gibbs = gibbs_oracle(hamiltonian, cfg.beta);

  json report;
  report["version"] = QABOM_VERSION;
  json resolved = config;
  resolved["seed"] = seed;
  report["config"] = resolved;
  report["initial"] = {{"energy_exact", initial_state_energy(model, variant, cfg.beta, clamp_bits)}};
  report["final"] = {{"energy_estimate", result.estimates.energy},
                     {"energy_exact", result.estimates.energy_exact}};
  report["gibbs"] = {{"energy", gibbs.expectation_energy()}};
  report["schedule"] = {{"gammas", result.schedule.gammas}, {"nus", result.schedule.nus}};
  report["energy_trace"] = result.energy_trace;

  // Relative entropy to the Gibbs state, via the exact reduced state (only
  // without noise, where the circuit is deterministic).
  const CircuitPlan plan = plan_circuit(model, variant, cfg);
  if (!cfg.noise.enabled() && plan.n_qubits <= DensityMatrix::kMaxQubits) {
    std::vector<int> keep(static_cast<std::size_t>(model.n_units));
    std::iota(keep.begin(), keep.end(), 0);
    auto divergence = [&](const PulseSchedule& schedule) {
      RngStream unused(0);
      const StateVector psi = run_circuit(model, variant, schedule, cfg, unused);
      if (model.n_units == plan.n_qubits) {
        const DensityMatrix rho = DensityMatrix::from_state(psi);
        return relative_entropy_to_diagonal(rho, gibbs.probabilities());
      }
      return relative_entropy_to_diagonal(reduced_density(psi, keep), gibbs.probabilities());
    };
    PulseSchedule idle;
    idle.gammas.assign(static_cast<std::size_t>(cfg.pulses), 0.0);
    idle.nus.assign(static_cast<std::size_t>(cfg.pulses), 0.0);
    report["initial"]["kl_to_gibbs"] = divergence(idle);
    report["final"]["kl_to_gibbs"] = divergence(result.schedule);
  }

  ensure_out_dir(args.out_dir);
  const std::string out = (fs::path(args.out_dir) / "report.json").string();
  write_json_file(out, report);
  std::cout << "initial <H>: " << report["initial"]["energy_exact"].get<double>() << "\n";
  std::cout << "final   <H>: " << result.estimates.energy_exact
            << " (estimate " << result.estimates.energy << ")\n";
  std::cout << "gibbs   <H>: " << gibbs.expectation_energy() << "\n";
  if (report["final"].contains("kl_to_gibbs"))
    std::cout << "D(rho||gibbs): " << report["initial"]["kl_to_gibbs"].get<double>() << " -> "
              << report["final"]["kl_to_gibbs"].get<double>() << "\n";
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate-thermalization Boltzmann machine experiments"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::string axis_flag, values_flag;
  int seeds_flag = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) cmd->add_option("--config", args.config_path, "JSON config file")->required();
    cmd->add_option("--seed", args.seed, "override the run seed");
    cmd->add_option("--jobs", args.jobs, "worker threads for independent runs");
    cmd->add_option("--out-dir", args.out_dir, "output directory");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "run one training experiment");
  add_common(train_cmd, true);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "aggregate a metric across an axis");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--axis", axis_flag, "noise_p | pulses_P | shots_N");
  sweep_cmd->add_option("--values", values_flag, "comma-separated axis values");
  sweep_cmd->add_option("--seeds", seeds_flag, "seeds per value");

  CLI::App* datagen_cmd = app.add_subcommand("datagen", "generate a dataset");
  datagen_cmd->require_subcommand(1);
  int bits = 4, source_bits = 2, count = 1000;
  double eta = 0.6, flip_p = 0.025, stay_p = 0.9;
  std::string modes_csv;
  CLI::App* coded_cmd = datagen_cmd->add_subcommand("coded", "repetition-coded Bernoulli bits");
  coded_cmd->add_option("--bits", bits, "output width");
  coded_cmd->add_option("--source-bits", source_bits, "source word width");
  coded_cmd->add_option("--eta", eta, "P(source bit = 1)");
  coded_cmd->add_option("--flip-p", flip_p, "per-bit flip probability");
  coded_cmd->add_option("--count", count, "samples to draw");
  add_common(coded_cmd, false);
  CLI::App* hidden_cmd = datagen_cmd->add_subcommand("hidden", "hidden-mode mixture");
  hidden_cmd->add_option("--bits", bits, "output width");
  hidden_cmd->add_option("--modes", modes_csv, "comma-separated mode bitstrings")->required();
  hidden_cmd->add_option("--stay-p", stay_p, "per-bit keep probability");
  hidden_cmd->add_option("--count", count, "samples to draw");
  add_common(hidden_cmd, false);

  CLI::App* therm_cmd = app.add_subcommand("thermalize", "standalone thermalization report");
  add_common(therm_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(args);
    if (sweep_cmd->parsed()) return cmd_sweep(args, axis_flag, values_flag, seeds_flag);
    if (datagen_cmd->parsed()) {
      const std::string kind = coded_cmd->parsed() ? "coded" : "hidden";
      return cmd_datagen(kind, args, bits, source_bits, eta, flip_p, modes_csv, stay_p, count);
    }
    if (therm_cmd->parsed()) return cmd_thermalize(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
