// Drives the installed command-line binary end to end through temp
// directories. The binary path comes in via QABOM_CLI_PATH.
#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>
#include <unistd.h>

#include "qabom/serialize.hpp"

using namespace qabom;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("qabom_cli_" + std::to_string(std::rand()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QABOM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

json strip_wallclock(json j) {
  for (auto& e : j.at("epochs")) e.erase("wallclock_s");
  return j;
}

const char* kSmallConfig = R"({
  "topology": {"visible": 2, "hidden": 1},
  "beta": 1.0,
  "pulses": 1,
  "shots": 60,
  "opt_iterations": 4,
  "epochs": 1,
  "mode": "qrc-classical",
  "seed": 11,
  "dataset": {"kind": "hidden-mode", "bits": 2, "modes": ["00", "11"], "stay_p": 0.9, "count": 6}
})";

}  // namespace

TEST_CASE("train subcommand writes reproducible artifacts", "[cli]") {
  TempDir tmp;
  std::ofstream(tmp.file("cfg.json")) << kSmallConfig;

  REQUIRE(run_cli("train --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("out1")) == 0);
  REQUIRE(fs::exists(tmp.file("out1") + "/history.json"));
  REQUIRE(fs::exists(tmp.file("out1") + "/kl.csv"));

  const json history = load_json_file(tmp.file("out1") + "/history.json");
  REQUIRE(history.at("epochs").size() == 2);
  REQUIRE(history.at("config").at("seed").get<std::uint64_t>() == 11);
  REQUIRE(history.at("version").get<std::string>() == QABOM_VERSION);

  REQUIRE(run_cli("train --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("out2")) == 0);
  REQUIRE(slurp(tmp.file("out1") + "/kl.csv") == slurp(tmp.file("out2") + "/kl.csv"));
  // wallclock_s is the documented non-reproducible field
  REQUIRE(strip_wallclock(load_json_file(tmp.file("out1") + "/history.json")) ==
          strip_wallclock(load_json_file(tmp.file("out2") + "/history.json")));
}

TEST_CASE("train accepts an epochs=0 config", "[cli]") {
  TempDir tmp;
  json cfg = json::parse(kSmallConfig);
  cfg["epochs"] = 0;
  std::ofstream(tmp.file("cfg.json")) << cfg.dump();
  REQUIRE(run_cli("train --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("out")) == 0);
  const json history = load_json_file(tmp.file("out") + "/history.json");
  REQUIRE(history.at("epochs").size() == 1);
}

TEST_CASE("seed flag overrides the config", "[cli]") {
  TempDir tmp;
  std::ofstream(tmp.file("cfg.json")) << kSmallConfig;
  REQUIRE(run_cli("train --config " + tmp.file("cfg.json") + " --seed 77 --out-dir " +
                  tmp.file("out")) == 0);
  const json history = load_json_file(tmp.file("out") + "/history.json");
  REQUIRE(history.at("config").at("seed").get<std::uint64_t>() == 77);
}

TEST_CASE("config errors exit with code 2", "[cli]") {
  TempDir tmp;
  REQUIRE(run_cli("train --config " + tmp.file("missing.json")) == 2);

  std::ofstream(tmp.file("bad.json")) << R"({"topology": {"visible": 2, "hidden": 1}, "shotz": 3})";
  REQUIRE(run_cli("train --config " + tmp.file("bad.json")) == 2);

  std::ofstream(tmp.file("badmode.json"))
      << R"({"topology": {"visible": 2, "hidden": 1}, "mode": "nope", "dataset": {"kind": "hidden-mode", "bits": 2, "modes": ["00"]}})";
  REQUIRE(run_cli("train --config " + tmp.file("badmode.json")) == 2);
}

TEST_CASE("datagen writes deterministic files and validates", "[cli]") {
  TempDir tmp;
  const std::string args =
      "datagen coded --bits 4 --source-bits 2 --eta 0.6 --flip-p 0.025 --count 200 --seed 7";
  REQUIRE(run_cli(args + " --out-dir " + tmp.file("a")) == 0);
  REQUIRE(run_cli(args + " --out-dir " + tmp.file("b")) == 0);
  REQUIRE(slurp(tmp.file("a") + "/data.txt") == slurp(tmp.file("b") + "/data.txt"));
  REQUIRE(slurp(tmp.file("a") + "/dist.json") == slurp(tmp.file("b") + "/dist.json"));

  const Dataset ds = read_dataset_file(tmp.file("a") + "/data.txt");
  REQUIRE(ds.n_bits == 4);
  REQUIRE(ds.points.size() == 200);

  REQUIRE(run_cli("datagen coded --bits 4 --source-bits 2 --eta 1.5 --out-dir " + tmp.file("c")) ==
          2);
  REQUIRE(run_cli("datagen hidden --bits 4 --modes 0011,1100 --count 50 --out-dir " +
                  tmp.file("d")) == 0);
}

TEST_CASE("thermalize subcommand reports energies and divergences", "[cli]") {
  TempDir tmp;
  std::ofstream(tmp.file("t.json")) << R"({
    "model": {"units": 2, "visible": [0, 1], "hidden": [],
              "couplings": [[0, 1, 1.0]], "biases": {"0": 0.0, "1": 0.0}},
    "beta": 1.0, "pulses": 2, "shots": 200, "opt_iterations": 25, "seed": 3
  })";
  REQUIRE(run_cli("thermalize --config " + tmp.file("t.json") + " --out-dir " + tmp.file("out")) ==
          0);
  const json report = load_json_file(tmp.file("out") + "/report.json");
  REQUIRE(report.at("initial").contains("energy_exact"));
  REQUIRE(report.at("final").contains("energy_estimate"));
  REQUIRE(report.at("gibbs").contains("energy"));
  REQUIRE(report.at("initial").contains("kl_to_gibbs"));
  REQUIRE(report.at("final").contains("kl_to_gibbs"));
  REQUIRE(report.at("energy_trace").size() >= 1);
}

TEST_CASE("sweep aggregates across values and seeds", "[cli][slow]") {
  TempDir tmp;
  json cfg = json::parse(kSmallConfig);
  cfg["sweep"] = {{"axis", "shots_N"}, {"values", {50, 400}}, {"seeds", 3}};
  std::ofstream(tmp.file("cfg.json")) << cfg.dump();

  REQUIRE(run_cli("sweep --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("s1")) == 0);
  const std::string csv = slurp(tmp.file("s1") + "/sweep.csv");
  REQUIRE(csv.find("axis,value,seeds,metric,mean,stddev") != std::string::npos);
  REQUIRE(csv.find("shots_N,50,3,update_error,") != std::string::npos);
  REQUIRE(csv.find("shots_N,400,3,update_error,") != std::string::npos);

  // output is independent of the worker count
  REQUIRE(run_cli("sweep --config " + tmp.file("cfg.json") + " --jobs 3 --out-dir " +
                  tmp.file("s2")) == 0);
  REQUIRE(csv == slurp(tmp.file("s2") + "/sweep.csv"));

  // noise axis produces per-run KL traces
  json cfg2 = json::parse(kSmallConfig);
  cfg2["sweep"] = {{"axis", "noise_p"}, {"values", {0.0, 0.01}}, {"seeds", 2}};
  std::ofstream(tmp.file("cfg2.json")) << cfg2.dump();
  REQUIRE(run_cli("sweep --config " + tmp.file("cfg2.json") + " --out-dir " + tmp.file("s3")) == 0);
  REQUIRE(fs::exists(tmp.file("s3") + "/kl_noise_p_0_seed0.csv"));
  REQUIRE(fs::exists(tmp.file("s3") + "/kl_noise_p_0p01_seed1.csv"));
}
