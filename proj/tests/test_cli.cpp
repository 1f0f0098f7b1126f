#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catch_amalgamated.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  static const fs::path root = [] {
    fs::path r = fs::temp_directory_path() / ("ldsignal_cli_" + std::to_string(::getpid()));
    fs::remove_all(r);
    fs::create_directories(r);
    return r;
  }();
  return root;
}

Run ldsignal(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  fs::path o = scratch() / ("stdout" + std::to_string(counter));
  fs::path e = scratch() / ("stderr" + std::to_string(counter++));
  std::string cmd = "env -u LDSIGNAL_SEED " + env + " " LDSIGNAL_CLI_PATH " " + args + " >" + o.string() + " 2>" +
                    e.string();
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p;
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    auto cells = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

const char* kCalibrate = R"({
  "experiment": "calibrate-null",
  "id": "k1e4",
  "seed": 3,
  "scheme": {"name": "flat-cutoff", "r": 0.25, "omega": 0.125, "cutoff_scale": 10000},
  "eps_grid": [1.0],
  "x_grid": [2.0],
  "mc": {"n_reps": 100000}
})";

}  // namespace

TEST_CASE("missing field is a config error naming the field") {
  auto cfg = write_config("missing.json", R"({
  "experiment": "calibrate-null",
  "id": "m",
  "scheme": {"name": "flat-cutoff", "r": 0.25, "omega": 0.125},
  "x_grid": [1.0]
})");
  auto r = ldsignal("validate " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("eps_grid") != std::string::npos);
  CHECK(r.err.find(cfg.string() + ":") != std::string::npos);
  CHECK(ldsignal("run " + cfg.string()).code == 2);
}

TEST_CASE("out-of-range rate is a config error with a line number") {
  auto cfg = write_config("rate.json", R"({
  "experiment": "consistency-scan",
  "id": "bad",
  "rate": {"r": 0.6, "omega": 0.1},
  "scheme": {"name": "flat-cutoff", "r": 0.25, "omega": 0.125},
  "family": {"name": "single-mode", "index": 1},
  "eps_grid": [0.2, 0.1]
})");
  auto r = ldsignal("validate " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find(cfg.string() + ":4:") != std::string::npos);
}

TEST_CASE("unreadable config") {
  CHECK(ldsignal("validate " + (scratch() / "nope.json").string()).code == 2);
  CHECK(ldsignal("frobnicate").code != 0);
}

TEST_CASE("validate echoes the plan") {
  auto cfg = write_config("valid.json", kCalibrate);
  auto r = ldsignal("validate " + cfg.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("k1e4") != std::string::npos);
  CHECK(r.out.find("calibrate-null") != std::string::npos);
  CHECK(r.out.find("100000") != std::string::npos);
}

TEST_CASE("calibrate-null at k = 1e4, x = 2") {
  auto cfg = write_config("cal.json", kCalibrate);
  fs::path out = scratch() / "cal";
  auto r = ldsignal("run " + cfg.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  auto rows = read_csv(out / "results.csv");
  REQUIRE(rows.size() == 1);
  double p = std::stod(rows[0]["p_hat"]);
  double se = std::stod(rows[0]["std_err"]);
  CHECK(rows[0]["test"] == "quadratic-alpha");
  CHECK(std::abs(p - 0.0227501319481792) <= 3.0 * se);
  auto preds = read_csv(out / "predictions.csv");
  REQUIRE(preds.size() == 1);
  CHECK(std::abs(std::stod(preds[0]["alpha_pred"]) - 0.0227501319481792) < 1e-12);
}

TEST_CASE("consistency scan with a single low mode") {
  auto cfg = write_config("scan.json", R"({
  "experiment": "consistency-scan",
  "id": "low",
  "seed": 9,
  "rate": {"r": 0.25, "omega": 0.125},
  "scheme": {"name": "flat-cutoff", "r": 0.25, "omega": 0.125},
  "family": {"name": "single-mode", "index": 1},
  "eps_grid": [0.2, 0.1, 0.05],
  "alpha_schedule": {"a0": 0.05, "power": 0.0},
  "mc": {"n_reps": 2000, "mode": "tilted"}
})");
  fs::path out = scratch() / "scan";
  REQUIRE(ldsignal("run " + cfg.string() + " --out " + out.string()).code == 0);
  auto rep = read_json(out / "report.json");
  CHECK(rep["ld_consistency"]["verdict"] == "consistent");
  for (const auto& m : rep["ld_consistency"]["mass_ratio"]) CHECK(std::abs(m.get<double>() - 1.0) < 1e-12);
  CHECK(rep["pure_consistency"]["pure"] == true);
}

TEST_CASE("counterexample report") {
  auto cfg = write_config("cx.json", R"({
  "experiment": "counterexample",
  "id": "cx",
  "rate": {"r": 0.25, "omega": 0.125},
  "scheme": {"name": "polynomial-decay", "lambda": 2.0, "k_exponent": -1.5, "level_exponent": 2.5, "max_index": 65536},
  "tau": {"exponent_factor": 0.5, "jmax": 65536}
})");
  fs::path out = scratch() / "cx";
  REQUIRE(ldsignal("run " + cfg.string() + " --out " + out.string()).code == 0);
  auto rep = read_json(out / "report.json");
  CHECK(rep["C_increasing"] == true);
  CHECK(rep["levels"].size() >= 3);
  for (const auto& lv : rep["levels"]) CHECK(std::abs(lv["sandwich"].get<double>() - 1.0) < 1e-9);

  auto inside = write_config("cx_in.json", R"({
  "experiment": "counterexample",
  "id": "cx",
  "rate": {"r": 0.25, "omega": 0.125},
  "scheme": {"name": "polynomial-decay", "lambda": 2.0, "k_exponent": -1.5, "level_exponent": 2.5, "max_index": 65536},
  "tau": {"exponent_factor": 2.0, "jmax": 65536}
})");
  CHECK(ldsignal("run " + inside.string() + " --out " + (scratch() / "cx_in").string()).code == 3);
}

TEST_CASE("reruns are byte-identical and join keys match") {
  auto cfg = write_config("rerun.json", R"({
  "experiment": "power-curve",
  "id": "pc",
  "seed": 17,
  "rate": {"r": 0.25, "omega": 0.125},
  "family": {"name": "single-mode", "index": 1},
  "scheme": {"name": "flat-cutoff", "r": 0.25, "omega": 0.125, "cutoff_scale": 100},
  "eps_grid": [0.5, 0.25],
  "alpha": 0.05,
  "amplitudes": [0.0, 2.0, 4.0],
  "mc": {"n_reps": 5000}
})");
  fs::path a = scratch() / "ra";
  fs::path b = scratch() / "rb";
  REQUIRE(ldsignal("run " + cfg.string() + " --out " + a.string()).code == 0);
  REQUIRE(ldsignal("run " + cfg.string() + " --out " + b.string() + " --threads 3").code == 0);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "predictions.csv") == slurp(b / "predictions.csv"));
  auto ja = read_json(a / "report.json");
  auto jb = read_json(b / "report.json");
  ja.erase("metadata");
  jb.erase("metadata");
  CHECK(ja == jb);

  auto key = [](std::map<std::string, std::string>& r) {
    return r["experiment_id"] + "|" + r["epsilon"] + "|" + r["test"] + "|" + r["x_alpha"];
  };
  std::set<std::string> pred_keys;
  for (auto& r : read_csv(a / "predictions.csv")) pred_keys.insert(key(r));
  auto results = read_csv(a / "results.csv");
  REQUIRE(!results.empty());
  for (auto& r : results) CHECK(pred_keys.count(key(r)) == 1);
}

TEST_CASE("seed precedence: flag, then environment, then config") {
  auto cfg = write_config("seed.json", R"({
  "experiment": "calibrate-null",
  "id": "s",
  "seed": 5,
  "scheme": {"name": "flat-cutoff", "r": 0.25, "omega": 0.125, "cutoff_scale": 10},
  "eps_grid": [1.0],
  "x_grid": [1.0],
  "mc": {"n_reps": 1000}
})");
  auto seed_of = [&](const std::string& extra, const std::string& env) {
    fs::path out = scratch() / "seed";
    REQUIRE(ldsignal("run " + cfg.string() + " --out " + out.string() + extra, env).code == 0);
    return read_json(out / "report.json")["metadata"]["seed"].get<std::uint64_t>();
  };
  CHECK(seed_of("", "") == 5);
  CHECK(seed_of("", "LDSIGNAL_SEED=11") == 11);
  CHECK(seed_of(" --seed 23", "LDSIGNAL_SEED=11") == 23);
  CHECK(seed_of(" --seed 23", "") == 23);
}

TEST_CASE("gnuplot script on request") {
  auto cfg = write_config("gp.json", kCalibrate);
  fs::path out = scratch() / "gp";
  REQUIRE(ldsignal("run " + cfg.string() + " --out " + out.string() + " --emit-gnuplot --seed 1").code == 0);
  CHECK(fs::exists(out / "plot.gp"));
}
