#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldsignal/consistency.hpp"
#include "ldsignal/kernel_test.hpp"
#include "ldsignal/montecarlo.hpp"
#include "ldsignal/quadratic_test.hpp"

namespace ldsignal {

// Invalid configuration, anchored to a line of the config file (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string file, int line, const std::string& msg);
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

struct ResultRow {
  std::string experiment_id;
  double epsilon = 0.0;
  std::string test;
  double x_alpha = 0.0;
  MCEstimate estimate;
  std::uint64_t seed = 0;
};

struct PredictionRow {
  std::string experiment_id;
  double epsilon = 0.0;
  std::string test;
  double x_alpha = 0.0;
  PowerPrediction prediction;
};

extern const std::vector<std::string> kResultColumns;
extern const std::vector<std::string> kPredictionColumns;

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
void write_predictions_csv(const std::string& path, const std::vector<PredictionRow>& rows);

enum class ExperimentKind {
  CalibrateNull,
  PowerCurve,
  ChernoffSuite,
  ConsistencyScan,
  KernelVsQuadratic,
  Counterexample
};
std::string to_string(ExperimentKind k);

struct ExperimentConfig {
  std::string source;  // config path, for messages
  std::string id = "experiment";
  ExperimentKind kind = ExperimentKind::CalibrateNull;
  std::optional<RateParams> rate;
  std::optional<WeightScheme> scheme;
  std::optional<Kernel> kernel;
  std::optional<double> h;              // fixed bandwidth
  std::optional<double> bandwidth_a;    // h_eps = a eps^{h exponent}
  double jmax_factor = 4.0;
  std::optional<AlternativeFamily> family;
  std::vector<double> eps_grid;
  std::optional<double> alpha;
  std::optional<AlphaSchedule> alpha_schedule;
  std::vector<double> x_grid;           // explicit thresholds
  std::vector<double> amplitudes{1.0};  // signal scale factors for power curves
  MCConfig mc;
  bool run_mc = true;
  std::uint64_t config_seed = 1;
  std::string output_dir = "out";
  // consistency-scan
  double c2 = 1.0;
  std::vector<double> C1_grid{1.0, 2.0, 4.0, 8.0};
  double delta = 0.05;
  ConsistencyThresholds thresholds;
  // chernoff-suite
  std::int64_t suite_size = 20;
  std::int64_t suite_terms = 6;
  // kernel-vs-quadratic
  std::int64_t equivalence_reps = 100;
  // counterexample
  double tau_exponent_factor = 0.5;  // tau_j = j^{-1/2 - factor s}
  std::int64_t tau_jmax = 1 << 20;
  CounterexampleVariant variant = CounterexampleVariant::Quadratic;
  nlohmann::json raw;
};

// Parses and validates; throws ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source);
std::string describe_plan(const ExperimentConfig& cfg);

struct RunOptions {
  std::optional<std::string> out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;  // overrides everything
  bool emit_gnuplot = false;
};

// Seed precedence: flag > LDSIGNAL_SEED > config.
std::uint64_t resolve_seed(const ExperimentConfig& cfg, const RunOptions& opt);

struct RunArtifacts {
  std::vector<ResultRow> results;
  std::vector<PredictionRow> predictions;
  nlohmann::json report;
};

RunArtifacts execute(const ExperimentConfig& cfg, std::uint64_t seed, int threads);
// Executes and writes results.csv, predictions.csv, report.json (and plot.gp).
void run_and_write(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace ldsignal
