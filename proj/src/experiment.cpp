#include "ldsignal/experiment.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ldsignal/csv.hpp"
#include "ldsignal/errors.hpp"
#include "ldsignal/normal.hpp"

namespace ldsignal {

namespace fs = std::filesystem;

ConfigError::ConfigError(std::string file, int line, const std::string& msg)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg), file_(std::move(file)), line_(line) {}

const std::vector<std::string> kResultColumns{"experiment_id", "epsilon", "test",        "x_alpha", "p_hat",
                                              "std_err",       "log_p",   "n_effective", "mode",    "seed"};
const std::vector<std::string> kPredictionColumns{"experiment_id", "epsilon",   "test",      "x_alpha",
                                                  "regime",        "alpha_pred", "beta_pred", "log_alpha",
                                                  "log_beta",      "B_eps",      "D_eps",     "k_eps"};

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  CsvWriter w(out, kResultColumns);
  for (const auto& r : rows)
    w.row({r.experiment_id, format_double(r.epsilon), r.test, format_double(r.x_alpha),
           format_double(r.estimate.p_hat), format_double(r.estimate.std_err), format_double(r.estimate.log_p),
           format_double(r.estimate.n_effective), to_string(r.estimate.mode), std::to_string(r.seed)});
}

void write_predictions_csv(const std::string& path, const std::vector<PredictionRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  CsvWriter w(out, kPredictionColumns);
  for (const auto& r : rows) {
    const auto& p = r.prediction;
    w.row({r.experiment_id, format_double(r.epsilon), r.test, format_double(r.x_alpha), to_string(p.regime),
           format_optional(p.alpha_pred), format_optional(p.beta_pred), format_optional(p.log_alpha),
           format_optional(p.log_beta), format_double(p.B_eps), format_double(p.D_eps), format_double(p.k_eps)});
  }
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::CalibrateNull: return "calibrate-null";
    case ExperimentKind::PowerCurve: return "power-curve";
    case ExperimentKind::ChernoffSuite: return "chernoff-suite";
    case ExperimentKind::ConsistencyScan: return "consistency-scan";
    case ExperimentKind::KernelVsQuadratic: return "kernel-vs-quadratic";
    default: return "counterexample";
  }
}

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

class Parser {
 public:
  Parser(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(source_, line_of_key(text_, key), msg);
  }

  template <class F>
  auto guarded(const std::string& key, F f) const {
    try {
      return f();
    } catch (const ConfigError&) {
      throw;
    } catch (const nlohmann::json::exception& e) {
      fail(key, "field \"" + key + "\": " + e.what());
    } catch (const std::exception& e) {
      fail(key, "field \"" + key + "\": " + e.what());
    }
  }

  const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& why) const {
    if (!j.contains(key)) fail(key, "missing required field \"" + key + "\" (" + why + ")");
    return j.at(key);
  }

 private:
  const std::string& text_;
  const std::string& source_;
};

ExperimentKind parse_kind(const Parser& P, const std::string& s) {
  for (auto k : {ExperimentKind::CalibrateNull, ExperimentKind::PowerCurve, ExperimentKind::ChernoffSuite,
                 ExperimentKind::ConsistencyScan, ExperimentKind::KernelVsQuadratic, ExperimentKind::Counterexample})
    if (to_string(k) == s) return k;
  P.fail("experiment", "unknown experiment kind \"" + s + "\"");
}

void check_writable(const Parser& P, const std::string& dir) {
  fs::path p(dir);
  if (p.empty()) p = ".";
  std::error_code ec;
  if (fs::exists(p, ec)) {
    if (!fs::is_directory(p, ec)) P.fail("output", "output path \"" + dir + "\" is not a directory");
    if (::access(p.c_str(), W_OK) != 0) P.fail("output", "output directory \"" + dir + "\" is not writable");
    return;
  }
  fs::path parent = fs::absolute(p, ec).parent_path();
  while (!parent.empty() && !fs::exists(parent, ec)) parent = parent.parent_path();
  if (parent.empty() || ::access(parent.c_str(), W_OK) != 0)
    P.fail("output", "output directory \"" + dir + "\" cannot be created");
}

CoefficientVector as_complex_cosine(const CoefficientVector& theta) {
  if (theta.basis() == Basis::ComplexExponential) return theta;
  // sqrt2 cos(2 pi j t) has coefficients 1/sqrt2 at +-j.
  std::vector<std::pair<CoefficientVector::Index, CoefficientVector::Value>> half;
  for (const auto& e : theta.entries()) half.emplace_back(e.index, e.value / std::sqrt(2.0));
  return CoefficientVector::hermitian(theta.jmax(), std::move(half));
}

double bandwidth_for(const ExperimentConfig& c, double eps) {
  if (c.h) return *c.h;
  return bandwidth(*c.bandwidth_a, c.rate->r, c.rate->omega, eps);
}

KernelTestConfig kernel_cfg(const ExperimentConfig& c, double eps) {
  return KernelTestConfig::with_default_jmax(bandwidth_for(c, eps), eps, c.jmax_factor);
}

std::vector<double> thresholds(const ExperimentConfig& c, double eps) {
  if (!c.x_grid.empty()) return c.x_grid;
  if (c.alpha_schedule) return {threshold_x(c.alpha_schedule->at(eps))};
  return {threshold_x(*c.alpha)};
}

nlohmann::json summary_json(const WeightSummary& s) {
  return {{"rho_sq", s.rho_sq}, {"A_eps", s.A_eps}, {"k_eps", s.k_eps}, {"kappa_eps_sq", s.kappa_eps_sq},
          {"kappa1_sq", s.kappa1_sq}, {"cutoff", s.cutoff}};
}

nlohmann::json assumption_json(const AssumptionReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& d : r.per_epsilon)
    per.push_back({{"epsilon", d.epsilon}, {"summary", summary_json(d.summary)}, {"a3_ratios", d.a3_ratios},
                   {"a4_leading_ratio", d.a4_leading_ratio}, {"a4_ratios", d.a4_ratios},
                   {"a5_ratios", d.a5_ratios}});
  return {{"cutoff_mode", r.cutoff_mode},
          {"a1_ok", r.a1_ok},
          {"a2_ok", r.a2_ok},
          {"a2_C1", r.a2_C1},
          {"a2_C2", r.a2_C2},
          {"a3_ok", r.a3_ok},
          {"a3_lambda", r.a3_lambda},
          {"a3_constant", r.a3_constant},
          {"a3_shape_spread", r.a3_shape_spread},
          {"a4_ok", r.a4_ok},
          {"a4_max_leading_ratio", r.a4_max_leading_ratio},
          {"a4_min_ratio", r.a4_min_ratio},
          {"a5_ok", r.a5_ok},
          {"a5_min_ratio", r.a5_min_ratio},
          {"per_epsilon", per}};
}

nlohmann::json estimate_json(const MCEstimate& e) {
  return {{"p_hat", e.p_hat}, {"std_err", e.std_err}, {"log_p", e.log_p}, {"se_log", e.se_log},
          {"n_effective", e.n_effective}, {"mode", to_string(e.mode)}, {"tilt", e.tilt}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  Parser P(text, source);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source, line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError(source, 1, "config must be a JSON object");

  ExperimentConfig c;
  c.source = source;
  c.raw = j;
  c.kind = parse_kind(P, P.guarded("experiment", [&] {
    return P.require(j, "experiment", "one of the six experiment kinds").get<std::string>();
  }));
  c.id = P.guarded("id", [&] { return j.value("id", to_string(c.kind)); });
  if (j.contains("seed")) c.config_seed = P.guarded("seed", [&] { return j.at("seed").get<std::uint64_t>(); });

  if (j.contains("rate"))
    c.rate = P.guarded("rate", [&] {
      const auto& r = j.at("rate");
      return maxiset_s(P.require(r, "r", "rate parameter r").get<double>(),
                       P.require(r, "omega", "rate parameter omega").get<double>());
    });
  if (j.contains("scheme")) c.scheme = P.guarded("scheme", [&] { return weight_scheme_from_json(j.at("scheme")); });
  if (j.contains("kernel")) c.kernel = P.guarded("kernel", [&] { return kernel_from_json(j.at("kernel")); });
  if (j.contains("bandwidth")) {
    P.guarded("bandwidth", [&] {
      const auto& b = j.at("bandwidth");
      if (b.contains("h")) c.h = b.at("h").get<double>();
      if (b.contains("a")) c.bandwidth_a = b.at("a").get<double>();
      c.jmax_factor = b.value("jmax_factor", 4.0);
      if (!c.h && !c.bandwidth_a) throw ParameterError("give \"h\" or \"a\"");
      if (c.h && !(*c.h > 0.0 && *c.h < 1.0)) throw ParameterError("h must lie in (0, 1)");
      if (c.bandwidth_a && !c.rate) throw ParameterError("a bandwidth schedule needs \"rate\"");
      return 0;
    });
  }
  if (j.contains("family")) {
    if (!c.rate) P.fail("family", "a family needs \"rate\" to fix its norm rate");
    c.family = P.guarded("family", [&] { return family_from_json(j.at("family"), *c.rate); });
  }
  if (j.contains("eps_grid")) {
    c.eps_grid = P.guarded("eps_grid", [&] { return j.at("eps_grid").get<std::vector<double>>(); });
    if (c.eps_grid.empty()) P.fail("eps_grid", "eps_grid must not be empty");
    for (std::size_t i = 0; i < c.eps_grid.size(); ++i) {
      if (!(c.eps_grid[i] > 0.0)) P.fail("eps_grid", "eps_grid entries must be positive");
      if (i > 0 && !(c.eps_grid[i] < c.eps_grid[i - 1])) P.fail("eps_grid", "eps_grid must be strictly decreasing");
    }
  }
  if (j.contains("alpha")) {
    c.alpha = P.guarded("alpha", [&] { return j.at("alpha").get<double>(); });
    if (!(*c.alpha > 0.0 && *c.alpha < 1.0)) P.fail("alpha", "alpha must lie in (0, 1)");
  }
  if (j.contains("alpha_schedule"))
    c.alpha_schedule = P.guarded("alpha_schedule", [&] {
      const auto& a = j.at("alpha_schedule");
      AlphaSchedule s{a.value("a0", 1.0), a.value("power", 1.0)};
      if (!(s.a0 > 0.0)) throw ParameterError("a0 must be positive");
      return s;
    });
  if (j.contains("x_grid")) c.x_grid = P.guarded("x_grid", [&] { return j.at("x_grid").get<std::vector<double>>(); });
  if (j.contains("amplitudes")) {
    c.amplitudes = P.guarded("amplitudes", [&] { return j.at("amplitudes").get<std::vector<double>>(); });
    if (c.amplitudes.empty()) P.fail("amplitudes", "amplitudes must not be empty");
  }
  if (j.contains("mc")) {
    P.guarded("mc", [&] {
      const auto& m = j.at("mc");
      c.mc.n_reps = m.value("n_reps", std::int64_t{100000});
      std::string mode = m.value("mode", std::string("plain"));
      if (mode == "plain")
        c.mc.mode = MCMode::Plain;
      else if (mode == "tilted")
        c.mc.mode = MCMode::Tilted;
      else
        throw ParameterError("mode must be \"plain\" or \"tilted\"");
      if (m.contains("tilt_t")) c.mc.tilt_t = m.at("tilt_t").get<double>();
      std::string sampler = m.value("sampler", std::string("grouped"));
      if (sampler == "grouped")
        c.mc.sampler = Sampler::Grouped;
      else if (sampler == "per-coefficient")
        c.mc.sampler = Sampler::PerCoefficient;
      else
        throw ParameterError("sampler must be \"grouped\" or \"per-coefficient\"");
      c.run_mc = m.value("enabled", true);
      c.mc.validate();
      return 0;
    });
  }
  if (j.contains("output"))
    c.output_dir = P.guarded("output", [&] { return j.at("output").value("dir", std::string("out")); });
  if (j.contains("consistency")) {
    P.guarded("consistency", [&] {
      const auto& k = j.at("consistency");
      c.c2 = k.value("c2", 1.0);
      c.C1_grid = k.value("C1_grid", c.C1_grid);
      c.delta = k.value("delta", 0.05);
      c.thresholds.c1 = k.value("c1", 0.1);
      c.thresholds.slope_tolerance = k.value("slope_tolerance", 0.1);
      if (!(c.c2 > 0.0)) throw ParameterError("c2 must be positive");
      if (c.C1_grid.empty()) throw ParameterError("C1_grid must not be empty");
      return 0;
    });
  }
  if (j.contains("suite")) {
    P.guarded("suite", [&] {
      const auto& s = j.at("suite");
      c.suite_size = s.value("size", std::int64_t{20});
      c.suite_terms = s.value("terms", std::int64_t{6});
      if (c.suite_size < 1 || c.suite_terms < 1) throw ParameterError("size and terms must be positive");
      return 0;
    });
  }
  if (j.contains("equivalence_reps"))
    c.equivalence_reps = P.guarded("equivalence_reps", [&] { return j.at("equivalence_reps").get<std::int64_t>(); });
  if (j.contains("tau")) {
    P.guarded("tau", [&] {
      const auto& t = j.at("tau");
      c.tau_exponent_factor = t.value("exponent_factor", 0.5);
      c.tau_jmax = t.value("jmax", std::int64_t{1} << 20);
      std::string v = t.value("variant", std::string("quadratic"));
      if (v == "quadratic")
        c.variant = CounterexampleVariant::Quadratic;
      else if (v == "kernel")
        c.variant = CounterexampleVariant::Kernel;
      else
        throw ParameterError("variant must be \"quadratic\" or \"kernel\"");
      if (c.tau_jmax < 64) throw ParameterError("jmax must be at least 64");
      return 0;
    });
  }

  // Requirements per experiment kind.
  auto need = [&](bool ok, const std::string& key, const std::string& why) {
    if (!ok) P.fail(key, "missing required field \"" + key + "\" (" + why + ")");
  };
  bool has_alpha = c.alpha || c.alpha_schedule;
  switch (c.kind) {
    case ExperimentKind::CalibrateNull:
      need(c.scheme || c.kernel, "scheme", "weights or a kernel to calibrate");
      need(!c.eps_grid.empty(), "eps_grid", "noise levels to scan");
      need(!c.x_grid.empty() || has_alpha, "x_grid", "thresholds, or \"alpha\"");
      break;
    case ExperimentKind::PowerCurve:
      need(c.scheme || c.kernel, "scheme", "weights or a kernel");
      need(c.family.has_value(), "family", "alternatives to test against");
      need(!c.eps_grid.empty(), "eps_grid", "noise levels to scan");
      need(!c.x_grid.empty() || has_alpha, "alpha", "test level");
      break;
    case ExperimentKind::ChernoffSuite:
      need(c.scheme.has_value(), "scheme", "weights for the suite");
      need(!c.eps_grid.empty(), "eps_grid", "noise level of the suite");
      need(!c.x_grid.empty(), "x_grid", "Chernoff thresholds");
      for (double x : c.x_grid)
        if (!(x > 0.0)) P.fail("x_grid", "Chernoff thresholds must be positive");
      break;
    case ExperimentKind::ConsistencyScan:
      need(c.rate.has_value(), "rate", "rate parameters");
      need(c.family.has_value(), "family", "family to classify");
      need(!c.eps_grid.empty(), "eps_grid", "noise levels to scan");
      if (c.scheme) need(has_alpha, "alpha_schedule", "level schedule for the slope diagnostic");
      break;
    case ExperimentKind::KernelVsQuadratic:
      need(c.kernel.has_value(), "kernel", "kernel to compare");
      need(!c.eps_grid.empty(), "eps_grid", "noise levels to scan");
      need(c.h || c.bandwidth_a, "bandwidth", "\"h\" or a schedule \"a\"");
      need(!c.x_grid.empty() || has_alpha, "alpha", "test level");
      break;
    case ExperimentKind::Counterexample:
      need(c.rate.has_value(), "rate", "rate parameters");
      need(c.scheme.has_value(), "scheme", "weights for the SNR ratio");
      break;
  }
  if (c.kernel && (c.h || c.bandwidth_a)) {
    for (double eps : c.eps_grid)
      P.guarded("bandwidth", [&] { return kernel_cfg(c, eps); });
  }
  if (c.scheme) {
    for (double eps : c.eps_grid)
      P.guarded("scheme", [&] { return weight_summary(*c.scheme, eps); });
  }
  check_writable(P, c.output_dir);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot read config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string describe_plan(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "experiment " << c.id << " (" << to_string(c.kind) << ")\n";
  if (c.rate)
    o << "  rate: r=" << c.rate->r << " omega=" << c.rate->omega << " s=" << c.rate->s
      << " k_eps~eps^" << c.rate->k_eps_exponent << "\n";
  if (c.scheme) o << "  weights: " << c.scheme->name() << "\n";
  if (c.kernel) o << "  kernel: " << c.kernel->name() << " gamma^2=" << c.kernel->gamma_sq() << "\n";
  if (c.family) o << "  family: " << c.family->label() << "\n";
  if (!c.eps_grid.empty()) {
    o << "  eps_grid:";
    for (double e : c.eps_grid) o << " " << e;
    o << "\n";
  }
  o << "  emits: ";
  switch (c.kind) {
    case ExperimentKind::CalibrateNull:
      o << "MC type I error vs 1 - Phi(x) and the null moderate-deviation rate";
      break;
    case ExperimentKind::PowerCurve:
      o << "MC type I/II errors vs Phi(x - B) (CLT) and -(B - x)^2/2 (moderate deviations)";
      break;
    case ExperimentKind::ChernoffSuite:
      o << "Chernoff exponents, extremal-signal comparison, tilted MC log beta";
      break;
    case ExperimentKind::ConsistencyScan:
      o << "low-frequency mass ratios, tail-mass profile" << (c.scheme ? ", MC slope diagnostic" : "");
      break;
    case ExperimentKind::KernelVsQuadratic:
      o << "kernel/quadratic statistic identity, gamma^2 by two routes, kernel size and power predictions";
      break;
    case ExperimentKind::Counterexample:
      o << "inconsistent levels (m, C, n) and the weighted SNR ratio along them";
      break;
  }
  o << "\n  mc: " << (c.run_mc ? std::to_string(c.mc.n_reps) + " reps, " + to_string(c.mc.mode) : "disabled")
    << "\n  output: " << c.output_dir << "\n";
  return o.str();
}

std::uint64_t resolve_seed(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.seed) return *opt.seed;
  if (const char* env = std::getenv("LDSIGNAL_SEED"); env && *env) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
    throw ConfigError(cfg.source, 0, "LDSIGNAL_SEED is not an unsigned integer");
  }
  return cfg.config_seed;
}

RunArtifacts execute(const ExperimentConfig& c, std::uint64_t seed_value, int threads) {
  RunArtifacts art;
  nlohmann::json& rep = art.report;
  rep["experiment"] = {{"id", c.id}, {"kind", to_string(c.kind)}};
  Seed seed{seed_value};
  std::uint64_t stream = 0;
  auto next_mc = [&]() {
    MCConfig m = c.mc;
    m.threads = threads;
    m.seed = derive_seed(seed, stream++);
    return m;
  };
  auto add_result = [&](const std::string& id, double eps, const std::string& test, double x, const MCEstimate& e,
                        const MCConfig& m) { art.results.push_back({id, eps, test, x, e, m.seed.value}); };

  switch (c.kind) {
    case ExperimentKind::CalibrateNull: {
      nlohmann::json per = nlohmann::json::array();
      for (double eps : c.eps_grid) {
        for (double x : thresholds(c, eps)) {
          double a = normal_sf(x);
          if (c.scheme) {
            WeightProfile w = c.scheme->profile(eps);
            CoefficientVector zero = CoefficientVector::real(1, {});
            PredictOptions po;
            po.cutoff_mode = c.scheme->cutoff_mode();
            if (a > 0.0 && a < 1.0) art.predictions.push_back({c.id, eps, "quadratic-alpha", x, predict_power(zero, w, eps, a, po)});
            if (c.run_mc) {
              MCConfig m = next_mc();
              add_result(c.id, eps, "quadratic-alpha", x, estimate_alpha(w, eps, x, m), m);
            }
          }
          if (c.kernel) {
            KernelTestConfig kc = kernel_cfg(c, eps);
            CoefficientVector zero = CoefficientVector::hermitian(kc.j_max, {});
            if (a > 0.0 && a < 1.0) art.predictions.push_back({c.id, eps, "kernel-alpha", x, predict_power_kernel(zero, *c.kernel, kc, a)});
            if (c.run_mc) {
              MCConfig m = next_mc();
              add_result(c.id, eps, "kernel-alpha", x, estimate_alpha(*c.kernel, kc, x, m), m);
            }
          }
        }
        if (c.scheme) per.push_back({{"epsilon", eps}, {"summary", summary_json(weight_summary(*c.scheme, eps))}});
      }
      rep["weights"] = per;
      if (c.scheme) rep["assumptions"] = assumption_json(check_assumptions(*c.scheme, c.eps_grid));
      break;
    }
    case ExperimentKind::PowerCurve: {
      for (double eps : c.eps_grid) {
        for (double x : thresholds(c, eps)) {
          double a = normal_sf(x);
          for (double amp : c.amplitudes) {
            std::string id = c.amplitudes.size() > 1 ? c.id + "@a=" + format_double(amp) : c.id;
            CoefficientVector theta = c.family->at(eps).scaled(amp);
            if (c.scheme) {
              WeightProfile w = c.scheme->profile(eps);
              PredictOptions po;
              po.cutoff_mode = c.scheme->cutoff_mode();
              art.predictions.push_back({id, eps, "quadratic-beta", x, predict_power(theta, w, eps, a, po)});
              if (c.run_mc) {
                MCConfig m = next_mc();
                add_result(id, eps, "quadratic-beta", x, estimate_beta(theta, w, eps, x, m), m);
              }
            }
            if (c.kernel) {
              KernelTestConfig kc = kernel_cfg(c, eps);
              CoefficientVector ct = as_complex_cosine(theta);
              art.predictions.push_back({id, eps, "kernel-beta", x, predict_power_kernel(ct, *c.kernel, kc, a)});
              if (c.run_mc) {
                MCConfig m = next_mc();
                add_result(id, eps, "kernel-beta", x, estimate_beta(ct, *c.kernel, kc, x, m), m);
              }
            }
          }
          if (c.scheme) {
            WeightProfile w = c.scheme->profile(eps);
            PredictOptions po;
            po.cutoff_mode = c.scheme->cutoff_mode();
            art.predictions.push_back(
                {c.id, eps, "quadratic-alpha", x, predict_power(CoefficientVector::real(1, {}), w, eps, a, po)});
            if (c.run_mc) {
              MCConfig m = next_mc();
              add_result(c.id, eps, "quadratic-alpha", x, estimate_alpha(w, eps, x, m), m);
            }
          }
        }
      }
      if (c.scheme) rep["assumptions"] = assumption_json(check_assumptions(*c.scheme, c.eps_grid));
      break;
    }
    case ExperimentKind::ChernoffSuite: {
      double eps = c.eps_grid.front();
      WeightProfile w = c.scheme->profile(eps);
      double k1 = w.leading();
      SplitMix64 gen(derive_seed(seed, 0xC4E5ULL));
      std::uniform_real_distribution<double> target(1.0, 20.0);
      std::normal_distribution<double> nd(0.0, 1.0);
      nlohmann::json members = nlohmann::json::array();
      for (std::int64_t i = 0; i < c.suite_size; ++i) {
        double x = c.x_grid[static_cast<std::size_t>(i) % c.x_grid.size()];
        double z = std::sqrt(k1 * x);
        double e = target(gen);
        double tau = z + std::sqrt(2.0 * eps * eps * k1 * e);
        std::int64_t terms = std::min<std::int64_t>(c.suite_terms, w.cutoff());
        std::vector<std::pair<std::int64_t, double>> raw;
        double t2 = 0.0;
        for (std::int64_t jj = 1; jj <= terms; ++jj) {
          double v = nd(gen);
          raw.emplace_back(jj, v);
          t2 += w.at(jj) * v * v;
        }
        for (auto& [jj, v] : raw) v *= tau / std::sqrt(t2);
        CoefficientVector theta = CoefficientVector::real(std::max<std::int64_t>(w.cutoff(), terms), raw);
        ChernoffBound b = chernoff_exponent(theta, w, eps, x);
        ChernoffBound ext = chernoff_exponent(extremal_signal(std::sqrt(tau_sq(theta, w)), w, eps), w, eps, x);
        std::string id = c.id + "#" + std::to_string(i);
        PowerPrediction p;
        p.x_alpha = x;
        p.log_beta = b.exponent;
        p.D_eps = D_eps(theta, w, eps);
        p.B_eps = B_eps(theta, w, eps);
        art.predictions.push_back({id, eps, "chernoff-lower", x, p});
        nlohmann::json mem = {{"id", id},         {"x", x},           {"tau", tau},
                              {"exponent", b.exponent}, {"t_star", b.t_star}, {"extremal_exponent", ext.exponent},
                              {"closed_form", b.closed_form}, {"theorem_exponent", b.theorem_exponent}};
        if (c.run_mc) {
          MCConfig m = next_mc();
          m.mode = MCMode::Tilted;
          MCEstimate est = estimate_lower_tail(theta, w, eps, b.z_sq, m);
          add_result(id, eps, "chernoff-lower", x, est, m);
          mem["mc"] = estimate_json(est);
          mem["bound_holds"] = est.log_p <= b.exponent + 3.0 * est.se_log;
        }
        members.push_back(mem);
      }
      rep["suite"] = members;
      break;
    }
    case ExperimentKind::ConsistencyScan: {
      auto ld = ld_consistency_check(*c.family, *c.rate, c.eps_grid, c.c2, c.thresholds);
      auto pure = pure_consistency_check(*c.family, *c.rate, c.eps_grid, c.C1_grid, c.delta);
      auto sand = c.family->norm_sandwich(c.eps_grid);
      rep["ld_consistency"] = {{"verdict", to_string(ld.verdict)}, {"epsilon", ld.epsilon}, {"k_eps", ld.k_eps},
                               {"mass_ratio", ld.mass_ratio}, {"trend_slope", ld.trend_slope},
                               {"c2", c.c2}, {"c1", c.thresholds.c1}};
      rep["pure_consistency"] = {{"pure", pure.pure}, {"C1_grid", pure.C1_grid},
                                 {"delta_profile", pure.delta_profile}, {"delta", c.delta}};
      rep["norm_sandwich"] = {{"c", sand.c}, {"C", sand.C}, {"ratios", sand.ratios}};
      if (c.scheme && c.run_mc) {
        AlphaSchedule sched = c.alpha_schedule ? *c.alpha_schedule : AlphaSchedule{*c.alpha, 0.0};
        MCConfig m = next_mc();
        auto sd = slope_diagnostic(*c.family, *c.rate, *c.scheme, c.eps_grid, sched, m);
        nlohmann::json pts = nlohmann::json::array();
        for (std::size_t i = 0; i < sd.points.size(); ++i) {
          const auto& pt = sd.points[i];
          MCConfig mi = m;
          mi.seed = derive_seed(m.seed, i);
          add_result(c.id, pt.epsilon, "quadratic-beta", pt.x_alpha, pt.beta, mi);
          PredictOptions po;
          po.cutoff_mode = c.scheme->cutoff_mode();
          art.predictions.push_back({c.id, pt.epsilon, "quadratic-beta", pt.x_alpha,
                                     predict_power(c.family->at(pt.epsilon), c.scheme->profile(pt.epsilon),
                                                   pt.epsilon, pt.alpha, po)});
          pts.push_back({{"epsilon", pt.epsilon}, {"alpha", pt.alpha}, {"log_beta_hat", pt.log_beta_hat},
                         {"ratio", pt.ratio}});
        }
        rep["slope_diagnostic"] = {{"points", pts}, {"min_ratio", sd.min_ratio},
                                   {"last_over_first", sd.last_over_first}, {"verdict", sd.verdict}};
      }
      break;
    }
    case ExperimentKind::KernelVsQuadratic: {
      const Kernel& K = *c.kernel;
      rep["gamma_sq"] = {{"time_domain", K.gamma_sq()}, {"spectral", gamma_sq_spectral(K)}};
      nlohmann::json per = nlohmann::json::array();
      for (double eps : c.eps_grid) {
        KernelTestConfig kc = kernel_cfg(c, eps);
        WeightProfile w = kernel_weights(K, kc);
        CoefficientVector theta = c.family ? as_complex_cosine(c.family->at(eps)) : CoefficientVector::hermitian(kc.j_max, {});
        // Observations must cover every |j| <= j_max.
        std::vector<std::pair<std::int64_t, CoefficientVector::Value>> dense;
        for (std::int64_t jj = 0; jj <= kc.j_max; ++jj) dense.emplace_back(jj, theta.at(jj));
        CoefficientVector full = CoefficientVector::hermitian(std::max(kc.j_max, theta.jmax()), dense);
        double max_rel = 0.0;
        Seed obs_seed = derive_seed(seed, 0x0B5ULL + stream++);
        for (std::int64_t r = 0; r < c.equivalence_reps; ++r) {
          Observation y = simulate_observation(full, eps, derive_seed(obs_seed, static_cast<std::uint64_t>(r)));
          double t1 = statistic_T1(y, K, kc);
          double tq = std::sqrt(kc.h / K.gamma_sq()) * statistic_T(y, w);
          max_rel = std::max(max_rel, std::abs(t1 - tq) / std::max(std::abs(t1), 1e-300));
        }
        per.push_back({{"epsilon", eps}, {"h", kc.h}, {"j_max", kc.j_max}, {"max_relative_difference", max_rel},
                       {"centering_discrepancy", centering_discrepancy(K, kc)}});
        for (double x : thresholds(c, eps)) {
          double a = normal_sf(x);
          art.predictions.push_back({c.id, eps, "kernel-alpha", x, predict_power_kernel(CoefficientVector::hermitian(kc.j_max, {}), K, kc, a)});
          if (c.run_mc) {
            MCConfig m = next_mc();
            add_result(c.id, eps, "kernel-alpha", x, estimate_alpha(K, kc, x, m), m);
          }
          if (c.family) {
            art.predictions.push_back({c.id, eps, "kernel-beta", x, predict_power_kernel(theta, K, kc, a)});
            if (c.run_mc) {
              MCConfig m = next_mc();
              add_result(c.id, eps, "kernel-beta", x, estimate_beta(theta, K, kc, x, m), m);
            }
          }
        }
      }
      rep["equivalence"] = per;
      break;
    }
    case ExperimentKind::Counterexample: {
      const RateParams& p = *c.rate;
      std::vector<double> v(static_cast<std::size_t>(c.tau_jmax));
      for (std::int64_t jj = 1; jj <= c.tau_jmax; ++jj)
        v[jj - 1] = std::pow(static_cast<double>(jj), -0.5 - c.tau_exponent_factor * p.s);
      CoefficientVector tau = CoefficientVector::real_dense(v);
      CounterexampleOptions opt;
      opt.variant = c.variant;
      auto levels = build_inconsistent_family(tau, p.s, p.r, p.omega, opt);
      nlohmann::json out = nlohmann::json::array();
      bool c_increasing = true, ratio_decreasing = true;
      double prev_ratio = std::numeric_limits<double>::infinity(), prev_c = 0.0;
      for (const auto& lv : levels) {
        double ratio = weighted_snr_ratio(lv, *c.scheme, p.omega);
        c_increasing = c_increasing && lv.C > prev_c;
        ratio_decreasing = ratio_decreasing && ratio < prev_ratio;
        prev_c = lv.C;
        prev_ratio = ratio;
        out.push_back({{"m", lv.m}, {"C", lv.C}, {"n", lv.n}, {"epsilon", lv.epsilon}, {"sandwich", lv.sandwich},
                       {"snr_ratio", ratio}});
      }
      rep["levels"] = out;
      rep["C_increasing"] = c_increasing;
      rep["snr_ratio_decreasing"] = ratio_decreasing;
      break;
    }
  }
  return art;
}

void run_and_write(const ExperimentConfig& cfg, const RunOptions& opt) {
  std::uint64_t seed = resolve_seed(cfg, opt);
  std::string dir = opt.out_dir ? *opt.out_dir : cfg.output_dir;
  RunArtifacts art = execute(cfg, seed, opt.threads);
  fs::create_directories(dir);
  write_results_csv((fs::path(dir) / "results.csv").string(), art.results);
  write_predictions_csv((fs::path(dir) / "predictions.csv").string(), art.predictions);
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  art.report["metadata"] = {{"timestamp", stamp}, {"seed", seed}, {"config", cfg.source}, {"threads", opt.threads}};
  std::ofstream(fs::path(dir) / "report.json") << art.report.dump(2) << "\n";
  if (opt.emit_gnuplot) {
    std::ofstream gp(fs::path(dir) / "plot.gp");
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set logscale x\n"
       << "set xlabel 'epsilon'\n"
       << "set ylabel 'log p'\n"
       << "plot 'results.csv' using 2:7 with points title 'log p_hat', \\\n"
       << "     'predictions.csv' using 2:9 with points title 'log beta predicted'\n";
  }
}

}  // namespace ldsignal
