#include "ldsignal/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "ldsignal/errors.hpp"
#include "ldsignal/numeric.hpp"

namespace ldsignal {

namespace {

constexpr std::int64_t kChunk = 4096;

struct Partial {
  CompensatedSum s1;
  CompensatedSum s2;
  std::int64_t hits = 0;
};

struct TiltedGroup {
  double kappa_sq;
  double scale;   // kappa^2 sigma^2
  double lambda;  // noncentrality
  std::int64_t count;
};

}  // namespace

std::string to_string(MCMode m) {
  return m == MCMode::Plain ? "plain" : "tilted";
}

void MCConfig::validate() const {
  if (n_reps < 100) throw ParameterError("MCConfig: n_reps must be at least 100");
  if (threads < 1) throw ParameterError("MCConfig: threads must be at least 1");
  if (tilt_t && !std::isfinite(*tilt_t)) throw ParameterError("MCConfig: tilt_t must be finite");
}

QuadraticFormModel::QuadraticFormModel(const CoefficientVector& theta, const WeightProfile& w, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("monte carlo: epsilon must be positive");
  if (theta.basis() != w.basis()) throw ParameterError("monte carlo: coefficient basis does not match the weights");
  eps_ = epsilon;
  kappa1_sq_ = 0.0;
  std::map<double, Group, std::greater<>> by_value;
  for (const auto& run : w.real_equivalent().runs()) {
    if (run.value <= 0.0) continue;
    auto& g = by_value[run.value];
    g.kappa_sq = run.value;
    g.count += run.count();
    kappa1_sq_ = std::max(kappa1_sq_, run.value);
  }
  if (by_value.empty()) throw DegenerateSchemeError("monte carlo: all weights are zero");
  for (const auto& e : theta.entries()) {
    if (theta.basis() == Basis::ComplexExponential && e.index < 0) continue;
    double k2 = w.at(e.index);
    if (k2 <= 0.0) continue;
    if (theta.basis() == Basis::RealOrthonormal || e.index == 0) {
      by_value[k2].signal_sq += e.value.real() * e.value.real();
    } else {
      // Real and imaginary parts become two real coordinates scaled by sqrt 2.
      double a = std::sqrt(2.0) * e.value.real(), b = std::sqrt(2.0) * e.value.imag();
      by_value[k2].signal_sq += a * a + b * b;
    }
  }
  for (auto& [v, g] : by_value) groups_.push_back(g);
}

QuadraticFormModel QuadraticFormModel::null_model(const WeightProfile& w, double epsilon) {
  CoefficientVector zero = w.basis() == Basis::RealOrthonormal ? CoefficientVector::real(1, {})
                                                                : CoefficientVector::hermitian(1, {});
  return QuadraticFormModel(zero, w, epsilon);
}

double QuadraticFormModel::log_mgf(double eta) const {
  CompensatedSum s;
  const double eps2 = eps_ * eps_;
  for (const auto& g : groups_) {
    double u = 2.0 * eta * g.kappa_sq * eps2;
    if (!(1.0 + u > 0.0)) throw ParameterError("monte carlo: tilt outside the admissible range");
    s.add(-0.5 * static_cast<double>(g.count) * std::log1p(u));
    s.add(-eta * g.kappa_sq * g.signal_sq / (1.0 + u));
  }
  return s.value();
}

double QuadraticFormModel::eta_lower_bound() const {
  return -1.0 / (2.0 * kappa1_sq_ * eps_ * eps_);
}

MCEstimate estimate_tail(const QuadraticFormModel& model, Tail tail, double level_sq, const MCConfig& mc,
                         double eta) {
  mc.validate();
  if (!(eta > model.eta_lower_bound())) throw ParameterError("monte carlo: tilt outside the admissible range");
  const double eps2 = model.epsilon() * model.epsilon();
  const double log_m = model.log_mgf(eta);

  std::vector<TiltedGroup> groups;
  for (const auto& g : model.groups()) {
    double u = 2.0 * eta * g.kappa_sq * eps2;
    double sigma2 = eps2 / (1.0 + u);
    groups.push_back({g.kappa_sq, g.kappa_sq * sigma2, g.signal_sq / (eps2 * (1.0 + u)), g.count});
  }
  // Per-coefficient path: explicit coordinates (kappa^2, mean, sigma).
  struct Coord {
    double kappa_sq, mean, sigma;
  };
  std::vector<std::vector<Coord>> coords;
  if (mc.sampler == Sampler::PerCoefficient) {
    for (const auto& g : groups) {
      std::vector<Coord> c;
      double u = 2.0 * eta * g.kappa_sq * eps2;
      double sigma = std::sqrt(eps2 / (1.0 + u));
      // Signal energy on one coordinate, the rest centered: same law as any split.
      double mean = std::sqrt(g.lambda) * sigma;
      c.push_back({g.kappa_sq, mean, sigma});
      for (std::int64_t i = 1; i < g.count; ++i) c.push_back({g.kappa_sq, 0.0, sigma});
      coords.push_back(std::move(c));
    }
  }

  const std::int64_t n = mc.n_reps;
  const std::int64_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<Partial> partials(static_cast<std::size_t>(n_chunks));
  std::atomic<std::int64_t> next{0};

  auto work = [&]() {
    for (;;) {
      std::int64_t c = next.fetch_add(1);
      if (c >= n_chunks) break;
      Partial& part = partials[static_cast<std::size_t>(c)];
      std::int64_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
      for (std::int64_t rep = lo; rep < hi; ++rep) {
        SplitMix64 gen(derive_seed(mc.seed, static_cast<std::uint64_t>(rep)));
        std::normal_distribution<double> normal(0.0, 1.0);
        CompensatedSum q;
        if (mc.sampler == Sampler::Grouped) {
          for (const auto& g : groups) {
            double chi = 0.0;
            if (g.lambda > 0.0) {
              double z = normal(gen) + std::sqrt(g.lambda);
              chi = z * z;
              if (g.count > 1) {
                std::gamma_distribution<double> gam(0.5 * static_cast<double>(g.count - 1), 2.0);
                chi += gam(gen);
              }
            } else {
              std::gamma_distribution<double> gam(0.5 * static_cast<double>(g.count), 2.0);
              chi = gam(gen);
            }
            q.add(g.scale * chi);
          }
        } else {
          for (const auto& grp : coords)
            for (const auto& co : grp) {
              double y = co.mean + co.sigma * normal(gen);
              q.add(co.kappa_sq * y * y);
            }
        }
        double Q = q.value();
        bool hit = tail == Tail::Upper ? Q > level_sq : Q <= level_sq;
        if (!hit) continue;
        double w = eta == 0.0 ? 1.0 : std::exp(eta * Q + log_m);
        part.s1.add(w);
        part.s2.add(w * w);
        ++part.hits;
      }
    }
  };

  int nt = std::max(1, std::min<int>(mc.threads, static_cast<int>(n_chunks)));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  Partial total;
  for (const auto& p : partials) {
    total.s1.add(p.s1);
    total.s2.add(p.s2);
    total.hits += p.hits;
  }
  MCEstimate est;
  est.mode = eta == 0.0 && mc.mode == MCMode::Plain ? MCMode::Plain : mc.mode;
  est.tilt = eta;
  est.n_reps = n;
  est.hits = total.hits;
  const double nn = static_cast<double>(n);
  double s1 = total.s1.value(), s2 = total.s2.value();
  est.p_hat = s1 / nn;
  double var = std::max(0.0, s2 / nn - est.p_hat * est.p_hat);
  est.std_err = std::sqrt(var / nn);
  est.log_p = est.p_hat > 0.0 ? std::log(est.p_hat) : -std::numeric_limits<double>::infinity();
  est.se_log = est.p_hat > 0.0 ? est.std_err / est.p_hat : std::numeric_limits<double>::infinity();
  est.n_effective = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
  double lo = std::max(0.0, est.p_hat - 1.96 * est.std_err);
  double hi = est.p_hat + 1.96 * est.std_err;
  if (est.mode == MCMode::Plain) hi = std::min(1.0, hi);
  est.ci95 = {lo, hi};
  return est;
}

namespace {

double upper_tilt(const QuadraticFormModel& model, const WeightProfile& w, double level_sq, const MCConfig& mc) {
  if (mc.mode == MCMode::Plain) return 0.0;
  double tmax = 1.0 / (2.0 * model.kappa1_sq() * model.epsilon() * model.epsilon());
  if (mc.tilt_t) {
    if (!(*mc.tilt_t < tmax)) throw ParameterError("estimate_alpha: tilt_t must be below 1/(2 kappa_1^2 eps^2)");
    return -*mc.tilt_t;
  }
  return -chernoff_upper_tail(w, model.epsilon(), level_sq).t_star;
}

double lower_tilt(const CoefficientVector& theta, const QuadraticFormModel& model, const WeightProfile& w,
                  double level_sq, const MCConfig& mc) {
  if (mc.mode == MCMode::Plain) return 0.0;
  if (mc.tilt_t) {
    if (!(*mc.tilt_t > model.eta_lower_bound()))
      throw ParameterError("estimate_beta: tilt_t must exceed -1/(2 kappa_1^2 eps^2)");
    return *mc.tilt_t;
  }
  try {
    return chernoff_lower_tail(theta, w, model.epsilon(), level_sq, ChernoffForm::Exact).t_star;
  } catch (const NoGapError&) {
    return 0.0;  // the event is not rare; no tilt
  }
}

double kernel_level(const Kernel& K, const KernelTestConfig& cfg, const WeightProfile& w, double x) {
  double rho = 0.0;
  for (std::int64_t j = -cfg.j_max; j <= cfg.j_max; ++j) rho += w.at(j);
  return cfg.epsilon * cfg.epsilon * (rho + x * std::sqrt(K.gamma_sq() / cfg.h));
}

}  // namespace

MCEstimate estimate_alpha(const WeightProfile& w, double epsilon, double x_threshold, const MCConfig& mc) {
  mc.validate();
  auto model = QuadraticFormModel::null_model(w, epsilon);
  double level = acceptance_level_sq(w, epsilon, x_threshold);
  return estimate_tail(model, Tail::Upper, level, mc, upper_tilt(model, w, level, mc));
}

MCEstimate estimate_alpha(const Kernel& K, const KernelTestConfig& cfg, double x_threshold, const MCConfig& mc) {
  mc.validate();
  WeightProfile w = kernel_weights(K, cfg);
  auto model = QuadraticFormModel::null_model(w, cfg.epsilon);
  double level = kernel_level(K, cfg, w, x_threshold);
  return estimate_tail(model, Tail::Upper, level, mc, upper_tilt(model, w, level, mc));
}

MCEstimate estimate_beta(const CoefficientVector& theta, const WeightProfile& w, double epsilon, double x_threshold,
                         const MCConfig& mc) {
  mc.validate();
  QuadraticFormModel model(theta, w, epsilon);
  double level = acceptance_level_sq(w, epsilon, x_threshold);
  return estimate_tail(model, Tail::Lower, level, mc, lower_tilt(theta, model, w, level, mc));
}

MCEstimate estimate_beta(const CoefficientVector& theta, const Kernel& K, const KernelTestConfig& cfg,
                         double x_threshold, const MCConfig& mc) {
  mc.validate();
  WeightProfile w = kernel_weights(K, cfg);
  QuadraticFormModel model(theta, w, cfg.epsilon);
  double level = kernel_level(K, cfg, w, x_threshold);
  return estimate_tail(model, Tail::Lower, level, mc, lower_tilt(theta, model, w, level, mc));
}

MCEstimate estimate_lower_tail(const CoefficientVector& theta, const WeightProfile& w, double epsilon, double z_sq,
                               const MCConfig& mc) {
  mc.validate();
  QuadraticFormModel model(theta, w, epsilon);
  return estimate_tail(model, Tail::Lower, z_sq, mc, lower_tilt(theta, model, w, z_sq, mc));
}

double AlphaSchedule::at(double epsilon) const {
  double a = a0 * std::pow(epsilon, power);
  if (!(a > 0.0 && a < 1.0)) throw ParameterError("alpha schedule leaves (0, 1)");
  return a;
}

SlopeDiagnostic slope_diagnostic(const AlternativeFamily& fam, const RateParams& params, const WeightScheme& scheme,
                                 const std::vector<double>& eps_grid, const AlphaSchedule& alpha,
                                 const MCConfig& mc) {
  if (eps_grid.empty()) throw ParameterError("slope_diagnostic: empty epsilon grid");
  SlopeDiagnostic out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    double eps = eps_grid[i];
    SlopePoint pt;
    pt.epsilon = eps;
    pt.alpha = alpha.at(eps);
    pt.x_alpha = threshold_x(pt.alpha);
    MCConfig m = mc;
    m.seed = derive_seed(mc.seed, i);
    pt.beta = estimate_beta(fam.at(eps), scheme.profile(eps), eps, pt.x_alpha, m);
    pt.log_beta_hat = pt.beta.log_p;
    pt.r_eps_sq = params.r_eps_sq(eps);
    pt.ratio = std::abs(pt.log_beta_hat) / pt.r_eps_sq;
    out.min_ratio = std::min(out.min_ratio, pt.ratio);
    out.points.push_back(pt);
  }
  out.nonincreasing = true;
  for (std::size_t i = 1; i < out.points.size(); ++i)
    if (out.points[i].ratio > out.points[i - 1].ratio) out.nonincreasing = false;
  double first = out.points.front().ratio;
  out.last_over_first = first > 0.0 ? out.points.back().ratio / first : std::numeric_limits<double>::quiet_NaN();
  out.verdict = out.nonincreasing ? "decreasing" : "not-decreasing";
  return out;
}

}  // namespace ldsignal
