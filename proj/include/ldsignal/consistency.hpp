#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ldsignal/core_model.hpp"
#include "ldsignal/weights.hpp"

namespace ldsignal {

struct RateParams {
  double r = 0.25;
  double omega = 0.125;
  double s = 1.0 / 3.0;
  double k_eps_exponent = -1.5;
  double h_eps_exponent = 1.5;

  // ceil(eps^k_eps_exponent)
  std::int64_t k_eps(double epsilon) const;
  // eps^(-2 omega)
  double r_eps_sq(double epsilon) const;
};

// Validates 0 < r < 1/2 and 0 < 2 omega <= 1 - 2r.
RateParams maxiset_s(double r, double omega);
// (2 - 2 omega) s / (1 + 4 s)
double rate_from_s(double s, double omega);

// sup_{k >= 1} k^{2s} sum_{|j| >= k} |theta_j|^2
double besov_seminorm(const CoefficientVector& theta, double s);

// Where a family puts a mode: a fixed index, or ceil(multiple * k_eps * eps^-gamma).
struct ModeLocation {
  std::int64_t fixed = 0;
  double k_multiple = 0.0;
  double gamma = 0.0;

  std::int64_t at(double epsilon, const RateParams& p) const;
  static ModeLocation index(std::int64_t j) { return {j, 0.0, 0.0}; }
  static ModeLocation escaping(double multiple, double gamma) { return {0, multiple, gamma}; }
};

class AlternativeFamily {
 public:
  using Generator = std::function<CoefficientVector(double)>;

  AlternativeFamily(std::string label, double r_target, Generator gen, nlohmann::json spec = {});

  CoefficientVector at(double epsilon) const { return gen_(epsilon); }
  double r_target() const { return r_; }
  const std::string& label() const { return label_; }
  const nlohmann::json& spec() const { return spec_; }

  struct Sandwich {
    double c = 0.0;
    double C = 0.0;
    std::vector<double> ratios;  // ||S_eps|| / eps^{2r}
  };
  Sandwich norm_sandwich(const std::vector<double>& eps_grid) const;

 private:
  std::string label_;
  double r_;
  Generator gen_;
  nlohmann::json spec_;
};

struct MassPart {
  double fraction;
  ModeLocation location;
};

// Real-basis families with ||S_eps||^2 = amplitude^2 eps^{4r}.
AlternativeFamily single_mode_family(const RateParams& p, ModeLocation where, double amplitude = 1.0);
AlternativeFamily split_mass_family(const RateParams& p, std::vector<MassPart> parts, double amplitude = 1.0);
// theta_j proportional to j^{-exponent} for j <= jmax, scaled to norm amplitude eps^{2r}.
AlternativeFamily power_law_family(const RateParams& p, double exponent, std::int64_t jmax, double amplitude = 1.0);
AlternativeFamily zero_family(const RateParams& p);
// Fixed table of (epsilon, coefficients); lookup by relative match 1e-12.
AlternativeFamily custom_table_family(double r_target, std::vector<std::pair<double, CoefficientVector>> table);
AlternativeFamily family_from_json(const nlohmann::json& j, const RateParams& p);

enum class Verdict { Consistent, Inconsistent, Indeterminate };
std::string to_string(Verdict v);

struct ConsistencyThresholds {
  double c1 = 0.1;
  double slope_tolerance = 0.1;
};

struct LdConsistencyResult {
  std::vector<double> epsilon;
  std::vector<std::int64_t> k_eps;
  std::vector<double> mass_ratio;
  std::vector<bool> consistent;  // mass_ratio >= c1 at that epsilon
  // Slope of log mass_ratio against log(1/eps); NaN when some ratio is zero.
  double trend_slope = 0.0;
  Verdict verdict = Verdict::Indeterminate;
};

LdConsistencyResult ld_consistency_check(const AlternativeFamily& fam, const RateParams& params,
                                         const std::vector<double>& eps_grid, double c2,
                                         const ConsistencyThresholds& th = {});

struct PureConsistencyResult {
  std::vector<double> C1_grid;
  std::vector<double> delta_profile;
  bool pure = false;
};

PureConsistencyResult pure_consistency_check(const AlternativeFamily& fam, const RateParams& params,
                                             const std::vector<double>& eps_grid,
                                             const std::vector<double>& C1_grid, double delta = 0.05);

struct DecompositionResult {
  CoefficientVector s1;
  CoefficientVector s2;
  std::int64_t cutoff_index = 1;
  double besov_seminorm_s1 = 0.0;
  double pythagoras_residual = 0.0;
};

DecompositionResult orthogonal_decompose(const CoefficientVector& theta, std::int64_t cutoff, double s);

struct InteractionResult {
  std::vector<double> epsilon;
  std::vector<double> pythagoras_defect;
  std::vector<double> cross_term;  // 2 <S, S'> / eps^{4r}
  double trend_slope = 0.0;
};

InteractionResult interaction_check(const AlternativeFamily& a, const AlternativeFamily& b,
                                    const std::vector<double>& eps_grid);

enum class CounterexampleVariant { Quadratic, Kernel };

struct InconsistentLevel {
  std::int64_t m = 1;
  double C = 0.0;
  double n = 0.0;
  double epsilon = 0.0;  // n^{-1/2}
  CoefficientVector eta;
  double sandwich = 0.0;  // ||eta||^2 n^{2r}
};

struct CounterexampleOptions {
  CounterexampleVariant variant = CounterexampleVariant::Quadratic;
  std::int64_t ladder_margin = 16;  // ladder stops at jmax / margin
  std::size_t min_levels = 2;
};

std::vector<InconsistentLevel> build_inconsistent_family(const CoefficientVector& tau, double s, double r,
                                                         double omega, const CounterexampleOptions& opt = {});

// A_{eps_l}(eta_l) eps_l^{4 omega} = eps_l^{4 omega - 4} sum kappa^2 eta^2.
double weighted_snr_ratio(const InconsistentLevel& level, const WeightScheme& scheme, double omega);

}  // namespace ldsignal
