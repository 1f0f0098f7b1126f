#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ldsignal/consistency.hpp"
#include "ldsignal/core_model.hpp"
#include "ldsignal/kernel_test.hpp"
#include "ldsignal/quadratic_test.hpp"
#include "ldsignal/rng.hpp"
#include "ldsignal/weights.hpp"

namespace ldsignal {

enum class MCMode { Plain, Tilted };
std::string to_string(MCMode m);

enum class Sampler {
  Grouped,        // one scaled noncentral chi-square draw per run of equal weights
  PerCoefficient  // one Gaussian per coordinate
};

struct MCConfig {
  std::int64_t n_reps = 100000;
  Seed seed{};
  MCMode mode = MCMode::Plain;
  // t >= 0 tilts toward the tail being estimated.
  std::optional<double> tilt_t;
  int threads = 1;
  Sampler sampler = Sampler::Grouped;

  void validate() const;
};

struct MCEstimate {
  double p_hat = 0.0;
  double std_err = 0.0;
  double log_p = 0.0;
  double se_log = 0.0;
  double n_effective = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  MCMode mode = MCMode::Plain;
  double tilt = 0.0;  // eta applied to Q = sum kappa^2 y^2 (positive for lower tails)
  std::int64_t n_reps = 0;
  std::int64_t hits = 0;
};

enum class Tail { Upper, Lower };

// Q = sum_j kappa_j^2 y_j^2 over real coordinates with y_j ~ N(theta_j, eps^2).
class QuadraticFormModel {
 public:
  QuadraticFormModel(const CoefficientVector& theta, const WeightProfile& w, double epsilon);
  static QuadraticFormModel null_model(const WeightProfile& w, double epsilon);

  double epsilon() const { return eps_; }
  double kappa1_sq() const { return kappa1_sq_; }
  // log E exp(-eta Q); requires 1 + 2 eta kappa^2 eps^2 > 0 everywhere.
  double log_mgf(double eta) const;
  // Smallest eta allowed (exclusive).
  double eta_lower_bound() const;

  struct Group {
    double kappa_sq;
    std::int64_t count;
    double signal_sq;  // sum of theta^2 over the group
  };
  // One group per distinct positive weight, in decreasing weight order.
  const std::vector<Group>& groups() const { return groups_; }

 private:
  QuadraticFormModel() = default;
  double eps_ = 1.0;
  double kappa1_sq_ = 0.0;
  std::vector<Group> groups_;
};

// P(Q > level) or P(Q <= level). eta is the exponential tilt applied to Q.
MCEstimate estimate_tail(const QuadraticFormModel& model, Tail tail, double level_sq, const MCConfig& mc,
                         double eta);

// P_0(normalized statistic > x).
MCEstimate estimate_alpha(const WeightProfile& w, double epsilon, double x_threshold, const MCConfig& mc);
MCEstimate estimate_alpha(const Kernel& K, const KernelTestConfig& cfg, double x_threshold, const MCConfig& mc);
// P_theta(normalized statistic <= x).
MCEstimate estimate_beta(const CoefficientVector& theta, const WeightProfile& w, double epsilon, double x_threshold,
                         const MCConfig& mc);
MCEstimate estimate_beta(const CoefficientVector& theta, const Kernel& K, const KernelTestConfig& cfg,
                         double x_threshold, const MCConfig& mc);
// P_theta(Q < z^2), tilted by default at the exact Chernoff minimizer.
MCEstimate estimate_lower_tail(const CoefficientVector& theta, const WeightProfile& w, double epsilon, double z_sq,
                               const MCConfig& mc);

struct AlphaSchedule {
  double a0 = 0.05;
  double power = 0.0;  // alpha_eps = a0 eps^power
  double at(double epsilon) const;
};

struct SlopePoint {
  double epsilon = 0.0;
  double alpha = 0.0;
  double x_alpha = 0.0;
  MCEstimate beta;
  double log_beta_hat = 0.0;
  double r_eps_sq = 0.0;
  double ratio = 0.0;  // |log beta_hat| / r_eps^2
};

struct SlopeDiagnostic {
  std::vector<SlopePoint> points;
  double min_ratio = 0.0;
  double last_over_first = 0.0;
  bool nonincreasing = false;
  std::string verdict;  // "decreasing" or "not-decreasing"
};

SlopeDiagnostic slope_diagnostic(const AlternativeFamily& fam, const RateParams& params, const WeightScheme& scheme,
                                 const std::vector<double>& eps_grid, const AlphaSchedule& alpha, const MCConfig& mc);

}  // namespace ldsignal
