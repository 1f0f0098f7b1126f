#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldsignal/core_model.hpp"
#include "ldsignal/weights.hpp"

namespace ldsignal {

struct WeightSummary {
  double rho_sq = 0.0;        // sum kappa^2
  double sum_kappa4 = 0.0;    // sum kappa^4
  double A_eps = 0.0;         // eps^-4 sum kappa^4
  std::int64_t k_eps = 1;     // half-mass index
  double kappa_eps_sq = 0.0;  // kappa^2 at k_eps
  double kappa1_sq = 0.0;
  std::int64_t cutoff = 0;
};

// Complex-basis profiles are summarized through their real-coordinate expansion.
WeightSummary weight_summary(const WeightProfile& w, double epsilon);
WeightSummary weight_summary(const WeightScheme& w, double epsilon);

struct AssumptionConstants {
  std::vector<double> delta_grid{1.0, 2.0, 4.0, 8.0};
  std::vector<double> c_grid{2.0, 4.0, 8.0};
  std::vector<double> c5_grid{0.25, 0.5, 0.9};
  double a2_spread = 2.0;       // max A / min A allowed over the grid
  double a3_shape_spread = 2.0; // local decay exponents must agree within this factor
  double a4_ratio_bound = 10.0; // kappa_1^2 / kappa_eps^2
  double a5_c1 = 0.5;
};

struct AssumptionDiagnostics {
  double epsilon = 0.0;
  WeightSummary summary;
  bool nonincreasing = true;
  std::vector<double> a3_ratios;  // kappa^2[(1+delta)k] / kappa^2_k per delta
  double a4_leading_ratio = 0.0;  // kappa_1^2 / kappa_eps^2
  std::vector<double> a4_ratios;  // kappa^2[c k] / kappa^2_k per c
  std::vector<double> a5_ratios;  // kappa^2[c l] / kappa_1^2 per c
};

struct AssumptionReport {
  bool cutoff_mode = false;
  bool a1_ok = false;
  bool a2_ok = false;
  double a2_C1 = 0.0;
  double a2_C2 = 0.0;
  bool a3_ok = false;
  double a3_lambda = 0.0;
  double a3_constant = 0.0;
  double a3_shape_spread = 0.0;
  bool a4_ok = false;
  double a4_max_leading_ratio = 0.0;
  double a4_min_ratio = 0.0;
  bool a5_ok = false;
  double a5_min_ratio = 0.0;
  std::vector<AssumptionDiagnostics> per_epsilon;
};

AssumptionReport check_assumptions(const WeightScheme& w, const std::vector<double>& eps_grid,
                                   const AssumptionConstants& constants = {});

// eps^-2 sum kappa^2 |y_j|^2 - rho^2.
double statistic_T(const Observation& y, const WeightProfile& w);
// T / sqrt(2 sum kappa^4): unit variance under the null.
double normalized_statistic(const Observation& y, const WeightProfile& w);
// x with 1 - Phi(x) = alpha.
double threshold_x(double alpha);

double D_eps(const CoefficientVector& theta, const WeightProfile& w, double epsilon);
double B_eps(const CoefficientVector& theta, const WeightProfile& w, double epsilon);
// sum kappa^2 |theta_j|^2
double tau_sq(const CoefficientVector& theta, const WeightProfile& w);

// Level z^2 on Q = sum kappa^2 y^2 matching {normalized statistic > x}.
double acceptance_level_sq(const WeightProfile& w, double epsilon, double x_normalized);

enum class Regime { CLT, ModerateDeviation, OutOfRange };
std::string to_string(Regime r);

struct PowerPrediction {
  std::optional<double> alpha_pred;
  std::optional<double> beta_pred;
  std::optional<double> log_alpha;
  std::optional<double> log_beta;
  Regime regime = Regime::OutOfRange;
  double B_eps = 0.0;
  double D_eps = 0.0;
  double x_alpha = 0.0;
  double k_eps = 0.0;
  bool margin_ok = false;
  bool lower_window_ok = true;  // kernel test only
};

struct PredictOptions {
  double margin = 0.1;
  double gate_constant = 1.0;
  bool cutoff_mode = false;  // use l_eps as k_eps in the gates
};

PowerPrediction predict_power(const CoefficientVector& theta, const WeightProfile& w, double epsilon,
                              double alpha, const PredictOptions& opt = {});

enum class ChernoffForm {
  Reduced,  // drops the log-determinant; closed form for one coefficient
  Exact     // full cumulant generating function bound
};

struct ChernoffBound {
  double exponent = 0.0;
  double t_star = 0.0;
  double z_sq = 0.0;
  double tau_sq = 0.0;
  // -(tau - z)^2 / (2 eps^2 kappa_1^2): exact for the single-coefficient signal.
  double closed_form = 0.0;
  // -(tau - sqrt(x))^2 / (2 kappa_1^2): the same bound with x taken on the tau scale.
  double theorem_exponent = 0.0;
};

// Bound on log P(sum kappa^2 y^2 < kappa_1^2 x) under theta.
ChernoffBound chernoff_exponent(const CoefficientVector& theta, const WeightProfile& w, double epsilon,
                                double x_threshold, ChernoffForm form = ChernoffForm::Reduced);
// Same bound for an arbitrary level z^2 on Q.
ChernoffBound chernoff_lower_tail(const CoefficientVector& theta, const WeightProfile& w, double epsilon,
                                  double z_sq, ChernoffForm form);
// The function minimized by chernoff_lower_tail, for inspection.
double chernoff_G(const CoefficientVector& theta, const WeightProfile& w, double epsilon, double z_sq,
                  double t, ChernoffForm form);

// Bound on log P_0(Q > c) over t in [0, 1/(2 kappa_1^2 eps^2)).
ChernoffBound chernoff_upper_tail(const WeightProfile& w, double epsilon, double level_sq);
// Bound on log P_0(T > x) for the unnormalized statistic T.
ChernoffBound chernoff_type1_exponent(const WeightProfile& w, double epsilon, double x_threshold);

CoefficientVector extremal_signal(double tau, const WeightProfile& w, double epsilon);

}  // namespace ldsignal
