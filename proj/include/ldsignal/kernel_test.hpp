#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ldsignal/core_model.hpp"
#include "ldsignal/quadratic_test.hpp"
#include "ldsignal/weights.hpp"

namespace ldsignal {

// Symmetric kernel supported on [-1/2, 1/2] with unit integral. Immutable after
// construction; gamma^2 and the squared norm are computed once.
class Kernel {
 public:
  static Kernel uniform(int quadrature_n = 256);
  static Kernel epanechnikov(int quadrature_n = 256);
  // Piecewise-linear kernel through (t, K(t)) nodes; zero outside the table.
  static Kernel tabulated(std::vector<std::pair<double, double>> table, int quadrature_n = 256);

  double operator()(double t) const;
  const std::string& name() const { return name_; }
  int quadrature_n() const { return quadrature_n_; }
  // Points in [-1/2, 1/2] between which K is a polynomial.
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }
  double norm_sq() const { return norm_sq_; }
  double gamma_sq() const { return gamma_sq_; }

 private:
  enum class Kind { Uniform, Epanechnikov, Table };
  Kernel(Kind kind, std::string name, int quadrature_n, std::vector<std::pair<double, double>> table);
  void finalize();

  Kind kind_;
  std::string name_;
  int quadrature_n_;
  std::vector<std::pair<double, double>> table_;
  std::vector<double> breaks_;
  double norm_sq_ = 0.0;
  double gamma_sq_ = 0.0;
};

Kernel kernel_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const Kernel& k);

// integral of exp(2 pi i omega u) K(u) du.
double khat(const Kernel& K, double omega);
// 2 int (K*K)^2, convolution by quadrature.
double gamma_sq(const Kernel& K);
// 2 int |Khat|^4 over [-omega_max, omega_max].
double gamma_sq_spectral(const Kernel& K, double omega_max = 256.0);
// (K*K)(t)
double self_convolution(const Kernel& K, double t);

struct KernelTestConfig {
  double h = 0.1;
  double epsilon = 1.0;
  std::int64_t j_max = 20;

  void validate() const;
  static KernelTestConfig with_default_jmax(double h, double epsilon, double jmax_factor = 4.0);
};

double bandwidth(double a, double r, double omega, double epsilon);

// |Khat(jh)|^2 for |j| <= j_max as a complex-basis profile.
WeightProfile kernel_weights(const Kernel& K, const KernelTestConfig& cfg);

double statistic_T1(const Observation& y, const Kernel& K, const KernelTestConfig& cfg);
double T_func(const CoefficientVector& theta, const Kernel& K, double h);
// ||K||^2 / h - sum_{|j|<=j_max} |Khat(jh)|^2
double centering_discrepancy(const Kernel& K, const KernelTestConfig& cfg);

PowerPrediction predict_power_kernel(const CoefficientVector& theta, const Kernel& K, const KernelTestConfig& cfg,
                                     double alpha, const PredictOptions& opt = {});

// Shat(t_n) at t_n = n / grid_n, synthesized from the spectral coefficients.
std::vector<double> kernel_estimate_grid(const Observation& y, const Kernel& K, const KernelTestConfig& cfg,
                                         std::int64_t grid_n);

}  // namespace ldsignal
