#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ldsignal/core_model.hpp"

namespace ldsignal {

// Weights kappa^2_j for one noise level. Real basis: j = 1..cutoff. Complex
// basis: indexed by |j| = 0..cutoff, each |j| > 0 standing for the pair +-j.
// Storage is an explicit head followed by a constant tail, so a flat cutoff
// scheme costs O(1) memory regardless of its length.
class WeightProfile {
 public:
  struct Run {
    std::int64_t first;
    std::int64_t last;
    double value;
    std::int64_t count() const { return last - first + 1; }
  };

  WeightProfile() = default;

  static WeightProfile flat(double level, std::int64_t cutoff);
  static WeightProfile from_values(std::vector<double> kappa_sq, Basis basis = Basis::RealOrthonormal);

  Basis basis() const { return basis_; }
  std::int64_t first_index() const { return basis_ == Basis::RealOrthonormal ? 1 : 0; }
  std::int64_t cutoff() const { return cutoff_; }
  double at(std::int64_t j) const;
  double leading() const { return at(first_index()); }
  bool nonincreasing() const;

  // Maximal runs of equal consecutive weights, zero runs included.
  std::vector<Run> runs() const;
  // Complex profiles expand to real coordinates (kappa_0, kappa_1, kappa_1, ...).
  WeightProfile real_equivalent() const;

 private:
  Basis basis_ = Basis::RealOrthonormal;
  std::vector<double> head_;
  double tail_ = 0.0;
  std::int64_t cutoff_ = 0;
};

struct FlatCutoffParams {
  double r = 0.25;
  double omega = 0.125;
  double cutoff_scale = 1.0;
  double level_scale = 1.0;
};

struct PolynomialDecayParams {
  double lambda = 2.0;
  double k_scale = 1.0;
  double k_exponent = 0.0;
  double level_scale = 1.0;
  double level_exponent = 0.0;
  double truncation_multiple = 10.0;
  std::optional<std::int64_t> max_index;
};

struct CustomWeightsParams {
  // A single entry with epsilon <= 0 applies to every epsilon.
  std::vector<std::pair<double, std::vector<double>>> table;
  bool cutoff_mode = false;
};

// The map epsilon -> WeightProfile defining a quadratic test.
class WeightScheme {
 public:
  using Params = std::variant<FlatCutoffParams, PolynomialDecayParams, CustomWeightsParams>;

  explicit WeightScheme(Params p);

  static WeightScheme flat_cutoff(double r, double omega, double cutoff_scale = 1.0);
  static WeightScheme polynomial(PolynomialDecayParams p);
  static WeightScheme custom(std::vector<double> kappa_sq);

  WeightProfile profile(double epsilon) const;
  // Cutoff mode: k_eps is taken as l_eps and kappa_eps^2 as kappa_1^2.
  bool cutoff_mode() const;
  std::string name() const;
  const Params& params() const { return params_; }

 private:
  Params params_;
};

void to_json(nlohmann::json& j, const WeightScheme& w);
WeightScheme weight_scheme_from_json(const nlohmann::json& j);

}  // namespace ldsignal
