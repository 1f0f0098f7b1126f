#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ldsignal/rng.hpp"

namespace ldsignal {

enum class Basis { RealOrthonormal, ComplexExponential };

std::string to_string(Basis b);

// Finitely many basis coefficients. Entries are kept sorted by index; indices
// outside the stored support are zero. In the complex basis both j and -j are
// stored and are exact conjugates.
class CoefficientVector {
 public:
  using Index = std::int64_t;
  using Value = std::complex<double>;

  struct Entry {
    Index index;
    Value value;
  };

  CoefficientVector() = default;

  // Real basis, indices 1..jmax.
  static CoefficientVector real(Index jmax, std::vector<std::pair<Index, double>> entries);
  // Real basis, values[i] at index i + 1.
  static CoefficientVector real_dense(std::span<const double> values);
  // Complex basis from j >= 0 entries; negative indices are filled in by conjugation.
  static CoefficientVector hermitian(Index jmax, std::vector<std::pair<Index, Value>> nonnegative);
  // Complex basis with every stored entry given; Hermitian symmetry is checked.
  static CoefficientVector complex_full(Index jmax, std::vector<Entry> entries);

  Basis basis() const { return basis_; }
  Index jmax() const { return jmax_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Value at(Index j) const;
  Index max_abs_index() const;

  // New vector with the same basis and jmax.
  CoefficientVector with_entries(std::vector<Entry> entries) const;
  CoefficientVector scaled(double a) const;

 private:
  CoefficientVector(Basis b, Index jmax, std::vector<Entry> entries);
  void validate() const;

  Basis basis_ = Basis::RealOrthonormal;
  Index jmax_ = 1;
  std::vector<Entry> entries_;
};

struct Observation {
  CoefficientVector y;
  double epsilon = 1.0;
};

double l2_norm_sq(const CoefficientVector& theta);
// Re <a, b> summed over the common support.
double inner_product(const CoefficientVector& a, const CoefficientVector& b);
CoefficientVector add(const CoefficientVector& a, const CoefficientVector& b);

Observation simulate_observation(const CoefficientVector& theta, double epsilon, Seed seed);

// theta_j = (1/N) sum_n exp(2 pi i j n / N) f(n / N), |j| <= jmax. Needs N >= 4 jmax.
CoefficientVector fourier_coefficients(std::span<const double> samples, std::int64_t jmax);

// Real coordinates carrying the same quadratic forms as a complex-basis vector:
// (theta_0, sqrt2 Re theta_1, sqrt2 Im theta_1, sqrt2 Re theta_2, ...).
// Returned values are ordered by |j| and paired with |j|.
std::vector<std::pair<std::int64_t, double>> real_equivalent(const CoefficientVector& theta);

void to_json(nlohmann::json& j, const CoefficientVector& v);
void from_json(const nlohmann::json& j, CoefficientVector& v);

}  // namespace ldsignal
