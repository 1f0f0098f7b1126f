#include "ldsignal/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ldsignal/errors.hpp"

namespace ldsignal {

std::string to_string(Basis b) {
  return b == Basis::RealOrthonormal ? "real" : "complex";
}

CoefficientVector::CoefficientVector(Basis b, Index jmax, std::vector<Entry> entries)
    : basis_(b), jmax_(jmax), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& c) { return a.index < c.index; });
  validate();
}

void CoefficientVector::validate() const {
  if (jmax_ < 1) throw ParameterError("CoefficientVector: jmax must be positive");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (i > 0 && entries_[i - 1].index == e.index)
      throw ParameterError("CoefficientVector: duplicate index " + std::to_string(e.index));
    if (!std::isfinite(e.value.real()) || !std::isfinite(e.value.imag()))
      throw ParameterError("CoefficientVector: non-finite value at index " + std::to_string(e.index));
    if (basis_ == Basis::RealOrthonormal) {
      if (e.index < 1 || e.index > jmax_)
        throw ParameterError("CoefficientVector: real-basis index out of [1, jmax]");
      if (e.value.imag() != 0.0)
        throw BasisError("CoefficientVector: real basis carries an imaginary part");
    } else {
      if (e.index < -jmax_ || e.index > jmax_)
        throw ParameterError("CoefficientVector: complex-basis index out of [-jmax, jmax]");
    }
  }
  if (basis_ == Basis::ComplexExponential) {
    // Sorted storage makes the partner of entries_[i] sit at entries_[n-1-i].
    std::size_t n = entries_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Entry& a = entries_[i];
      const Entry& b = entries_[n - 1 - i];
      if (b.index != -a.index)
        throw BasisError("CoefficientVector: missing Hermitian partner for index " +
                         std::to_string(a.index));
      if (b.value != std::conj(a.value))
        throw BasisError("CoefficientVector: theta_{-j} is not conj(theta_j) at index " +
                         std::to_string(a.index));
    }
  }
}

CoefficientVector CoefficientVector::real(Index jmax, std::vector<std::pair<Index, double>> entries) {
  std::vector<Entry> e;
  e.reserve(entries.size());
  for (auto& [j, v] : entries) e.push_back({j, Value(v, 0.0)});
  return CoefficientVector(Basis::RealOrthonormal, jmax, std::move(e));
}

CoefficientVector CoefficientVector::real_dense(std::span<const double> values) {
  if (values.empty()) throw ParameterError("CoefficientVector: empty dense vector");
  std::vector<Entry> e;
  e.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    e.push_back({static_cast<Index>(i + 1), Value(values[i], 0.0)});
  return CoefficientVector(Basis::RealOrthonormal, static_cast<Index>(values.size()), std::move(e));
}

CoefficientVector CoefficientVector::hermitian(Index jmax, std::vector<std::pair<Index, Value>> nonnegative) {
  std::vector<Entry> e;
  e.reserve(2 * nonnegative.size());
  for (auto& [j, v] : nonnegative) {
    if (j < 0) throw ParameterError("CoefficientVector::hermitian: negative index given");
    if (j == 0) {
      if (v.imag() != 0.0) throw BasisError("CoefficientVector: theta_0 must be real");
      e.push_back({0, v});
    } else {
      e.push_back({j, v});
      e.push_back({-j, std::conj(v)});
    }
  }
  return CoefficientVector(Basis::ComplexExponential, jmax, std::move(e));
}

CoefficientVector CoefficientVector::complex_full(Index jmax, std::vector<Entry> entries) {
  return CoefficientVector(Basis::ComplexExponential, jmax, std::move(entries));
}

CoefficientVector CoefficientVector::with_entries(std::vector<Entry> entries) const {
  return CoefficientVector(basis_, jmax_, std::move(entries));
}

CoefficientVector CoefficientVector::scaled(double a) const {
  std::vector<Entry> e = entries_;
  for (auto& x : e) x.value *= a;
  return CoefficientVector(basis_, jmax_, std::move(e));
}

CoefficientVector::Value CoefficientVector::at(Index j) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                             [](const Entry& e, Index k) { return e.index < k; });
  if (it != entries_.end() && it->index == j) return it->value;
  return Value(0.0, 0.0);
}

CoefficientVector::Index CoefficientVector::max_abs_index() const {
  Index m = 0;
  for (const auto& e : entries_) m = std::max(m, e.index < 0 ? -e.index : e.index);
  return m;
}

double l2_norm_sq(const CoefficientVector& theta) {
  double s = 0.0;
  for (const auto& e : theta.entries()) s += std::norm(e.value);
  return s;
}

double inner_product(const CoefficientVector& a, const CoefficientVector& b) {
  if (a.basis() != b.basis()) throw BasisError("inner_product: basis mismatch");
  auto ea = a.entries();
  auto eb = b.entries();
  double s = 0.0;
  std::size_t i = 0, k = 0;
  while (i < ea.size() && k < eb.size()) {
    if (ea[i].index < eb[k].index) {
      ++i;
    } else if (eb[k].index < ea[i].index) {
      ++k;
    } else {
      s += (ea[i].value * std::conj(eb[k].value)).real();
      ++i;
      ++k;
    }
  }
  return s;
}

CoefficientVector add(const CoefficientVector& a, const CoefficientVector& b) {
  if (a.basis() != b.basis()) throw BasisError("add: basis mismatch");
  auto ea = a.entries();
  auto eb = b.entries();
  std::vector<CoefficientVector::Entry> out;
  out.reserve(ea.size() + eb.size());
  std::size_t i = 0, k = 0;
  while (i < ea.size() || k < eb.size()) {
    if (k == eb.size() || (i < ea.size() && ea[i].index < eb[k].index)) {
      out.push_back(ea[i++]);
    } else if (i == ea.size() || eb[k].index < ea[i].index) {
      out.push_back(eb[k++]);
    } else {
      out.push_back({ea[i].index, ea[i].value + eb[k].value});
      ++i;
      ++k;
    }
  }
  CoefficientVector base = a.jmax() >= b.jmax() ? a : b;
  return base.with_entries(std::move(out));
}

Observation simulate_observation(const CoefficientVector& theta, double epsilon, Seed seed) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ParameterError("simulate_observation: epsilon must be positive");
  std::vector<CoefficientVector::Entry> y(theta.entries().begin(), theta.entries().end());
  if (theta.basis() == Basis::RealOrthonormal) {
    for (auto& e : y) {
      SplitMix64 gen(derive_seed(seed, static_cast<std::uint64_t>(e.index)));
      std::normal_distribution<double> nd(0.0, 1.0);
      e.value += epsilon * nd(gen);
    }
  } else {
    // Draw for j >= 0 and mirror, so the pair stays exactly conjugate.
    std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) {
      auto& e = y[i];
      if (e.index < 0) continue;
      SplitMix64 gen(derive_seed(seed, static_cast<std::uint64_t>(e.index)));
      if (e.index == 0) {
        std::normal_distribution<double> nd(0.0, 1.0);
        e.value += epsilon * nd(gen);
      } else {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        double re = nd(gen);
        double im = nd(gen);
        e.value += epsilon * CoefficientVector::Value(re, im);
        y[n - 1 - i].value = std::conj(e.value);
      }
    }
  }
  return Observation{theta.with_entries(std::move(y)), epsilon};
}

CoefficientVector fourier_coefficients(std::span<const double> samples, std::int64_t jmax) {
  if (jmax < 1) throw ParameterError("fourier_coefficients: jmax must be positive");
  const auto n = static_cast<std::int64_t>(samples.size());
  if (n < 4 * jmax)
    throw ResolutionError("fourier_coefficients: grid of " + std::to_string(n) +
                          " points is too coarse for jmax " + std::to_string(jmax));
  std::vector<std::pair<CoefficientVector::Index, CoefficientVector::Value>> half;
  half.reserve(jmax + 1);
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::int64_t j = 0; j <= jmax; ++j) {
    double re = 0.0, im = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      // Reduce j*k mod N before scaling to keep the angle exact.
      double angle = two_pi_over_n * static_cast<double>((j * k) % n);
      re += samples[k] * std::cos(angle);
      im += samples[k] * std::sin(angle);
    }
    re /= static_cast<double>(n);
    im /= static_cast<double>(n);
    if (j == 0) im = 0.0;
    half.emplace_back(j, CoefficientVector::Value(re, im));
  }
  return CoefficientVector::hermitian(jmax, std::move(half));
}

std::vector<std::pair<std::int64_t, double>> real_equivalent(const CoefficientVector& theta) {
  std::vector<std::pair<std::int64_t, double>> out;
  if (theta.basis() == Basis::RealOrthonormal) {
    for (const auto& e : theta.entries()) out.emplace_back(e.index, e.value.real());
    return out;
  }
  const double r2 = std::sqrt(2.0);
  for (const auto& e : theta.entries()) {
    if (e.index < 0) continue;
    if (e.index == 0) {
      out.emplace_back(0, e.value.real());
    } else {
      out.emplace_back(e.index, r2 * e.value.real());
      out.emplace_back(e.index, r2 * e.value.imag());
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const CoefficientVector& v) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& e : v.entries()) {
    if (v.basis() == Basis::RealOrthonormal)
      coeffs.push_back({e.index, e.value.real()});
    else
      coeffs.push_back({e.index, e.value.real(), e.value.imag()});
  }
  j = nlohmann::json{{"basis", to_string(v.basis())}, {"jmax", v.jmax()}, {"coeffs", coeffs}};
}

void from_json(const nlohmann::json& j, CoefficientVector& v) {
  std::string basis = j.at("basis").get<std::string>();
  auto jmax = j.at("jmax").get<std::int64_t>();
  std::vector<CoefficientVector::Entry> entries;
  for (const auto& c : j.at("coeffs")) {
    if (!c.is_array() || c.size() < 2 || c.size() > 3)
      throw ParameterError("coefficient entries must be [j, re] or [j, re, im]");
    double im = c.size() == 3 ? c[2].get<double>() : 0.0;
    entries.push_back({c[0].get<std::int64_t>(), {c[1].get<double>(), im}});
  }
  if (basis == "real") {
    std::vector<std::pair<CoefficientVector::Index, double>> r;
    for (auto& e : entries) {
      if (e.value.imag() != 0.0) throw BasisError("real-basis coefficient has an imaginary part");
      r.emplace_back(e.index, e.value.real());
    }
    v = CoefficientVector::real(jmax, std::move(r));
  } else if (basis == "complex") {
    bool has_negative = std::any_of(entries.begin(), entries.end(),
                                    [](const auto& e) { return e.index < 0; });
    if (has_negative) {
      v = CoefficientVector::complex_full(jmax, std::move(entries));
    } else {
      std::vector<std::pair<CoefficientVector::Index, CoefficientVector::Value>> h;
      for (auto& e : entries) h.emplace_back(e.index, e.value);
      v = CoefficientVector::hermitian(jmax, std::move(h));
    }
  } else {
    throw ParameterError("basis must be \"real\" or \"complex\"");
  }
}

}  // namespace ldsignal
