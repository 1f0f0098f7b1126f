#include "ldsignal/weights.hpp"

#include <cmath>

#include "ldsignal/errors.hpp"
#include "ldsignal/numeric.hpp"

namespace ldsignal {

WeightProfile WeightProfile::flat(double level, std::int64_t cutoff) {
  if (!(level >= 0.0) || !std::isfinite(level)) throw ParameterError("flat weights: level must be finite and >= 0");
  if (cutoff < 1) throw ParameterError("flat weights: cutoff must be >= 1");
  WeightProfile w;
  w.tail_ = level;
  w.cutoff_ = cutoff;
  return w;
}

WeightProfile WeightProfile::from_values(std::vector<double> kappa_sq, Basis basis) {
  if (kappa_sq.empty()) throw ParameterError("weights: empty vector");
  for (double v : kappa_sq)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("weights: values must be finite and >= 0");
  WeightProfile w;
  w.basis_ = basis;
  w.cutoff_ = static_cast<std::int64_t>(kappa_sq.size()) - (basis == Basis::RealOrthonormal ? 0 : 1);
  w.head_ = std::move(kappa_sq);
  return w;
}

double WeightProfile::at(std::int64_t j) const {
  if (basis_ == Basis::ComplexExponential && j < 0) j = -j;
  if (j < first_index() || j > cutoff_) return 0.0;
  auto i = static_cast<std::size_t>(j - first_index());
  return i < head_.size() ? head_[i] : tail_;
}

bool WeightProfile::nonincreasing() const {
  for (std::size_t i = 1; i < head_.size(); ++i)
    if (head_[i] > head_[i - 1]) return false;
  auto tail_len = cutoff_ - first_index() + 1 - static_cast<std::int64_t>(head_.size());
  if (!head_.empty() && tail_len > 0 && tail_ > head_.back()) return false;
  return true;
}

std::vector<WeightProfile::Run> WeightProfile::runs() const {
  std::vector<Run> out;
  std::int64_t j = first_index();
  for (double v : head_) {
    if (!out.empty() && out.back().value == v)
      out.back().last = j;
    else
      out.push_back({j, j, v});
    ++j;
  }
  if (j <= cutoff_) {
    if (!out.empty() && out.back().value == tail_)
      out.back().last = cutoff_;
    else
      out.push_back({j, cutoff_, tail_});
  }
  return out;
}

WeightProfile WeightProfile::real_equivalent() const {
  if (basis_ == Basis::RealOrthonormal) return *this;
  std::vector<double> v;
  v.reserve(2 * head_.size());
  for (std::size_t i = 0; i < head_.size(); ++i) {
    v.push_back(head_[i]);
    if (i > 0) v.push_back(head_[i]);
  }
  return from_values(std::move(v), Basis::RealOrthonormal);
}

WeightScheme::WeightScheme(Params p) : params_(std::move(p)) {
  if (auto* f = std::get_if<FlatCutoffParams>(&params_)) {
    if (!(f->cutoff_scale > 0.0) || !(f->level_scale > 0.0))
      throw ParameterError("flat-cutoff: cutoff_scale and level_scale must be positive");
    if (!std::isfinite(f->r) || !std::isfinite(f->omega))
      throw ParameterError("flat-cutoff: r and omega must be finite");
  } else if (auto* q = std::get_if<PolynomialDecayParams>(&params_)) {
    if (!(q->lambda > 0.0)) throw ParameterError("polynomial-decay: lambda must be positive");
    if (!(q->k_scale > 0.0) || !(q->level_scale > 0.0))
      throw ParameterError("polynomial-decay: k_scale and level_scale must be positive");
    if (!q->max_index && !(q->truncation_multiple >= 1.0))
      throw ParameterError("polynomial-decay: truncation_multiple must be >= 1");
    if (q->max_index && *q->max_index < 1) throw ParameterError("polynomial-decay: max_index must be >= 1");
  } else {
    auto& c = std::get<CustomWeightsParams>(params_);
    if (c.table.empty()) throw ParameterError("custom weights: empty table");
    for (auto& [eps, v] : c.table) WeightProfile::from_values(v);
  }
}

WeightScheme WeightScheme::flat_cutoff(double r, double omega, double cutoff_scale) {
  return WeightScheme(FlatCutoffParams{r, omega, cutoff_scale, 1.0});
}

WeightScheme WeightScheme::polynomial(PolynomialDecayParams p) {
  return WeightScheme(std::move(p));
}

WeightScheme WeightScheme::custom(std::vector<double> kappa_sq) {
  CustomWeightsParams c;
  c.table.emplace_back(0.0, std::move(kappa_sq));
  return WeightScheme(std::move(c));
}

WeightProfile WeightScheme::profile(double epsilon) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("weights: epsilon must be positive");
  if (auto* f = std::get_if<FlatCutoffParams>(&params_)) {
    double level = f->level_scale * std::pow(epsilon, 4.0 - 4.0 * f->r - 4.0 * f->omega);
    std::int64_t l = std::max<std::int64_t>(
        1, ceil_tolerant(f->cutoff_scale * std::pow(epsilon, -4.0 + 8.0 * f->r + 4.0 * f->omega)));
    return WeightProfile::flat(level, l);
  }
  if (auto* q = std::get_if<PolynomialDecayParams>(&params_)) {
    double k = std::max(1.0, q->k_scale * std::pow(epsilon, q->k_exponent));
    double level = q->level_scale * std::pow(epsilon, q->level_exponent);
    std::int64_t n = q->max_index ? *q->max_index : ceil_tolerant(q->truncation_multiple * k);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (std::int64_t j = 1; j <= n; ++j)
      v[j - 1] = level * std::pow(1.0 + static_cast<double>(j) / k, -q->lambda);
    return WeightProfile::from_values(std::move(v));
  }
  const auto& c = std::get<CustomWeightsParams>(params_);
  for (const auto& [eps, v] : c.table) {
    if (eps <= 0.0 || std::abs(eps - epsilon) <= 1e-12 * epsilon) return WeightProfile::from_values(v);
  }
  throw ParameterError("custom weights: no table entry for epsilon " + std::to_string(epsilon));
}

bool WeightScheme::cutoff_mode() const {
  if (std::holds_alternative<FlatCutoffParams>(params_)) return true;
  if (auto* c = std::get_if<CustomWeightsParams>(&params_)) return c->cutoff_mode;
  return false;
}

std::string WeightScheme::name() const {
  if (std::holds_alternative<FlatCutoffParams>(params_)) return "flat-cutoff";
  if (std::holds_alternative<PolynomialDecayParams>(params_)) return "polynomial-decay";
  return "custom";
}

void to_json(nlohmann::json& j, const WeightScheme& w) {
  if (auto* f = std::get_if<FlatCutoffParams>(&w.params())) {
    j = {{"name", "flat-cutoff"}, {"r", f->r}, {"omega", f->omega},
         {"cutoff_scale", f->cutoff_scale}, {"level_scale", f->level_scale}};
  } else if (auto* q = std::get_if<PolynomialDecayParams>(&w.params())) {
    j = {{"name", "polynomial-decay"}, {"lambda", q->lambda}, {"k_scale", q->k_scale},
         {"k_exponent", q->k_exponent}, {"level_scale", q->level_scale},
         {"level_exponent", q->level_exponent}, {"truncation_multiple", q->truncation_multiple}};
    if (q->max_index) j["max_index"] = *q->max_index;
  } else {
    const auto& c = std::get<CustomWeightsParams>(w.params());
    nlohmann::json t = nlohmann::json::array();
    for (const auto& [eps, v] : c.table) t.push_back({{"epsilon", eps}, {"weights", v}});
    j = {{"name", "custom"}, {"table", t}, {"cutoff_mode", c.cutoff_mode}};
  }
}

WeightScheme weight_scheme_from_json(const nlohmann::json& j) {
  std::string name = j.at("name").get<std::string>();
  if (name == "flat-cutoff") {
    FlatCutoffParams f;
    f.r = j.at("r").get<double>();
    f.omega = j.at("omega").get<double>();
    f.cutoff_scale = j.value("cutoff_scale", 1.0);
    f.level_scale = j.value("level_scale", 1.0);
    return WeightScheme(f);
  }
  if (name == "polynomial-decay") {
    PolynomialDecayParams q;
    q.lambda = j.value("lambda", 2.0);
    if (j.contains("r") || j.contains("omega")) {
      double r = j.at("r").get<double>();
      double w = j.at("omega").get<double>();
      q.k_exponent = -4.0 + 8.0 * r + 4.0 * w;
      q.level_exponent = 4.0 - 4.0 * r - 4.0 * w;
    }
    q.k_scale = j.value("k_scale", 1.0);
    q.k_exponent = j.value("k_exponent", q.k_exponent);
    q.level_scale = j.value("level_scale", 1.0);
    q.level_exponent = j.value("level_exponent", q.level_exponent);
    q.truncation_multiple = j.value("truncation_multiple", 10.0);
    if (j.contains("max_index")) q.max_index = j.at("max_index").get<std::int64_t>();
    return WeightScheme(q);
  }
  if (name == "custom") {
    CustomWeightsParams c;
    c.cutoff_mode = j.value("cutoff_mode", false);
    if (j.contains("weights")) {
      c.table.emplace_back(0.0, j.at("weights").get<std::vector<double>>());
    } else {
      for (const auto& row : j.at("table"))
        c.table.emplace_back(row.at("epsilon").get<double>(), row.at("weights").get<std::vector<double>>());
    }
    return WeightScheme(c);
  }
  throw ParameterError("unknown weight scheme \"" + name + "\"");
}

}  // namespace ldsignal
