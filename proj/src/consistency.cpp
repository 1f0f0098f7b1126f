#include "ldsignal/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ldsignal/errors.hpp"
#include "ldsignal/numeric.hpp"

namespace ldsignal {

namespace {

std::int64_t abs_index(std::int64_t j) { return j < 0 ? -j : j; }

// (|j|, sum of |theta|^2 at +-j), ascending in |j|.
std::vector<std::pair<std::int64_t, double>> mass_by_abs_index(const CoefficientVector& theta) {
  std::map<std::int64_t, double> m;
  for (const auto& e : theta.entries()) m[abs_index(e.index)] += std::norm(e.value);
  return {m.begin(), m.end()};
}

double mass_where(const CoefficientVector& theta, auto pred) {
  CompensatedSum s;
  for (const auto& e : theta.entries())
    if (pred(abs_index(e.index))) s.add(std::norm(e.value));
  return s.value();
}

// Least-squares slope of log y on log(1/eps); NaN if any y is not positive.
double log_slope(const std::vector<double>& eps, const std::vector<double>& y) {
  if (eps.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    mx += -std::log(eps[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(eps.size());
  my /= static_cast<double>(eps.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    double dx = -std::log(eps[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

void require_grid(const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw ParameterError("epsilon grid is empty");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0)) throw ParameterError("epsilon grid entries must be positive");
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) throw ParameterError("epsilon grid must be strictly decreasing");
  }
}

}  // namespace

std::int64_t RateParams::k_eps(double epsilon) const {
  return std::max<std::int64_t>(1, ceil_tolerant(std::pow(epsilon, k_eps_exponent)));
}

double RateParams::r_eps_sq(double epsilon) const {
  return std::pow(epsilon, -2.0 * omega);
}

RateParams maxiset_s(double r, double omega) {
  if (!(r > 0.0 && r < 0.5)) throw ParameterError("rate params: r must lie in (0, 1/2)");
  if (!(omega > 0.0) || !(2.0 * omega <= 1.0 - 2.0 * r + 1e-15))
    throw ParameterError("rate params: need 0 < 2 omega <= 1 - 2r");
  RateParams p;
  p.r = r;
  p.omega = omega;
  p.s = r / (2.0 - 4.0 * r - 2.0 * omega);
  p.k_eps_exponent = -4.0 + 8.0 * r + 4.0 * omega;
  p.h_eps_exponent = 4.0 - 8.0 * r - 4.0 * omega;
  return p;
}

double rate_from_s(double s, double omega) {
  return (2.0 - 2.0 * omega) * s / (1.0 + 4.0 * s);
}

double besov_seminorm(const CoefficientVector& theta, double s) {
  if (!(s > 0.0)) throw ParameterError("besov_seminorm: s must be positive");
  auto mass = mass_by_abs_index(theta);
  double best = 0.0;
  double tail = 0.0;
  // Walking down from the top: tail(k) is constant on (previous support, k].
  for (auto it = mass.rbegin(); it != mass.rend(); ++it) {
    if (it->first < 1) break;
    tail += it->second;
    best = std::max(best, std::pow(static_cast<double>(it->first), 2.0 * s) * tail);
  }
  return best;
}

std::int64_t ModeLocation::at(double epsilon, const RateParams& p) const {
  if (k_multiple <= 0.0) return fixed;
  double k = static_cast<double>(p.k_eps(epsilon));
  return std::max<std::int64_t>(1, ceil_tolerant(k_multiple * k * std::pow(epsilon, -gamma)));
}

AlternativeFamily::AlternativeFamily(std::string label, double r_target, Generator gen, nlohmann::json spec)
    : label_(std::move(label)), r_(r_target), gen_(std::move(gen)), spec_(std::move(spec)) {}

AlternativeFamily::Sandwich AlternativeFamily::norm_sandwich(const std::vector<double>& eps_grid) const {
  Sandwich s;
  s.c = std::numeric_limits<double>::infinity();
  for (double eps : eps_grid) {
    double ratio = std::sqrt(l2_norm_sq(at(eps))) / std::pow(eps, 2.0 * r_);
    s.ratios.push_back(ratio);
    s.c = std::min(s.c, ratio);
    s.C = std::max(s.C, ratio);
  }
  return s;
}

AlternativeFamily split_mass_family(const RateParams& p, std::vector<MassPart> parts, double amplitude) {
  if (parts.empty()) throw ParameterError("split-mass family: no parts");
  for (auto& part : parts) {
    if (!(part.fraction > 0.0)) throw ParameterError("split-mass family: fractions must be positive");
    if (part.location.k_multiple <= 0.0 && part.location.fixed < 1)
      throw ParameterError("split-mass family: fixed locations must be >= 1");
  }
  nlohmann::json spec = {{"name", "split-mass"}, {"amplitude", amplitude}, {"parts", nlohmann::json::array()}};
  for (auto& part : parts)
    spec["parts"].push_back({{"fraction", part.fraction}, {"index", part.location.fixed},
                             {"k_multiple", part.location.k_multiple}, {"gamma", part.location.gamma}});
  auto gen = [p, parts, amplitude](double eps) {
    double total = amplitude * amplitude * std::pow(eps, 4.0 * p.r);
    std::map<std::int64_t, double> mass;
    for (const auto& part : parts) mass[part.location.at(eps, p)] += part.fraction * total;
    std::vector<std::pair<std::int64_t, double>> e;
    for (auto& [j, m] : mass) e.emplace_back(j, std::sqrt(m));
    std::int64_t jmax = std::max<std::int64_t>(1, e.back().first);
    return CoefficientVector::real(jmax, std::move(e));
  };
  std::string label = parts.size() == 1 ? "single-mode" : "split-mass";
  spec["name"] = label;
  return AlternativeFamily(label, p.r, gen, spec);
}

AlternativeFamily single_mode_family(const RateParams& p, ModeLocation where, double amplitude) {
  return split_mass_family(p, {{1.0, where}}, amplitude);
}

AlternativeFamily power_law_family(const RateParams& p, double exponent, std::int64_t jmax, double amplitude) {
  if (jmax < 1) throw ParameterError("power-law family: jmax must be >= 1");
  if (!(exponent > 0.0)) throw ParameterError("power-law family: exponent must be positive");
  std::vector<double> shape(static_cast<std::size_t>(jmax));
  CompensatedSum n2;
  for (std::int64_t j = 1; j <= jmax; ++j) {
    shape[j - 1] = std::pow(static_cast<double>(j), -exponent);
    n2.add(shape[j - 1] * shape[j - 1]);
  }
  double norm = std::sqrt(n2.value());
  auto gen = [p, shape, norm, amplitude](double eps) {
    double a = amplitude * std::pow(eps, 2.0 * p.r) / norm;
    std::vector<double> v(shape);
    for (auto& x : v) x *= a;
    return CoefficientVector::real_dense(v);
  };
  nlohmann::json spec = {{"name", "power-law"}, {"exponent", exponent}, {"jmax", jmax}, {"amplitude", amplitude}};
  return AlternativeFamily("power-law", p.r, gen, spec);
}

AlternativeFamily zero_family(const RateParams& p) {
  auto gen = [](double) { return CoefficientVector::real(1, {}); };
  return AlternativeFamily("zero", p.r, gen, {{"name", "zero"}});
}

AlternativeFamily custom_table_family(double r_target, std::vector<std::pair<double, CoefficientVector>> table) {
  if (table.empty()) throw ParameterError("custom-table family: empty table");
  nlohmann::json spec = {{"name", "custom-table"}, {"rows", table.size()}};
  auto gen = [table](double eps) {
    for (const auto& [e, v] : table)
      if (std::abs(e - eps) <= 1e-12 * eps) return v;
    throw ParameterError("custom-table family: no entry for epsilon " + std::to_string(eps));
  };
  return AlternativeFamily("custom-table", r_target, gen, spec);
}

AlternativeFamily family_from_json(const nlohmann::json& j, const RateParams& p) {
  std::string name = j.at("name").get<std::string>();
  double amplitude = j.value("amplitude", 1.0);
  auto location = [](const nlohmann::json& o) {
    if (o.contains("k_multiple"))
      return ModeLocation::escaping(o.at("k_multiple").get<double>(), o.value("gamma", 0.0));
    return ModeLocation::index(o.at("index").get<std::int64_t>());
  };
  if (name == "single-mode") return single_mode_family(p, location(j), amplitude);
  if (name == "split-mass") {
    std::vector<MassPart> parts;
    for (const auto& part : j.at("parts")) parts.push_back({part.at("fraction").get<double>(), location(part)});
    return split_mass_family(p, std::move(parts), amplitude);
  }
  if (name == "power-law")
    return power_law_family(p, j.at("exponent").get<double>(), j.at("jmax").get<std::int64_t>(), amplitude);
  if (name == "zero") return zero_family(p);
  if (name == "custom-table") {
    std::vector<std::pair<double, CoefficientVector>> table;
    for (const auto& row : j.at("table"))
      table.emplace_back(row.at("epsilon").get<double>(), row.at("theta").get<CoefficientVector>());
    return custom_table_family(p.r, std::move(table));
  }
  throw ParameterError("unknown family \"" + name + "\"");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Inconsistent: return "inconsistent";
    default: return "indeterminate";
  }
}

LdConsistencyResult ld_consistency_check(const AlternativeFamily& fam, const RateParams& params,
                                         const std::vector<double>& eps_grid, double c2,
                                         const ConsistencyThresholds& th) {
  require_grid(eps_grid);
  if (!(c2 > 0.0)) throw ParameterError("ld_consistency_check: c2 must be positive");
  LdConsistencyResult res;
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double eps : eps_grid) {
    std::int64_t k = params.k_eps(eps);
    double window = c2 * static_cast<double>(k);
    CoefficientVector theta = fam.at(eps);
    double m = mass_where(theta, [&](std::int64_t a) { return static_cast<double>(a) < window; });
    double ratio = m / std::pow(eps, 4.0 * params.r);
    res.epsilon.push_back(eps);
    res.k_eps.push_back(k);
    res.mass_ratio.push_back(ratio);
    res.consistent.push_back(ratio >= th.c1);
    min_ratio = std::min(min_ratio, ratio);
  }
  res.trend_slope = log_slope(res.epsilon, res.mass_ratio);
  bool slope_ok = std::isnan(res.trend_slope) || res.trend_slope >= -th.slope_tolerance;
  bool falling = !std::isnan(res.trend_slope) && res.trend_slope < -th.slope_tolerance;
  if (min_ratio >= th.c1 && slope_ok)
    res.verdict = Verdict::Consistent;
  else if (falling || res.mass_ratio.back() == 0.0)
    res.verdict = Verdict::Inconsistent;
  else
    res.verdict = Verdict::Indeterminate;
  return res;
}

PureConsistencyResult pure_consistency_check(const AlternativeFamily& fam, const RateParams& params,
                                             const std::vector<double>& eps_grid,
                                             const std::vector<double>& C1_grid, double delta) {
  require_grid(eps_grid);
  if (C1_grid.empty()) throw ParameterError("pure_consistency_check: empty C1 grid");
  PureConsistencyResult res;
  res.C1_grid = C1_grid;
  std::vector<CoefficientVector> thetas;
  for (double eps : eps_grid) thetas.push_back(fam.at(eps));
  for (double C1 : C1_grid) {
    double sup = 0.0;
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
      double eps = eps_grid[i];
      double edge = C1 * static_cast<double>(params.k_eps(eps));
      double m = mass_where(thetas[i], [&](std::int64_t a) { return static_cast<double>(a) > edge; });
      sup = std::max(sup, m / std::pow(eps, 4.0 * params.r));
    }
    res.delta_profile.push_back(sup);
  }
  res.pure = *std::min_element(res.delta_profile.begin(), res.delta_profile.end()) <= delta;
  return res;
}

DecompositionResult orthogonal_decompose(const CoefficientVector& theta, std::int64_t cutoff, double s) {
  if (cutoff < 1) throw ParameterError("orthogonal_decompose: cutoff must be >= 1");
  std::vector<CoefficientVector::Entry> low, high;
  for (const auto& e : theta.entries()) (abs_index(e.index) <= cutoff ? low : high).push_back(e);
  DecompositionResult d;
  d.s1 = theta.with_entries(std::move(low));
  d.s2 = theta.with_entries(std::move(high));
  d.cutoff_index = cutoff;
  d.besov_seminorm_s1 = besov_seminorm(d.s1, s);
  d.pythagoras_residual = std::abs(l2_norm_sq(theta) - l2_norm_sq(d.s1) - l2_norm_sq(d.s2));
  return d;
}

InteractionResult interaction_check(const AlternativeFamily& a, const AlternativeFamily& b,
                                    const std::vector<double>& eps_grid) {
  require_grid(eps_grid);
  InteractionResult res;
  for (double eps : eps_grid) {
    CoefficientVector sa = a.at(eps), sb = b.at(eps);
    double scale = std::pow(eps, 4.0 * a.r_target());
    double defect = std::abs(l2_norm_sq(add(sa, sb)) - l2_norm_sq(sa) - l2_norm_sq(sb));
    res.epsilon.push_back(eps);
    res.pythagoras_defect.push_back(defect / scale);
    res.cross_term.push_back(2.0 * inner_product(sa, sb) / scale);
  }
  res.trend_slope = log_slope(res.epsilon, res.pythagoras_defect);
  return res;
}

std::vector<InconsistentLevel> build_inconsistent_family(const CoefficientVector& tau, double s, double r,
                                                         double omega, const CounterexampleOptions& opt) {
  if (!(s > 0.0)) throw ParameterError("build_inconsistent_family: s must be positive");
  if (!(r > 0.0 && r < 0.5)) throw ParameterError("build_inconsistent_family: r must lie in (0, 1/2)");
  if (!(omega > 0.0)) throw ParameterError("build_inconsistent_family: omega must be positive");
  if (opt.ladder_margin < 1) throw ParameterError("build_inconsistent_family: ladder_margin must be >= 1");
  auto mass = mass_by_abs_index(tau);
  // Suffix sums by |j| for the tail functional.
  std::vector<double> suffix(mass.size() + 1, 0.0);
  for (std::size_t i = mass.size(); i-- > 0;) suffix[i] = suffix[i + 1] + mass[i].second;
  auto tail_from = [&](std::int64_t m) {
    auto it = std::lower_bound(mass.begin(), mass.end(), m, [](const auto& p, std::int64_t k) { return p.first < k; });
    return suffix[static_cast<std::size_t>(it - mass.begin())];
  };

  std::int64_t top = tau.max_abs_index() / opt.ladder_margin;
  std::vector<std::pair<std::int64_t, double>> records;
  double best = 0.0;
  for (std::int64_t m = 1; m <= top; m *= 2) {
    double C = std::pow(static_cast<double>(m), 2.0 * s) * tail_from(m);
    if (C > best) {
      best = C;
      records.emplace_back(m, C);
    }
  }
  if (records.size() < std::max<std::size_t>(opt.min_levels, 2))
    throw NotACounterexampleError("build_inconsistent_family: the tail functional does not grow on the stored support");

  std::vector<InconsistentLevel> out;
  for (auto [m, C] : records) {
    InconsistentLevel lv;
    lv.m = m;
    lv.C = C;
    lv.n = std::pow(C, -1.0 / (2.0 * r)) * std::pow(static_cast<double>(m), s / r);
    lv.epsilon = 1.0 / std::sqrt(lv.n);
    std::vector<CoefficientVector::Entry> eta;
    for (const auto& e : tau.entries()) {
      std::int64_t a = abs_index(e.index);
      bool keep = opt.variant == CounterexampleVariant::Quadratic ? a >= m : (a >= m && a <= 2 * m);
      if (keep) eta.push_back(e);
    }
    lv.eta = tau.with_entries(std::move(eta));
    lv.sandwich = l2_norm_sq(lv.eta) * std::pow(lv.n, 2.0 * r);
    out.push_back(std::move(lv));
  }
  return out;
}

double weighted_snr_ratio(const InconsistentLevel& level, const WeightScheme& scheme, double omega) {
  WeightProfile w = scheme.profile(level.epsilon);
  CompensatedSum s;
  for (const auto& e : level.eta.entries()) s.add(w.at(e.index) * std::norm(e.value));
  return s.value() * std::pow(level.epsilon, 4.0 * omega - 4.0);
}

}  // namespace ldsignal
