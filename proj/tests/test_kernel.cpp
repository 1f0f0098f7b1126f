#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "ldsignal/errors.hpp"
#include "ldsignal/kernel_test.hpp"
#include "ldsignal/normal.hpp"
#include "ldsignal/numeric.hpp"

using namespace ldsignal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using C = CoefficientVector::Value;

namespace {

const double pi = std::numbers::pi;

std::vector<Kernel> all_kernels() {
  // Triangle on [-1/2, 1/2]: 2 - 4|t|.
  return {Kernel::uniform(), Kernel::epanechnikov(), Kernel::tabulated({{-0.5, 0.0}, {0.0, 2.0}, {0.5, 0.0}})};
}

// Smoothed signal (1/h) int K((t - s)/h) S(s) ds by midpoint rule in u = (t - s)/h.
double smoothed(const Kernel& K, double h, const CoefficientVector& theta, double t) {
  const int n = 4000;
  CompensatedSum acc;
  for (int i = 0; i < n; ++i) {
    double u = -0.5 + (i + 0.5) / n;
    double s = t - h * u;
    double val = 0.0;
    for (const auto& e : theta.entries()) {
      double a = 2.0 * pi * static_cast<double>(e.index) * s;
      val += e.value.real() * std::cos(a) + e.value.imag() * std::sin(a);
    }
    acc.add(K(u) * val / n);
  }
  return acc.value();
}

}  // namespace

TEST_CASE("kernel Fourier transform") {
  auto U = Kernel::uniform();
  CHECK_THAT(khat(U, 0.0), WithinAbs(1.0, 1e-12));
  CHECK_THAT(khat(U, 1.0), WithinAbs(0.0, 1e-12));
  for (double w : {0.1, 0.37, 1.5, 2.25, 7.3, 40.5})
    CHECK_THAT(khat(U, w), WithinAbs(std::sin(pi * w) / (pi * w), 1e-12));
  // Epanechnikov 1.5(1 - 4t^2): closed form 3(sin a - a cos a)/a^3 with a = pi w.
  auto E = Kernel::epanechnikov();
  for (double w : {0.2, 1.0, 3.3, 11.0}) {
    double a = pi * w;
    CHECK_THAT(khat(E, w), WithinAbs(3.0 * (std::sin(a) - a * std::cos(a)) / (a * a * a), 1e-10));
  }
  for (const auto& K : all_kernels()) {
    CHECK_THAT(khat(K, 0.0), WithinAbs(1.0, 1e-8));
    for (double w : {0.05, 0.5, 1.7, 13.0}) {
      CHECK_THAT(khat(K, w), WithinAbs(khat(K, -w), 1e-12));
      CHECK(std::abs(khat(K, w)) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("gamma^2 by two routes") {
  auto U = Kernel::uniform();
  CHECK_THAT(U.gamma_sq(), WithinAbs(4.0 / 3.0, 1e-8));
  CHECK_THAT(gamma_sq_spectral(U), WithinAbs(4.0 / 3.0, 1e-8));
  CHECK_THAT(self_convolution(U, 0.3), WithinAbs(0.7, 1e-12));
  // Epanechnikov: 2 int (K*K)^2 = 1.7350649350649... (exact rational 668/385).
  CHECK_THAT(Kernel::epanechnikov().gamma_sq(), WithinAbs(668.0 / 385.0, 1e-10));
  for (const auto& K : all_kernels()) {
    CHECK(K.gamma_sq() > 0.0);
    CHECK_THAT(gamma_sq_spectral(K), WithinAbs(K.gamma_sq(), 1e-6));
  }
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(Kernel::tabulated({{-0.5, 0.0}, {0.0, 2.0}, {0.5, 0.5}}), ParameterError);
  CHECK_THROWS_AS(Kernel::tabulated({{-0.5, 0.0}, {0.0, 1.0}, {0.5, 0.0}}), ParameterError);
  CHECK_THROWS_AS(Kernel::uniform(8), ParameterError);
  KernelTestConfig bad{1.5, 1.0, 10};
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  KernelTestConfig coarse{0.1, 1.0, 10};
  CHECK_THROWS_AS(coarse.validate(), ParameterError);
  CHECK_NOTHROW(KernelTestConfig::with_default_jmax(0.1, 1.0).validate());
  CHECK_THAT(bandwidth(2.0, 0.25, 0.125, 0.1), WithinRel(2.0 * std::pow(0.1, 1.5), 1e-14));
}

TEST_CASE("T1 equals the quadratic statistic with kernel weights") {
  for (const auto& K : all_kernels()) {
    auto cfg = KernelTestConfig::with_default_jmax(0.05, 0.3);
    auto w = kernel_weights(K, cfg);
    std::vector<std::pair<std::int64_t, C>> half;
    for (std::int64_t j = 0; j <= cfg.j_max; ++j) half.emplace_back(j, C(0.0));
    half[1].second = C(0.2, -0.1);
    half[3].second = C(0.0, 0.15);
    auto theta = CoefficientVector::hermitian(cfg.j_max, half);
    for (int r = 0; r < 100; ++r) {
      auto y = simulate_observation(theta, cfg.epsilon, derive_seed(Seed{21}, r));
      double t1 = statistic_T1(y, K, cfg);
      double tq = std::sqrt(cfg.h / K.gamma_sq()) * statistic_T(y, w);
      CHECK_THAT(t1, WithinRel(tq, 1e-12));
    }
  }
}

TEST_CASE("T1 centering and signal limit") {
  auto K = Kernel::epanechnikov();
  auto cfg = KernelTestConfig::with_default_jmax(0.1, 1.0);
  std::vector<std::pair<std::int64_t, C>> zero;
  for (std::int64_t j = 0; j <= cfg.j_max; ++j) zero.emplace_back(j, C(0.0));
  auto theta0 = CoefficientVector::hermitian(cfg.j_max, zero);
  SECTION("null mean") {
    const int n = 10000;
    CompensatedSum m, m2;
    for (int r = 0; r < n; ++r) {
      double t = statistic_T1(simulate_observation(theta0, 1.0, derive_seed(Seed{4}, r)), K, cfg);
      m.add(t);
      m2.add(t * t);
    }
    double mean = m.value() / n;
    double se = std::sqrt((m2.value() / n - mean * mean) / n);
    CHECK(std::abs(mean) <= 5.0 * se);
  }
  SECTION("noise-free observation") {
    auto half = zero;
    half[2].second = C(0.3, 0.4);
    auto theta = CoefficientVector::hermitian(cfg.j_max, half);
    const double eps = 1e-3;
    KernelTestConfig c2{cfg.h, eps, cfg.j_max};
    double t1 = statistic_T1(Observation{theta, eps}, K, c2);
    double centering = 0.0;
    for (std::int64_t j = -cfg.j_max; j <= cfg.j_max; ++j) centering += std::pow(khat(K, j * cfg.h), 2);
    double scale = std::sqrt(cfg.h) / (eps * eps * std::sqrt(K.gamma_sq()));
    CHECK_THAT(t1, WithinRel(scale * (T_func(theta, K, cfg.h) - eps * eps * centering), 1e-12));
  }
  SECTION("uniform kernel, h = 1/2, one pair") {
    auto U = Kernel::uniform();
    KernelTestConfig c{0.5, 1.0, 4};
    std::vector<std::pair<std::int64_t, C>> h2;
    for (std::int64_t j = 0; j <= 4; ++j) h2.emplace_back(j, C(0.0));
    h2[1].second = C(0.7, 0.0);
    auto theta = CoefficientVector::hermitian(4, h2);
    double centering = 0.0;
    for (std::int64_t j = -4; j <= 4; ++j) centering += std::pow(khat(U, 0.5 * j), 2);
    double scale = std::sqrt(0.5) / std::sqrt(U.gamma_sq());
    double contribution = 2.0 * std::pow(2.0 / pi, 2) * 0.49 * scale;
    CHECK_THAT(statistic_T1(Observation{theta, 1.0}, U, c) + scale * centering, WithinRel(contribution, 1e-12));
  }
  SECTION("missing partner") {
    auto partial = CoefficientVector::hermitian(cfg.j_max, {{0, C(0.0)}, {1, C(1.0)}});
    CHECK_THROWS_AS(statistic_T1(Observation{partial, 1.0}, K, cfg), BasisError);
  }
}

TEST_CASE("T_func") {
  auto K = Kernel::epanechnikov();
  CHECK(T_func(CoefficientVector::hermitian(3, {}), K, 0.1) == 0.0);
  auto theta = CoefficientVector::hermitian(5, {{1, C(0.5, 0.0)}, {4, C(0.1, -0.3)}});
  CHECK_THAT(T_func(theta, K, 1e-3), WithinAbs(l2_norm_sq(theta), 1e-4));
  auto a = CoefficientVector::hermitian(5, {{1, C(0.5, 0.0)}});
  auto b = CoefficientVector::hermitian(5, {{4, C(0.1, -0.3)}});
  CHECK_THAT(T_func(theta, K, 0.2), WithinRel(T_func(a, K, 0.2) + T_func(b, K, 0.2), 1e-14));

  SECTION("time-domain route") {
    // S(t) = cos(2 pi t) - 0.5 cos(6 pi t), passed to smoothed() as cosine amplitudes.
    for (const auto& Ker : all_kernels()) {
      const double h = 0.15;
      auto td = CoefficientVector::real(3, {{1, 1.0}, {3, -0.5}});
      // cos(2 pi j t) has complex coefficients 1/2 at +-j.
      auto theta_c = CoefficientVector::hermitian(3, {{1, C(0.5)}, {3, C(-0.25)}});
      const int grid = 64;
      double energy = 0.0;
      for (int n = 0; n < grid; ++n) {
        double v = smoothed(Ker, h, td, static_cast<double>(n) / grid);
        energy += v * v / grid;
      }
      CHECK_THAT(energy, WithinAbs(T_func(theta_c, Ker, h), 1e-6));
    }
  }
}

TEST_CASE("kernel power predictions") {
  auto U = Kernel::uniform();
  KernelTestConfig cfg{1e-6, 1.0, 2000000};
  double target_tf = 5.0 * std::sqrt(U.gamma_sq()) / std::sqrt(cfg.h);
  double mag = std::sqrt(target_tf / (2.0 * std::pow(khat(U, cfg.h), 2)));
  auto theta = CoefficientVector::hermitian(1, {{1, C(mag)}});
  auto p = predict_power_kernel(theta, U, cfg, normal_sf(2.0));
  CHECK_THAT(p.B_eps, WithinRel(5.0, 1e-10));
  CHECK(p.regime == Regime::CLT);
  CHECK_THAT(*p.beta_pred, WithinRel(1.3498980316301e-3, 1e-8));
  auto p0 = predict_power_kernel(CoefficientVector::hermitian(1, {}), U, cfg, 0.05);
  CHECK(p0.B_eps == 0.0);
  CHECK_THAT(*p0.beta_pred, WithinRel(0.95, 1e-12));
  CHECK(predict_power_kernel(CoefficientVector::hermitian(1, {}), U, cfg, normal_sf(3.0)).regime == Regime::CLT);
}

TEST_CASE("kernel estimate on a grid") {
  auto K = Kernel::epanechnikov();
  auto cfg = KernelTestConfig::with_default_jmax(0.1, 1.0);
  SECTION("constant") {
    auto y = Observation{CoefficientVector::hermitian(cfg.j_max, {{0, C(1.0)}}), 1.0};
    for (double v : kernel_estimate_grid(y, K, cfg, 32)) CHECK_THAT(v, WithinAbs(1.0, 1e-12));
  }
  SECTION("Parseval") {
    std::vector<std::pair<std::int64_t, C>> dense;
    for (std::int64_t j = 0; j <= cfg.j_max; ++j) dense.emplace_back(j, C(0.0));
    auto y = simulate_observation(CoefficientVector::hermitian(cfg.j_max, dense), 1.0, Seed{8});
    const std::int64_t N = 256;
    auto g = kernel_estimate_grid(y, K, cfg, N);
    double trap = 0.0;
    for (double v : g) trap += v * v / N;
    double spec = 0.0;
    for (std::int64_t j = -cfg.j_max; j <= cfg.j_max; ++j) spec += std::norm(khat(K, j * cfg.h) * y.y.at(j));
    CHECK_THAT(trap, WithinRel(spec, 1e-6));
  }
  SECTION("cosine response") {
    auto y = Observation{CoefficientVector::hermitian(cfg.j_max, {{1, C(0.5)}}), 1.0};
    auto g = kernel_estimate_grid(y, K, cfg, 40);
    double f = khat(K, cfg.h);
    for (int n = 0; n < 40; ++n) CHECK_THAT(g[n], WithinAbs(f * std::cos(2.0 * pi * n / 40.0), 1e-12));
  }
}
