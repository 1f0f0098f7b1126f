#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>

namespace ldsignal {

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  void add(const CompensatedSum& o) {
    add(o.sum);
    add(o.carry);
  }
  double value() const { return sum + carry; }
};

// ceil(x) that ignores a relative excess of ~1e-12, so 10000.000000001 -> 10000.
inline std::int64_t ceil_tolerant(double x) {
  double c = std::ceil(x);
  if (c - x > 1.0 - 1e-12 * std::max(1.0, std::abs(x))) c -= 1.0;
  return static_cast<std::int64_t>(c);
}

}  // namespace ldsignal
