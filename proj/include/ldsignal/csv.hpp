#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ldsignal {

// Shortest round-trip representation; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);
std::string format_optional(const std::optional<double>& x);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  static std::string quote(const std::string& cell);

 private:
  std::ostream& out_;
  std::size_t width_;
};

}  // namespace ldsignal
