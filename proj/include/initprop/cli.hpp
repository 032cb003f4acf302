#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace initprop::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kNumeric = 3 };

using Cell = std::variant<double, std::int64_t, std::string>;

/// A command's output: one rectangular table plus scalar metadata.
/// CSV repeats the metadata as trailing constant columns so that the file
/// stays a single table with a header row; JSON keeps it as an object.
struct Document {
  std::string command;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> metadata;

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

/// Formats a double for CSV output with 17 significant digits.
std::string format_number(double value);

/// Parses a weight-variance expression: a product/quotient of numbers and the
/// symbols `xavier` (1/N), `he` (exact ReLU fixed point, 2/N) and
/// `recommended` (the activation's own recommendation), e.g. "xavier/3".
double parse_scaled_value(const std::string& text, double xavier, double he, double recommended);

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace initprop::cli
