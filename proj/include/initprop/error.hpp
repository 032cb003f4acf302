#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace initprop {

enum class Errc {
  unknown_name,
  invalid_argument,
  numeric_domain,
  degenerate_activation,
  wrong_engine,
  numeric_overflow,
  insufficient_data,
};

const char* to_string(Errc code) noexcept;

// Single exception type for the library. `layer()` is set for failures that
// happen while walking a network (overflow during propagation or simulation).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<int> layer = std::nullopt)
      : std::runtime_error(what), code_(code), layer_(layer) {}

  Errc code() const noexcept { return code_; }
  std::optional<int> layer() const noexcept { return layer_; }

 private:
  Errc code_;
  std::optional<int> layer_;
};

}  // namespace initprop
