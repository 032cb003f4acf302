#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace initprop {

enum class ActivationKind { identity, tanh, sigmoid, relu, custom };

std::string_view to_string(ActivationKind kind) noexcept;

/// Activation function g together with the local data g(0), g'(0) used by the
/// linearized moment recursion. Immutable once built.
class ActivationSpec {
 public:
  using Evaluator = std::function<double(double)>;

  ActivationSpec(ActivationKind kind, std::string label, double value_at_zero,
                 std::optional<double> deriv_at_zero, Evaluator evaluator,
                 std::vector<double> kinks = {});

  ActivationKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return label_; }
  double value_at_zero() const noexcept { return value_at_zero_; }
  /// Empty when g is not differentiable at 0 (relu).
  std::optional<double> deriv_at_zero() const noexcept { return deriv_at_zero_; }
  /// Abscissae where g is continuous but not smooth. The quadrature oracle
  /// splits its integration range at these points.
  std::span<const double> kinks() const noexcept { return kinks_; }

  double operator()(double x) const { return evaluator_(x); }

 private:
  ActivationKind kind_;
  std::string label_;
  double value_at_zero_;
  std::optional<double> deriv_at_zero_;
  Evaluator evaluator_;
  std::vector<double> kinks_;
};

inline constexpr double kDefaultDifferenceStep = 1e-5;

/// Built-in activation by name: identity, tanh, sigmoid or relu.
ActivationSpec builtin(std::string_view name);
ActivationSpec builtin(ActivationKind kind);

/// Wraps an arbitrary scalar function; g'(0) comes from a central difference.
ActivationSpec custom(ActivationSpec::Evaluator evaluator,
                      double step = kDefaultDifferenceStep,
                      std::string label = "custom",
                      std::vector<double> kinks = {});

/// Piecewise-linear activation through the given (x, g(x)) samples, extended
/// linearly beyond the end samples. Interior abscissae are reported as kinks.
ActivationSpec from_table(std::vector<std::pair<double, double>> samples,
                          std::string label = "custom",
                          double step = kDefaultDifferenceStep);

/// Central-difference derivative (g(h) - g(-h)) / 2h at 0.
double central_difference_at_zero(const ActivationSpec::Evaluator& g, double step);

}  // namespace initprop
