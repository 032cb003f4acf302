#include "initprop/activations.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "initprop/error.hpp"

namespace initprop {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::unknown_name: return "unknown name";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::numeric_domain: return "numeric domain error";
    case Errc::degenerate_activation: return "degenerate activation";
    case Errc::wrong_engine: return "wrong engine";
    case Errc::numeric_overflow: return "numeric overflow";
    case Errc::insufficient_data: return "insufficient data";
  }
  return "error";
}

std::string_view to_string(ActivationKind kind) noexcept {
  switch (kind) {
    case ActivationKind::identity: return "identity";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::relu: return "relu";
    case ActivationKind::custom: return "custom";
  }
  return "custom";
}

ActivationSpec::ActivationSpec(ActivationKind kind, std::string label, double value_at_zero,
                               std::optional<double> deriv_at_zero, Evaluator evaluator,
                               std::vector<double> kinks)
    : kind_(kind),
      label_(std::move(label)),
      value_at_zero_(value_at_zero),
      deriv_at_zero_(deriv_at_zero),
      evaluator_(std::move(evaluator)),
      kinks_(std::move(kinks)) {
  std::sort(kinks_.begin(), kinks_.end());
  kinks_.erase(std::unique(kinks_.begin(), kinks_.end()), kinks_.end());
}

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

ActivationSpec builtin(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::identity:
      return {kind, "identity", 0.0, 1.0, [](double x) { return x; }};
    case ActivationKind::tanh:
      return {kind, "tanh", 0.0, 1.0, [](double x) { return std::tanh(x); }};
    case ActivationKind::sigmoid:
      return {kind, "sigmoid", 0.5, 0.25, logistic};
    case ActivationKind::relu:
      return {kind, "relu", 0.0, std::nullopt, [](double x) { return x > 0.0 ? x : 0.0; },
              {0.0}};
    case ActivationKind::custom:
      break;
  }
  throw Error(Errc::unknown_name, "custom activations have no built-in definition");
}

ActivationSpec builtin(std::string_view name) {
  for (auto kind : {ActivationKind::identity, ActivationKind::tanh, ActivationKind::sigmoid,
                    ActivationKind::relu}) {
    if (name == to_string(kind)) return builtin(kind);
  }
  throw Error(Errc::unknown_name, "unknown activation '" + std::string(name) +
                                      "' (expected identity, tanh, sigmoid or relu)");
}

double central_difference_at_zero(const ActivationSpec::Evaluator& g, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(Errc::invalid_argument, "difference step must be positive and finite");
  }
  const double hi = g(step);
  const double lo = g(-step);
  if (!std::isfinite(hi) || !std::isfinite(lo)) {
    throw Error(Errc::numeric_domain, "activation is not finite near 0");
  }
  return (hi - lo) / (2.0 * step);
}

ActivationSpec custom(ActivationSpec::Evaluator evaluator, double step, std::string label,
                      std::vector<double> kinks) {
  if (!evaluator) throw Error(Errc::invalid_argument, "custom activation needs an evaluator");
  const double at_zero = evaluator(0.0);
  if (!std::isfinite(at_zero)) {
    throw Error(Errc::numeric_domain, "activation is not finite at 0");
  }
  const double slope = central_difference_at_zero(evaluator, step);
  return {ActivationKind::custom, std::move(label), at_zero, slope, std::move(evaluator),
          std::move(kinks)};
}

ActivationSpec from_table(std::vector<std::pair<double, double>> samples, std::string label,
                          double step) {
  if (samples.size() < 2) {
    throw Error(Errc::invalid_argument, "activation table needs at least two samples");
  }
  std::sort(samples.begin(), samples.end());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second)) {
      throw Error(Errc::numeric_domain, "activation table contains non-finite values");
    }
    if (i > 0 && samples[i].first == samples[i - 1].first) {
      throw Error(Errc::invalid_argument, "activation table has duplicate abscissae");
    }
  }

  std::vector<double> kinks;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) kinks.push_back(samples[i].first);

  auto table = std::make_shared<const std::vector<std::pair<double, double>>>(std::move(samples));
  auto interpolate = [table](double x) {
    const auto& pts = *table;
    // Segment [lo, lo+1] containing x; the end segments extend to infinity.
    auto it = std::upper_bound(pts.begin(), pts.end(), x,
                               [](double v, const auto& p) { return v < p.first; });
    std::size_t hi = static_cast<std::size_t>(it - pts.begin());
    hi = std::clamp<std::size_t>(hi, 1, pts.size() - 1);
    const auto& [x0, y0] = pts[hi - 1];
    const auto& [x1, y1] = pts[hi];
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  };
  return custom(std::move(interpolate), step, std::move(label), std::move(kinks));
}

}  // namespace initprop
