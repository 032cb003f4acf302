#include "initprop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>

#include "initprop/error.hpp"
#include "initprop/rng.hpp"

namespace initprop {

WeightDistribution WeightDistribution::gaussian_with_variance(double variance) {
  return {Kind::gaussian, std::sqrt(variance)};
}

WeightDistribution WeightDistribution::uniform_with_variance(double variance) {
  return {Kind::uniform, std::sqrt(3.0 * variance)};
}

double WeightDistribution::variance() const noexcept {
  return kind == Kind::gaussian ? parameter * parameter : parameter * parameter / 3.0;
}

std::string_view to_string(WeightDistribution::Kind kind) noexcept {
  return kind == WeightDistribution::Kind::gaussian ? "gaussian" : "uniform";
}

std::string_view to_string(InputDistribution kind) noexcept {
  return kind == InputDistribution::normal ? "normal" : "rademacher";
}

void SimConfig::validate() const {
  if (width < 1) throw Error(Errc::invalid_argument, "width must be at least 1");
  if (depth < 1) throw Error(Errc::invalid_argument, "depth must be at least 1");
  if (trials < 1) throw Error(Errc::invalid_argument, "trials must be at least 1");
  if (!(weights.parameter > 0.0) || !std::isfinite(weights.parameter)) {
    throw Error(Errc::invalid_argument, "weight distribution parameter must be positive");
  }
}

std::optional<int> SimReport::overflow_layer() const {
  for (const auto& layer : per_layer) {
    if (layer.overflow) return layer.layer_index;
  }
  return std::nullopt;
}

namespace {

// Draws a full row of weights before the dot product so the draw order is
// independent of the arithmetic.
template <class Dist>
void forward(std::span<const double> x, std::span<double> y, Dist& dist, Engine64& rng,
             std::vector<double>& row) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = dist(rng);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

TrialSummary simulate_trial(const SimConfig& config, int trial) {
  const auto n = static_cast<std::size_t>(config.width);
  TrialSummary summary;
  summary.act.resize(config.depth);
  summary.preact.resize(config.depth);

  Engine64 rng = make_engine(config.seed, static_cast<std::uint64_t>(trial));
  std::vector<double> x(n), y(n), row(n);

  if (config.inputs == InputDistribution::normal) {
    std::normal_distribution<double> input(0.0, 1.0);
    for (auto& v : x) v = input(rng);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (auto& v : x) v = coin(rng) ? 1.0 : -1.0;
  }

  std::normal_distribution<double> gaussian(0.0, config.weights.parameter);
  std::uniform_real_distribution<double> uniform(-config.weights.parameter,
                                                 config.weights.parameter);

  for (int layer = 1; layer <= config.depth; ++layer) {
    summary.act[layer - 1] = CentralMoments::of(x);
    if (!summary.act[layer - 1].finite()) {
      summary.overflow_layer = layer;
      break;
    }

    if (config.weights.kind == WeightDistribution::Kind::gaussian) {
      forward(x, y, gaussian, rng, row);
    } else {
      forward(x, y, uniform, rng, row);
    }
    if (!all_finite(y)) {
      summary.overflow_layer = layer;
      break;
    }
    summary.preact[layer - 1] = CentralMoments::of(y);
    if (!summary.preact[layer - 1].finite()) {
      summary.overflow_layer = layer;
      break;
    }

    if (layer == config.depth) break;
    for (std::size_t i = 0; i < n; ++i) x[i] = config.activation(y[i]);
    if (!all_finite(x)) {
      summary.overflow_layer = layer + 1;
      break;
    }
  }
  return summary;
}

SimReport assemble_report(const SimConfig& config, const std::vector<TrialSummary>& trials) {
  SimReport report;
  report.trials_used = static_cast<int>(trials.size());
  report.per_layer.resize(config.depth);

  int first_overflow = config.depth + 1;
  for (const auto& t : trials) {
    if (t.overflow_layer > 0) {
      first_overflow = std::min(first_overflow, t.overflow_layer);
      report.per_layer[t.overflow_layer - 1].overflow = true;
    }
  }

  for (int m = 1; m <= config.depth; ++m) {
    CentralMoments act, preact;
    for (const auto& t : trials) {
      act.merge(t.act[m - 1]);
      preact.merge(t.preact[m - 1]);
    }
    LayerStats& out = report.per_layer[m - 1];
    out.layer_index = m;
    out.valid = m < first_overflow;
    if (!out.valid) {
      constexpr double nan = std::numeric_limits<double>::quiet_NaN();
      out.act_mean = out.act_variance = out.act_mean_stderr = nan;
      out.preact_mean = out.preact_variance = out.preact_mean_stderr = nan;
      out.preact_skewness = out.preact_excess_kurtosis = nan;
      continue;
    }
    out.samples = preact.count;
    out.act_mean = act.mean;
    out.act_variance = act.variance();
    out.act_mean_stderr = act.standard_error();
    out.preact_mean = preact.mean;
    out.preact_variance = preact.variance();
    out.preact_mean_stderr = preact.standard_error();
    out.preact_skewness = preact.skewness();
    out.preact_excess_kurtosis = preact.excess_kurtosis();
  }
  return report;
}

SimReport run_serial(const SimConfig& config) {
  config.validate();
  std::vector<TrialSummary> trials;
  trials.reserve(config.trials);
  for (int t = 0; t < config.trials; ++t) trials.push_back(simulate_trial(config, t));
  return assemble_report(config, trials);
}

SimReport run(const SimConfig& config) {
  config.validate();
  std::vector<TrialSummary> trials(config.trials);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < config.trials; ++t) {
    try {
      trials[t] = simulate_trial(config, t);
    } catch (...) {
#pragma omp critical(initprop_sim_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return assemble_report(config, trials);
}

std::vector<NormalityDiagnostic> normality_diagnostics(const SimReport& report) {
  std::vector<NormalityDiagnostic> out;
  for (const auto& layer : report.per_layer) {
    if (!layer.valid) break;
    if (layer.samples < kMinNormalitySamples) {
      throw Error(Errc::insufficient_data,
                  "normality diagnostics need at least " + std::to_string(kMinNormalitySamples) +
                      " pre-activation samples per layer (trials x width), got " +
                      std::to_string(layer.samples) + " at layer " +
                      std::to_string(layer.layer_index));
    }
    out.push_back({layer.layer_index, layer.preact_skewness, layer.preact_excess_kurtosis});
  }
  return out;
}

}  // namespace initprop
