#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "initprop/activations.hpp"
#include "initprop/stats.hpp"

namespace initprop {

struct WeightDistribution {
  enum class Kind { gaussian, uniform };

  Kind kind = Kind::gaussian;
  /// gaussian: stddev v; uniform: half-width a of U[-a, a].
  double parameter = 1.0;

  static WeightDistribution gaussian_with_variance(double variance);
  static WeightDistribution uniform_with_variance(double variance);

  double variance() const noexcept;
};

std::string_view to_string(WeightDistribution::Kind kind) noexcept;

enum class InputDistribution { normal, rademacher };

std::string_view to_string(InputDistribution kind) noexcept;

struct SimConfig {
  int width = 1;
  int depth = 1;
  WeightDistribution weights;
  ActivationSpec activation = builtin(ActivationKind::identity);
  int trials = 1;
  std::uint64_t seed = 0;
  InputDistribution inputs = InputDistribution::normal;

  void validate() const;
};

struct LayerStats {
  int layer_index = 1;
  double act_mean = 0.0;
  double act_variance = 0.0;
  double act_mean_stderr = 0.0;
  double preact_mean = 0.0;
  double preact_variance = 0.0;
  double preact_mean_stderr = 0.0;
  double preact_skewness = 0.0;
  double preact_excess_kurtosis = 0.0;
  std::int64_t samples = 0;
  /// A trial produced non-finite values, or moments that overflow, at this
  /// layer.
  bool overflow = false;
  /// False at and after the first overflowing layer; statistics are NaN there.
  bool valid = true;
};

struct SimReport {
  std::vector<LayerStats> per_layer;
  int trials_used = 0;

  /// First layer flagged with overflow, if any.
  std::optional<int> overflow_layer() const;
};

/// Sufficient statistics of one trial, per layer.
struct TrialSummary {
  std::vector<CentralMoments> act;
  std::vector<CentralMoments> preact;
  /// First layer (1-based) where a non-finite value appeared, or 0.
  int overflow_layer = 0;
};

/// One forward pass: x_1 drawn from `config.inputs`, then for each layer a
/// fresh weight matrix with y_m = W_m x_m and x_{m+1} = g(y_m). Weights are
/// drawn row by row from the trial's own stream seeded by (seed, trial).
TrialSummary simulate_trial(const SimConfig& config, int trial);

/// Pools trial summaries in trial order.
SimReport assemble_report(const SimConfig& config, const std::vector<TrialSummary>& trials);

/// Monte Carlo forward-pass statistics, trials run in parallel with OpenMP.
/// The result is bit-identical to run_serial for every thread count.
SimReport run(const SimConfig& config);

/// Reference implementation executing trials one after another.
SimReport run_serial(const SimConfig& config);

struct NormalityDiagnostic {
  int layer_index = 1;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

inline constexpr std::int64_t kMinNormalitySamples = 10'000;

/// Pooled pre-activation skewness and excess kurtosis per valid layer.
/// Throws Error(insufficient_data) below kMinNormalitySamples samples per layer.
std::vector<NormalityDiagnostic> normality_diagnostics(const SimReport& report);

}  // namespace initprop
