#pragma once

#include <string_view>
#include <vector>

#include "initprop/activations.hpp"
#include "initprop/quadrature.hpp"

namespace initprop {

/// Moments of the inputs x_m to layer m and of its pre-activations y_m = W_m x_m.
struct LayerMoments {
  int layer_index = 1;
  double mean = 0.0;             // μ_m
  double variance = 1.0;         // s_m²
  double preact_mean = 0.0;      // r_m, always 0 for zero-mean weights
  double preact_variance = 0.0;  // u_m² = N v² (s_m² + μ_m²)

  double second_moment() const noexcept { return variance + mean * mean; }
};

struct NetworkConfig {
  int width = 1;                 // N
  int depth = 1;                 // M
  double weight_variance = 1.0;  // v²
  ActivationSpec activation = builtin(ActivationKind::identity);

  /// N v², the gain applied to E[x²] to obtain the pre-activation variance.
  double gain() const noexcept { return width * weight_variance; }
  void validate() const;
};

enum class Engine { linearized, relu_exact, quadrature };

std::string_view to_string(Engine engine) noexcept;
Engine parse_engine(std::string_view name);

/// The ReLU coefficients: E[relu(uZ)]² = u²/(2π) and Var = u² (1/2 − 1/(2π)).
inline constexpr double kReluMeanSqCoeff = 0.15915494309189535;      // 1/(2π)
inline constexpr double kReluVarianceCoeff = 0.34084505690810465;    // 1/2 − 1/(2π)
/// Pre-activation variance that keeps s² = 1 under ReLU: 1 / (1/2 − 1/(2π)).
inline constexpr double kReluFixedPointPreactVariance = 1.0 / kReluVarianceCoeff;

inline constexpr int kDefaultQuadratureNodes = 128;
inline constexpr int kMinQuadratureNodes = 20;

struct InitRecommendation {
  double weight_variance = 0.0;
  double weight_stddev = 0.0;
  Engine engine = Engine::linearized;
  int width = 0;
  // linearized derivation
  double value_at_zero = 0.0;
  double deriv_at_zero = 0.0;
  // relu_exact derivation
  double target_preact_variance = 0.0;
  double fixed_point_mean = 0.0;
};

/// Weight variance keeping the layer-to-layer variance at 1.
///
/// Differentiable activations: v² = 1 / (N g'(0)² (1 + g(0)²)).
/// ReLU: the fixed point u² = 1/(1/2 − 1/(2π)) with μ² = u²/(2π), solved from
/// u² = N v² (1 + μ²). This reduces to exactly 2/N.
InitRecommendation recommend_init(const ActivationSpec& activation, int width);

/// Fills preact_mean/preact_variance of `state` from its own mean and variance.
LayerMoments with_preactivation(LayerMoments state, const NetworkConfig& config);

/// First-order Taylor step: μ' = g(0), s'² = g'(0)² u².
LayerMoments linearized_step(const LayerMoments& state, const NetworkConfig& config);

/// Exact ReLU step for Gaussian pre-activations: μ' = u/√(2π), s'² = u²(1/2 − 1/(2π)).
LayerMoments relu_step(const LayerMoments& state, const NetworkConfig& config);

/// Quadrature oracle: μ' = E[g(uZ)], s'² = Var[g(uZ)], no Taylor expansion.
LayerMoments quadrature_step(const LayerMoments& state, const NetworkConfig& config,
                             int nodes = kDefaultQuadratureNodes);
LayerMoments quadrature_step(const LayerMoments& state, const NetworkConfig& config,
                             const NormalQuadrature& quadrature);

/// config.depth entries; entry m is the result of m−1 steps from `initial`.
/// Throws Error(numeric_overflow) naming the first non-finite layer.
std::vector<LayerMoments> propagate(const LayerMoments& initial, const NetworkConfig& config,
                                    Engine engine, int quadrature_nodes = kDefaultQuadratureNodes);

/// How closed-form layer numbers relate to the propagation table.
///  - input: layer 1 is the raw (μ=0, s²=1) input, as in propagate().
///  - relu_output: layer m is the output of the m-th ReLU layer, so the raw
///    input is layer 0. This is the numbering behind the quoted values
///    s₂₂² ≈ 1.62e-7 and s₃₀² ≈ 6.33e-10.
enum class LayerNumbering { input, relu_output };

struct ReluDecay {
  double mean_sq = 0.0;
  double variance = 0.0;
};

/// Moments of a ReLU network with N v² = 1 started from (μ=0, s²=1).
/// Every layer halves E[x²]: μ_m² = (1/(2π)) 2^{-k}, s_m² = (1/2 − 1/(2π)) 2^{-k}
/// with k = m−2 (input numbering, m ≥ 2) or k = m−1 (relu_output, m ≥ 1).
ReluDecay relu_decay_closed_form(int m, LayerNumbering numbering = LayerNumbering::input);

}  // namespace initprop
