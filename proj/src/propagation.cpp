#include "initprop/propagation.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "initprop/error.hpp"

namespace initprop {

void NetworkConfig::validate() const {
  if (width < 1) throw Error(Errc::invalid_argument, "width must be at least 1");
  if (depth < 1) throw Error(Errc::invalid_argument, "depth must be at least 1");
  if (!(weight_variance > 0.0) || !std::isfinite(weight_variance)) {
    throw Error(Errc::invalid_argument, "weight variance must be positive and finite");
  }
}

std::string_view to_string(Engine engine) noexcept {
  switch (engine) {
    case Engine::linearized: return "linearized";
    case Engine::relu_exact: return "relu_exact";
    case Engine::quadrature: return "quadrature";
  }
  return "linearized";
}

Engine parse_engine(std::string_view name) {
  if (name == "linearized") return Engine::linearized;
  if (name == "relu_exact" || name == "relu-exact") return Engine::relu_exact;
  if (name == "quadrature") return Engine::quadrature;
  throw Error(Errc::unknown_name, "unknown engine '" + std::string(name) + "'");
}

InitRecommendation recommend_init(const ActivationSpec& activation, int width) {
  if (width < 1) throw Error(Errc::invalid_argument, "width must be at least 1");
  InitRecommendation rec;
  rec.width = width;
  rec.value_at_zero = activation.value_at_zero();

  if (activation.kind() == ActivationKind::relu) {
    const double target = kReluFixedPointPreactVariance;
    const double mean_sq = target * kReluMeanSqCoeff;
    rec.engine = Engine::relu_exact;
    rec.target_preact_variance = target;
    rec.fixed_point_mean = std::sqrt(mean_sq);
    rec.weight_variance = target / (width * (1.0 + mean_sq));
  } else {
    const auto slope = activation.deriv_at_zero();
    if (!slope) {
      throw Error(Errc::wrong_engine,
                  "activation '" + activation.name() + "' has no derivative at 0");
    }
    if (*slope == 0.0) {
      throw Error(Errc::degenerate_activation,
                  "activation '" + activation.name() + "' has g'(0) = 0");
    }
    const double g0 = activation.value_at_zero();
    rec.engine = Engine::linearized;
    rec.deriv_at_zero = *slope;
    rec.weight_variance = 1.0 / (width * (*slope) * (*slope) * (1.0 + g0 * g0));
  }
  rec.weight_stddev = std::sqrt(rec.weight_variance);
  return rec;
}

LayerMoments with_preactivation(LayerMoments state, const NetworkConfig& config) {
  state.preact_mean = 0.0;
  state.preact_variance = config.gain() * state.second_moment();
  return state;
}

namespace {

LayerMoments next_layer(const LayerMoments& state, const NetworkConfig& config, double mean,
                        double variance) {
  LayerMoments next;
  next.layer_index = state.layer_index + 1;
  next.mean = mean;
  next.variance = variance;
  return with_preactivation(next, config);
}

}  // namespace

LayerMoments linearized_step(const LayerMoments& state, const NetworkConfig& config) {
  const auto slope = config.activation.deriv_at_zero();
  if (!slope) {
    throw Error(Errc::wrong_engine, "linearized engine needs g'(0); '" +
                                        config.activation.name() + "' is not differentiable at 0");
  }
  const double u2 = config.gain() * state.second_moment();
  return next_layer(state, config, config.activation.value_at_zero(), (*slope) * (*slope) * u2);
}

LayerMoments relu_step(const LayerMoments& state, const NetworkConfig& config) {
  if (config.activation.kind() != ActivationKind::relu) {
    throw Error(Errc::wrong_engine,
                "relu_exact engine used with activation '" + config.activation.name() + "'");
  }
  const double u2 = config.gain() * state.second_moment();
  const double mean = std::sqrt(u2) / std::sqrt(2.0 * std::numbers::pi);
  return next_layer(state, config, mean, u2 * kReluVarianceCoeff);
}

LayerMoments quadrature_step(const LayerMoments& state, const NetworkConfig& config,
                             const NormalQuadrature& quadrature) {
  const double u2 = config.gain() * state.second_moment();
  const auto m = quadrature.moments(config.activation, std::sqrt(u2));
  return next_layer(state, config, m.mean, m.variance);
}

LayerMoments quadrature_step(const LayerMoments& state, const NetworkConfig& config, int nodes) {
  if (nodes < kMinQuadratureNodes) {
    throw Error(Errc::invalid_argument,
                "quadrature needs at least " + std::to_string(kMinQuadratureNodes) + " nodes");
  }
  return quadrature_step(state, config, NormalQuadrature(nodes));
}

std::vector<LayerMoments> propagate(const LayerMoments& initial, const NetworkConfig& config,
                                    Engine engine, int quadrature_nodes) {
  config.validate();
  if (initial.layer_index != 1) {
    throw Error(Errc::invalid_argument, "initial state must be layer 1");
  }
  // Engine/activation compatibility is checked up front so depth 1 fails too.
  if (engine == Engine::linearized && !config.activation.deriv_at_zero()) {
    throw Error(Errc::wrong_engine, "linearized engine needs g'(0); '" +
                                        config.activation.name() + "' is not differentiable at 0");
  }
  if (engine == Engine::relu_exact && config.activation.kind() != ActivationKind::relu) {
    throw Error(Errc::wrong_engine,
                "relu_exact engine used with activation '" + config.activation.name() + "'");
  }
  if (engine == Engine::quadrature && quadrature_nodes < kMinQuadratureNodes) {
    throw Error(Errc::invalid_argument,
                "quadrature needs at least " + std::to_string(kMinQuadratureNodes) + " nodes");
  }

  std::optional<NormalQuadrature> quadrature;
  if (engine == Engine::quadrature) quadrature.emplace(quadrature_nodes);

  std::vector<LayerMoments> layers;
  layers.reserve(config.depth);
  layers.push_back(with_preactivation(initial, config));
  while (static_cast<int>(layers.size()) < config.depth) {
    const LayerMoments& current = layers.back();
    LayerMoments next;
    try {
      switch (engine) {
        case Engine::linearized: next = linearized_step(current, config); break;
        case Engine::relu_exact: next = relu_step(current, config); break;
        case Engine::quadrature: next = quadrature_step(current, config, *quadrature); break;
      }
    } catch (const Error& e) {
      if (e.code() != Errc::numeric_domain) throw;
      throw Error(Errc::numeric_overflow,
                  "non-finite moments at layer " + std::to_string(current.layer_index + 1) +
                      ": " + e.what(),
                  current.layer_index + 1);
    }
    if (!std::isfinite(next.mean) || !std::isfinite(next.variance) ||
        !std::isfinite(next.preact_variance)) {
      throw Error(Errc::numeric_overflow,
                  "non-finite moments at layer " + std::to_string(next.layer_index),
                  next.layer_index);
    }
    layers.push_back(next);
  }
  return layers;
}

ReluDecay relu_decay_closed_form(int m, LayerNumbering numbering) {
  const int first = numbering == LayerNumbering::input ? 2 : 1;
  if (m < first) {
    throw Error(Errc::invalid_argument, "closed-form ReLU decay starts at layer " +
                                            std::to_string(first) + ", got " + std::to_string(m));
  }
  const double scale = std::ldexp(1.0, -(m - first));
  return {kReluMeanSqCoeff * scale, kReluVarianceCoeff * scale};
}

}  // namespace initprop
