#include "initprop/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "initprop/error.hpp"

namespace initprop {

namespace {

constexpr int kMaxNewton = 100;
constexpr int kMaxHermiteNodes = 600;

void require_nodes(int n) {
  if (n < 1) throw Error(Errc::invalid_argument, "quadrature needs at least one node");
}

struct HermitePair {
  double value;     // ψ_n(x)
  double previous;  // ψ_{n-1}(x)
};

// Orthonormal Hermite functions ψ_j(x) = p_j(x) e^{-x²/2}, where p_j is
// orthonormal against e^{-x²}. The damping keeps the recurrence finite for
// large n and x.
HermitePair hermite_functions(int n, double x) {
  double p1 = std::exp(-0.5 * x * x) / std::pow(std::numbers::pi, 0.25);
  double p2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = x * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
  }
  return {p1, p2};
}

}  // namespace

// Positive roots are bracketed by a sign scan finer than the smallest root
// gap, bisected to full precision and polished with one Newton step.
// Nodes are then mapped z = sqrt(2) x and weights divided by sqrt(pi).
QuadratureRule gauss_hermite_normal(int n) {
  require_nodes(n);
  if (n > kMaxHermiteNodes) {
    throw Error(Errc::invalid_argument,
                "Gauss-Hermite rule supports at most " + std::to_string(kMaxHermiteNodes) + " nodes");
  }
  const double edge = std::sqrt(2.0 * n + 1.0);
  const double step = std::numbers::pi / edge / 16.0;
  std::vector<double> roots;
  roots.reserve(n / 2);
  double a = (n % 2 == 1) ? 0.5 * step : 0.0;
  double fa = hermite_functions(n, a).value;
  while (static_cast<int>(roots.size()) < n / 2 && a < edge + 1.0) {
    const double b = a + step;
    const double fb = hermite_functions(n, b).value;
    if ((fa < 0.0) != (fb < 0.0)) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < kMaxNewton && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = hermite_functions(n, mid).value;
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      double x = 0.5 * (lo + hi);
      const auto h = hermite_functions(n, x);
      x -= h.value / (std::sqrt(2.0 * n) * h.previous);
      roots.push_back(x);
    }
    a = b;
    fa = fb;
  }
  if (static_cast<int>(roots.size()) != n / 2) {
    throw Error(Errc::numeric_domain, "Gauss-Hermite root search failed for n=" + std::to_string(n));
  }

  // Weight against exp(-x²): 2 / p_n'(x)², p_n' = sqrt(2n) p_{n-1}.
  const auto weight = [n](double x) {
    const double d = std::sqrt(2.0 * n) * hermite_functions(n, x).previous;
    return std::exp(std::log(2.0) - x * x - 2.0 * std::log(std::abs(d))) /
           std::sqrt(std::numbers::pi);
  };
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n / 2; ++i) {
    const double x = roots[i];
    const double w = weight(x);
    rule.nodes[n / 2 - 1 - i] = -std::numbers::sqrt2 * x;
    rule.nodes[n - n / 2 + i] = std::numbers::sqrt2 * x;
    rule.weights[n / 2 - 1 - i] = w;
    rule.weights[n - n / 2 + i] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[n / 2] = 0.0;
    rule.weights[n / 2] = weight(0.0);
  }
  return rule;
}

QuadratureRule gauss_legendre(int n) {
  require_nodes(n);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int it = 0; it < kMaxNewton; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      derivative = n * (z * p1 - p2) / (z * z - 1.0);
      const double previous = z;
      z = previous - p1 / derivative;
      if (std::abs(z - previous) <= 1e-15) break;
    }
    const double weight = 2.0 / ((1.0 - z * z) * derivative * derivative);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = weight;
    rule.weights[n - 1 - i] = weight;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

NormalQuadrature::NormalQuadrature(int nodes)
    : nodes_(nodes), hermite_(gauss_hermite_normal(nodes)), legendre_(gauss_legendre(nodes)) {}

TransformedMoments NormalQuadrature::moments(const ActivationSpec& g, double u) const {
  if (!(u >= 0.0) || !std::isfinite(u)) {
    throw Error(Errc::numeric_domain, "pre-activation stddev must be finite and nonnegative");
  }
  TransformedMoments out;
  if (u == 0.0) {
    out.mean = g(0.0);
    out.second_moment = out.mean * out.mean;
    return out;
  }

  // (abscissa z, weight against the standard normal measure)
  std::vector<std::pair<double, double>> points;
  if (u <= kHermiteMaxStddev && g.kinks().empty()) {
    points.reserve(hermite_.size());
    for (std::size_t i = 0; i < hermite_.size(); ++i) {
      points.emplace_back(hermite_.nodes[i], hermite_.weights[i]);
    }
  } else {
    std::vector<double> cuts{-kTruncation, 0.0, kTruncation};
    for (double k : g.kinks()) cuts.push_back(k / u);
    std::ranges::sort(cuts);
    const auto tail = std::ranges::unique(cuts);
    cuts.erase(tail.begin(), tail.end());
    std::erase_if(cuts, [](double z) { return z < -kTruncation || z > kTruncation; });
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    points.reserve((cuts.size() - 1) * legendre_.size());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double mid = 0.5 * (cuts[c + 1] + cuts[c]);
      const double half = 0.5 * (cuts[c + 1] - cuts[c]);
      for (std::size_t i = 0; i < legendre_.size(); ++i) {
        const double z = mid + half * legendre_.nodes[i];
        points.emplace_back(z, half * legendre_.weights[i] * inv_sqrt_2pi * std::exp(-0.5 * z * z));
      }
    }
  }

  double mean = 0.0;
  double second = 0.0;
  std::vector<double> values(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    values[i] = g(u * points[i].first);
    mean += points[i].second * values[i];
    second += points[i].second * values[i] * values[i];
  }
  double centered = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = values[i] - mean;
    centered += points[i].second * d * d;
  }
  if (!std::isfinite(mean) || !std::isfinite(second) || !std::isfinite(centered)) {
    throw Error(Errc::numeric_domain,
                "quadrature sums are not finite at u=" + std::to_string(u));
  }
  out.mean = mean;
  out.second_moment = second;
  out.variance = centered;
  return out;
}

}  // namespace initprop
