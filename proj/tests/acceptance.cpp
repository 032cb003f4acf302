// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "initprop/activations.hpp"
#include "initprop/cli.hpp"
#include "initprop/density.hpp"
#include "initprop/propagation.hpp"
#include "initprop/simulator.hpp"

using namespace initprop;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Appends a failure note and clears the pass flag when `ok` is false.
void expect(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

LayerMoments unit_input() { return LayerMoments{}; }

SimConfig sim(const char* activation, int width, int depth, WeightDistribution weights,
              int trials, std::uint64_t seed) {
  SimConfig c;
  c.width = width;
  c.depth = depth;
  c.weights = weights;
  c.activation = builtin(activation);
  c.trials = trials;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------

Outcome init_golden_values() {
  Outcome o;
  double worst_sig = 0.0, worst_relu = 0.0, worst_tanh = 0.0;
  for (int n : {10, 100, 784}) {
    const double root = std::sqrt(static_cast<double>(n));
    const auto t = recommend_init(builtin("tanh"), n);
    const auto s = recommend_init(builtin("sigmoid"), n);
    const auto r = recommend_init(builtin("relu"), n);
    worst_tanh = std::max(worst_tanh, rel(t.weight_stddev, 1.0 / root));
    worst_sig = std::max(worst_sig, rel(s.weight_stddev, 3.5777 / root));
    worst_relu = std::max(worst_relu, rel(r.weight_variance, 2.0 / n));
    expect(o, rel(t.weight_stddev, 1.0 / root) <= 1e-15, fmt("tanh N=%d v off", n));
    expect(o, rel(s.weight_stddev, 3.5777 / root) < 0.01, fmt("sigmoid N=%d", n));
    expect(o, rel(r.weight_variance, 2.0 / n) < 0.02, fmt("relu N=%d", n));
  }
  if (o.pass) {
    o.detail = fmt("max rel err tanh %.1e, sigmoid %.2e (tol 1e-2), relu %.1e (tol 2e-2)",
                   worst_tanh, worst_sig, worst_relu);
  }
  return o;
}

Outcome relu_decay_golden_values() {
  Outcome o;
  const NetworkConfig xavier{512, 31, 1.0 / 512, builtin("relu")};
  const auto layers = propagate(unit_input(), xavier, Engine::relu_exact);
  // relu-output numbering: row m is m ReLU layers past the raw input.
  const double s22 = relu_decay_closed_form(22, LayerNumbering::relu_output).variance;
  const double s30 = relu_decay_closed_form(30, LayerNumbering::relu_output).variance;
  expect(o, rel(s22, 1.62e-7) < 0.01, fmt("closed-form s22^2 = %.4e", s22));
  expect(o, rel(s30, 6.33e-10) < 0.01, fmt("closed-form s30^2 = %.4e", s30));
  expect(o, rel(layers[22].variance, s22) < 1e-12, "iterated relu_step disagrees at 22");
  expect(o, rel(layers[30].variance, s30) < 1e-12, "iterated relu_step disagrees at 30");
  if (o.pass) {
    o.detail = fmt("s22^2 = %.4e (rel %.1e), s30^2 = %.4e (rel %.1e), tol 1e-2", s22,
                   rel(s22, 1.62e-7), s30, rel(s30, 6.33e-10));
  }
  return o;
}

Outcome oracle_agreement() {
  Outcome o;
  const NormalQuadrature q(128);
  double worst_relu = 0.0;
  for (double u : {0.1, 1.0, std::sqrt(3.0), 5.0}) {
    const NetworkConfig cfg{1, 2, u * u, builtin("relu")};
    const auto a = relu_step(unit_input(), cfg);
    const auto b = quadrature_step(unit_input(), cfg, q);
    const double gap = std::max(std::abs(a.mean - b.mean), std::abs(a.variance - b.variance));
    worst_relu = std::max(worst_relu, gap);
    expect(o, gap < 1e-9, fmt("relu u=%g gap %.2e", u, gap));
  }
  double worst_lin = 0.0;
  for (const char* name : {"tanh", "sigmoid"}) {
    const auto g = builtin(name);
    const double g0 = g.value_at_zero();
    const double s2 = 1e-4;
    LayerMoments start;
    start.mean = g0;
    start.variance = s2;
    // N v² scaled so that the pre-activation variance equals s².
    const NetworkConfig cfg{1, 2, s2 / (s2 + g0 * g0), g};
    const double gap = rel(linearized_step(start, cfg).variance, quadrature_step(start, cfg, q).variance);
    worst_lin = std::max(worst_lin, gap);
    expect(o, gap < 0.01, fmt("%s linearized gap %.2e", name, gap));
  }
  if (o.pass) {
    o.detail = fmt("relu max gap %.1e (tol 1e-9), linearized vs quadrature max rel %.1e (tol 1e-2)",
                   worst_relu, worst_lin);
  }
  return o;
}

Outcome monte_carlo_vs_theory() {
  Outcome o;
  const int n = 512, depth = 10;
  const auto report =
      run(sim("relu", n, depth, WeightDistribution::gaussian_with_variance(1.0 / n), 200, 2017));
  const auto theory =
      propagate(unit_input(), NetworkConfig{n, depth, 1.0 / n, builtin("relu")}, Engine::relu_exact);
  double worst_var = 0.0, worst_mean = 0.0;
  for (int m = 2; m <= depth; ++m) {
    const auto& s = report.per_layer[m - 1];
    const double ev = rel(s.act_variance, theory[m - 1].variance);
    const double em = rel(s.act_mean, theory[m - 1].mean);
    worst_var = std::max(worst_var, ev);
    worst_mean = std::max(worst_mean, em);
    expect(o, ev < 0.10, fmt("layer %d variance rel err %.3f", m, ev));
    expect(o, em < 0.10, fmt("layer %d mean rel err %.3f", m, em));
  }
  if (o.pass) {
    o.detail = fmt("max rel err variance %.4f, mean %.4f over m=2..10 (tol 0.10)", worst_var,
                   worst_mean);
  }
  return o;
}

SimReport he_report() {
  const int n = 512;
  const double v2 = recommend_init(builtin("relu"), n).weight_variance;
  return run(sim("relu", n, 10, WeightDistribution::gaussian_with_variance(v2), 200, 2018));
}

Outcome he_fixed_point(const SimReport& report) {
  Outcome o;
  const int n = 512;
  const double v2 = recommend_init(builtin("relu"), n).weight_variance;
  const auto theory =
      propagate(unit_input(), NetworkConfig{n, 10, v2, builtin("relu")}, Engine::relu_exact);
  std::string values;
  bool ok = true;
  for (const auto& s : report.per_layer) {
    values += fmt("%s%.3f", values.empty() ? "" : " ", s.act_variance);
    if (!(s.act_variance >= 0.9 && s.act_variance <= 1.1)) ok = false;
  }
  o.pass = ok;
  o.detail = "act_variance by layer [" + values + "], required in [0.9, 1.1]";
  if (!ok) {
    o.detail += fmt("; relu_exact theory from (mu=0, s^2=1) gives s_m^2 = %.4f = 1 - 1/pi for m>=2",
                    theory.back().variance);
  }
  return o;
}

Outcome normality(const SimReport& report) {
  Outcome o;
  double worst_skew = 0.0, worst_kurt = 0.0;
  for (const auto& d : normality_diagnostics(report)) {
    worst_skew = std::max(worst_skew, std::abs(d.skewness));
    worst_kurt = std::max(worst_kurt, std::abs(d.excess_kurtosis));
    expect(o, std::abs(d.skewness) < 0.1, fmt("layer %d skewness %.3f", d.layer_index, d.skewness));
    expect(o, std::abs(d.excess_kurtosis) < 0.3,
           fmt("layer %d excess kurtosis %.3f", d.layer_index, d.excess_kurtosis));
  }
  if (o.pass) {
    o.detail = fmt("max |skewness| %.4f (tol 0.1), max |excess kurtosis| %.4f (tol 0.3)",
                   worst_skew, worst_kurt);
  } else {
    // Per-trial pre-activation variance scatters by ~2/N + 5(m-1)/N (relative),
    // so the pooled sample is a Gaussian scale mixture with excess kurtosis 3c.
    const int n = 512;
    double c = 2.0 / n;
    for (std::size_t m = 1; m < report.per_layer.size(); ++m) c = (1.0 + c) * (1.0 + 5.0 / n) - 1.0;
    o.detail += fmt("; finite-width mixture predicts excess kurtosis %.3f at layer %zu", 3.0 * c,
                    report.per_layer.size());
  }
  return o;
}

Outcome tanh_saturation_chain() {
  Outcome o;
  const int n = 512, depth = 8;
  const auto weights = WeightDistribution::uniform_with_variance(1.0 / (3.0 * n));
  const auto quad = propagate(unit_input(),
                              NetworkConfig{n, depth, weights.variance(), builtin("tanh")},
                              Engine::quadrature);
  for (int m = 2; m <= depth; ++m) {
    const double u_prev = std::sqrt(quad[m - 2].preact_variance);
    const double u = std::sqrt(quad[m - 1].preact_variance);
    expect(o, u < u_prev, fmt("u_%d not below u_%d", m, m - 1));
    // Logarithms: the fraction itself underflows to 0 in the deepest layers.
    expect(o, log_saturation_fraction(u, 0.9) < log_saturation_fraction(u_prev, 0.9),
           fmt("saturation fraction not decreasing at layer %d", m));
    expect(o, saturation_fraction(u, 0.9) <= saturation_fraction(u_prev, 0.9),
           fmt("saturation fraction increases at layer %d", m));
  }
  const auto report = run(sim("tanh", n, depth, weights, 200, 2019));
  double worst = 0.0;
  for (int m = 1; m <= depth; ++m) {
    const double e = rel(report.per_layer[m - 1].act_variance, quad[m - 1].variance);
    worst = std::max(worst, e);
    expect(o, e < 0.05, fmt("layer %d MC vs quadrature rel err %.3f", m, e));
  }
  if (o.pass) {
    o.detail = fmt("u_1 = %.4f > ... > u_8 = %.3e, saturation(u_1) = %.3e, MC max rel err %.4f "
                   "(tol 0.05)",
                   std::sqrt(quad.front().preact_variance), std::sqrt(quad.back().preact_variance),
                   saturation_fraction(std::sqrt(quad.front().preact_variance), 0.9), worst);
  }
  return o;
}

Outcome density_shape() {
  Outcome o;
  double worst = 0.0;
  for (double u : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    const double gap = std::abs(pdf_integral(u) - 1.0);
    worst = std::max(worst, gap);
    expect(o, gap <= 1e-4, fmt("u=%g integral off by %.2e", u, gap));
  }
  const auto narrow = curve(0.2, 1001);
  const auto peaks = local_maxima(narrow);
  expect(o, peaks.size() == 1 && narrow.points[peaks[0]].y == 0.0, "u=0.2 not unimodal at 0");
  const auto wide = curve(2.0, 1001);
  const auto modes = local_maxima(wide);
  const auto troughs = local_minima(wide);
  expect(o,
         modes.size() == 2 && wide.points[modes[0]].y < -0.99 && wide.points[modes[1]].y > 0.99 &&
             troughs.size() == 1 && wide.points[troughs[0]].y == 0.0,
         "u=2 not bimodal near +-1 with minimum at 0");
  if (o.pass) {
    o.detail = fmt("max |integral - 1| %.1e (tol 1e-4); u=0.2 one mode at 0; u=2 modes at %.6f, %.6f",
                   worst, wide.points[modes[0]].y, wide.points[modes[1]].y);
  }
  return o;
}

Outcome sigmoid_signal_collapse() {
  Outcome o;
  const int n = 100, depth = 10;
  const auto g = builtin("sigmoid");
  const auto xavier = propagate(unit_input(), NetworkConfig{n, depth, 1.0 / n, g}, Engine::quadrature);
  const double v2 = recommend_init(g, n).weight_variance;
  const auto tuned = propagate(unit_input(), NetworkConfig{n, depth, v2, g}, Engine::quadrature);
  const double collapsed = xavier.back().variance;
  const double factor = xavier.front().variance / collapsed;
  expect(o, factor >= 10.0, fmt("Xavier collapse only %.2fx", factor));
  double lowest = tuned.front().variance;
  for (const auto& m : tuned) {
    lowest = std::min(lowest, m.variance);
    expect(o, m.variance > collapsed, fmt("recommended init at layer %d fell to %.3e",
                                          m.layer_index, m.variance));
  }
  if (o.pass) {
    o.detail = fmt("Xavier s^2: 1 -> %.4e (%.1fx collapse, tol >=10x); recommended min s^2 %.4e",
                   collapsed, factor, lowest);
  }
  return o;
}

Outcome cli_determinism() {
  Outcome o;
  const std::vector<std::string> args = {"simulate", "--activation", "relu", "--width", "128",
                                         "--depth", "10", "--weight-variance", "he", "--trials",
                                         "50", "--seed", "7"};
  std::ostringstream a, b, err;
  const int ca = cli::run(args, a, err);
  const int cb = cli::run(args, b, err);
  expect(o, ca == 0 && cb == 0, "simulate failed: " + err.str());
  expect(o, a.str() == b.str(), "outputs differ");
  if (o.pass) o.detail = fmt("two runs, %zu bytes each, identical", a.str().size());
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  SimReport he;
  const std::vector<Criterion> criteria = {
      {"1 initialization golden values", init_golden_values},
      {"2 relu decay golden values", relu_decay_golden_values},
      {"3 oracle agreement", oracle_agreement},
      {"4 monte carlo vs theory (relu/xavier)", monte_carlo_vs_theory},
      {"5 he fixed point (relu/he act_variance)",
       [&] {
         he = he_report();
         return he_fixed_point(he);
       }},
      {"6 normality of pre-activations", [&] { return normality(he); }},
      {"7 tanh sequential saturation chain", tanh_saturation_chain},
      {"8 density normalization and shape", density_shape},
      {"9 sigmoid signal collapse (training substitute)", sigmoid_signal_collapse},
      {"10 simulate determinism", cli_determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s (%.2fs): %s\n", outcome.pass ? "PASS" : "FAIL", c.name, seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failed;
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
