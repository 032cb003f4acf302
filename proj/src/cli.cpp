#include "initprop/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "initprop/activations.hpp"
#include "initprop/density.hpp"
#include "initprop/error.hpp"
#include "initprop/propagation.hpp"
#include "initprop/simulator.hpp"

namespace initprop::cli {

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  const auto& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

nlohmann::ordered_json to_json(const Cell& cell) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, cell);
}

}  // namespace

void Document::write_csv(std::ostream& out) const {
  std::string line;
  auto flush = [&] {
    out << line << '\n';
    line.clear();
  };
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) line += ',';
    line += columns[c];
  }
  for (const auto& [key, value] : metadata) line += ',' + key;
  flush();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += ',';
      line += format_cell(row[c]);
    }
    for (const auto& [key, value] : metadata) line += ',' + format_cell(value);
    flush();
  }
}

void Document::write_json(std::ostream& out) const {
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["parameters"] = parameters;
  nlohmann::ordered_json results;
  results["columns"] = columns;
  results["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json record;
    for (std::size_t c = 0; c < row.size(); ++c) record[columns[c]] = to_json(row[c]);
    results["rows"].push_back(std::move(record));
  }
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [key, value] : metadata) meta[key] = to_json(value);
  results["metadata"] = std::move(meta);
  doc["results"] = std::move(results);
  doc["tool_version"] = kToolVersion;
  out << doc.dump(2) << '\n';
}

double parse_scaled_value(const std::string& text, double xavier, double he, double recommended) {
  auto fail = [&]() -> double {
    throw Error(Errc::invalid_argument, "cannot parse value '" + text +
                                            "' (expected a number, xavier, he, recommended, "
                                            "optionally combined with * and /)");
  };
  std::size_t pos = 0;
  auto term = [&]() -> double {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                 text[pos] == '.' || text[pos] == '_' ||
                                 ((text[pos] == '-' || text[pos] == '+') &&
                                  (pos == start || text[pos - 1] == 'e' || text[pos - 1] == 'E')))) {
      ++pos;
    }
    const std::string token = text.substr(start, pos - start);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (token == "xavier") return xavier;
    if (token == "he") return he;
    if (token == "recommended") return recommended;
    if (token.empty()) return fail();
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      return fail();
    }
    if (used != token.size()) return fail();
    return value;
  };

  double value = term();
  while (pos < text.size()) {
    const char op = text[pos++];
    const double rhs = term();
    if (op == '*') {
      value *= rhs;
    } else if (op == '/') {
      value /= rhs;
    } else {
      return fail();
    }
  }
  if (!std::isfinite(value)) return fail();
  return value;
}

namespace {

ActivationSpec load_activation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_argument, "cannot open activation file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_argument, "activation file '" + path + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("samples") || !doc["samples"].is_array()) {
    throw Error(Errc::invalid_argument,
                "activation file must be an object {name, samples: [[x, g(x)], ...]}");
  }
  std::vector<std::pair<double, double>> samples;
  for (const auto& s : doc["samples"]) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      throw Error(Errc::invalid_argument, "each activation sample must be a pair [x, g(x)]");
    }
    samples.emplace_back(s[0].get<double>(), s[1].get<double>());
  }
  const std::string name = doc.value("name", std::string("custom"));
  return from_table(std::move(samples), name);
}

struct ActivationChoice {
  std::string name = "tanh";
  std::string file;

  ActivationSpec resolve() const {
    return file.empty() ? builtin(name) : load_activation_file(file);
  }
};

void add_activation_options(CLI::App& cmd, ActivationChoice& choice) {
  auto* named = cmd.add_option("--activation", choice.name,
                               "identity, tanh, sigmoid or relu");
  auto* file = cmd.add_option("--activation-file", choice.file,
                              "JSON {name, samples: [[x, g(x)], ...]}, linearly interpolated");
  named->excludes(file);
}

std::string activation_label(const ActivationSpec& g) { return g.name(); }

Engine default_engine(const ActivationSpec& g, bool prefer_quadrature) {
  if (g.kind() == ActivationKind::relu) return Engine::relu_exact;
  return prefer_quadrature ? Engine::quadrature : Engine::linearized;
}

double he_variance(int width) {
  return recommend_init(builtin(ActivationKind::relu), width).weight_variance;
}

double recommended_variance(const ActivationSpec& g, int width) {
  try {
    return recommend_init(g, width).weight_variance;
  } catch (const Error&) {
    return std::nan("");
  }
}

// ---------------------------------------------------------------------------

struct InitArgs {
  ActivationChoice activation;
  int width = 0;
};

Document cmd_init(const InitArgs& a) {
  const ActivationSpec g = a.activation.resolve();
  const InitRecommendation rec = recommend_init(g, a.width);
  Document doc;
  doc.command = "init";
  doc.parameters["activation"] = activation_label(g);
  doc.parameters["width"] = a.width;
  doc.columns = {"activation",     "width",          "engine",
                 "weight_stddev",  "weight_variance", "value_at_zero",
                 "deriv_at_zero",  "target_preact_variance", "fixed_point_mean"};
  doc.rows.push_back({activation_label(g), std::int64_t{a.width},
                      std::string(to_string(rec.engine)), rec.weight_stddev, rec.weight_variance,
                      rec.value_at_zero,
                      rec.engine == Engine::linearized ? Cell{rec.deriv_at_zero} : Cell{std::string()},
                      rec.target_preact_variance,
                      rec.fixed_point_mean});
  return doc;
}

// ---------------------------------------------------------------------------

struct PropagateArgs {
  ActivationChoice activation;
  int width = 0;
  int depth = 0;
  std::string weight_variance = "recommended";
  std::string engine = "auto";
  double initial_mean = 0.0;
  double initial_variance = 1.0;
  int nodes = kDefaultQuadratureNodes;
  std::string numbering = "input";
};

Document cmd_propagate(const PropagateArgs& a) {
  const ActivationSpec g = a.activation.resolve();
  if (a.width < 1 || a.depth < 1) {
    throw Error(Errc::invalid_argument, "width and depth must be at least 1");
  }
  const bool relu_output = a.numbering == "relu-output";
  if (!relu_output && a.numbering != "input") {
    throw Error(Errc::invalid_argument, "layer numbering must be 'input' or 'relu-output'");
  }
  const Engine engine = a.engine == "auto" ? default_engine(g, false) : parse_engine(a.engine);
  const double v2 = parse_scaled_value(a.weight_variance, 1.0 / a.width, he_variance(a.width),
                                       recommended_variance(g, a.width));

  NetworkConfig config{a.width, relu_output ? a.depth + 1 : a.depth, v2, g};
  LayerMoments initial;
  initial.mean = a.initial_mean;
  initial.variance = a.initial_variance;
  if (!(a.initial_variance >= 0.0)) {
    throw Error(Errc::invalid_argument, "initial variance must be nonnegative");
  }
  const auto layers = propagate(initial, config, engine, a.nodes);

  Document doc;
  doc.command = "propagate";
  doc.parameters["activation"] = activation_label(g);
  doc.parameters["width"] = a.width;
  doc.parameters["depth"] = a.depth;
  doc.parameters["weight_variance"] = v2;
  doc.parameters["engine"] = std::string(to_string(engine));
  doc.parameters["initial_mean"] = a.initial_mean;
  doc.parameters["initial_variance"] = a.initial_variance;
  if (engine == Engine::quadrature) doc.parameters["nodes"] = a.nodes;
  doc.parameters["layer_numbering"] = a.numbering;
  doc.columns = {"m", "mean", "variance", "preact_variance"};
  const int offset = relu_output ? 1 : 0;
  for (const auto& layer : layers) {
    doc.rows.push_back({std::int64_t{layer.layer_index - offset}, layer.mean, layer.variance,
                        layer.preact_variance});
  }
  return doc;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  ActivationChoice activation;
  int width = 0;
  int depth = 0;
  std::string weights = "gaussian";
  std::string weight_variance;
  std::string half_width;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string inputs = "normal";
  std::string engine = "auto";
  int nodes = kDefaultQuadratureNodes;
  bool serial = false;
};

struct SimulateResult {
  Document doc;
  std::optional<int> overflow_layer;
};

SimulateResult cmd_simulate(const SimulateArgs& a) {
  const ActivationSpec g = a.activation.resolve();
  if (a.width < 1 || a.depth < 1 || a.trials < 1) {
    throw Error(Errc::invalid_argument, "width, depth and trials must be at least 1");
  }
  const double n = a.width;

  SimConfig config;
  config.width = a.width;
  config.depth = a.depth;
  config.activation = g;
  config.trials = a.trials;
  config.seed = a.seed;
  if (a.inputs == "normal") {
    config.inputs = InputDistribution::normal;
  } else if (a.inputs == "rademacher") {
    config.inputs = InputDistribution::rademacher;
  } else {
    throw Error(Errc::invalid_argument, "inputs must be 'normal' or 'rademacher'");
  }

  if (a.weights == "gaussian") {
    if (!a.half_width.empty()) {
      throw Error(Errc::invalid_argument, "--half-width applies to uniform weights only");
    }
    const std::string expr = a.weight_variance.empty() ? "recommended" : a.weight_variance;
    config.weights = WeightDistribution::gaussian_with_variance(
        parse_scaled_value(expr, 1.0 / n, he_variance(a.width), recommended_variance(g, a.width)));
  } else if (a.weights == "uniform") {
    if (!a.half_width.empty() && !a.weight_variance.empty()) {
      throw Error(Errc::invalid_argument, "give either --half-width or --weight-variance");
    }
    if (!a.half_width.empty()) {
      // `xavier` here is the half-width 1/√N, i.e. U[-1/√N, 1/√N] with variance 1/(3N).
      const double half = parse_scaled_value(a.half_width, 1.0 / std::sqrt(n),
                                             std::sqrt(3.0 * he_variance(a.width)),
                                             std::sqrt(3.0 * recommended_variance(g, a.width)));
      config.weights = {WeightDistribution::Kind::uniform, half};
    } else {
      const std::string expr = a.weight_variance.empty() ? "recommended" : a.weight_variance;
      config.weights = WeightDistribution::uniform_with_variance(parse_scaled_value(
          expr, 1.0 / n, he_variance(a.width), recommended_variance(g, a.width)));
    }
  } else {
    throw Error(Errc::invalid_argument, "weights must be 'gaussian' or 'uniform'");
  }
  config.validate();

  const Engine engine = a.engine == "auto" ? default_engine(g, true) : parse_engine(a.engine);
  const double v2 = config.weights.variance();
  // Predictions stop at the first layer whose theory moments overflow; the
  // simulation still runs and reports its own overflow.
  std::vector<LayerMoments> predicted;
  try {
    predicted = propagate(LayerMoments{}, NetworkConfig{a.width, a.depth, v2, g}, engine, a.nodes);
  } catch (const Error& e) {
    if (e.code() != Errc::numeric_overflow || !e.layer()) throw;
    const int last_good = *e.layer() - 1;
    if (last_good >= 1) {
      predicted = propagate(LayerMoments{}, NetworkConfig{a.width, last_good, v2, g}, engine, a.nodes);
    }
  }

  const SimReport report = a.serial ? run_serial(config) : run(config);

  SimulateResult result;
  Document& doc = result.doc;
  doc.command = "simulate";
  doc.parameters["activation"] = activation_label(g);
  doc.parameters["width"] = a.width;
  doc.parameters["depth"] = a.depth;
  doc.parameters["weights"] = std::string(to_string(config.weights.kind));
  doc.parameters["weight_parameter"] = config.weights.parameter;
  doc.parameters["weight_variance"] = v2;
  doc.parameters["trials"] = a.trials;
  doc.parameters["seed"] = a.seed;
  doc.parameters["inputs"] = std::string(to_string(config.inputs));
  doc.parameters["prediction_engine"] = std::string(to_string(engine));
  doc.columns = {"m",
                 "valid",
                 "act_mean",
                 "act_variance",
                 "preact_mean",
                 "preact_variance",
                 "preact_skewness",
                 "preact_excess_kurtosis",
                 "predicted_mean",
                 "predicted_variance",
                 "predicted_preact_variance",
                 "abs_error_mean",
                 "rel_error_variance"};
  for (std::size_t i = 0; i < report.per_layer.size(); ++i) {
    const LayerStats& s = report.per_layer[i];
    std::vector<Cell> row = {std::int64_t{s.layer_index}, std::int64_t{s.valid ? 1 : 0},
                             s.act_mean,   s.act_variance,
                             s.preact_mean, s.preact_variance,
                             s.preact_skewness, s.preact_excess_kurtosis};
    if (i < predicted.size()) {
      const LayerMoments& p = predicted[i];
      const double rel = p.variance > 0.0 ? std::abs(s.act_variance - p.variance) / p.variance
                                          : std::abs(s.act_variance - p.variance);
      row.insert(row.end(), {p.mean, p.variance, p.preact_variance, std::abs(s.act_mean - p.mean), rel});
    } else {
      row.insert(row.end(), 5, Cell{std::numeric_limits<double>::quiet_NaN()});
    }
    doc.rows.push_back(std::move(row));
  }
  doc.metadata.emplace_back("trials_used", std::int64_t{report.trials_used});
  result.overflow_layer = report.overflow_layer();
  return result;
}

// ---------------------------------------------------------------------------

struct PdfArgs {
  double u = 1.0;
  int grid = 1001;
  double threshold = 0.9;
};

Document cmd_pdf(const PdfArgs& a) {
  if (!(a.u > 0.0)) throw Error(Errc::invalid_argument, "--u must be positive");
  const DensityCurve c = curve(a.u, a.grid);
  const double saturation = saturation_fraction(a.u, a.threshold);
  Document doc;
  doc.command = "pdf";
  doc.parameters["u"] = a.u;
  doc.parameters["grid_points"] = a.grid;
  doc.parameters["threshold"] = a.threshold;
  doc.columns = {"y", "density"};
  for (const auto& p : c.points) doc.rows.push_back({p.y, p.density});
  doc.metadata.emplace_back("saturation_fraction", saturation);
  doc.metadata.emplace_back("integral", c.integral);
  doc.metadata.emplace_back("local_maxima", static_cast<std::int64_t>(local_maxima(c).size()));
  return doc;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Activation-aware weight initialization and moment propagation", "initprop"};
  app.require_subcommand(1);
  std::string format = "csv";
  std::string output;
  app.add_option("--format", format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--output", output, "write to PATH instead of stdout");
  app.fallthrough();

  InitArgs init_args;
  auto* init = app.add_subcommand("init", "recommended weight variance for an activation");
  add_activation_options(*init, init_args.activation);
  init->add_option("--width", init_args.width, "nodes per layer N")->required();

  PropagateArgs prop_args;
  auto* prop = app.add_subcommand("propagate", "closed-form per-layer moments");
  add_activation_options(*prop, prop_args.activation);
  prop->add_option("--width", prop_args.width)->required();
  prop->add_option("--depth", prop_args.depth)->required();
  prop->add_option("--weight-variance", prop_args.weight_variance,
                   "number or expression over xavier, he, recommended (e.g. xavier/3)")
      ->capture_default_str();
  prop->add_option("--engine", prop_args.engine, "auto, linearized, relu_exact or quadrature")
      ->capture_default_str();
  prop->add_option("--initial-mean", prop_args.initial_mean)->capture_default_str();
  prop->add_option("--initial-variance", prop_args.initial_variance)->capture_default_str();
  prop->add_option("--nodes", prop_args.nodes, "quadrature nodes")->capture_default_str();
  prop->add_option("--layer-numbering", prop_args.numbering,
                   "input (row 1 is the input) or relu-output (row 0 is the input, depth "
                   "counts layers applied)")
      ->check(CLI::IsMember({"input", "relu-output"}))
      ->capture_default_str();

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo forward passes");
  add_activation_options(*sim, sim_args.activation);
  sim->add_option("--width", sim_args.width)->required();
  sim->add_option("--depth", sim_args.depth)->required();
  sim->add_option("--weights", sim_args.weights, "gaussian or uniform")->capture_default_str();
  sim->add_option("--weight-variance", sim_args.weight_variance,
                  "number or expression over xavier, he, recommended");
  sim->add_option("--half-width", sim_args.half_width,
                  "uniform half-width; xavier means 1/sqrt(N)");
  sim->add_option("--trials", sim_args.trials)->capture_default_str();
  sim->add_option("--seed", sim_args.seed)->capture_default_str();
  sim->add_option("--inputs", sim_args.inputs, "normal or rademacher")->capture_default_str();
  sim->add_option("--engine", sim_args.engine, "prediction engine (auto: relu_exact for relu, "
                                               "quadrature otherwise)")
      ->capture_default_str();
  sim->add_option("--nodes", sim_args.nodes, "quadrature nodes")->capture_default_str();
  sim->add_flag("--serial", sim_args.serial, "use the single-threaded reference path");

  PdfArgs pdf_args;
  auto* pdf = app.add_subcommand("pdf", "density of tanh of a centred Gaussian");
  pdf->add_option("--u", pdf_args.u, "pre-activation stddev")->required();
  pdf->add_option("--grid", pdf_args.grid, "grid points")->capture_default_str();
  pdf->add_option("--threshold", pdf_args.threshold, "saturation threshold")
      ->capture_default_str();

  std::vector<const char*> argv{"initprop"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  int status = kOk;
  Document doc;
  try {
    if (*init) {
      doc = cmd_init(init_args);
    } else if (*prop) {
      doc = cmd_propagate(prop_args);
    } else if (*sim) {
      auto result = cmd_simulate(sim_args);
      doc = std::move(result.doc);
      if (result.overflow_layer) {
        err << "initprop: non-finite values at layer " << *result.overflow_layer << '\n';
        status = kNumeric;
      }
    } else {
      doc = cmd_pdf(pdf_args);
    }
  } catch (const Error& e) {
    err << "initprop: " << e.what() << '\n';
    return e.code() == Errc::numeric_overflow ? kNumeric : kUsage;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!output.empty()) {
    file.open(output, std::ios::binary);
    if (!file) {
      err << "initprop: cannot open '" << output << "' for writing\n";
      return kUsage;
    }
    sink = &file;
  }
  if (format == "json") {
    doc.write_json(*sink);
  } else {
    doc.write_csv(*sink);
  }
  return status;
}

}  // namespace initprop::cli
