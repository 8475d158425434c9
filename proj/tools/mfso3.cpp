// mfso3: matrix Fisher densities, sampling, fitting and attitude estimation.
#include "mfso3/errors.hpp"
#include "mfso3/estimator.hpp"
#include "mfso3/fitting.hpp"
#include "mfso3/io.hpp"
#include "mfso3/matrix_fisher.hpp"
#include "mfso3/simulation.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace mfso3;

namespace {

struct Options {
  std::string input;
  std::string output;
  std::vector<double> F;
  int grid = 50;
  long samples = 1000;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
  int quad_order = kDefaultQuadratureOrder;
};

// F from --F (row-major) or from the "F" field of a JSON file given by --input.
Matrix3 parameter(const Options& o) {
  if (!o.F.empty()) {
    if (o.F.size() != 9) throw std::invalid_argument("--F expects 9 values (row-major)");
    Matrix3 F;
    for (int i = 0; i < 9; ++i) F(i / 3, i % 3) = o.F[i];
    return F;
  }
  if (o.input.empty()) return Matrix3::Zero();
  std::ifstream is(o.input);
  if (!is) throw IoError("cannot open '" + o.input + "' for reading");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + o.input + "': " + e.what());
  }
  if (!j.contains("F") || !j["F"].is_array() || j["F"].size() != 3) {
    throw IoError("'" + o.input + "': expected a field F holding a 3x3 array");
  }
  Matrix3 F;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) F(i, k) = j["F"][i][k].get<double>();
  }
  return F;
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
  } else {
    write_text(o.output, text);
  }
}

int cmd_density(const Options& o, const QuadratureRule& rule) {
  if (o.output.empty()) throw std::invalid_argument("density: --output is required");
  const MatrixFisher dist(parameter(o), rule);
  write_grid_csv(o.output, density_grid(dist, o.grid));
  return 0;
}

int cmd_sample(const Options& o, const QuadratureRule& rule) {
  if (o.output.empty()) throw std::invalid_argument("sample: --output is required");
  const MatrixFisher dist(parameter(o), rule);
  Rng rng(o.seed.value_or(1));
  SamplerStats stats;
  std::vector<Rotation> out;
  out.reserve(o.samples);
  for (long i = 0; i < o.samples; ++i) out.push_back(dist.sample(rng, &stats));
  write_rotations_csv(o.output, out);
  std::cerr << "acceptance rate " << stats.acceptance_rate() << "\n";
  return 0;
}

int cmd_fit(const Options& o, const QuadratureRule& rule) {
  if (o.input.empty()) throw std::invalid_argument("fit: --input is required");
  const auto samples = read_rotations_csv(o.input);
  NewtonOptions newton;
  newton.rule = &rule;
  try {
    const FitResult fit = fit_from_samples(samples, newton);
    emit(o, fit_report_json(fit, samples.size()));
  } catch (const InfeasibleMoment& e) {
    std::ostringstream os;
    os.precision(17);
    os << e.what() << " [d = " << e.d().transpose() << "]";
    throw std::runtime_error(os.str());
  }
  return 0;
}

int cmd_estimate(const Options& o, const QuadratureRule& rule) {
  if (o.input.empty()) throw std::invalid_argument("estimate: --input is required");
  if (o.output.empty()) throw std::invalid_argument("estimate: --output directory is required");
  ScenarioConfig sc = load_scenario(o.input);
  if (o.seed) sc.seed = *o.seed;
  if (o.sigma) sc.sigma = *o.sigma;
  const auto problems = sc.problems();
  if (!problems.empty()) throw ConfigError(problems);

  NewtonOptions newton;
  newton.rule = &rule;
  const ScenarioResult result = run_scenario(sc, newton);

  const fs::path dir(o.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  write_run_csv(dir / "first_order.csv", result.first_order);
  write_run_csv(dir / "unscented.csv", result.unscented);
  write_text(dir / "summary.json", summary_json(sc, result));
  std::cout << summary_json(sc, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix Fisher distribution on SO(3) and attitude estimation"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--quad-order", o.quad_order, "Gauss-Legendre order per quadrature panel")
        ->check(CLI::Range(2, 512));
  };
  auto add_F = [&](CLI::App* sub) {
    sub->add_option("--F", o.F, "matrix parameter, 9 values row-major")->expected(9);
    sub->add_option("--input", o.input, "JSON file with a field F (alternative to --F)");
  };

  auto* density = app.add_subcommand("density", "marginal axis densities on a sphere grid");
  add_F(density);
  add_common(density);
  density->add_option("--grid", o.grid, "elevation bands (azimuth sectors = 2N)")->check(CLI::PositiveNumber);
  density->add_option("--output", o.output, "grid CSV path");

  auto* sample = app.add_subcommand("sample", "draw rotations from M(F)");
  add_F(sample);
  add_common(sample);
  sample->add_option("--samples", o.samples, "number of rotations")->check(CLI::PositiveNumber);
  sample->add_option("--seed", o.seed, "random seed");
  sample->add_option("--output", o.output, "rotation CSV path");

  auto* fit = app.add_subcommand("fit", "maximum-likelihood F from rotation samples");
  add_common(fit);
  fit->add_option("--input", o.input, "rotation CSV path");
  fit->add_option("--output", o.output, "report JSON path (stdout when omitted)");

  auto* estimate = app.add_subcommand("estimate", "run both attitude filters on a scenario");
  add_common(estimate);
  estimate->add_option("--input", o.input, "scenario JSON path");
  estimate->add_option("--output", o.output, "output directory");
  estimate->add_option("--seed", o.seed, "override the scenario seed");
  estimate->add_option("--sigma", o.sigma, "override the unscented parameter");

  CLI11_PARSE(app, argc, argv);

  try {
    const QuadratureRule rule = gauss_legendre(o.quad_order);
    if (density->parsed()) return cmd_density(o, rule);
    if (sample->parsed()) return cmd_sample(o, rule);
    if (fit->parsed()) return cmd_fit(o, rule);
    if (estimate->parsed()) return cmd_estimate(o, rule);
  } catch (const std::exception& e) {
    std::cerr << "mfso3: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
