#pragma once

#include "mfso3/estimator.hpp"
#include "mfso3/fitting.hpp"
#include "mfso3/simulation.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfso3 {

// Every CSV starts with a '# mfso3 <kind> v<version>' comment line, then a
// column header.
inline constexpr int kCsvVersion = 1;

/// File or format problem; the message carries the path (and line when known).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario JSON failing validation; one entry per offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct GridRow {
  double azimuth = 0.0;
  double elevation = 0.0;
  Vector3 p = Vector3::Zero();  // marginal density of each column
};

/// n elevation bands by 2n azimuth sectors, evaluated at cell centers.
std::vector<GridRow> density_grid(const MatrixFisher& dist, int n);

void write_grid_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows);
std::vector<GridRow> read_grid_csv(const std::filesystem::path& path);

/// Row-major entries r11..r33, one rotation per row.
void write_rotations_csv(const std::filesystem::path& path, const std::vector<Rotation>& rotations);
std::vector<Rotation> read_rotations_csv(const std::filesystem::path& path);

void write_run_csv(const std::filesystem::path& path, const EstimationRun& run);
/// Reads back the columns written by write_run_csv (F is not stored).
EstimationRun read_run_csv(const std::filesystem::path& path);

/// Parses and validates scenario JSON text. Throws ConfigError.
ScenarioConfig scenario_from_json(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

std::string summary_json(const ScenarioConfig& sc, const ScenarioResult& result);
std::string fit_report_json(const FitResult& fit, std::size_t sample_count);

/// Writes text, throwing IoError with the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mfso3
