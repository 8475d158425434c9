#include "mfso3/io.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace mfso3 {

namespace {

using nlohmann::json;

const std::vector<std::string> kGridColumns = {"azimuth_rad", "elevation_rad", "p_axis1", "p_axis2",
                                               "p_axis3"};
const std::vector<std::string> kRotationColumns = {"r11", "r12", "r13", "r21", "r22",
                                                   "r23", "r31", "r32", "r33"};
const std::vector<std::string> kRunColumns = {"t",     "error_deg", "s1",      "s2",      "s3",
                                              "inv_s23", "inv_s31", "inv_s12", "m11",     "m12",
                                              "m13",   "m21",       "m22",     "m23",     "m31",
                                              "m32",   "m33"};

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

void check_written(const std::ofstream& os, const std::filesystem::path& path) {
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

void write_header(std::ostream& os, const std::string& kind, const std::vector<std::string>& cols,
                  const std::string& extra = "") {
  os << "# mfso3 " << kind << " v" << kCsvVersion << extra << "\n" << join(cols) << "\n";
}

// Reads a versioned CSV and returns the numeric rows. `first_line` receives
// the version comment.
std::vector<std::vector<double>> read_table(const std::filesystem::path& path, const std::string& kind,
                                            const std::vector<std::string>& cols,
                                            std::string* first_line = nullptr) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string where = "'" + path.string() + "'";
  std::string line;
  if (!std::getline(is, line)) throw IoError(where + ": empty file");
  const std::string prefix = "# mfso3 " + kind + " v";
  if (line.rfind(prefix, 0) != 0) {
    throw IoError(where + ":1: expected header comment '" + prefix + "N'");
  }
  const int version = std::atoi(line.c_str() + prefix.size());
  if (version < 1 || version > kCsvVersion) {
    throw IoError(where + ":1: unsupported " + kind + " format version " + std::to_string(version));
  }
  if (first_line) *first_line = line;
  int lineno = 1;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (!header_seen) {
      if (cells != cols) {
        throw IoError(where + ":" + std::to_string(lineno) + ": expected columns " + join(cols));
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != cols.size()) {
      throw IoError(where + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                    " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      char* end = nullptr;
      row[i] = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || *end != '\0') {
        throw IoError(where + ":" + std::to_string(lineno) + ": bad number '" + cells[i] + "' in column " +
                      cols[i]);
      }
    }
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw IoError(where + ": missing column header");
  return rows;
}

// --- scenario JSON -------------------------------------------------------

class Parser {
 public:
  std::vector<std::string> problems;

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = obj.at(key);
    if (!v.is_number()) {
      problems.push_back(path + ": expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<Vector3> vec3(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) {
      problems.push_back(path + ": expected an array of 3 numbers");
      return std::nullopt;
    }
    Vector3 out;
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) {
        problems.push_back(path + "[" + std::to_string(i) + "]: expected a number");
        return std::nullopt;
      }
      out[i] = v[i].get<double>();
    }
    return out;
  }

  // [[r1], [r2], [r3]] | {"diag": [..]} | {"scale": s, "exp": [v]}
  std::optional<Matrix3> matrix(const json& v, const std::string& path) {
    if (v.is_array()) {
      if (v.size() != 3) {
        problems.push_back(path + ": expected 3 rows");
        return std::nullopt;
      }
      Matrix3 m;
      for (int i = 0; i < 3; ++i) {
        auto row = vec3(v[i], path + "[" + std::to_string(i) + "]");
        if (!row) return std::nullopt;
        m.row(i) = row->transpose();
      }
      return m;
    }
    if (v.is_object()) {
      if (v.contains("diag")) {
        unknown_keys(v, {"diag"}, path);
        auto d = vec3(v["diag"], path + ".diag");
        if (!d) return std::nullopt;
        return Matrix3(d->asDiagonal());
      }
      if (v.contains("exp")) {
        unknown_keys(v, {"exp", "scale"}, path);
        auto e = vec3(v["exp"], path + ".exp");
        double scale = 1.0;
        if (v.contains("scale")) {
          auto s = number(v, "scale", path + ".scale");
          if (!s) return std::nullopt;
          scale = *s;
        }
        if (!e) return std::nullopt;
        return Matrix3(scale * exp_so3(*e).matrix());
      }
    }
    problems.push_back(path + ": expected a 3x3 array, {\"diag\": [...]} or {\"scale\": s, \"exp\": [...]}");
    return std::nullopt;
  }

  void unknown_keys(const json& obj, const std::set<std::string>& known, const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (!known.count(key)) problems.push_back((path.empty() ? key : path + "." + key) + ": unknown field");
    }
  }
};

json matrix_json(const Matrix3& m) {
  json out = json::array();
  for (int i = 0; i < 3; ++i) out.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return out;
}

json vec_json(const Vector3& v) { return {v[0], v[1], v[2]}; }

json summary_entry(const RunSummary& s) {
  return {{"mean_error_deg", s.mean_error_deg},
          {"mean_s2_plus_s3", s.mean_pair_sums[0]},
          {"mean_s3_plus_s1", s.mean_pair_sums[1]},
          {"mean_s1_plus_s2", s.mean_pair_sums[2]},
          {"mean_inv_pair_sums", vec_json(s.mean_inv_pair_sums)},
          {"peak_inv_pair_sums_before_t_start", vec_json(s.peak_inv_pair_sums)}};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::string msg = "invalid scenario configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<GridRow> density_grid(const MatrixFisher& dist, int n) {
  if (n < 1) throw std::invalid_argument("density_grid: resolution must be >= 1");
  std::vector<GridRow> rows;
  rows.reserve(2 * n * n);
  const double pi = std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    const double el = -0.5 * pi + (i + 0.5) * pi / n;
    for (int j = 0; j < 2 * n; ++j) {
      const double az = -pi + (j + 0.5) * pi / n;
      const Vector3 r(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      GridRow row{az, el, {}};
      for (int a = 0; a < 3; ++a) row.p[a] = dist.marginal_axis_density(a, r);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_grid_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows) {
  auto os = open_out(path);
  write_header(os, "sphere-grid", kGridColumns);
  for (const auto& r : rows) {
    os << fmt(r.azimuth) << ',' << fmt(r.elevation) << ',' << fmt(r.p[0]) << ',' << fmt(r.p[1]) << ','
       << fmt(r.p[2]) << '\n';
  }
  check_written(os, path);
}

std::vector<GridRow> read_grid_csv(const std::filesystem::path& path) {
  std::vector<GridRow> out;
  for (const auto& r : read_table(path, "sphere-grid", kGridColumns)) {
    out.push_back({r[0], r[1], {r[2], r[3], r[4]}});
  }
  return out;
}

void write_rotations_csv(const std::filesystem::path& path, const std::vector<Rotation>& rotations) {
  auto os = open_out(path);
  write_header(os, "rotations", kRotationColumns);
  for (const auto& R : rotations) {
    for (int i = 0; i < 9; ++i) os << (i ? "," : "") << fmt(R(i / 3, i % 3));
    os << '\n';
  }
  check_written(os, path);
}

std::vector<Rotation> read_rotations_csv(const std::filesystem::path& path) {
  std::vector<Rotation> out;
  const auto rows = read_table(path, "rotations", kRotationColumns);
  out.reserve(rows.size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    Matrix3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = rows[n][i];
    try {
      out.push_back(Rotation::from_matrix(m, 1e-9));
    } catch (const std::invalid_argument& e) {
      throw IoError("'" + path.string() + "': data row " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return out;
}

void write_run_csv(const std::filesystem::path& path, const EstimationRun& run) {
  auto os = open_out(path);
  write_header(os, "run", kRunColumns, std::string(" mode=") + to_string(run.mode));
  for (const auto& r : run.records) {
    os << fmt(r.t) << ',' << fmt(r.error_deg) << ',' << fmt(r.s[0]) << ',' << fmt(r.s[1]) << ','
       << fmt(r.s[2]) << ',' << fmt(r.inv_pair_sums[0]) << ',' << fmt(r.inv_pair_sums[1]) << ','
       << fmt(r.inv_pair_sums[2]);
    for (int i = 0; i < 9; ++i) os << ',' << fmt(r.mean(i / 3, i % 3));
    os << '\n';
  }
  check_written(os, path);
}

EstimationRun read_run_csv(const std::filesystem::path& path) {
  std::string first;
  const auto rows = read_table(path, "run", kRunColumns, &first);
  EstimationRun run;
  run.mode = first.find("mode=unscented") != std::string::npos ? FilterMode::unscented
                                                               : FilterMode::first_order;
  for (const auto& v : rows) {
    StepRecord r;
    r.t = v[0];
    r.error_deg = v[1];
    r.s = {v[2], v[3], v[4]};
    r.inv_pair_sums = {v[5], v[6], v[7]};
    Matrix3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = v[8 + i];
    r.mean = Rotation::trusted(m);
    run.records.push_back(r);
  }
  return run;
}

ScenarioConfig scenario_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"top level: expected an object"});

  Parser p;
  ScenarioConfig sc;
  p.unknown_keys(root,
                 {"name", "duration", "gyro_rate", "measurement_rate", "gyro_noise", "gyro_noise_sim",
                  "gyro_noise_model", "attitude_sensors", "direction_sensors", "initial_F", "sigma",
                  "seed", "pendulum", "truth_substeps"},
                 "");

  for (const char* key : {"duration", "gyro_rate", "measurement_rate", "gyro_noise", "initial_F"}) {
    if (!root.contains(key)) p.problems.push_back(std::string(key) + ": required field missing");
  }
  if (root.contains("name")) {
    if (root["name"].is_string()) {
      sc.name = root["name"].get<std::string>();
    } else {
      p.problems.push_back("name: expected a string");
    }
  }
  if (root.contains("duration")) {
    if (auto v = p.number(root, "duration", "duration")) sc.duration = *v;
  }
  if (root.contains("gyro_rate")) {
    if (auto v = p.number(root, "gyro_rate", "gyro_rate")) sc.gyro_rate = *v;
  }
  if (root.contains("measurement_rate")) {
    if (auto v = p.number(root, "measurement_rate", "measurement_rate")) sc.measurement_rate = *v;
  }
  if (root.contains("gyro_noise")) {
    if (auto v = p.vec3(root["gyro_noise"], "gyro_noise")) sc.H = v->asDiagonal();
  }
  if (root.contains("gyro_noise_sim")) {
    if (auto v = p.vec3(root["gyro_noise_sim"], "gyro_noise_sim")) sc.H_sim = Matrix3(v->asDiagonal());
  }
  if (root.contains("gyro_noise_model")) {
    const json& v = root["gyro_noise_model"];
    if (v == "increment") {
      sc.gyro_noise_model = GyroNoiseModel::increment;
    } else if (v == "white") {
      sc.gyro_noise_model = GyroNoiseModel::white;
    } else {
      p.problems.push_back("gyro_noise_model: expected \"increment\" or \"white\"");
    }
  }
  if (root.contains("attitude_sensors")) {
    const json& arr = root["attitude_sensors"];
    if (!arr.is_array()) {
      p.problems.push_back("attitude_sensors: expected an array");
    } else {
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "attitude_sensors[" + std::to_string(i) + "]";
        if (!arr[i].is_object() || !arr[i].contains("F")) {
          p.problems.push_back(path + ": expected an object with field F");
          continue;
        }
        p.unknown_keys(arr[i], {"F"}, path);
        if (auto m = p.matrix(arr[i]["F"], path + ".F")) sc.attitude_sensors.push_back(*m);
      }
    }
  }
  if (root.contains("direction_sensors")) {
    const json& arr = root["direction_sensors"];
    if (!arr.is_array()) {
      p.problems.push_back("direction_sensors: expected an array");
    } else {
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "direction_sensors[" + std::to_string(i) + "]";
        if (!arr[i].is_object() || !arr[i].contains("a") || !arr[i].contains("b")) {
          p.problems.push_back(path + ": expected an object with fields a and b");
          continue;
        }
        p.unknown_keys(arr[i], {"a", "b", "B"}, path);
        DirectionSensorConfig d;
        auto a = p.vec3(arr[i]["a"], path + ".a");
        auto b = p.number(arr[i], "b", path + ".b");
        if (a) d.a = *a;
        if (b) d.b = *b;
        if (arr[i].contains("B")) {
          if (auto B = p.matrix(arr[i]["B"], path + ".B")) d.B = *B;
        }
        sc.direction_sensors.push_back(d);
      }
    }
  }
  if (root.contains("initial_F")) {
    if (auto m = p.matrix(root["initial_F"], "initial_F")) sc.initial_F = *m;
  }
  if (root.contains("sigma")) {
    if (auto v = p.number(root, "sigma", "sigma")) sc.sigma = *v;
  }
  if (root.contains("seed")) {
    if (root["seed"].is_number_unsigned()) {
      sc.seed = root["seed"].get<std::uint64_t>();
    } else {
      p.problems.push_back("seed: expected a non-negative integer");
    }
  }
  if (root.contains("truth_substeps")) {
    if (root["truth_substeps"].is_number_integer()) {
      sc.truth_substeps = root["truth_substeps"].get<int>();
    } else {
      p.problems.push_back("truth_substeps: expected an integer");
    }
  }
  if (root.contains("pendulum")) {
    const json& pj = root["pendulum"];
    if (!pj.is_object()) {
      p.problems.push_back("pendulum: expected an object");
    } else {
      p.unknown_keys(pj, {"J", "rho", "mass", "gravity", "R0", "omega0"}, "pendulum");
      auto& pc = sc.pendulum;
      if (pj.contains("J")) {
        if (auto m = p.matrix(pj["J"], "pendulum.J")) pc.J = *m;
      }
      if (pj.contains("rho")) {
        if (auto v = p.vec3(pj["rho"], "pendulum.rho")) pc.rho = *v;
      }
      if (pj.contains("mass")) {
        if (auto v = p.number(pj, "mass", "pendulum.mass")) pc.mass = *v;
      }
      if (pj.contains("gravity")) {
        if (auto v = p.number(pj, "gravity", "pendulum.gravity")) pc.gravity = *v;
      }
      if (pj.contains("omega0")) {
        if (auto v = p.vec3(pj["omega0"], "pendulum.omega0")) pc.omega0 = *v;
      }
      if (pj.contains("R0")) {
        if (auto m = p.matrix(pj["R0"], "pendulum.R0")) {
          try {
            pc.R0 = Rotation::from_matrix(*m, 1e-9);
          } catch (const std::invalid_argument& e) {
            p.problems.push_back(std::string("pendulum.R0: ") + e.what());
          }
        }
      }
    }
  }

  if (p.problems.empty()) {
    for (auto& problem : sc.problems()) p.problems.push_back(std::move(problem));
  }
  if (!p.problems.empty()) throw ConfigError(std::move(p.problems));
  return sc;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return scenario_from_json(ss.str());
  } catch (const ConfigError& e) {
    std::vector<std::string> tagged;
    for (const auto& problem : e.problems()) tagged.push_back(path.string() + ": " + problem);
    throw ConfigError(std::move(tagged));
  }
}

std::string summary_json(const ScenarioConfig& sc, const ScenarioResult& result) {
  json out = {{"format", "mfso3-summary"},
              {"version", kCsvVersion},
              {"scenario", sc.name},
              {"seed", sc.seed},
              {"steps", sc.steps()},
              {"t_start", 0.5},
              {"first_order", summary_entry(result.first_order_summary)},
              {"unscented", summary_entry(result.unscented_summary)}};
  return out.dump(2) + "\n";
}

std::string fit_report_json(const FitResult& fit, std::size_t sample_count) {
  const MatrixFisher& d = fit.distribution;
  json out = {{"format", "mfso3-fit"},
              {"version", kCsvVersion},
              {"samples", sample_count},
              {"F", matrix_json(d.F())},
              {"U", matrix_json(d.svd().U.matrix())},
              {"s", vec_json(d.s())},
              {"V", matrix_json(d.svd().V.matrix())},
              {"log_c", d.log_c()},
              {"moment_d", vec_json(fit.d)},
              {"newton",
               {{"iterations", fit.newton.iterations},
                {"residual", fit.newton.residual},
                {"tied_singular_values", fit.newton.tied}}}};
  return out.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  check_written(os, path);
}

}  // namespace mfso3
