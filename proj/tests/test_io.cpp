#include "mfso3/io.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

using namespace mfso3;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mfso3_io_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path file(const std::string& name) const { return dir_ / name; }
  void put(const fs::path& p, const std::string& text) const { std::ofstream(p) << text; }

  fs::path dir_;
};

bool has_problem(const ConfigError& e, const std::string& prefix) {
  return std::any_of(e.problems().begin(), e.problems().end(),
                     [&](const std::string& p) { return p.find(prefix) != std::string::npos; });
}

std::vector<std::string> problems_of(const std::string& text) {
  try {
    scenario_from_json(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

const char* kMinimal = R"({
  "duration": 2, "gyro_rate": 50, "measurement_rate": 10,
  "gyro_noise": [1.8, 1.6, 2.4], "initial_F": {"diag": [0, 0, 0]}
})";

}  // namespace

using IoFiles = TempDir;

TEST_F(IoFiles, RotationsRoundTrip) {
  Rng rng(91);
  std::vector<Rotation> rs;
  for (int k = 0; k < 50; ++k) rs.push_back(sample_uniform(rng));
  write_rotations_csv(file("r.csv"), rs);
  const auto back = read_rotations_csv(file("r.csv"));
  ASSERT_EQ(back.size(), rs.size());
  for (std::size_t k = 0; k < rs.size(); ++k) EXPECT_EQ(back[k].matrix(), rs[k].matrix());
  std::ifstream is(file("r.csv"));
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# mfso3 rotations v1");
}

TEST_F(IoFiles, RotationsRejectBadRows) {
  put(file("bad.csv"), "# mfso3 rotations v1\nr11,r12,r13,r21,r22,r23,r31,r32,r33\n1,0,0,0,1,0,0,0,1\n2,0,0,0,1,0,0,0,1\n");
  try {
    read_rotations_csv(file("bad.csv"));
    ADD_FAILURE();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("data row 2"), std::string::npos) << e.what();
  }
  put(file("short.csv"), "# mfso3 rotations v1\nr11,r12,r13,r21,r22,r23,r31,r32,r33\n1,0,0\n");
  EXPECT_THROW(read_rotations_csv(file("short.csv")), IoError);
  put(file("word.csv"), "# mfso3 rotations v1\nr11,r12,r13,r21,r22,r23,r31,r32,r33\n1,0,x,0,1,0,0,0,1\n");
  EXPECT_THROW(read_rotations_csv(file("word.csv")), IoError);
  put(file("version.csv"), "# mfso3 rotations v2\nr11,r12,r13,r21,r22,r23,r31,r32,r33\n");
  EXPECT_THROW(read_rotations_csv(file("version.csv")), IoError);
  put(file("kind.csv"), "# mfso3 run v1\nr11,r12,r13,r21,r22,r23,r31,r32,r33\n");
  EXPECT_THROW(read_rotations_csv(file("kind.csv")), IoError);
  EXPECT_THROW(read_rotations_csv(file("missing.csv")), IoError);
}

TEST_F(IoFiles, GridRoundTripAndNormalization) {
  const MatrixFisher m(Vector3(25, 5, 1).asDiagonal());
  const auto rows = density_grid(m, 100);
  ASSERT_EQ(rows.size(), 2u * 100 * 100);
  write_grid_csv(file("g.csv"), rows);
  const auto back = read_grid_csv(file("g.csv"));
  ASSERT_EQ(back.size(), rows.size());
  Vector3 integral = Vector3::Zero();
  const GridRow* best = &back[0];
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].p, rows[k].p);
    integral += back[k].p * std::cos(back[k].elevation);
    if (back[k].p[0] > best->p[0]) best = &back[k];
  }
  const double pi = std::numbers::pi;
  integral *= (pi / 100) * (pi / 100) / (4 * pi);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(integral[i], 1.0, 1e-3);
  // axis 1 peaks near e1
  EXPECT_LT(std::abs(best->elevation), 0.05);
  EXPECT_LT(std::min(std::abs(best->azimuth), pi - std::abs(best->azimuth)), 0.05);

  for (const auto& r : density_grid(MatrixFisher(), 5)) EXPECT_LT((r.p - Vector3::Ones()).norm(), 1e-12);
  EXPECT_THROW(density_grid(m, 0), std::invalid_argument);
}

TEST_F(IoFiles, RunRoundTrip) {
  EstimationRun run;
  run.mode = FilterMode::unscented;
  for (int k = 0; k < 3; ++k) {
    StepRecord r;
    r.t = 0.02 * k;
    r.error_deg = k == 0 ? std::nan("") : 1.5 * k;
    r.s = Vector3(3, 2, 1) * k;
    r.inv_pair_sums = k == 0 ? Vector3::Constant(INFINITY) : Vector3(1.0 / (3 * k), 1.0 / (4 * k), 1.0 / (5 * k));
    r.mean = exp_so3(Vector3(0.1, 0.2, 0.3) * k);
    run.records.push_back(r);
  }
  write_run_csv(file("run.csv"), run);
  const EstimationRun back = read_run_csv(file("run.csv"));
  EXPECT_EQ(back.mode, FilterMode::unscented);
  ASSERT_EQ(back.records.size(), 3u);
  EXPECT_TRUE(std::isnan(back.records[0].error_deg));
  EXPECT_TRUE(std::isinf(back.records[0].inv_pair_sums[1]));
  for (int k = 1; k < 3; ++k) {
    EXPECT_EQ(back.records[k].t, run.records[k].t);
    EXPECT_EQ(back.records[k].error_deg, run.records[k].error_deg);
    EXPECT_EQ(back.records[k].s, run.records[k].s);
    EXPECT_EQ(back.records[k].inv_pair_sums, run.records[k].inv_pair_sums);
    EXPECT_EQ(back.records[k].mean.matrix(), run.records[k].mean.matrix());
  }
}

TEST_F(IoFiles, WriteFailureNamesPath) {
  try {
    write_text(file("no/such/dir/x.json"), "{}");
    ADD_FAILURE();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("x.json"), std::string::npos);
  }
}

TEST(ScenarioJson, Minimal) {
  const ScenarioConfig sc = scenario_from_json(kMinimal);
  EXPECT_EQ(sc.steps(), 100);
  EXPECT_EQ(sc.measurement_ratio(), 5);
  EXPECT_EQ(sc.H, Matrix3(Vector3(1.8, 1.6, 2.4).asDiagonal()));
  EXPECT_FALSE(sc.H_sim.has_value());
  EXPECT_EQ(sc.gyro_noise_model, GyroNoiseModel::increment);
  EXPECT_TRUE(sc.initial_F.isZero(0.0));
  EXPECT_EQ(sc.sigma, kDefaultSigma);
}

TEST(ScenarioJson, FullSchema) {
  const ScenarioConfig sc = scenario_from_json(R"({
    "name": "full", "duration": 1, "gyro_rate": 100, "measurement_rate": 20,
    "gyro_noise": [0.1, 0.2, 0.3], "gyro_noise_sim": [0.2, 0.2, 0.2], "gyro_noise_model": "white",
    "attitude_sensors": [{"F": [[40, 0, 0], [0, 50, 0], [0, 0, 35]]}, {"F": {"diag": [1, 2, 3]}}],
    "direction_sensors": [{"a": [0, 0, 1], "b": 5}, {"a": [1, 0, 0], "b": 2, "B": {"exp": [0, 0, 1.5707963267948966]}}],
    "initial_F": {"scale": 100, "exp": [3.141592653589793, 0, 0]},
    "sigma": 0.95, "seed": 18446744073709551615, "truth_substeps": 3,
    "pendulum": {"J": {"diag": [1, 2, 3]}, "rho": [0, 0, 0.2], "mass": 2, "gravity": 9.8,
                 "R0": {"exp": [0.1, 0, 0]}, "omega0": [1, 2, 3]}
  })");
  EXPECT_EQ(sc.name, "full");
  EXPECT_EQ(sc.gyro_noise_model, GyroNoiseModel::white);
  ASSERT_TRUE(sc.H_sim.has_value());
  EXPECT_EQ((*sc.H_sim)(1, 1), 0.2);
  ASSERT_EQ(sc.attitude_sensors.size(), 2u);
  EXPECT_EQ(sc.attitude_sensors[0](1, 1), 50.0);
  EXPECT_EQ(sc.attitude_sensors[1](2, 2), 3.0);
  ASSERT_EQ(sc.direction_sensors.size(), 2u);
  EXPECT_TRUE(sc.direction_sensors[0].B.isIdentity(0.0));
  EXPECT_LT((sc.direction_sensors[1].B * Vector3::UnitX() - Vector3::UnitY()).norm(), 1e-15);
  EXPECT_LT((sc.initial_F - 100.0 * Matrix3(Vector3(1, -1, -1).asDiagonal())).norm(), 1e-12);
  EXPECT_EQ(sc.sigma, 0.95);
  EXPECT_EQ(sc.seed, 18446744073709551615ull);
  EXPECT_EQ(sc.truth_substeps, 3);
  EXPECT_EQ(sc.pendulum.J(2, 2), 3.0);
  EXPECT_EQ(sc.pendulum.mass, 2.0);
  EXPECT_EQ(sc.pendulum.omega0, Vector3(1, 2, 3));
  EXPECT_NEAR(rotation_angle(sc.pendulum.R0), 0.1, 1e-15);
}

TEST(ScenarioJson, MalformedText) {
  const auto p = problems_of("{\"duration\": ");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].rfind("malformed JSON", 0), 0u);
  EXPECT_EQ(problems_of("[1, 2]").size(), 1u);
}

TEST(ScenarioJson, ListsEveryProblem) {
  const auto p = problems_of(R"({
    "duration": "long", "gyro_rate": 50, "gyro_noise": [1, 2],
    "initial_F": [[1, 2, 3]], "colour": "red", "sigma": true,
    "direction_sensors": [{"a": [0, 0, 1]}], "seed": -3,
    "pendulum": {"J": {"diag": [1, 1, 1]}, "R0": [[2, 0, 0], [0, 1, 0], [0, 0, 1]], "spin": 1}
  })");
  for (const char* key : {"duration", "measurement_rate: required", "gyro_noise", "initial_F",
                          "colour: unknown field", "sigma", "direction_sensors[0]", "seed",
                          "pendulum.R0", "pendulum.spin: unknown field"}) {
    EXPECT_TRUE(std::any_of(p.begin(), p.end(), [&](const std::string& s) { return s.find(key) == 0; }))
        << "missing problem for " << key;
  }
}

TEST(ScenarioJson, SemanticChecksAfterParsing) {
  try {
    scenario_from_json(R"({"duration": 1, "gyro_rate": 50, "measurement_rate": 7,
                           "gyro_noise": [1, 1, 1], "initial_F": {"diag": [0, 0, 0]}, "sigma": 1.5})");
    ADD_FAILURE();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(has_problem(e, "measurement_rate"));
    EXPECT_TRUE(has_problem(e, "sigma"));
    EXPECT_NE(std::string(e.what()).find("sigma"), std::string::npos);
  }
}

TEST_F(IoFiles, LoadScenarioTagsPath) {
  put(file("bad.json"), "{\"duration\": 1}");
  try {
    load_scenario(file("bad.json"));
    ADD_FAILURE();
  } catch (const ConfigError& e) {
    EXPECT_FALSE(e.problems().empty());
    for (const auto& p : e.problems()) EXPECT_EQ(p.find(file("bad.json").string()), 0u);
  }
  EXPECT_THROW(load_scenario(file("absent.json")), IoError);
}

TEST(Reports, FitAndSummaryJson) {
  const MatrixFisher m(Vector3(10, 4, 1).asDiagonal());
  const FitResult fit = fit_from_moment(m.first_moment());
  const auto j = nlohmann::json::parse(fit_report_json(fit, 123));
  EXPECT_EQ(j["format"], "mfso3-fit");
  EXPECT_EQ(j["samples"], 123);
  EXPECT_NEAR(j["s"][0].get<double>(), 10.0, 1e-6);
  EXPECT_NEAR(j["F"][1][1].get<double>(), 4.0, 1e-6);
  EXPECT_TRUE(j["newton"].contains("iterations"));
  EXPECT_TRUE(j["newton"].contains("residual"));

  ScenarioConfig sc = scenario_from_json(kMinimal);
  sc.duration = 0.6;
  const ScenarioResult r = run_scenario(sc);
  const auto s = nlohmann::json::parse(summary_json(sc, r));
  EXPECT_EQ(s["steps"], 30);
  EXPECT_NEAR(s["unscented"]["mean_error_deg"].get<double>(), r.unscented_summary.mean_error_deg, 1e-12);
  EXPECT_TRUE(s["first_order"].contains("mean_s1_plus_s2"));
}
