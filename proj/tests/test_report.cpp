#include "poissonht/report.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "poissonht/errors.hpp"
#include "poissonht/model_spec.hpp"
#include "poissonht/rng.hpp"

namespace poissonht {
namespace {

namespace fs = std::filesystem;

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path temp_dir(const char* tag) {
  const fs::path dir = fs::temp_directory_path() /
                       (std::string("poissonht_test_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(FloatFormat, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -2.5e17,
                   0.4841197784757349}) {
    const std::string s = format_float(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_float(1.0), "1");
}

TEST(CsvSerialization, GoldenBytesAndShapeChecks) {
  CsvTable t;
  t.columns = {"a", "b"};
  t.rows = {{"1", "2"}, {"3", "4"}};
  EXPECT_EQ(csv_bytes(t), "a,b\n1,2\n3,4\n");

  CsvTable ragged;
  ragged.columns = {"a", "b"};
  ragged.rows = {{"only-one"}};
  EXPECT_THROW(csv_bytes(ragged), config_error);

  CsvTable header_only;
  header_only.columns = {"x"};
  EXPECT_EQ(csv_bytes(header_only), "x\n");
}

TEST(Checksums, KnownFnvVectors) {
  EXPECT_EQ(fnv1a_64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a_64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_NE(fnv1a_64("ab"), fnv1a_64("ba"));
}

TEST(FileOutput, WriteAndManifestRoundTrip) {
  const fs::path dir = temp_dir("report");
  const std::string bytes = "x\n0.5\n";
  write_file((dir / "data.csv").string(), bytes);
  EXPECT_EQ(read_all(dir / "data.csv"), bytes);
  EXPECT_THROW(write_file((dir / "no-such-subdir" / "f.csv").string(), bytes),
               config_error);

  write_manifest(dir.string(), "{\"alpha\": 0.05}", 987654321,
                 {{"data.csv", fnv1a_64(bytes)}}, 1.25);
  const auto manifest = nlohmann::json::parse(read_all(dir / "manifest.json"));
  EXPECT_EQ(manifest.at("master_seed").get<std::uint64_t>(), 987654321u);
  EXPECT_EQ(manifest.at("config").at("alpha").get<double>(), 0.05);
  EXPECT_EQ(manifest.at("rng_version").get<std::string>(),
            std::string(kRngVersion));
  EXPECT_EQ(manifest.at("code_version").get<std::string>(),
            std::string(version_string()));
  const std::string sum =
      manifest.at("files").at("data.csv").get<std::string>();
  EXPECT_EQ(sum.size(), 16u);
  fs::remove_all(dir);
}

TEST(RunConfigParsing, MinimalHomogeneous) {
  const RunConfig cfg = parse_run_config(R"({
    "model": {"family": "homogeneous", "theta0": 1.0, "n": 100}
  })");
  ASSERT_TRUE(cfg.model.has_value());
  EXPECT_DOUBLE_EQ(cfg.model->theta0(), 1.0);
  EXPECT_DOUBLE_EQ(cfg.model->domain_length(), 100.0);
  EXPECT_EQ(cfg.n_list, std::vector<double>{100.0});
  EXPECT_EQ(cfg.u_list, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(cfg.alpha, 0.05);
  EXPECT_EQ(cfg.reps, 100000);
  EXPECT_FALSE(cfg.master_seed.has_value());
  EXPECT_EQ(cfg.out_dir, "out");
}

TEST(RunConfigParsing, FieldErrorsNameTheField) {
  try {
    parse_run_config(R"({"model": {"family": "homogeneous", "n": 100}})");
    FAIL() << "expected config_error";
  } catch (const config_error& e) {
    EXPECT_NE(std::string(e.what()).find("theta0"), std::string::npos)
        << e.what();
  }
  EXPECT_THROW(parse_run_config("not json at all"), config_error);
  EXPECT_THROW(parse_run_config(R"({"alpha": 0.05})"), config_error);
  EXPECT_THROW(parse_run_config(R"({
    "model": {"family": "unheard-of", "theta0": 1, "n": 10}
  })"),
               config_error);
  EXPECT_THROW(parse_run_config(R"({
    "model": {"family": "homogeneous", "theta0": 1, "n": 10, "n_periods": 5}
  })"),
               config_error);
  EXPECT_THROW(parse_run_config(R"({
    "model": {"family": "homogeneous", "theta0": 1}
  })"),
               config_error);
  EXPECT_THROW(parse_run_config(R"({
    "model": {"family": "homogeneous", "theta0": 1, "n": 10},
    "alpha": 1.5
  })"),
               config_error);
  EXPECT_THROW(parse_run_config(R"({
    "model": {"family": "homogeneous", "theta0": 1, "n": 10},
    "n": [100, 50]
  })"),
               config_error);
}

TEST(RunConfigParsing, SweepAndListsAreHonored) {
  const RunConfig cfg = parse_run_config(R"({
    "model": {"family": "amplitude", "theta0": 1.0, "n": 100, "lambda": 0.5,
              "base": {"offset": 2.0, "amp": 1.0, "period": 1.0}},
    "n": [50, 100, 200],
    "u": [0.5, 1.0, 2.0],
    "alpha": 0.1,
    "reps": 12345,
    "master_seed": 42,
    "threshold": "second",
    "test": "np_mc",
    "statistic": "lr_alt",
    "threads": 2
  })");
  EXPECT_EQ(cfg.n_list, (std::vector<double>{50.0, 100.0, 200.0}));
  EXPECT_EQ(cfg.u_list, (std::vector<double>{0.5, 1.0, 2.0}));
  // The model is built at the front of the sweep.
  EXPECT_DOUBLE_EQ(cfg.model->domain_length(), 50.0);
  EXPECT_EQ(cfg.reps, 12345);
  EXPECT_EQ(cfg.master_seed.value(), 42u);
  EXPECT_EQ(cfg.threshold_kind, ThresholdKind::second_order);
  EXPECT_EQ(cfg.test_kind, TestKind::np_mc);
  EXPECT_EQ(cfg.statistic_kind, StatisticKind::lr_alt);
  EXPECT_EQ(cfg.threads, 2);
}

TEST(RunConfigParsing, FrequencyWindowFromPeriodCount) {
  const RunConfig cfg = parse_run_config(R"({
    "model": {"family": "frequency", "theta0": 2.0, "n_periods": 10,
              "lambda": 0.25,
              "base": {"offset": 2.0, "amp": 1.0, "period": 1.0}}
  })");
  // Signal period in x is base period / theta0.
  EXPECT_NEAR(cfg.model->domain_length(), 10.0 * 1.0 / 2.0, 1e-12);
}

TEST(RunConfigParsing, ResolvedJsonRoundTrips) {
  const std::string text = R"({
    "model": {"family": "exp-sine", "theta0": 1.0, "n_periods": 20},
    "u": [0.5, 1.0],
    "master_seed": 7,
    "reps": 200000
  })";
  const RunConfig cfg = parse_run_config(text);
  const std::string resolved = cfg.resolved_json();
  const RunConfig again = parse_run_config(resolved);
  EXPECT_EQ(again.resolved_json(), resolved);
  EXPECT_DOUBLE_EQ(again.model->domain_length(), cfg.model->domain_length());
  EXPECT_EQ(again.u_list, cfg.u_list);
  EXPECT_EQ(again.reps, cfg.reps);
}

TEST(RunConfigParsing, CustomFamilyUsesRegistry) {
  const RunConfig cfg = parse_run_config(R"({
    "model": {"family": "custom", "name": "power-cosine", "theta0": 1.2, "n": 50}
  })");
  EXPECT_EQ(cfg.model->name(), "power-cosine");
  EXPECT_THROW(parse_run_config(R"({
    "model": {"family": "custom", "name": "missing-model", "theta0": 1, "n": 50}
  })"),
               config_error);
  EXPECT_THROW(parse_run_config(R"({
    "model": {"family": "custom", "theta0": 1, "n": 50}
  })"),
               config_error);
}

TEST(RunConfigParsing, LoadsFromDisk) {
  const fs::path dir = temp_dir("config");
  const fs::path file = dir / "cfg.json";
  {
    std::ofstream out(file);
    out << R"({"model": {"family": "homogeneous", "theta0": 2.0, "n": 10}})";
  }
  const RunConfig cfg = load_run_config(file.string());
  EXPECT_DOUBLE_EQ(cfg.model->theta0(), 2.0);
  EXPECT_THROW(load_run_config((dir / "missing.json").string()), config_error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace poissonht
