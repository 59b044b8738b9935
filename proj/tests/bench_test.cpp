#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "nnscit/bench.hpp"
#include "nnscit/error.hpp"
#include "nnscit/stats.hpp"

namespace nnscit {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nnscit_bench_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_sweep(const fs::path& dir) {
  ExperimentConfig cfg = default_experiment();
  cfg.scenario.n = 150;
  cfg.dz_grid = {2, 3};
  cfg.scenario.dz = 2;
  cfg.test.variant = Variant::kMiOnly;
  cfg.test.repetitions = 19;
  cfg.replications = 4;
  cfg.output_dir = dir;
  return cfg;
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(Config, ParsesKeysCommentsAndLists) {
  ExperimentConfig cfg = default_experiment();
  std::istringstream in(
      "# comment\n"
      "family = chain-example-1   # trailing\n"
      "\n"
      "dz = 5, 10\n"
      "M=50\n"
      "variant = mi-only\n"
      "hidden = 32,16\n"
      "cross_fit = false\n"
      "seed = 12345678901\n");
  apply_config(cfg, in);
  EXPECT_EQ(cfg.scenario.family, Family::kChain);
  EXPECT_EQ(cfg.grid(), (std::vector<std::size_t>{5, 10}));
  EXPECT_EQ(cfg.test.repetitions, 50u);
  EXPECT_EQ(cfg.test.variant, Variant::kMiOnly);
  EXPECT_EQ(cfg.test.classifier.hidden, (std::vector<std::size_t>{32, 16}));
  EXPECT_FALSE(cfg.test.cross_fit);
  EXPECT_EQ(cfg.scenario.seed, 12345678901u);
  EXPECT_EQ(cfg.test.seed, 12345678901u);
}

TEST(Config, ListsEveryOffender) {
  ExperimentConfig cfg = default_experiment();
  std::istringstream in("bogus = 1\nn = abc\nM = 5\nno equals sign\nalpha = 0.1x\n");
  try {
    apply_config(cfg, in, "sweep.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("4 problems"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sweep.cfg:1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'bogus'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sweep.cfg:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sweep.cfg:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sweep.cfg:5"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("sweep.cfg:3"), std::string::npos) << msg;
  }
  EXPECT_THROW(apply_setting(cfg, "n", "-3"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "cross_fit", "maybe"), ConfigError);
  EXPECT_THROW(apply_setting(cfg, "family", "nope"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig cfg = default_experiment();
  apply_setting(cfg, "dz", "5,20,50");
  apply_setting(cfg, "learning_rate", "0.0003");
  apply_setting(cfg, "b", "1.7");
  apply_setting(cfg, "variant", "cmi-null");
  const std::string text = to_config_text(cfg);
  ExperimentConfig back = default_experiment();
  std::istringstream in(text);
  apply_config(back, in);
  EXPECT_EQ(to_config_text(back), text);
  EXPECT_EQ(back.test.classifier.learning_rate, 0.0003);
  EXPECT_EQ(back.scenario.b, 1.7);
}

TEST(Config, Validation) {
  ExperimentConfig cfg = default_experiment();
  cfg.replications = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = default_experiment();
  cfg.dz_grid = {5, 0};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Seeds, DistinctPerCell) {
  std::set<std::uint64_t> seen;
  for (std::size_t dz : {5, 20}) {
    for (std::size_t rep = 0; rep < 50; ++rep) {
      seen.insert(scenario_seed(7, dz, rep));
      seen.insert(test_seed(7, dz, rep));
    }
  }
  EXPECT_EQ(seen.size(), 200u);
}

TEST(Summary, Arithmetic) {
  std::vector<ReplicationRecord> records = {
      {5, 0, 0.01, 0.3, true, 10.0}, {5, 1, 0.50, 0.1, false, 20.0},
      {5, 2, 0.02, 0.2, true, 30.0}, {20, 0, 0.90, 0.0, false, 40.0}};
  const SweepReport report = summarize(records, {5, 20, 50});
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].replications, 3u);
  EXPECT_EQ(report.rows[0].rejections, 2u);
  EXPECT_DOUBLE_EQ(report.rows[0].rejection_rate, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(report.rows[0].mean_p, 0.53 / 3.0);
  EXPECT_DOUBLE_EQ(report.rows[0].mean_wall_time_ms, 20.0);
  EXPECT_DOUBLE_EQ(report.rows[1].rejection_rate, 0.0);
  EXPECT_EQ(report.rows[2].replications, 0u);
  for (const auto& row : report.rows) {
    const double scaled = row.rejection_rate * static_cast<double>(row.replications);
    EXPECT_DOUBLE_EQ(scaled, std::round(scaled));
  }
}

TEST(Sweep, WritesRecordsReportAndSummary) {
  const fs::path dir = fresh_dir("write");
  const ExperimentConfig cfg = small_sweep(dir);
  std::size_t callbacks = 0;
  const SweepReport report = run_sweep(cfg, [&](const ReplicationRecord& r) {
    ++callbacks;
    const double m = static_cast<double>(cfg.test.repetitions);
    const double grid_pos = r.p_value * (m + 1.0);
    EXPECT_NEAR(grid_pos, std::round(grid_pos), 1e-9);
    EXPECT_EQ(r.rejected, r.p_value < cfg.test.alpha);
  });
  EXPECT_EQ(callbacks, 8u);
  EXPECT_EQ(report.resumed, 0u);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(lines_of(dir / "records.jsonl").size(), 8u);
  const auto csv = lines_of(dir / "report.csv");
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0], "dz,replications,rejections,rejection_rate,mean_p,mean_wall_time_ms");
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "config.txt"));
}

TEST(Sweep, SingleReplicationGivesZeroOrOne) {
  const fs::path dir = fresh_dir("single");
  ExperimentConfig cfg = small_sweep(dir);
  cfg.replications = 1;
  cfg.dz_grid = {2};
  const SweepReport report = run_sweep(cfg);
  ASSERT_EQ(report.rows.size(), 1u);
  const double rate = report.rows[0].rejection_rate;
  EXPECT_TRUE(rate == 0.0 || rate == 1.0);
}

TEST(Sweep, ResumeMatchesFreshRun) {
  const fs::path fresh = fresh_dir("fresh");
  const SweepReport full = run_sweep(small_sweep(fresh));
  const auto full_records = lines_of(fresh / "records.jsonl");

  const fs::path partial = fresh_dir("partial");
  ExperimentConfig cfg = small_sweep(partial);
  cfg.replications = 2;
  run_sweep(cfg);
  // Simulate an interrupted writer: a torn final line.
  {
    std::ofstream out(partial / "records.jsonl", std::ios::app);
    out << "{\"dz\":3,\"replic";
  }
  cfg.replications = 4;
  cfg.threads = 3;
  const SweepReport resumed = run_sweep(cfg);
  EXPECT_EQ(resumed.resumed, 4u);

  std::map<std::pair<std::size_t, std::size_t>, double> a;
  std::map<std::pair<std::size_t, std::size_t>, double> b;
  auto collect = [](const fs::path& path, auto& into) {
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
      const auto j = nlohmann::json::parse(line);
      into[{j["dz"].get<std::size_t>(), j["replication"].get<std::size_t>()}] =
          j["statistic"].get<double>();
    }
  };
  collect(fresh / "records.jsonl", a);
  collect(partial / "records.jsonl", b);
  EXPECT_EQ(a, b);
  ASSERT_EQ(full.rows.size(), resumed.rows.size());
  for (std::size_t i = 0; i < full.rows.size(); ++i) {
    EXPECT_EQ(full.rows[i].rejections, resumed.rows[i].rejections);
    EXPECT_DOUBLE_EQ(full.rows[i].mean_p, resumed.rows[i].mean_p);
  }
  EXPECT_EQ(full_records.size(), 8u);
}

TEST(Sweep, RefusesForeignOutputDirectory) {
  const fs::path dir = fresh_dir("foreign");
  ExperimentConfig cfg = small_sweep(dir);
  cfg.replications = 1;
  run_sweep(cfg);
  cfg.scenario.n = 151;
  EXPECT_THROW(run_sweep(cfg), ConfigError);
}

TEST(Gof, Gof2SamplerTracksOracle) {
  GofConfig cfg;
  cfg.family = Family::kGof2;
  cfg.seed = 0;
  const GofReport r = run_gof(cfg);
  EXPECT_EQ(r.generated.size(), 500u);
  EXPECT_EQ(r.oracle.size(), 500u);
  EXPECT_LT(r.ks_oracle, 0.1);
}

TEST(Gof, BinsAndCounts) {
  GofConfig cfg;
  cfg.n_reference = 200;
  cfg.n_query = 300;
  cfg.dz = 3;
  const GofReport r = run_gof(cfg);
  ASSERT_EQ(r.bins.size(), 25u);
  std::size_t gen = 0;
  std::size_t tru = 0;
  for (std::size_t b = 0; b < r.bins.size(); ++b) {
    EXPECT_NEAR(r.bins[b].left, 0.04 * static_cast<double>(b), 1e-12);
    EXPECT_NEAR(r.bins[b].right, 0.04 * static_cast<double>(b + 1), 1e-12);
    gen += r.bins[b].count_generated;
    tru += r.bins[b].count_true;
  }
  EXPECT_EQ(gen, 300u);
  EXPECT_EQ(tru, 300u);
  double l1 = 0.0;
  for (const auto& b : r.bins) {
    l1 += std::abs(static_cast<double>(b.count_generated) - static_cast<double>(b.count_true)) / 300.0;
  }
  EXPECT_NEAR(r.l1_distance, l1, 1e-12);
  EXPECT_NEAR(r.ks_truth, ks_statistic(r.generated, r.truth), 0.0);
}

// Under gof-1 X is independent of Z, so the 1-NN draws are reference X values
// with weights w_j fixed by Z alone. Given w, a bin count has variance
// p (1 - p) sum_j w_j^2; standardized deviations should have unit variance.
TEST(Gof, Gof1CountsMatchWeightedBinomial) {
  for (std::size_t dz : {5u, 50u}) {
    double sum_sq = 0.0;
    std::size_t cells = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      GofConfig cfg;
      cfg.dz = dz;
      cfg.seed = seed;
      const GofReport r = run_gof(cfg);
      std::map<double, double> weight;
      for (const double v : r.generated) weight[v] += 1.0;
      double sum_w2 = 0.0;
      for (const auto& [value, w] : weight) sum_w2 += w * w;
      const double p = 1.0 / static_cast<double>(cfg.bins);
      const double sd = std::sqrt(p * (1.0 - p) * sum_w2);
      for (const auto& b : r.bins) {
        const double z = (static_cast<double>(b.count_generated) - p * 500.0) / sd;
        sum_sq += z * z;
        ++cells;
      }
    }
    const double var = sum_sq / static_cast<double>(cells);
    EXPECT_GT(var, 0.8) << "dz=" << dz;
    EXPECT_LT(var, 1.25) << "dz=" << dz;
  }
}

TEST(Gof, Validation) {
  GofConfig cfg;
  cfg.n_query = 0;
  EXPECT_THROW(run_gof(cfg), ConfigError);
  cfg = GofConfig{};
  cfg.family = Family::kChain;
  EXPECT_THROW(run_gof(cfg), ConfigError);
  cfg = GofConfig{};
  cfg.bins = 0;
  EXPECT_THROW(run_gof(cfg), ConfigError);
}

TEST(Timing, OneRowPerGridEntryAndOrdering) {
  TimingConfig cfg;
  cfg.dz_grid = {2, 5};
  cfg.n = 300;
  cfg.repetitions = 20;
  const auto rows = run_timing(cfg);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].dz, 2u);
  EXPECT_EQ(rows[1].dz, 5u);
  for (const auto& r : rows) EXPECT_LT(r.mi_null_ms, r.cmi_null_ms);
  std::ostringstream out;
  write_timing_csv(out, rows);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  cfg.dz_grid.clear();
  EXPECT_THROW(run_timing(cfg), ConfigError);
}

}  // namespace
}  // namespace nnscit
