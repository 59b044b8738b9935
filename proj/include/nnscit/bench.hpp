#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nnscit/crt.hpp"
#include "nnscit/synthgen.hpp"

namespace nnscit {

/// One replication sweep: a scenario family run over a d_Z grid.
struct ExperimentConfig {
  ScenarioSpec scenario;
  /// d_Z values to sweep; empty means just `scenario.dz`.
  std::vector<std::size_t> dz_grid;
  TestConfig test;
  std::size_t replications = 100;
  std::filesystem::path output_dir = "nnscit-out";
  /// Workers across replications; each test then runs single-threaded.
  std::size_t threads = 1;

  void validate() const;
  std::vector<std::size_t> grid() const;
};

/// Desk-scale defaults: n = 600, M = 100, 100 replications.
ExperimentConfig default_experiment();

/// Sets one `key = value` pair; throws ConfigError on an unknown key or a
/// malformed value.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines, `#` comments. All bad keys and values are collected
/// and reported together.
void apply_config(ExperimentConfig& cfg, std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` dump; `apply_config` on it reproduces `cfg`.
std::string to_config_text(const ExperimentConfig& cfg);

/// Per-replication seeds derived from the master seed.
std::uint64_t scenario_seed(std::uint64_t master, std::size_t dz, std::size_t replication);
std::uint64_t test_seed(std::uint64_t master, std::size_t dz, std::size_t replication);

struct ReplicationRecord {
  std::size_t dz = 0;
  std::size_t replication = 0;
  double p_value = 1.0;
  double statistic = 0.0;
  bool rejected = false;
  double wall_time_ms = 0.0;
};

struct SweepRow {
  std::size_t dz = 0;
  std::size_t replications = 0;
  std::size_t rejections = 0;
  double rejection_rate = 0.0;  // rejections / replications
  double mean_p = 0.0;
  double mean_wall_time_ms = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::size_t resumed = 0;  // records reused from an earlier partial run
};

/// Runs (or resumes) a sweep. Records go to `output_dir/records.jsonl` one
/// line per replication as they finish; a rerun with the same configuration
/// skips replications already on disk. Also writes `report.csv` and
/// `summary.json`.
SweepReport run_sweep(const ExperimentConfig& cfg,
                      const std::function<void(const ReplicationRecord&)>& on_record = {});

/// Summary rows from records, in grid order.
SweepReport summarize(const std::vector<ReplicationRecord>& records,
                      const std::vector<std::size_t>& grid);

void write_report_csv(std::ostream& out, const SweepReport& report);

struct GofConfig {
  Family family = Family::kGof1;
  std::size_t n_reference = 500;
  std::size_t n_query = 500;
  std::size_t dz = 50;
  std::size_t bins = 25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct HistogramBin {
  double left;
  double right;
  std::size_t count_generated;
  std::size_t count_true;
};

struct GofReport {
  std::vector<HistogramBin> bins;
  std::vector<double> generated;  // 1-NN draws at the query Z
  std::vector<double> truth;      // query-row X
  std::vector<double> oracle;     // fresh draws from the true X | Z at the query Z
  double l1_distance = 0.0;       // sum |freq_generated - freq_true| over bins
  double ks_oracle = 0.0;         // KS(generated, oracle)
  double ks_truth = 0.0;          // KS(generated, truth)
};

/// 1-NN samples against true samples on a goodness-of-fit scenario. Both
/// samples are min-max normalized to [0, 1] before binning.
GofReport run_gof(const GofConfig& cfg);

void write_histogram_csv(std::ostream& out, const GofReport& report);

struct TimingRow {
  std::size_t dz = 0;
  double mi_null_ms = 0.0;
  double cmi_null_ms = 0.0;
};

struct TimingConfig {
  std::vector<std::size_t> dz_grid = {5, 20, 50};
  Family family = Family::kPostNonlinearII;
  std::size_t n = 600;
  std::size_t repetitions = 20;
  std::uint64_t seed = 0;
  TrainConfig classifier;

  void validate() const;
};

/// Wall time of one test per d_Z for the default variant and the variant
/// that trains classifiers for every repetition.
std::vector<TimingRow> run_timing(const TimingConfig& cfg);

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows);

}  // namespace nnscit
