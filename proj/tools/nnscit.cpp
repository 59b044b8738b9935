// Command-line front end: test, bench, gof, timing, generate.
#include <CLI11.hpp>
#include <deque>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>

#include "nnscit/bench.hpp"
#include "nnscit/crt.hpp"
#include "nnscit/dataset.hpp"
#include "nnscit/error.hpp"
#include "nnscit/synthgen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitBadInput = 2;

// Flag values are kept as text and routed through the config parser so that
// flags and config files accept exactly the same syntax.
struct Overrides {
  std::deque<std::pair<std::string, std::optional<std::string>>> flags;
  std::vector<std::string> settings;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    flags.emplace_back(key, std::nullopt);
    app->add_option(flag, flags.back().second, help);
  }

  void apply(nnscit::ExperimentConfig& cfg) const {
    std::string problems;
    auto set = [&](const std::string& key, const std::string& value) {
      try {
        nnscit::apply_setting(cfg, key, value);
      } catch (const nnscit::ConfigError& e) {
        problems += std::string("\n  ") + e.what();
      }
    };
    for (const auto& [key, value] : flags) {
      if (value) set(key, *value);
    }
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        problems += "\n  --set expects key=value, got '" + s + "'";
        continue;
      }
      set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!problems.empty()) throw nnscit::ConfigError("invalid options:" + problems);
  }
};

void add_test_flags(CLI::App* app, Overrides& o) {
  o.add(app, "-M,--repetitions", "M", "Monte Carlo repetitions");
  o.add(app, "-k,--neighbors", "k", "k for the k-NN mutual information");
  o.add(app, "--alpha", "alpha", "significance level");
  o.add(app, "--seed", "seed", "master seed");
  o.add(app, "--variant", "variant", "cmi-null, mi-null or mi-only");
  o.add(app, "--cross-fit", "cross_fit", "rotate classifier folds (true/false)");
  o.add(app, "--epochs", "epochs", "classifier epochs");
  o.add(app, "--batch-size", "batch_size", "classifier mini-batch size");
  o.add(app, "--learning-rate", "learning_rate", "Adam learning rate");
  o.add(app, "--l2", "l2_penalty", "L2 penalty");
  o.add(app, "--hidden", "hidden", "hidden widths, comma separated");
  o.add(app, "--validation-fraction", "validation_fraction", "early-stopping validation share");
  o.add(app, "--patience", "patience", "early-stopping patience");
  app->add_option("--set", o.settings, "extra key=value settings")->take_all();
}

void add_scenario_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--family", "family", "scenario family");
  o.add(app, "--hypothesis", "hypothesis", "H0 or H1");
  o.add(app, "-n,--rows", "n", "rows per dataset");
  o.add(app, "--dz", "dz", "Z dimension (bench: comma-separated grid)");
  o.add(app, "--b", "b", "X -> Y strength under H1");
  o.add(app, "--noise-sd", "noise_sd", "additive noise sd");
  o.add(app, "--partial-correlation", "partial_correlation", "gaussian-oracle partial correlation");
  o.add(app, "--coupling", "coupling", "gaussian-oracle Z coupling");
}

nlohmann::json result_json(const nnscit::CrtResult& r) {
  return {{"p_value", r.p_value},
          {"statistic", r.observed},
          {"null_stats", r.null_stats},
          {"decision", std::string(nnscit::to_string(r.decision))},
          {"variant", std::string(nnscit::to_string(r.variant))},
          {"seed", r.seed},
          {"wall_time_ms", r.wall_time.count()}};
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw nnscit::ConfigError("cannot write '" + path + "'");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest-neighbor sampling conditional independence test"};
  app.require_subcommand(1);

  // test
  auto* test = app.add_subcommand("test", "Test X _||_ Y | Z on a CSV file");
  std::string data_path;
  std::string test_config;
  std::string result_path = "nnscit-result.json";
  std::size_t test_threads = 1;
  Overrides test_flags;
  test->add_option("data", data_path, "CSV with columns x, y, z1..zd")->required();
  test->add_option("-c,--config", test_config, "key = value config file");
  test->add_option("-o,--result", result_path, "result record (JSON)");
  test->add_option("-j,--threads", test_threads, "worker threads (0 = all cores)");
  add_test_flags(test, test_flags);

  // bench
  auto* bench = app.add_subcommand("bench", "Replication sweep over a d_Z grid");
  std::string bench_config;
  Overrides bench_flags;
  bench->add_option("config", bench_config, "key = value config file");
  add_test_flags(bench, bench_flags);
  add_scenario_flags(bench, bench_flags);
  bench_flags.add(bench, "-r,--replications", "replications", "replications per d_Z");
  bench_flags.add(bench, "-o,--output-dir", "output_dir", "output directory");
  bench_flags.add(bench, "-j,--threads", "threads", "worker threads (0 = all cores)");

  // gof
  auto* gof = app.add_subcommand("gof", "Histogram of 1-NN samples against true samples");
  nnscit::GofConfig gof_cfg;
  std::string gof_family = "gof-1";
  std::string gof_output = "gof-histogram.csv";
  gof->add_option("--family", gof_family, "gof-1 or gof-2");
  gof->add_option("--n-reference", gof_cfg.n_reference, "reference rows");
  gof->add_option("--n-query", gof_cfg.n_query, "query rows");
  gof->add_option("--dz", gof_cfg.dz, "Z dimension");
  gof->add_option("--bins", gof_cfg.bins, "histogram bins");
  gof->add_option("--seed", gof_cfg.seed, "seed");
  gof->add_option("-o,--output", gof_output, "histogram CSV");

  // timing
  auto* timing = app.add_subcommand("timing", "Wall time of one test per d_Z");
  nnscit::TimingConfig timing_cfg;
  std::string timing_family = "postnonlinear-II";
  std::string timing_output;
  timing->add_option("--dz", timing_cfg.dz_grid, "d_Z grid")->delimiter(',');
  timing->add_option("--family", timing_family, "scenario family");
  timing->add_option("-n,--rows", timing_cfg.n, "rows per dataset");
  timing->add_option("-M,--repetitions", timing_cfg.repetitions, "Monte Carlo repetitions");
  timing->add_option("--seed", timing_cfg.seed, "seed");
  timing->add_option("-o,--output", timing_output, "timing CSV (default: stdout)");

  // generate
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  std::string generate_output;
  Overrides generate_flags;
  generate->add_option("-o,--output", generate_output, "CSV path")->required();
  add_scenario_flags(generate, generate_flags);
  generate_flags.add(generate, "--seed", "seed", "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*test) {
      nnscit::ExperimentConfig cfg = nnscit::default_experiment();
      if (!test_config.empty()) cfg = nnscit::load_config(test_config);
      test_flags.apply(cfg);
      cfg.test.threads = test_threads;
      const nnscit::Dataset data = nnscit::load_csv(data_path);
      const nnscit::CrtResult result = nnscit::run_nnscit(data, cfg.test);
      std::cout << std::setprecision(6) << "p-value    " << result.p_value << '\n'
                << "statistic  " << result.observed << '\n'
                << "decision   " << nnscit::to_string(result.decision) << '\n'
                << "variant    " << nnscit::to_string(result.variant) << '\n'
                << "wall time  " << result.wall_time.count() << " ms\n";
      open_output(result_path) << result_json(result).dump(2) << '\n';
    } else if (*bench) {
      nnscit::ExperimentConfig cfg = nnscit::default_experiment();
      if (!bench_config.empty()) cfg = nnscit::load_config(bench_config);
      bench_flags.apply(cfg);
      const auto report = nnscit::run_sweep(cfg, [](const nnscit::ReplicationRecord& r) {
        std::cerr << "dz=" << r.dz << " rep=" << r.replication << " p=" << r.p_value << '\n';
      });
      if (report.resumed > 0) std::cerr << "resumed " << report.resumed << " records\n";
      nnscit::write_report_csv(std::cout, report);
    } else if (*gof) {
      gof_cfg.family = nnscit::parse_family(gof_family);
      const auto report = nnscit::run_gof(gof_cfg);
      auto out = open_output(gof_output);
      nnscit::write_histogram_csv(out, report);
      std::cout << nlohmann::json{{"family", gof_family},
                                  {"l1_distance", report.l1_distance},
                                  {"ks_oracle", report.ks_oracle},
                                  {"ks_truth", report.ks_truth},
                                  {"histogram", gof_output}}
                       .dump(2)
                << '\n';
    } else if (*timing) {
      timing_cfg.family = nnscit::parse_family(timing_family);
      const auto rows = nnscit::run_timing(timing_cfg);
      if (timing_output.empty()) {
        nnscit::write_timing_csv(std::cout, rows);
      } else {
        auto out = open_output(timing_output);
        nnscit::write_timing_csv(out, rows);
      }
    } else if (*generate) {
      nnscit::ExperimentConfig cfg = nnscit::default_experiment();
      generate_flags.apply(cfg);
      nnscit::save_csv(generate_output, nnscit::generate(cfg.scenario));
    }
  } catch (const nnscit::IngestionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const nnscit::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const nnscit::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const nnscit::TooFewSamplesError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const nnscit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitOk;
}
