#include "nnscit/bench.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <json.hpp>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "nnscit/error.hpp"
#include "nnscit/nn_index.hpp"
#include "nnscit/parallel.hpp"
#include "nnscit/stats.hpp"

namespace nnscit {
namespace {

constexpr std::uint64_t kScenarioTag = 0x5ce7;
constexpr std::uint64_t kTestTag = 0x7e57;
constexpr std::uint64_t kGofSplitStream = 0x90f;
constexpr std::uint64_t kGofOracleStream = 0x90f + 1;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": invalid value '" + text + "'");
  }
  return value;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  if (!text.empty() && text[0] == '-') throw ConfigError(key + ": invalid value '" + text + "'");
  return parse_number<std::size_t>(key, text);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": invalid boolean '" + text + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string join(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(values[i]);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

// Settings that change the statistical output of a replication.
std::string fingerprint(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  copy.replications = 1;
  copy.dz_grid = {1};
  copy.output_dir = ".";
  copy.threads = 1;
  return to_config_text(copy);
}

nlohmann::json to_json(const ReplicationRecord& r) {
  return {{"dz", r.dz},
          {"replication", r.replication},
          {"p_value", r.p_value},
          {"statistic", r.statistic},
          {"decision", r.rejected ? "reject-H0" : "accept-H0"},
          {"wall_time_ms", r.wall_time_ms}};
}

std::optional<ReplicationRecord> parse_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    ReplicationRecord r;
    r.dz = j.at("dz").get<std::size_t>();
    r.replication = j.at("replication").get<std::size_t>();
    r.p_value = j.at("p_value").get<double>();
    r.statistic = j.at("statistic").get<double>();
    r.rejected = j.at("decision").get<std::string>() == "reject-H0";
    r.wall_time_ms = j.at("wall_time_ms").get<double>();
    return r;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

std::vector<double> min_max_normalized(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.5);
  if (*hi > *lo) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / (*hi - *lo);
  }
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 1) throw ConfigError("experiment: replications must be >= 1");
  for (const auto d : dz_grid) {
    if (d == 0) throw ConfigError("experiment: d_Z grid entries must be positive");
  }
  scenario.validate();
  test.validate();
}

std::vector<std::size_t> ExperimentConfig::grid() const {
  return dz_grid.empty() ? std::vector<std::size_t>{scenario.dz} : dz_grid;
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  cfg.scenario.n = 600;
  cfg.test.repetitions = 100;
  cfg.replications = 100;
  return cfg;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  ScenarioSpec& s = cfg.scenario;
  TestConfig& t = cfg.test;
  TrainConfig& c = cfg.test.classifier;
  if (key == "family") s.family = parse_family(value);
  else if (key == "hypothesis") s.hypothesis = parse_hypothesis(value);
  else if (key == "n") s.n = parse_count(key, value);
  else if (key == "dz") {
    cfg.dz_grid = parse_list(key, value);
    s.dz = cfg.dz_grid.front();
  }
  else if (key == "b") s.b = parse_number<double>(key, value);
  else if (key == "noise_sd") s.noise_sd = parse_number<double>(key, value);
  else if (key == "partial_correlation") s.partial_correlation = parse_number<double>(key, value);
  else if (key == "coupling") s.coupling = parse_number<double>(key, value);
  else if (key == "seed") {
    s.seed = parse_number<std::uint64_t>(key, value);
    t.seed = s.seed;
  }
  else if (key == "M" || key == "repetitions") t.repetitions = parse_count(key, value);
  else if (key == "k") t.k = parse_count(key, value);
  else if (key == "alpha") t.alpha = parse_number<double>(key, value);
  else if (key == "variant") t.variant = parse_variant(value);
  else if (key == "cross_fit") t.cross_fit = parse_bool(key, value);
  else if (key == "epochs") c.epochs = parse_count(key, value);
  else if (key == "batch_size") c.batch_size = parse_count(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
  else if (key == "l2_penalty") c.l2_penalty = parse_number<double>(key, value);
  else if (key == "hidden") c.hidden = parse_list(key, value);
  else if (key == "validation_fraction") c.validation_fraction = parse_number<double>(key, value);
  else if (key == "patience") c.patience = parse_count(key, value);
  else if (key == "replications") cfg.replications = parse_count(key, value);
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "threads") cfg.threads = parse_count(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

void apply_config(ExperimentConfig& cfg, std::istream& in, const std::string& source) {
  std::vector<std::string> problems;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) {
      problems.push_back(where + "expected 'key = value', got '" + body + "'");
      continue;
    }
    try {
      apply_setting(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      problems.push_back(where + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration (" + std::to_string(problems.size()) + " problem" +
                      (problems.size() == 1 ? "" : "s") + "):";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  ExperimentConfig cfg = default_experiment();
  apply_config(cfg, in, path.string());
  return cfg;
}

std::string to_config_text(const ExperimentConfig& cfg) {
  const ScenarioSpec& s = cfg.scenario;
  const TestConfig& t = cfg.test;
  const TrainConfig& c = cfg.test.classifier;
  std::ostringstream out;
  out << "family = " << to_string(s.family) << '\n'
      << "hypothesis = " << to_string(s.hypothesis) << '\n'
      << "n = " << s.n << '\n'
      << "dz = " << join(cfg.grid()) << '\n'
      << "b = " << format_double(s.b) << '\n'
      << "noise_sd = " << format_double(s.noise_sd) << '\n'
      << "partial_correlation = " << format_double(s.partial_correlation) << '\n'
      << "coupling = " << format_double(s.coupling) << '\n'
      << "seed = " << s.seed << '\n'
      << "M = " << t.repetitions << '\n'
      << "k = " << t.k << '\n'
      << "alpha = " << format_double(t.alpha) << '\n'
      << "variant = " << to_string(t.variant) << '\n'
      << "cross_fit = " << (t.cross_fit ? "true" : "false") << '\n'
      << "epochs = " << c.epochs << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "learning_rate = " << format_double(c.learning_rate) << '\n'
      << "l2_penalty = " << format_double(c.l2_penalty) << '\n'
      << "hidden = " << join(c.hidden) << '\n'
      << "validation_fraction = " << format_double(c.validation_fraction) << '\n'
      << "patience = " << c.patience << '\n'
      << "replications = " << cfg.replications << '\n'
      << "output_dir = " << cfg.output_dir.string() << '\n'
      << "threads = " << cfg.threads << '\n';
  return out.str();
}

std::uint64_t scenario_seed(std::uint64_t master, std::size_t dz, std::size_t replication) {
  return mix_seed(mix_seed(mix_seed(master, kScenarioTag), dz), replication);
}

std::uint64_t test_seed(std::uint64_t master, std::size_t dz, std::size_t replication) {
  return mix_seed(mix_seed(mix_seed(master, kTestTag), dz), replication);
}

SweepReport summarize(const std::vector<ReplicationRecord>& records,
                      const std::vector<std::size_t>& grid) {
  SweepReport report;
  for (const auto dz : grid) {
    SweepRow row;
    row.dz = dz;
    double p_sum = 0.0;
    double t_sum = 0.0;
    for (const auto& r : records) {
      if (r.dz != dz) continue;
      ++row.replications;
      row.rejections += r.rejected ? 1 : 0;
      p_sum += r.p_value;
      t_sum += r.wall_time_ms;
    }
    if (row.replications > 0) {
      const auto reps = static_cast<double>(row.replications);
      row.rejection_rate = static_cast<double>(row.rejections) / reps;
      row.mean_p = p_sum / reps;
      row.mean_wall_time_ms = t_sum / reps;
    }
    report.rows.push_back(row);
  }
  return report;
}

void write_report_csv(std::ostream& out, const SweepReport& report) {
  out << "dz,replications,rejections,rejection_rate,mean_p,mean_wall_time_ms\n";
  for (const auto& r : report.rows) {
    out << r.dz << ',' << r.replications << ',' << r.rejections << ','
        << format_double(r.rejection_rate) << ',' << format_double(r.mean_p) << ','
        << format_double(r.mean_wall_time_ms) << '\n';
  }
}

SweepReport run_sweep(const ExperimentConfig& cfg,
                      const std::function<void(const ReplicationRecord&)>& on_record) {
  cfg.validate();
  const auto grid = cfg.grid();
  std::filesystem::create_directories(cfg.output_dir);
  const auto config_path = cfg.output_dir / "config.txt";
  const auto records_path = cfg.output_dir / "records.jsonl";
  const std::string print = fingerprint(cfg);

  std::map<std::pair<std::size_t, std::size_t>, ReplicationRecord> done;
  if (std::filesystem::exists(records_path)) {
    std::ifstream prev_cfg(config_path);
    std::stringstream prev;
    prev << prev_cfg.rdbuf();
    ExperimentConfig earlier = default_experiment();
    try {
      apply_config(earlier, prev, config_path.string());
    } catch (const ConfigError&) {
      throw ConfigError("output directory '" + cfg.output_dir.string() +
                        "' holds records without a readable config.txt");
    }
    if (fingerprint(earlier) != print) {
      throw ConfigError("output directory '" + cfg.output_dir.string() +
                        "' holds records from a different experiment");
    }
    std::ifstream in(records_path);
    std::string line;
    while (std::getline(in, line)) {
      if (const auto r = parse_record(line)) done[{r->dz, r->replication}] = *r;
    }
  }
  {
    // Rewrite so a torn final line from an interrupted run is dropped.
    std::ofstream out(records_path, std::ios::trunc);
    for (const auto& [key, r] : done) out << to_json(r).dump() << '\n';
    std::ofstream cfg_out(config_path, std::ios::trunc);
    cfg_out << to_config_text(cfg);
  }

  struct Job {
    std::size_t dz;
    std::size_t replication;
  };
  std::vector<Job> jobs;
  std::size_t resumed = 0;
  for (const auto dz : grid) {
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      if (done.count({dz, rep})) {
        ++resumed;
      } else {
        jobs.push_back({dz, rep});
      }
    }
  }

  std::ofstream out(records_path, std::ios::app);
  std::mutex writer;
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    const Job job = jobs[j];
    ScenarioSpec spec = cfg.scenario;
    spec.dz = job.dz;
    spec.seed = scenario_seed(cfg.scenario.seed, job.dz, job.replication);
    TestConfig test = cfg.test;
    test.seed = test_seed(cfg.test.seed, job.dz, job.replication);
    test.threads = 1;
    const CrtResult result = run_nnscit(generate(spec), test);
    ReplicationRecord record{job.dz, job.replication, result.p_value, result.observed,
                             result.decision == Decision::kRejectH0, result.wall_time.count()};
    std::lock_guard lock(writer);
    out << to_json(record).dump() << '\n' << std::flush;
    done[{job.dz, job.replication}] = record;
    if (on_record) on_record(record);
  });

  std::vector<ReplicationRecord> selected;
  for (const auto& [key, r] : done) {
    if (std::find(grid.begin(), grid.end(), r.dz) != grid.end() && r.replication < cfg.replications) {
      selected.push_back(r);
    }
  }
  SweepReport report = summarize(selected, grid);
  report.resumed = resumed;

  std::ofstream csv(cfg.output_dir / "report.csv", std::ios::trunc);
  write_report_csv(csv, report);
  nlohmann::json summary;
  summary["family"] = std::string(to_string(cfg.scenario.family));
  summary["hypothesis"] = std::string(to_string(cfg.scenario.hypothesis));
  summary["variant"] = std::string(to_string(cfg.test.variant));
  summary["alpha"] = cfg.test.alpha;
  summary["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    summary["rows"].push_back({{"dz", r.dz},
                               {"replications", r.replications},
                               {"rejections", r.rejections},
                               {"rejection_rate", r.rejection_rate},
                               {"mean_p", r.mean_p},
                               {"mean_wall_time_ms", r.mean_wall_time_ms}});
  }
  std::ofstream js(cfg.output_dir / "summary.json", std::ios::trunc);
  js << summary.dump(2) << '\n';
  return report;
}

void GofConfig::validate() const {
  if (family != Family::kGof1 && family != Family::kGof2) {
    throw ConfigError("gof: family must be gof-1 or gof-2");
  }
  if (n_reference == 0 || n_query == 0) {
    throw ConfigError("gof: reference and query sample sizes must be positive");
  }
  if (dz == 0) throw ConfigError("gof: d_Z must be positive");
  if (bins == 0) throw ConfigError("gof: bin count must be positive");
}

GofReport run_gof(const GofConfig& cfg) {
  cfg.validate();
  ScenarioSpec spec;
  spec.family = cfg.family;
  spec.hypothesis = Hypothesis::kH0;
  spec.n = cfg.n_reference + cfg.n_query;
  spec.dz = cfg.dz;
  spec.seed = cfg.seed;
  const ScenarioModel model = make_model(spec);
  const Dataset data = generate(model);

  Rng split_rng(cfg.seed, kGofSplitStream);
  std::vector<std::size_t> order(data.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  split_rng.shuffle(std::span(order));
  const std::span<const std::size_t> ref_rows(order.data(), cfg.n_reference);
  const std::span<const std::size_t> query_rows(order.data() + cfg.n_reference, cfg.n_query);
  const Dataset reference = data.select(ref_rows);
  const Dataset query = data.select(query_rows);

  GofReport report;
  report.generated = sample_1nn(build_index(reference), query);
  report.truth.assign(query.x().begin(), query.x().end());
  const ConditionalSampler oracle = oracle_conditional_sampler(model);
  Rng oracle_rng(cfg.seed, kGofOracleStream);
  report.oracle.resize(query.n());
  for (std::size_t i = 0; i < query.n(); ++i) report.oracle[i] = oracle(query.z_row(i), oracle_rng);

  const auto gen = histogram(min_max_normalized(report.generated), cfg.bins, 0.0, 1.0);
  const auto tru = histogram(min_max_normalized(report.truth), cfg.bins, 0.0, 1.0);
  const double width = 1.0 / static_cast<double>(cfg.bins);
  for (std::size_t b = 0; b < cfg.bins; ++b) {
    const double right = b + 1 == cfg.bins ? 1.0 : static_cast<double>(b + 1) * width;
    report.bins.push_back({static_cast<double>(b) * width, right, gen[b], tru[b]});
    report.l1_distance += std::abs(static_cast<double>(gen[b]) / static_cast<double>(cfg.n_query) -
                                   static_cast<double>(tru[b]) / static_cast<double>(cfg.n_query));
  }
  report.ks_oracle = ks_statistic(report.generated, report.oracle);
  report.ks_truth = ks_statistic(report.generated, report.truth);
  return report;
}

void write_histogram_csv(std::ostream& out, const GofReport& report) {
  out << "bin_left,bin_right,count_generated,count_true\n";
  for (const auto& b : report.bins) {
    out << format_double(b.left) << ',' << format_double(b.right) << ',' << b.count_generated
        << ',' << b.count_true << '\n';
  }
}

void TimingConfig::validate() const {
  if (dz_grid.empty()) throw ConfigError("timing: the d_Z grid is empty");
  for (const auto d : dz_grid) {
    if (d == 0) throw ConfigError("timing: d_Z grid entries must be positive");
  }
  if (repetitions < 1) throw ConfigError("timing: M must be >= 1");
  if (n < kMinTestRows) {
    throw ConfigError("timing: n must be at least " + std::to_string(kMinTestRows));
  }
  classifier.validate();
}

std::vector<TimingRow> run_timing(const TimingConfig& cfg) {
  cfg.validate();
  std::vector<TimingRow> rows;
  for (const auto dz : cfg.dz_grid) {
    ScenarioSpec spec;
    spec.family = cfg.family;
    spec.hypothesis = Hypothesis::kH0;
    spec.n = cfg.n;
    spec.dz = dz;
    spec.seed = mix_seed(cfg.seed, dz);
    const Dataset data = generate(spec);
    TestConfig test;
    test.repetitions = cfg.repetitions;
    test.seed = cfg.seed;
    test.classifier = cfg.classifier;
    test.variant = Variant::kMiNull;
    const double mi = run_nnscit(data, test).wall_time.count();
    test.variant = Variant::kCmiNull;
    const double cmi = run_nnscit(data, test).wall_time.count();
    rows.push_back({dz, mi, cmi});
  }
  return rows;
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows) {
  out << "dz,mi_null_ms,cmi_null_ms,ratio\n";
  for (const auto& r : rows) {
    out << r.dz << ',' << format_double(r.mi_null_ms) << ',' << format_double(r.cmi_null_ms) << ','
        << format_double(r.cmi_null_ms > 0 ? r.mi_null_ms / r.cmi_null_ms : 0.0) << '\n';
  }
}

}  // namespace nnscit
