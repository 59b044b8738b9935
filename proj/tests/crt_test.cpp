#include <gtest/gtest.h>

#include <cmath>

#include "nnscit/crt.hpp"
#include "nnscit/error.hpp"
#include "nnscit/stats.hpp"

namespace nnscit {
namespace {

ScenarioSpec scenario(Family family, Hypothesis h, std::size_t n, std::size_t dz,
                      std::uint64_t seed) {
  ScenarioSpec s;
  s.family = family;
  s.hypothesis = h;
  s.n = n;
  s.dz = dz;
  s.seed = seed;
  return s;
}

TestConfig mi_only(std::size_t reps, std::uint64_t seed) {
  TestConfig cfg;
  cfg.variant = Variant::kMiOnly;
  cfg.repetitions = reps;
  cfg.seed = seed;
  return cfg;
}

TEST(PValue, CountsTiesAgainstRejection) {
  const std::vector<double> null = {0.1, 0.2, 0.2, 0.3};
  EXPECT_DOUBLE_EQ(crt_p_value(null, 0.2), 4.0 / 5);
  EXPECT_DOUBLE_EQ(crt_p_value(null, 0.25), 2.0 / 5);
  EXPECT_DOUBLE_EQ(crt_p_value(null, 1.0), 1.0 / 5);
  EXPECT_DOUBLE_EQ(crt_p_value(null, -1.0), 1.0);
  EXPECT_DOUBLE_EQ(crt_p_value({}, 0.0), 1.0);
}

TEST(PValue, GridAndMonotonicity) {
  Rng rng(1);
  std::vector<double> null(99);
  for (double& v : null) v = rng.normal();
  double previous = 1.0;
  for (double t = -4; t <= 4; t += 0.01) {
    const double p = crt_p_value(null, t);
    const double scaled = p * 100;
    EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
    EXPECT_GE(p, 0.01);
    EXPECT_LE(p, 1.0);
    EXPECT_LE(p, previous);
    previous = p;
  }
}

TEST(Crt, ResultFields) {
  const Dataset d = generate(scenario(Family::kPostNonlinearI, Hypothesis::kH0, 150, 3, 2));
  const CrtResult r = run_nnscit(d, mi_only(40, 3));
  EXPECT_EQ(r.null_stats.size(), 40u);
  EXPECT_EQ(r.p_value, crt_p_value(r.null_stats, r.observed));
  EXPECT_EQ(r.decision, r.p_value < 0.05 ? Decision::kRejectH0 : Decision::kAcceptH0);
  EXPECT_EQ(r.variant, Variant::kMiOnly);
  EXPECT_EQ(r.seed, 3u);
  EXPECT_GT(r.wall_time.count(), 0.0);
  for (const double s : r.null_stats) EXPECT_GE(s, 0.0);
}

TEST(Crt, ReproducibleAndThreadIndependent) {
  const Dataset d = generate(scenario(Family::kPostNonlinearII, Hypothesis::kH1, 120, 4, 4));
  TestConfig cfg = mi_only(30, 5);
  cfg.variant = Variant::kMiNull;
  cfg.classifier.epochs = 5;
  const CrtResult a = run_nnscit(d, cfg);
  cfg.threads = 3;
  const CrtResult b = run_nnscit(d, cfg);
  EXPECT_EQ(a.null_stats, b.null_stats);
  EXPECT_EQ(a.observed, b.observed);
  EXPECT_EQ(a.p_value, b.p_value);
  cfg.seed = 6;
  EXPECT_NE(run_nnscit(d, cfg).null_stats, a.null_stats);
}

TEST(Crt, NullStatisticsDoNotDependOnVariantObserved) {
  // mi-null and mi-only share the null draws; only the observed side differs.
  const Dataset d = generate(scenario(Family::kPostNonlinearI, Hypothesis::kH0, 120, 2, 7));
  TestConfig cfg = mi_only(20, 8);
  const CrtResult only = run_nnscit(d, cfg);
  cfg.variant = Variant::kMiNull;
  cfg.classifier.epochs = 3;
  const CrtResult null = run_nnscit(d, cfg);
  EXPECT_EQ(only.null_stats, null.null_stats);
}

TEST(Crt, OracleNullGivesUniformPValues) {
  // Exchangeable null and observed statistics: P(p <= a) <= a exactly.
  const std::size_t reps = 300;
  int rejections = 0;
  std::vector<double> ps;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto s = scenario(Family::kGof2, Hypothesis::kH0, 90, 2, 100 + r);
    const Dataset d = generate(s);
    const CrtResult res = run_crt_with_oracle(d, oracle_conditional_sampler(s), mi_only(19, r));
    rejections += res.p_value <= 0.05;
    ps.push_back(res.p_value);
  }
  // 0.05 is on the p-value grid {1/20, ...}; binomial(300, 0.05) sd is 3.8.
  EXPECT_LE(rejections, 15 + 12);
  EXPECT_NEAR(mean(ps), 0.525, 0.05);
}

TEST(Crt, MiOnlyDetectsStrongDependence) {
  auto s = scenario(Family::kGaussianOracle, Hypothesis::kH1, 300, 2, 9);
  s.partial_correlation = 0.9;
  const CrtResult r = run_nnscit(generate(s), mi_only(99, 10));
  EXPECT_EQ(r.p_value, 0.01);
  EXPECT_EQ(r.decision, Decision::kRejectH0);
}

TEST(Crt, Errors) {
  const Dataset small = generate(scenario(Family::kPostNonlinearI, Hypothesis::kH0, 89, 2, 1));
  EXPECT_THROW(run_nnscit(small, mi_only(10, 0)), TooFewSamplesError);
  const Dataset d = generate(scenario(Family::kPostNonlinearI, Hypothesis::kH0, 90, 2, 1));
  EXPECT_THROW(run_nnscit(d, mi_only(0, 0)), ConfigError);
  TestConfig bad = mi_only(5, 0);
  bad.alpha = 1.5;
  EXPECT_THROW(run_nnscit(d, bad), ConfigError);
  EXPECT_THROW(run_crt_with_oracle(d, ConditionalSampler{}, mi_only(5, 0)), ConfigError);

  const ConditionalSampler failing = [](std::span<const double>, Rng&) -> double {
    throw DomainError("boom");
  };
  try {
    run_crt_with_oracle(d, failing, mi_only(5, 0));
    FAIL() << "expected RepetitionError";
  } catch (const RepetitionError& e) {
    EXPECT_EQ(e.repetition(), 1u);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(Crt, VariantNames) {
  for (const Variant v : {Variant::kCmiNull, Variant::kMiNull, Variant::kMiOnly}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_variant("eq9"), ConfigError);
  EXPECT_EQ(to_string(Decision::kRejectH0), "reject-H0");
}

}  // namespace
}  // namespace nnscit
