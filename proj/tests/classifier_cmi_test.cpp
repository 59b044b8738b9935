#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nnscit/classifier_cmi.hpp"
#include "nnscit/error.hpp"
#include "nnscit/rng.hpp"
#include "nnscit/synthgen.hpp"

namespace nnscit {
namespace {

RowMatrix normal_rows(std::size_t n, double mean, Rng& rng) {
  RowMatrix m(static_cast<Eigen::Index>(n), 1);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = rng.normal(mean, 1.0);
  return m;
}

TEST(DvPlugIn, HandComputedValue) {
  // L = a / (1 - a): 3 and 1 on f, 1/3 and 1 on g.
  const std::vector<double> f = {0.75, 0.5};
  const std::vector<double> g = {0.25, 0.5};
  const double want = 0.5 * std::log(3.0) - std::log((1.0 / 3 + 1.0) / 2);
  EXPECT_NEAR(dv_kl_from_probabilities(f, g), want, 1e-15);
}

TEST(DvPlugIn, ConstantClassifierGivesZero) {
  const std::vector<double> f(10, 0.5), g(7, 0.5);
  EXPECT_EQ(dv_kl_from_probabilities(f, g), 0.0);
}

TEST(DvPlugIn, ClipsExtremeProbabilities) {
  const std::vector<double> f = {1.0}, g = {0.0};
  const double c = kProbabilityClip;
  const double want = std::log((1 - c) / c) - std::log(c / (1 - c));
  EXPECT_NEAR(dv_kl_from_probabilities(f, g), want, 1e-12);
  EXPECT_TRUE(std::isfinite(dv_kl_from_probabilities(f, g)));
}

TEST(DvPlugIn, BayesOptimalClassifierRecoversKl) {
  // With the true posterior a = f / (f + g) the plug-in is consistent for KL(f || g).
  Rng rng(1);
  const double mu = 1.0;
  std::vector<double> pf, pg;
  auto posterior = [&](double x) { return 1.0 / (1.0 + std::exp(-(mu * x - mu * mu / 2))); };
  for (int i = 0; i < 200000; ++i) {
    pf.push_back(posterior(rng.normal(mu, 1)));
    pg.push_back(posterior(rng.normal(0, 1)));
  }
  EXPECT_NEAR(dv_kl_from_probabilities(pf, pg, 1e-12), mu * mu / 2, 0.01);
  EXPECT_THROW(dv_kl_from_probabilities({}, pg), TooFewSamplesError);
  EXPECT_THROW(dv_kl_from_probabilities(pf, pg, 0.7), DomainError);
}

TEST(EstimateKl, GaussianMeanShift) {
  // KL(N(1,1) || N(0,1)) = 1/2.
  Rng rng(2);
  TrainConfig cfg;
  cfg.seed = 3;
  const KlEstimate est = estimate_kl(normal_rows(5000, 1.0, rng), normal_rows(5000, 0, rng), cfg);
  EXPECT_NEAR(est.value, 0.5, 0.1);
  EXPECT_EQ(est.n_pos, 5000u);
  EXPECT_EQ(est.n_neg, 5000u);
}

TEST(EstimateKl, SingleSplitEvaluatesOneThird) {
  Rng rng(12);
  TrainConfig cfg;
  cfg.epochs = 3;
  const KlEstimate est =
      estimate_kl(normal_rows(90, 1.0, rng), normal_rows(61, 0, rng), cfg, /*cross_fit=*/false);
  EXPECT_EQ(est.n_pos, 30u);
  EXPECT_EQ(est.n_neg, 20u);
}

TEST(EstimateKl, IdenticalLawsNearZero) {
  Rng rng(4);
  double total = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    TrainConfig cfg;
    cfg.seed = s;
    total += estimate_kl(normal_rows(2000, 0, rng), normal_rows(2000, 0, rng), cfg).value;
  }
  EXPECT_LE(std::abs(total / 10), 0.05);
}

TEST(EstimateKl, BoundedByClipping) {
  // Perfectly separable classes push every probability to the clip.
  Rng rng(13);
  TrainConfig cfg;
  cfg.seed = 1;
  const double bound = std::log((1 - kProbabilityClip) / kProbabilityClip);
  const KlEstimate est = estimate_kl(normal_rows(300, 50, rng), normal_rows(300, -50, rng), cfg);
  EXPECT_LE(std::abs(est.value), 2 * bound);
  EXPECT_GT(est.value, 1.0);
}

TEST(EstimateKl, Errors) {
  Rng rng(6);
  TrainConfig cfg;
  EXPECT_THROW(estimate_kl(normal_rows(29, 0, rng), normal_rows(100, 0, rng), cfg),
               TooFewSamplesError);
  RowMatrix wide(40, 2);
  wide.setZero();
  EXPECT_THROW(estimate_kl(normal_rows(40, 0, rng), wide, cfg), DimensionError);
}

ScenarioSpec gaussian_triple(double rho, std::size_t n, std::size_t dz, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.family = Family::kGaussianOracle;
  spec.hypothesis = rho == 0.0 ? Hypothesis::kH0 : Hypothesis::kH1;
  spec.partial_correlation = rho;
  spec.n = n;
  spec.dz = dz;
  spec.seed = seed;
  return spec;
}

TEST(EstimateCmi, GaussianClosedForm) {
  const ScenarioSpec spec = gaussian_triple(0.5, 5000, 1, 7);
  const double truth = gaussian_oracle_cmi(spec);
  EXPECT_NEAR(truth, 0.1438, 5e-5);
  TrainConfig cfg;
  cfg.seed = 8;
  const CmiEstimate est = estimate_cmi(generate(spec), cfg);
  EXPECT_NEAR(est.value, truth, 0.15);
  EXPECT_EQ(est.value, est.i_xyz - est.i_xz);
}

TEST(EstimateCmi, IndependentTripleNearZero) {
  ScenarioSpec spec = gaussian_triple(0.0, 2000, 1, 9);
  spec.coupling = 0.0;
  TrainConfig cfg;
  cfg.seed = 10;
  EXPECT_LE(std::abs(estimate_cmi(generate(spec), cfg).value), 0.1);
}

TEST(EstimateCmi, ScenarioNullStaysSmall) {
  ScenarioSpec spec;
  spec.n = 2000;
  spec.dz = 5;
  spec.seed = 11;
  TrainConfig cfg;
  cfg.seed = 12;
  EXPECT_LE(estimate_cmi(generate(spec), cfg).value, 0.1);
}

TEST(EstimateCmi, NullCentering) {
  // Mean over 20 independent data sets within 2 standard errors of zero.
  std::vector<double> values;
  for (std::uint64_t s = 0; s < 20; ++s) {
    ScenarioSpec spec = gaussian_triple(0.0, 300, 2, 100 + s);
    spec.coupling = 0.0;
    TrainConfig cfg;
    cfg.seed = s;
    values.push_back(estimate_cmi(generate(spec), cfg).value);
  }
  double m = 0.0;
  for (const double v : values) m += v;
  m /= 20;
  double ss = 0.0;
  for (const double v : values) ss += (v - m) * (v - m);
  const double se = std::sqrt(ss / 19 / 20);
  EXPECT_LE(std::abs(m), 2 * se + 1e-12);
}

TEST(EstimateCmi, DeterministicAndMinimumSize) {
  ScenarioSpec spec;
  spec.n = 60;
  spec.dz = 3;
  const Dataset data = generate(spec);
  TrainConfig cfg;
  cfg.seed = 11;
  cfg.epochs = 5;
  EXPECT_EQ(estimate_cmi(data, cfg).value, estimate_cmi(data, cfg).value);
  const std::vector<std::size_t> rows = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(estimate_cmi(data.select(rows), cfg), TooFewSamplesError);
}

}  // namespace
}  // namespace nnscit
