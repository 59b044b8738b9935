#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nnscit/dataset.hpp"
#include "nnscit/rng.hpp"

namespace nnscit {

/// Draws one X value from a conditional law X | Z = z.
using ConditionalSampler = std::function<double(std::span<const double> z, Rng& rng)>;

enum class Family {
  kPostNonlinearI,    // Gaussian Z, identity links
  kPostNonlinearII,   // Laplace Z, identity links
  kPostNonlinearIII,  // Uniform[-2.5, 2.5] Z, identity links
  kPostNonlinearIV,   // Gaussian Z, links drawn from {x^2, x^3, tanh, cos}
  kGof1,              // X ~ Uniform[0, 1] independent of Z
  kGof2,              // X linear in Z plus Gaussian noise
  kChain,             // X -> Z -> Y
  kCollider,          // X -> Z <- Y
  kGaussianOracle,    // jointly Gaussian with a chosen partial correlation
};

enum class Hypothesis { kH0, kH1 };

enum class Link { kIdentity, kSquare, kCube, kTanh, kCos };

std::string_view to_string(Family family);
std::string_view to_string(Hypothesis hypothesis);
std::string_view to_string(Link link);
Family parse_family(std::string_view name);
Hypothesis parse_hypothesis(std::string_view name);

struct ScenarioSpec {
  Family family = Family::kPostNonlinearI;
  Hypothesis hypothesis = Hypothesis::kH0;
  std::size_t n = 1000;
  std::size_t dz = 50;
  double b = 2.0;           // strength of the X -> Y edge under H1
  double noise_sd = 0.7;    // additive noise, variance 0.49
  std::uint64_t seed = 0;
  double partial_correlation = 0.5;  // gaussian-oracle under H1
  double coupling = 1.0;             // gaussian-oracle Z -> (X, Y) strength

  void validate() const;
};

/// Every random quantity fixed per replication: weights and link functions.
struct ScenarioModel {
  ScenarioSpec spec;
  std::vector<double> a_f;  // l1-normalized, Z -> X
  std::vector<double> a_g;  // l1-normalized, Z -> Y
  std::vector<double> a_h;  // standard normal, Z -> Y under H1
  Link f = Link::kIdentity;
  Link g = Link::kIdentity;
  Link h = Link::kIdentity;
  std::vector<double> x_to_z;  // chain / collider
  std::vector<double> y_to_z;  // collider
  std::vector<double> z_to_y;  // chain, l1-normalized
};

double apply_link(Link link, double v);

ScenarioModel make_model(const ScenarioSpec& spec);
Dataset generate(const ScenarioModel& model);
Dataset generate(const ScenarioSpec& spec);

/// Exact X | Z sampler where the law has a closed form. Throws
/// UnsupportedError for families whose conditional is not available.
ConditionalSampler oracle_conditional_sampler(const ScenarioModel& model);
ConditionalSampler oracle_conditional_sampler(const ScenarioSpec& spec);

/// Closed-form I(X;Y|Z) for the gaussian-oracle family, in nats.
double gaussian_oracle_cmi(const ScenarioSpec& spec);

}  // namespace nnscit
