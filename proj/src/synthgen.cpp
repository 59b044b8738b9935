#include "nnscit/synthgen.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "nnscit/error.hpp"

namespace nnscit {
namespace {

constexpr std::uint64_t kModelStream = 1;
constexpr std::uint64_t kDataStream = 2;
constexpr double kZMean = 0.7;

struct FamilyName {
  Family family;
  std::string_view name;
};

constexpr std::array<FamilyName, 9> kFamilyNames = {{
    {Family::kPostNonlinearI, "postnonlinear-I"},
    {Family::kPostNonlinearII, "postnonlinear-II"},
    {Family::kPostNonlinearIII, "postnonlinear-III"},
    {Family::kPostNonlinearIV, "postnonlinear-IV"},
    {Family::kGof1, "gof-1"},
    {Family::kGof2, "gof-2"},
    {Family::kChain, "chain-example-1"},
    {Family::kCollider, "collider-example-2"},
    {Family::kGaussianOracle, "gaussian-oracle"},
}};

std::vector<double> l1_normalized_uniform(std::size_t d, Rng& rng) {
  std::vector<double> w(d);
  for (auto& v : w) v = rng.uniform();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

double draw_z(Family family, Rng& rng) {
  switch (family) {
    case Family::kPostNonlinearII:
      return rng.laplace(kZMean, 1.0 / std::sqrt(2.0));
    case Family::kPostNonlinearIII:
      return rng.uniform(-2.5, 2.5);
    case Family::kPostNonlinearIV:
    case Family::kChain:
    case Family::kCollider:
    case Family::kGaussianOracle:
      return rng.normal();
    default:
      return rng.normal(kZMean, 1.0);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double effective_rho(const ScenarioSpec& spec) {
  return spec.hypothesis == Hypothesis::kH1 ? spec.partial_correlation : 0.0;
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& entry : kFamilyNames) {
    if (entry.family == family) return entry.name;
  }
  return "unknown";
}

std::string_view to_string(Hypothesis hypothesis) {
  return hypothesis == Hypothesis::kH0 ? "H0" : "H1";
}

std::string_view to_string(Link link) {
  switch (link) {
    case Link::kIdentity: return "identity";
    case Link::kSquare: return "square";
    case Link::kCube: return "cube";
    case Link::kTanh: return "tanh";
    case Link::kCos: return "cos";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (const auto& entry : kFamilyNames) {
    if (entry.name == name) return entry.family;
  }
  std::string known;
  for (const auto& entry : kFamilyNames) known += (known.empty() ? "" : ", ") + std::string(entry.name);
  throw ConfigError("unknown scenario family '" + std::string(name) + "' (expected one of " + known +
                    ")");
}

Hypothesis parse_hypothesis(std::string_view name) {
  if (name == "H0" || name == "h0") return Hypothesis::kH0;
  if (name == "H1" || name == "h1") return Hypothesis::kH1;
  throw ConfigError("unknown hypothesis '" + std::string(name) + "' (expected H0 or H1)");
}

void ScenarioSpec::validate() const {
  if (n == 0) throw ConfigError("scenario: n must be positive");
  if (dz == 0) throw ConfigError("scenario: d_Z must be positive");
  if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) {
    throw ConfigError("scenario: noise sd must be positive");
  }
  if (!std::isfinite(b)) throw ConfigError("scenario: b must be finite");
  if (!(std::abs(partial_correlation) < 1.0)) {
    throw ConfigError("scenario: partial correlation must lie in (-1, 1)");
  }
  if (!std::isfinite(coupling)) throw ConfigError("scenario: coupling must be finite");
  const bool h0_only = family == Family::kGof1 || family == Family::kGof2 || family == Family::kChain;
  if (h0_only && hypothesis == Hypothesis::kH1) {
    throw ConfigError("scenario: family '" + std::string(to_string(family)) +
                      "' is defined under H0 only");
  }
  if (family == Family::kCollider && hypothesis == Hypothesis::kH0) {
    throw ConfigError("scenario: family 'collider-example-2' is defined under H1 only");
  }
}

double apply_link(Link link, double v) {
  switch (link) {
    case Link::kIdentity: return v;
    case Link::kSquare: return v * v;
    case Link::kCube: return v * v * v;
    case Link::kTanh: return std::tanh(v);
    case Link::kCos: return std::cos(v);
  }
  return v;
}

ScenarioModel make_model(const ScenarioSpec& spec) {
  spec.validate();
  ScenarioModel model;
  model.spec = spec;
  Rng rng(spec.seed, kModelStream);
  const std::size_t d = spec.dz;
  switch (spec.family) {
    case Family::kChain:
      model.x_to_z.resize(d);
      for (auto& v : model.x_to_z) v = rng.uniform(0.5, 1.5);
      model.z_to_y = l1_normalized_uniform(d, rng);
      break;
    case Family::kCollider:
      model.x_to_z.resize(d);
      model.y_to_z.resize(d);
      for (auto& v : model.x_to_z) v = rng.uniform(0.5, 1.5);
      for (auto& v : model.y_to_z) v = rng.uniform(0.5, 1.5);
      break;
    case Family::kGaussianOracle:
      // Equal weights so that coupling * w'Z has variance coupling^2.
      model.a_f.assign(d, spec.coupling / std::sqrt(static_cast<double>(d)));
      model.a_g = model.a_f;
      break;
    default:
      model.a_f = l1_normalized_uniform(d, rng);
      model.a_g = l1_normalized_uniform(d, rng);
      model.a_h.resize(d);
      for (auto& v : model.a_h) v = rng.normal();
      break;
  }
  if (spec.family == Family::kPostNonlinearIV) {
    constexpr std::array<Link, 4> choices = {Link::kSquare, Link::kCube, Link::kTanh, Link::kCos};
    model.f = choices[rng.below(4)];
    model.g = choices[rng.below(4)];
    model.h = choices[rng.below(4)];
  }
  return model;
}

Dataset generate(const ScenarioModel& model) {
  const ScenarioSpec& spec = model.spec;
  const std::size_t n = spec.n;
  const std::size_t d = spec.dz;
  Rng rng(spec.seed, kDataStream);
  std::vector<double> x(n);
  std::vector<double> y(n);
  RowMatrix z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> zi(d);
  const double sd = spec.noise_sd;
  const double rho = effective_rho(spec);

  for (std::size_t i = 0; i < n; ++i) {
    double xi = 0.0;
    double yi = 0.0;
    switch (spec.family) {
      case Family::kChain: {
        xi = rng.normal();
        for (std::size_t j = 0; j < d; ++j) zi[j] = model.x_to_z[j] * xi + rng.normal();
        yi = dot(model.z_to_y, zi) + rng.normal();
        break;
      }
      case Family::kCollider: {
        xi = rng.normal();
        yi = rng.normal();
        for (std::size_t j = 0; j < d; ++j) {
          zi[j] = model.x_to_z[j] * xi + model.y_to_z[j] * yi + rng.normal();
        }
        break;
      }
      case Family::kGaussianOracle: {
        for (auto& v : zi) v = draw_z(spec.family, rng);
        const double e1 = rng.normal();
        const double e2 = rng.normal();
        xi = dot(model.a_f, zi) + e1;
        yi = dot(model.a_g, zi) + rho * e1 + std::sqrt(1.0 - rho * rho) * e2;
        break;
      }
      case Family::kGof1: {
        for (auto& v : zi) v = draw_z(spec.family, rng);
        xi = rng.uniform();
        yi = dot(model.a_g, zi) + rng.normal(0.0, sd);
        break;
      }
      case Family::kGof2: {
        for (auto& v : zi) v = draw_z(spec.family, rng);
        xi = dot(model.a_f, zi) + rng.normal(0.0, sd);
        yi = dot(model.a_g, zi) + rng.normal(0.0, sd);
        break;
      }
      default: {
        for (auto& v : zi) v = draw_z(spec.family, rng);
        if (spec.hypothesis == Hypothesis::kH0) {
          xi = apply_link(model.f, dot(model.a_f, zi) + rng.normal(0.0, sd));
          yi = apply_link(model.g, dot(model.a_g, zi) + rng.normal(0.0, sd));
        } else {
          xi = rng.normal();
          yi = apply_link(model.h, dot(model.a_h, zi) + spec.b * xi) + rng.normal(0.0, sd);
        }
        break;
      }
    }
    x[i] = xi;
    y[i] = yi;
    for (std::size_t j = 0; j < d; ++j) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = zi[j];
  }
  return Dataset(std::move(x), std::move(y), std::move(z));
}

Dataset generate(const ScenarioSpec& spec) { return generate(make_model(spec)); }

ConditionalSampler oracle_conditional_sampler(const ScenarioModel& model) {
  const ScenarioSpec& spec = model.spec;
  const double sd = spec.noise_sd;
  const std::size_t d = spec.dz;
  auto check_dim = [d](std::span<const double> z) {
    if (z.size() != d) throw DimensionError("oracle sampler: z has the wrong dimension");
  };

  switch (spec.family) {
    case Family::kPostNonlinearI:
    case Family::kPostNonlinearII:
    case Family::kPostNonlinearIII:
      if (spec.hypothesis == Hypothesis::kH1) {
        return [check_dim](std::span<const double> z, Rng& rng) {
          check_dim(z);
          return rng.normal();
        };
      }
      [[fallthrough]];
    case Family::kGof2:
      return [a = model.a_f, sd, check_dim](std::span<const double> z, Rng& rng) {
        check_dim(z);
        return dot(a, z) + rng.normal(0.0, sd);
      };
    case Family::kGof1:
      return [check_dim](std::span<const double> z, Rng& rng) {
        check_dim(z);
        return rng.uniform();
      };
    case Family::kGaussianOracle:
      return [a = model.a_f, check_dim](std::span<const double> z, Rng& rng) {
        check_dim(z);
        return dot(a, z) + rng.normal();
      };
    case Family::kChain: {
      const double precision = 1.0 + dot(model.x_to_z, model.x_to_z);
      return [a = model.x_to_z, precision, check_dim](std::span<const double> z, Rng& rng) {
        check_dim(z);
        return rng.normal(dot(a, z) / precision, 1.0 / std::sqrt(precision));
      };
    }
    case Family::kCollider: {
      // Z = aX + (cY + eta); the bracket has covariance I + cc'.
      const auto& a = model.x_to_z;
      const auto& c = model.y_to_z;
      const double cc = 1.0 + dot(c, c);
      const double ac = dot(a, c);
      const double precision = 1.0 + dot(a, a) - ac * ac / cc;
      return [a, c, cc, ac, precision, check_dim](std::span<const double> z, Rng& rng) {
        check_dim(z);
        const double score = dot(a, z) - ac * dot(c, z) / cc;
        return rng.normal(score / precision, 1.0 / std::sqrt(precision));
      };
    }
    case Family::kPostNonlinearIV:
      break;
  }
  throw UnsupportedError("no closed-form conditional sampler for family '" +
                         std::string(to_string(spec.family)) + "'");
}

ConditionalSampler oracle_conditional_sampler(const ScenarioSpec& spec) {
  return oracle_conditional_sampler(make_model(spec));
}

double gaussian_oracle_cmi(const ScenarioSpec& spec) {
  if (spec.family != Family::kGaussianOracle) {
    throw UnsupportedError("closed-form CMI is only available for the gaussian-oracle family");
  }
  const double rho = effective_rho(spec);
  return -0.5 * std::log(1.0 - rho * rho);
}

}  // namespace nnscit
