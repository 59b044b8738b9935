#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nnscit/rng.hpp"

namespace nnscit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Columnar sample store: scalar x, scalar y and a d_Z-dimensional z per row.
///
/// Immutable once constructed; every constructor path validates shapes and
/// rejects non-finite entries.
class Dataset {
 public:
  Dataset(std::vector<double> x, std::vector<double> y, RowMatrix z);

  std::size_t n() const { return x_.size(); }
  std::size_t dz() const { return static_cast<std::size_t>(z_.cols()); }

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  const RowMatrix& z() const { return z_; }
  std::span<const double> z_row(std::size_t i) const {
    return {z_.data() + i * dz(), dz()};
  }

  /// Rows in the given order (duplicates allowed).
  Dataset select(std::span<const std::size_t> rows) const;

  /// Same y and z with a replacement x column.
  Dataset with_x(std::vector<double> x) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  RowMatrix z_;
};

/// Disjoint partition of a parent dataset; u2 holds floor(n/3) rows.
struct SplitPair {
  Dataset u1;
  Dataset u2;
  std::vector<std::size_t> u1_rows;
  std::vector<std::size_t> u2_rows;
  std::uint64_t seed;
};

/// Parses `x,y,z1..zd` CSV. Column order in the header is free, but the z
/// columns must be numbered 1..d without gaps.
Dataset read_csv(std::istream& in, const std::string& source = "<stream>");
Dataset load_csv(const std::filesystem::path& path);

void write_csv(std::ostream& out, const Dataset& data);
void save_csv(const std::filesystem::path& path, const Dataset& data);

/// Uniform random partition into (n - floor(n/3), floor(n/3)) rows. Needs n >= 6.
SplitPair split(const Dataset& data, std::uint64_t seed);

/// m rows drawn uniformly without replacement.
Dataset subsample(const Dataset& data, std::size_t m, Rng& rng);

/// Index form of `subsample`, for callers that only need row ids.
std::vector<std::size_t> sample_rows(std::size_t n, std::size_t m, Rng& rng);

}  // namespace nnscit
