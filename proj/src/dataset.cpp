#include "nnscit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "nnscit/error.hpp"

namespace nnscit {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

// Column role: -2 = x, -1 = y, j >= 0 = z_{j+1}.
struct Layout {
  std::vector<int> role;
  std::size_t dz = 0;
};

Layout parse_header(std::string_view line, const std::string& source) {
  const auto names = split_fields(line);
  Layout layout;
  std::map<int, std::string> seen;
  std::vector<std::string> problems;
  int max_z = 0;
  for (const auto name_view : names) {
    const std::string name(name_view);
    int role = 0;
    if (name == "x") {
      role = -2;
    } else if (name == "y") {
      role = -1;
    } else if (name.size() > 1 && name[0] == 'z' &&
               std::all_of(name.begin() + 1, name.end(), ::isdigit) && name[1] != '0') {
      role = std::stoi(name.substr(1)) - 1;
      max_z = std::max(max_z, role + 1);
    } else {
      problems.push_back("unknown column '" + name + "'");
      continue;
    }
    if (!seen.emplace(role, name).second) problems.push_back("duplicate column '" + name + "'");
    layout.role.push_back(role);
  }
  if (!seen.contains(-2)) problems.emplace_back("missing column 'x'");
  if (!seen.contains(-1)) problems.emplace_back("missing column 'y'");
  if (max_z == 0) problems.emplace_back("missing column 'z1'");
  for (int j = 0; j < max_z; ++j) {
    if (!seen.contains(j)) problems.push_back("missing column 'z" + std::to_string(j + 1) + "'");
  }
  if (!problems.empty()) {
    std::string msg = source + ": bad header:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw IngestionError(msg);
  }
  layout.dz = static_cast<std::size_t>(max_z);
  return layout;
}

void check_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw IngestionError(std::string("non-finite value in ") + what + " at row " +
                           std::to_string(i + 1));
    }
  }
}

}  // namespace

Dataset::Dataset(std::vector<double> x, std::vector<double> y, RowMatrix z)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)) {
  if (x_.empty()) throw TooFewSamplesError("dataset must contain at least one row");
  if (y_.size() != x_.size() || static_cast<std::size_t>(z_.rows()) != x_.size()) {
    throw DimensionError("dataset columns have mismatched lengths: x=" + std::to_string(x_.size()) +
                         " y=" + std::to_string(y_.size()) +
                         " z=" + std::to_string(z_.rows()));
  }
  if (z_.cols() < 1) throw DimensionError("dataset needs at least one z column");
  check_finite(x_, "x");
  check_finite(y_, "y");
  for (Eigen::Index i = 0; i < z_.rows(); ++i) {
    for (Eigen::Index j = 0; j < z_.cols(); ++j) {
      if (!std::isfinite(z_(i, j))) {
        throw IngestionError("non-finite value in z" + std::to_string(j + 1) + " at row " +
                             std::to_string(i + 1));
      }
    }
  }
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<double> x(rows.size());
  std::vector<double> y(rows.size());
  RowMatrix z(static_cast<Eigen::Index>(rows.size()), z_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    if (r >= n()) throw DimensionError("row index out of range in Dataset::select");
    x[i] = x_[r];
    y[i] = y_[r];
    z.row(static_cast<Eigen::Index>(i)) = z_.row(static_cast<Eigen::Index>(r));
  }
  return Dataset(std::move(x), std::move(y), std::move(z));
}

Dataset Dataset::with_x(std::vector<double> x) const {
  if (x.size() != n()) throw DimensionError("replacement x column has the wrong length");
  return Dataset(std::move(x), y_, z_);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.x_ == b.x_ && a.y_ == b.y_ && a.z_.rows() == b.z_.rows() &&
         a.z_.cols() == b.z_.cols() && a.z_ == b.z_;
}

Dataset read_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw IngestionError(source + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const Layout layout = parse_header(line, source);
  const auto header_names = split_fields(line);
  std::vector<std::string> names(header_names.begin(), header_names.end());

  std::vector<double> x, y, zflat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != layout.role.size()) {
      throw IngestionError(source + ": row " + std::to_string(row) + " (line " +
                           std::to_string(line_no) + ") has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(layout.role.size()));
    }
    const std::size_t base = zflat.size();
    zflat.resize(base + layout.dz);
    x.push_back(0.0);
    y.push_back(0.0);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto value = parse_double(fields[c]);
      if (!value || !std::isfinite(*value)) {
        throw IngestionError(source + ": row " + std::to_string(row) + ", column '" + names[c] +
                             "': invalid value '" + std::string(fields[c]) + "'");
      }
      const int role = layout.role[c];
      if (role == -2) {
        x.back() = *value;
      } else if (role == -1) {
        y.back() = *value;
      } else {
        zflat[base + static_cast<std::size_t>(role)] = *value;
      }
    }
  }
  if (x.empty()) throw IngestionError(source + ": no data rows");
  RowMatrix z = Eigen::Map<RowMatrix>(zflat.data(), static_cast<Eigen::Index>(x.size()),
                                      static_cast<Eigen::Index>(layout.dz));
  return Dataset(std::move(x), std::move(y), std::move(z));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open '" + path.string() + "'");
  return read_csv(in, path.string());
}

void write_csv(std::ostream& out, const Dataset& data) {
  out << "x,y";
  for (std::size_t j = 0; j < data.dz(); ++j) out << ",z" << j + 1;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.x()[i] << ',' << data.y()[i];
    for (const double v : data.z_row(i)) out << ',' << v;
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path.string() + "'");
  write_csv(out, data);
}

SplitPair split(const Dataset& data, std::uint64_t seed) {
  const std::size_t n = data.n();
  if (n < 6) {
    throw TooFewSamplesError("split needs at least 6 rows, got " + std::to_string(n));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed, 0x5e1170u);
  rng.shuffle(std::span(perm));
  const std::size_t n2 = n / 3;
  std::vector<std::size_t> u2_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n2));
  std::vector<std::size_t> u1_rows(perm.begin() + static_cast<std::ptrdiff_t>(n2), perm.end());
  std::sort(u1_rows.begin(), u1_rows.end());
  std::sort(u2_rows.begin(), u2_rows.end());
  Dataset u1 = data.select(u1_rows);
  Dataset u2 = data.select(u2_rows);
  return SplitPair{std::move(u1), std::move(u2), std::move(u1_rows), std::move(u2_rows), seed};
}

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t m, Rng& rng) {
  if (m == 0) throw TooFewSamplesError("subsample size must be positive");
  if (m > n) {
    throw DimensionError("cannot draw " + std::to_string(m) + " rows without replacement from " +
                         std::to_string(n));
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first m slots end up a uniform m-subset in random order.
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return idx;
}

Dataset subsample(const Dataset& data, std::size_t m, Rng& rng) {
  const auto rows = sample_rows(data.n(), m, rng);
  return data.select(rows);
}

}  // namespace nnscit
