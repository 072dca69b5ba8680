#include "adapt/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "adapt/rng.hpp"

namespace adapt::data {

AdaptInput gen_covshift_1d(Index n_source, Index n_target, std::uint64_t seed) {
  if (n_source < 2 || n_target < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "generators need at least 2 rows per domain");
  }
  Rng root(seed);
  auto src = root.split(0);
  auto tgt = root.split(1);

  const auto sample = [](Rng& rng, Index n, double mean, double sd) {
    Matrix X(n, 1);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      const double x = rng.normal(mean, sd);
      X(i, 0) = x;
      y(i) = x * x * x - x + rng.normal(0.0, 0.1);
    }
    return std::pair{X, y};
  };

  AdaptInput input;
  auto [Xs, ys] = sample(src, n_source, 0.5, 0.5);
  auto [Xt, yt] = sample(tgt, n_target, 0.0, 0.3);
  input.Xs = std::move(Xs);
  input.ys = std::move(ys);
  input.Xt = std::move(Xt);
  input.yt = std::move(yt);
  return input;
}

namespace {

// Two interleaving half-circles; class 0 gets the extra point for odd n.
std::pair<Matrix, Vector> make_moons(Rng& rng, Index n, double noise) {
  const Index n0 = (n + 1) / 2;
  const Index n1 = n - n0;
  Matrix X(n, 2);
  Vector y(n);
  for (Index i = 0; i < n0; ++i) {
    const double t = n0 > 1 ? std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n0 - 1)
                            : 0.0;
    X(i, 0) = std::cos(t) + noise * rng.normal();
    X(i, 1) = std::sin(t) + noise * rng.normal();
    y(i) = 0.0;
  }
  for (Index i = 0; i < n1; ++i) {
    const double t = n1 > 1 ? std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n1 - 1)
                            : 0.0;
    X(n0 + i, 0) = 1.0 - std::cos(t) + noise * rng.normal();
    X(n0 + i, 1) = 0.5 - std::sin(t) + noise * rng.normal();
    y(n0 + i) = 1.0;
  }
  return {X, y};
}

}  // namespace

AdaptInput gen_rotated_moons(Index n, double angle_deg, double noise, std::uint64_t seed) {
  if (n < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "generators need at least 2 rows per domain");
  }
  if (!(angle_deg >= 0.0 && angle_deg < 180.0)) {
    throw AdaptError(ErrorCode::InvalidArgument, "rotation angle must lie in [0, 180)");
  }
  Rng root(seed);
  auto src = root.split(0);
  auto tgt = root.split(1);

  AdaptInput input;
  auto [Xs, ys] = make_moons(src, n, noise);
  auto [Xt, yt] = make_moons(tgt, n, noise);
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  for (Index i = 0; i < n; ++i) {
    const double x = Xt(i, 0), y2 = Xt(i, 1);
    Xt(i, 0) = c * x - s * y2;
    Xt(i, 1) = s * x + c * y2;
  }
  input.Xs = std::move(Xs);
  input.ys = std::move(ys);
  input.Xt = std::move(Xt);
  input.yt = std::move(yt);
  return input;
}

AdaptInput gen_sample_bias(Index n_source, Index n_target, double bias_strength,
                           std::uint64_t seed) {
  if (n_source < 2 || n_target < 2) {
    throw AdaptError(ErrorCode::InvalidArgument, "generators need at least 2 rows per domain");
  }
  if (bias_strength < 0.0) {
    throw AdaptError(ErrorCode::InvalidArgument, "bias strength must be nonnegative");
  }
  Rng root(seed);
  auto tgt = root.split(0);
  auto src = root.split(1);

  const auto draw = [](Rng& rng, double& x1, double& x2, double& label) {
    label = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const double mean = label == 0.0 ? -1.0 : 1.0;
    x1 = rng.normal(mean, 1.0);
    x2 = rng.normal(0.0, 1.0);
  };

  AdaptInput input;
  input.Xt = Matrix(n_target, 2);
  Vector yt(n_target);
  for (Index i = 0; i < n_target; ++i) {
    // Alternate classes so the target set is exactly balanced for even n.
    yt(i) = static_cast<double>(i % 2);
    const double mean = yt(i) == 0.0 ? -1.0 : 1.0;
    input.Xt(i, 0) = tgt.normal(mean, 1.0);
    input.Xt(i, 1) = tgt.normal(0.0, 1.0);
  }
  input.yt = std::move(yt);

  input.Xs = Matrix(n_source, 2);
  input.ys = Vector(n_source);
  Index accepted = 0;
  long attempts = 0;
  while (accepted < n_source) {
    if (++attempts > 1000000) {
      throw AdaptError(ErrorCode::SamplingStalled,
                       "rejection sampling exceeded 1e6 attempts");
    }
    double x1, x2, label;
    draw(src, x1, x2, label);
    const double accept_prob = std::min(1.0, std::exp(-bias_strength * x1));
    if (src.uniform() < accept_prob) {
      input.Xs(accepted, 0) = x1;
      input.Xs(accepted, 1) = x2;
      input.ys(accepted) = label;
      ++accepted;
    }
  }
  return input;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (const char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, long line_no, const std::string& col_name) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    std::ostringstream os;
    os << "cell \"" << raw << "\" at line " << line_no << ", column \"" << col_name
       << "\" is not a decimal number";
    throw AdaptError(ErrorCode::UnparseableCell, os.str());
  }
  return value;
}

}  // namespace

CsvData load_csv(const std::string& path, const std::string& target_column,
                 bool require_target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AdaptError(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw AdaptError(ErrorCode::EmptyFile, path + " has no header row");
  }

  const auto header = split_line(line);
  long target_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == target_column) {
      target_idx = static_cast<long>(i);
      break;
    }
  }
  if (target_idx < 0 && require_target) {
    throw AdaptError(ErrorCode::MissingColumn,
                     "column \"" + target_column + "\" not found in " + path);
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> targets;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "line " << line_no << " has " << cells.size() << " cells, expected "
         << header.size();
      throw AdaptError(ErrorCode::UnparseableCell, os.str());
    }
    std::vector<double> row;
    row.reserve(header.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], line_no, trim(header[c]));
      if (static_cast<long>(c) == target_idx) targets.push_back(v);
      else row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw AdaptError(ErrorCode::EmptyFile, path + " has no data rows");
  const std::size_t d = rows[0].size();
  if (d == 0) throw AdaptError(ErrorCode::EmptyFile, path + " has no feature columns");

  CsvData out;
  out.X = Matrix(static_cast<Index>(rows.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      out.X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  for (std::size_t c = 0; c < header.size(); ++c)
    if (static_cast<long>(c) != target_idx) out.feature_names.push_back(trim(header[c]));

  if (target_idx >= 0) {
    Vector y(static_cast<Index>(targets.size()));
    std::set<double> distinct;
    bool integral = true;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      y(static_cast<Index>(i)) = targets[i];
      distinct.insert(targets[i]);
      if (std::floor(targets[i]) != targets[i]) integral = false;
    }
    out.task = integral && distinct.size() <= 20 ? TaskKind::Classification
                                                 : TaskKind::Regression;
    out.y = std::move(y);
  }
  return out;
}

void save_csv(const std::string& path, const Matrix& X, const Vector* y,
              const std::string& target_column) {
  if (y && y->size() != X.rows()) {
    throw AdaptError(ErrorCode::LengthMismatch, "label length must equal row count");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AdaptError(ErrorCode::IoError, "cannot open " + path + " for writing");

  for (Index j = 0; j < X.cols(); ++j) out << (j ? "," : "") << "x" << j;
  if (y) out << "," << target_column;
  out << "\n";

  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      if (j) out << ",";
      put(X(i, j));
    }
    if (y) {
      out << ",";
      put((*y)(i));
    }
    out << "\n";
  }
  if (!out) throw AdaptError(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace adapt::data
