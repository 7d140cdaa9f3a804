#include "minshap/dataset.hpp"

#include "minshap/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace minshap {

Dataset::Dataset(Eigen::MatrixXd features, Eigen::VectorXd response, std::vector<std::string> feature_names)
    : features_(std::move(features)), response_(std::move(response)), names_(std::move(feature_names)) {
  if (features_.rows() < 2) throw DataError("dataset needs at least 2 rows");
  if (features_.cols() < 1) throw DataError("dataset needs at least 1 feature");
  if (response_.size() != features_.rows()) throw DataError("response length does not match row count");
  if (names_.size() != p()) throw DataError("feature name count does not match column count");
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) throw DataError("duplicate feature name '" + name + "'");
  }
  if (!features_.allFinite()) throw DataError("feature matrix contains non-finite values");
  if (!response_.allFinite()) throw DataError("response contains non-finite values");
}

Dataset Dataset::subset_rows(std::span<const std::size_t> rows) const {
  return Dataset(gather(rows, iota_indices(p())), gather_response(rows), names_);
}

Eigen::MatrixXd Dataset::gather(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto src = features_.col(static_cast<Eigen::Index>(cols[c]));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = src(static_cast<Eigen::Index>(rows[r]));
    }
  }
  return out;
}

Eigen::VectorXd Dataset::gather_response(std::span<const std::size_t> rows) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out(static_cast<Eigen::Index>(r)) = response_(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

Dataset Dataset::with_response(Eigen::VectorXd response) const {
  return Dataset(features_, std::move(response), names_);
}

std::vector<std::size_t> iota_indices(std::size_t count) {
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset parse_csv(std::istream& in, const std::string& response_name) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty input, header row required");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
  const auto header = split_fields(line);

  std::ptrdiff_t response_col = -1;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == response_name) {
      if (response_col >= 0) throw DataError("csv: response column '" + response_name + "' appears twice");
      response_col = static_cast<std::ptrdiff_t>(c);
    } else {
      names.push_back(header[c]);
    }
  }
  if (response_col < 0) throw DataError("csv: response column '" + response_name + "' not found in header");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("csv: row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& f = fields[c];
      const char* end = f.data() + f.size();
      auto [ptr, ec] = std::from_chars(f.data(), end, values[c]);
      if (ec != std::errc() || ptr != end || f.empty() || !std::isfinite(values[c])) {
        throw DataError("csv: row " + std::to_string(line_no) + ", column '" + header[c] +
                        "': cannot parse '" + f + "' as a finite number");
      }
    }
    rows.push_back(std::move(values));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(names.size()));
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index fc = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (static_cast<std::ptrdiff_t>(c) == response_col) {
        y(r) = rows[static_cast<std::size_t>(r)][c];
      } else {
        x(r, fc++) = rows[static_cast<std::size_t>(r)][c];
      }
    }
  }
  return Dataset(std::move(x), std::move(y), std::move(names));
}

Dataset read_csv(const std::filesystem::path& path, const std::string& response_name) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path.string() + "'");
  return parse_csv(in, response_name);
}

void write_csv(const Dataset& data, std::ostream& out, const std::string& response_name) {
  for (const auto& name : data.feature_names()) out << name << ',';
  out << response_name << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < data.n(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    for (std::size_t c = 0; c < data.p(); ++c) out << data.features()(ri, static_cast<Eigen::Index>(c)) << ',';
    out << data.response()(ri) << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path, const std::string& response_name) {
  std::ofstream out(path);
  if (!out) throw DataError("csv: cannot write '" + path.string() + "'");
  write_csv(data, out, response_name);
}

}  // namespace minshap
