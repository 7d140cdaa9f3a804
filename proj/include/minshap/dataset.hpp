#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace minshap {

/// n x p feature matrix with column names plus a length-n response.
///
/// Invariants (checked on construction): n >= 2, p >= 1, all entries finite,
/// names unique and one per column.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, Eigen::VectorXd response, std::vector<std::string> feature_names);

  [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(features_.rows()); }
  [[nodiscard]] std::size_t p() const { return static_cast<std::size_t>(features_.cols()); }

  [[nodiscard]] const Eigen::MatrixXd& features() const { return features_; }
  [[nodiscard]] const Eigen::VectorXd& response() const { return response_; }
  [[nodiscard]] const std::vector<std::string>& feature_names() const { return names_; }

  /// Copy of the selected rows, in the given order.
  [[nodiscard]] Dataset subset_rows(std::span<const std::size_t> rows) const;

  /// Selected rows and columns as a dense matrix.
  [[nodiscard]] Eigen::MatrixXd gather(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;
  [[nodiscard]] Eigen::VectorXd gather_response(std::span<const std::size_t> rows) const;

  /// Same features, different response.
  [[nodiscard]] Dataset with_response(Eigen::VectorXd response) const;

 private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd response_;
  std::vector<std::string> names_;
};

/// Reads a comma-separated file with a header row. The column named
/// `response_name` becomes the response; every other column is a feature.
/// Parse failures throw DataError naming the row and column.
Dataset read_csv(const std::filesystem::path& path, const std::string& response_name);
Dataset parse_csv(std::istream& in, const std::string& response_name);

void write_csv(const Dataset& data, const std::filesystem::path& path, const std::string& response_name = "y");
void write_csv(const Dataset& data, std::ostream& out, const std::string& response_name = "y");

std::vector<std::size_t> iota_indices(std::size_t count);

}  // namespace minshap
