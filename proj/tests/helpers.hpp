#pragma once

#include "minshap/dataset.hpp"
#include "minshap/rng.hpp"

#include <Eigen/Dense>

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline std::vector<std::string> names(std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < p; ++j) out.push_back("X" + std::to_string(j + 1));
  return out;
}

/// Gaussian features with y = coef . x + noise_sd * e.
inline minshap::Dataset linear_data(std::size_t n, const std::vector<double>& coef, double noise_sd,
                                    std::uint64_t seed) {
  minshap::RngStream rng(seed);
  const auto p = static_cast<Eigen::Index>(coef.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      x(i, j) = rng.normal();
      s += coef[static_cast<std::size_t>(j)] * x(i, j);
    }
    y(i) = s + noise_sd * rng.normal();
  }
  return {x, y, names(coef.size())};
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("minshap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
