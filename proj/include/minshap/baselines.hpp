#pragma once

#include "minshap/dataset.hpp"
#include "minshap/learners.hpp"
#include "minshap/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace minshap::baselines {

struct BaselineResult {
  std::string method;
  std::vector<std::size_t> selected;
  /// Per-feature p-values (loco, gcm), standardized coefficients (lasso) or
  /// selection frequencies (stability); `diagnostic_kind` says which.
  std::vector<double> diagnostics;
  std::string diagnostic_kind;
  double runtime_seconds = 0.0;
  std::size_t failures = 0;
  std::vector<std::string> log;
};

/// One-sided paired test that mean(d) > 0 with z = sqrt(m) mean(d) / sd(d).
/// sd = 0 gives p = 0 when mean(d) > 0 and p = 1 otherwise.
double paired_difference_pvalue(std::span<const double> d);

/// Leave-one-covariate-out: 50/50 split, full and drop-one models fitted on
/// the training half, paired test on held-out squared-residual differences.
BaselineResult loco(const Dataset& data, const LearnerSpec& spec, double alpha, const RngStream& rng);

struct GcmStatistic {
  double t = 0.0;
  double pvalue = 1.0;
};

/// T = sqrt(n) mean(R) / sqrt(mean(R^2) - mean(R)^2), two-sided normal p.
/// A zero denominator gives p = 1.
GcmStatistic gcm_statistic(std::span<const double> products);

/// Generalized covariance measure with the residuals of Y ~ X_{-j} and X_j ~ X_{-j}.
BaselineResult gcm(const Dataset& data, const LearnerSpec& spec, double alpha, const RngStream& rng);

double soft_threshold(double rho, double lambda);

struct LassoOptions {
  std::size_t path_length = 100;
  double min_ratio = 1e-3;
  double tolerance = 1e-12;
  std::size_t max_sweeps = 100000;
};

/// max_j |x_j' y| / n.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Log-spaced grid from lambda_max down to lambda_max * min_ratio.
std::vector<double> lasso_lambda_grid(double lambda_max, const LassoOptions& options = {});

/// Coordinate descent on (1/2n)||y - X b||^2 + lambda ||b||_1 for each lambda,
/// warm-started along the grid. Columns with zero norm keep b_j = 0.
/// Returns p x L coefficients. x and y are used as given (no centering).
Eigen::MatrixXd lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> lambdas,
                           const LassoOptions& options = {});

/// Features standardized internally; lambda chosen by k-fold CV on mean
/// validation MSE; selected = nonzero coefficients at that lambda.
BaselineResult lasso_select(const Dataset& data, std::size_t folds, const RngStream& rng,
                            const LassoOptions& options = {});

using Selector = std::function<std::vector<std::size_t>(const Dataset& data, const RngStream& rng)>;

/// Runs `base` on B subsamples of floor(rate n) rows drawn without
/// replacement and keeps features whose selection frequency is >= threshold.
/// A failing subsample counts as selecting nothing.
BaselineResult stability_select(const Selector& base, const Dataset& data, std::size_t B, double rate,
                                double threshold, const RngStream& rng, std::size_t workers = 1);

}  // namespace minshap::baselines
