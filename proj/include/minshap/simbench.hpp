#pragma once

#include "minshap/dataset.hpp"
#include "minshap/learners.hpp"
#include "minshap/metrics.hpp"
#include "minshap/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace minshap::sim {

/// Benchmark generators. Indices below are 1-based as in the model formulas.
///   a      Y = 4X1 + 4X2 + 3X3X4 + 3X5 + 2X6 + 2X5X6 + X7 + X8 + e, Corr(X3,X4) = 0.5
///   b      Y = 2sin(X1) + 2log(|X2|+1) + X1X2 + 3cos(X3+X4) + max(0,X5) + X6X7X8 + e,
///          blocks of 5 features with within-block correlation 0, 0.2, 0.5, 0.8 (cycling)
///   c      Y = 1.5X1X2 I(X3>0) + X4X5 I(X3<0) + 3X6X7 I(X8>0) + X9X10 I(X8<0) + e,
///          Corr(X1,X2) = Corr(X6,X7) = 0.9, Corr(X4,X5) = Corr(X9,X10) = 0.5
///   d      Y = sigmoid(2.5X1 + 2.5X2 + 2X3X4 + 1.5X5 + 1.5X6 + X7^2 + X8^3) + e, e ~ N(0, 0.1^2),
///          Corr(X1,X2) = 0.5
///   chain  X2 = X1 + g, X3 = X2 + d, Y = X3 + e (all N(0,1) innovations)
///   highdim-linear / highdim-nonlinear: patterns a / b at p = 200, repeated twice
///   null   Y = e independent of X ~ N(0, I)
/// With repeat_factor r the signal pattern (and its correlations) is copied r
/// times at offsets of the base support size; extra features are noise.
enum class Model { a, b, c, d, chain, highdim_linear, highdim_nonlinear, null };

std::string to_string(Model model);
Model parse_model(const std::string& s);

struct SimConfig {
  Model model = Model::a;
  std::size_t n = 3000;
  std::size_t p = 20;
  std::size_t repeat_factor = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Defaults per model: p = 20 for a-d, p = 3 for chain, p = 200 with two
/// pattern copies and n = 500 for the high-dimensional configs.
SimConfig default_config(Model model);

struct GroundTruth {
  std::vector<std::size_t> support;  // 0-based
};

/// Size of one copy of the model's signal pattern.
std::size_t base_support_size(Model model);

GroundTruth ground_truth(const SimConfig& config);

/// The configured feature correlation matrix (chain: covariance of X1..X3).
Eigen::MatrixXd covariance_matrix(const SimConfig& config);

std::pair<Dataset, GroundTruth> generate(const SimConfig& config, const RngStream& rng);
std::pair<Dataset, GroundTruth> generate(const SimConfig& config);

enum class Method {
  minshap,
  maxp,
  pcht_bonferroni,
  pcht_stouffer,
  pcht_fisher,
  loco,
  gcm,
  lasso,
  loco_stability,
  gcm_stability,
  lasso_stability,
};

std::string to_string(Method method);
Method parse_method(const std::string& s);
bool uses_shapley(Method method);

struct ExperimentOptions {
  std::vector<Method> methods{Method::minshap, Method::maxp};
  std::size_t reps = 1;
  double alpha = 0.05;
  std::size_t K = 50;
  /// PCHT u screening range; 0 means the default [ceil(0.7K), K].
  std::size_t u_lo = 0;
  std::size_t u_hi = 0;
  LearnerSpec learner = LearnerSpec::make_boosted_trees();
  std::size_t lasso_folds = 5;
  std::size_t stability_B = 50;
  double stability_rate = 0.5;
  double stability_threshold = 0.8;
  /// Replications run concurrently on this many threads.
  std::size_t workers = 1;
};

struct MethodSummary {
  Method method = Method::minshap;
  Metrics mean;
  Metrics sd;
  double jaccard = 0.0;  // NaN with fewer than two successful reps
  double mean_runtime = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::vector<std::vector<std::size_t>> selections;  // successful reps, in rep order
  std::vector<Metrics> per_rep;
  std::vector<double> runtimes;
  std::vector<std::size_t> chosen_u;  // PCHT methods only
  std::vector<std::string> errors;
};

struct BenchResult {
  SimConfig config;
  ExperimentOptions options;
  std::vector<MethodSummary> rows;

  [[nodiscard]] const MethodSummary& row(Method method) const;
};

/// Replication r draws its data and every method's randomness from
/// `rng.child("rep", r)`, so results do not depend on scheduling.
BenchResult run_experiment(const SimConfig& config, const ExperimentOptions& options, const RngStream& rng);

/// One row per method: mean and sd of each metric, Jaccard, runtime, counts.
void write_bench_csv(const BenchResult& result, std::ostream& out);

}  // namespace minshap::sim
