#pragma once

#include "minshap/dataset.hpp"
#include "minshap/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace minshap {

/// A trained prediction function. `predict` receives exactly the columns the
/// model was trained on, in training order.
class Regressor {
 public:
  virtual ~Regressor() = default;
  [[nodiscard]] virtual Eigen::VectorXd predict(const Eigen::MatrixXd& x) const = 0;
  /// In-sample predictions kept from training, bitwise equal to predict() on
  /// the training design; null when the model does not keep them.
  [[nodiscard]] virtual const Eigen::VectorXd* training_predictions() const { return nullptr; }
};

/// Fits a Regressor. Implementations must be deterministic given the stream
/// and must accept a zero-column design only if they want to; the library
/// never passes one (the empty subset is handled by the null model).
class Learner {
 public:
  virtual ~Learner() = default;
  [[nodiscard]] virtual std::unique_ptr<Regressor> train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                         RngStream rng) const = 0;
};

enum class LearnerKind { ridge, boosted_trees };
enum class EvalMode { refit, dropout };

struct RidgeParams {
  double lambda = 1e-8;
};

struct BoostedTreeParams {
  std::size_t n_trees = 300;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  double subsample = 0.8;
  std::size_t max_bins = 64;
};

struct LearnerSpec {
  LearnerKind kind = LearnerKind::ridge;
  RidgeParams ridge;
  BoostedTreeParams trees;
  EvalMode eval_mode = EvalMode::refit;
  /// 0 means plug-in: fit and evaluate on the same rows.
  double holdout_fraction = 0.0;
  /// When set, used instead of the built-in learner named by `kind`.
  std::shared_ptr<const Learner> custom;

  void validate() const;

  static LearnerSpec make_ridge(double lambda = 1e-8);
  static LearnerSpec make_boosted_trees(BoostedTreeParams params = {});
};

std::string to_string(LearnerKind kind);
std::string to_string(EvalMode mode);
LearnerKind parse_learner_kind(const std::string& s);
EvalMode parse_eval_mode(const std::string& s);

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec);

/// Which rows models are trained on and which rows they are scored on.
struct RowSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};

/// holdout == 0 puts every row in both sets.
std::shared_ptr<const RowSplit> make_row_split(std::size_t n, double holdout_fraction, RngStream rng);

struct FittedModel {
  std::vector<std::size_t> subset;
  std::shared_ptr<const Regressor> predictor;
  /// Per-feature means over training rows; filled in dropout mode only.
  std::vector<double> train_column_means;
  std::shared_ptr<const RowSplit> split;
  std::vector<std::string> column_names;
};

/// Fits on `subset` of the columns. The empty subset gives the null model,
/// which predicts the training mean of the response.
FittedModel fit(const LearnerSpec& spec, const Dataset& data, std::span<const std::size_t> subset, RngStream rng,
                std::shared_ptr<const RowSplit> split);

/// As above, drawing the row split from `rng.child("holdout")`.
FittedModel fit(const LearnerSpec& spec, const Dataset& data, std::span<const std::size_t> subset, RngStream rng);

struct ValueResult {
  double mse = 0.0;
  Eigen::VectorXd squared_residuals;
};

/// Mean squared error over the model's evaluation rows.
ValueResult value(const FittedModel& model, const Dataset& data);

/// Scores a full-feature model with the columns outside `subset` replaced by
/// their training means.
ValueResult dropout_value(const FittedModel& full_model, const Dataset& data, std::span<const std::size_t> subset);

}  // namespace minshap
