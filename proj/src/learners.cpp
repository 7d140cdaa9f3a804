#include "minshap/learners.hpp"

#include "minshap/boosted_trees.hpp"
#include "minshap/errors.hpp"
#include "minshap/ridge.hpp"

#include <algorithm>
#include <cmath>

namespace minshap {

void LearnerSpec::validate() const {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw InvalidArgument("learner: holdout_fraction must be in [0, 1)");
  }
  if (custom) return;
  if (kind == LearnerKind::ridge && !(ridge.lambda >= 0.0)) throw InvalidArgument("ridge: lambda must be >= 0");
  if (kind == LearnerKind::boosted_trees) BoostedTreesLearner{trees};
}

LearnerSpec LearnerSpec::make_ridge(double lambda) {
  LearnerSpec spec;
  spec.kind = LearnerKind::ridge;
  spec.ridge.lambda = lambda;
  return spec;
}

LearnerSpec LearnerSpec::make_boosted_trees(BoostedTreeParams params) {
  LearnerSpec spec;
  spec.kind = LearnerKind::boosted_trees;
  spec.trees = params;
  return spec;
}

std::string to_string(LearnerKind kind) { return kind == LearnerKind::ridge ? "ridge" : "boosted-trees"; }
std::string to_string(EvalMode mode) { return mode == EvalMode::refit ? "refit" : "dropout"; }

LearnerKind parse_learner_kind(const std::string& s) {
  if (s == "ridge") return LearnerKind::ridge;
  if (s == "boosted-trees" || s == "boosted_trees" || s == "gbt") return LearnerKind::boosted_trees;
  throw ConfigError("unknown learner kind '" + s + "' (expected ridge or boosted-trees)");
}

EvalMode parse_eval_mode(const std::string& s) {
  if (s == "refit") return EvalMode::refit;
  if (s == "dropout") return EvalMode::dropout;
  throw ConfigError("unknown eval mode '" + s + "' (expected refit or dropout)");
}

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec) {
  switch (spec.kind) {
    case LearnerKind::ridge:
      return std::make_unique<RidgeLearner>(spec.ridge.lambda);
    case LearnerKind::boosted_trees:
      return std::make_unique<BoostedTreesLearner>(spec.trees);
  }
  throw InvalidArgument("make_learner: unknown kind");
}

std::shared_ptr<const RowSplit> make_row_split(std::size_t n, double holdout_fraction, RngStream rng) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw InvalidArgument("make_row_split: holdout_fraction must be in [0, 1)");
  }
  auto split = std::make_shared<RowSplit>();
  auto all = iota_indices(n);
  if (holdout_fraction == 0.0) {
    split->train = all;
    split->eval = std::move(all);
    return split;
  }
  const auto n_eval = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n))), 1, n - 1);
  for (std::size_t i = 0; i < n_eval; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(all[i], all[j]);
  }
  split->eval.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_eval));
  split->train.assign(all.begin() + static_cast<std::ptrdiff_t>(n_eval), all.end());
  std::sort(split->eval.begin(), split->eval.end());
  std::sort(split->train.begin(), split->train.end());
  return split;
}

namespace {

void check_subset(std::span<const std::size_t> subset, std::size_t p) {
  std::vector<bool> seen(p, false);
  for (auto j : subset) {
    if (j >= p) throw InvalidArgument("fit: feature index " + std::to_string(j) + " out of range");
    if (seen[j]) throw InvalidArgument("fit: feature index " + std::to_string(j) + " repeated in subset");
    seen[j] = true;
  }
}

void check_compatible(const FittedModel& model, const Dataset& data) {
  if (!model.predictor || !model.split) throw InvalidState("model has not been fitted");
  if (data.p() != model.column_names.size()) {
    throw InvalidArgument("value: dataset has " + std::to_string(data.p()) + " columns, model was fitted on " +
                          std::to_string(model.column_names.size()));
  }
  if (data.feature_names() != model.column_names) throw InvalidArgument("value: column names differ from the fit");
  const std::size_t max_row = std::max(model.split->eval.empty() ? 0 : model.split->eval.back(),
                                       model.split->train.empty() ? 0 : model.split->train.back());
  if (max_row >= data.n()) throw InvalidArgument("value: dataset has fewer rows than the fit");
}

ValueResult score(const Eigen::VectorXd& prediction, const Eigen::VectorXd& truth) {
  ValueResult out;
  out.squared_residuals = (truth - prediction).array().square();
  out.mse = out.squared_residuals.mean();
  if (!std::isfinite(out.mse)) throw NumericalError("value: non-finite mean squared error");
  return out;
}

}  // namespace

FittedModel fit(const LearnerSpec& spec, const Dataset& data, std::span<const std::size_t> subset, RngStream rng,
                std::shared_ptr<const RowSplit> split) {
  check_subset(subset, data.p());
  if (!split) throw InvalidArgument("fit: missing row split");
  FittedModel model;
  model.subset.assign(subset.begin(), subset.end());
  model.split = std::move(split);
  model.column_names = data.feature_names();

  const auto& train = model.split->train;
  const Eigen::VectorXd y = data.gather_response(train);
  if (spec.eval_mode == EvalMode::dropout) {
    model.train_column_means.resize(data.p());
    for (std::size_t c = 0; c < data.p(); ++c) {
      double sum = 0.0;
      for (auto r : train) sum += data.features()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      model.train_column_means[c] = sum / static_cast<double>(train.size());
    }
  }
  if (subset.empty()) {
    model.predictor = std::make_shared<ConstantRegressor>(y.mean());
    return model;
  }
  const Eigen::MatrixXd x = data.gather(train, subset);
  if (spec.custom) {
    model.predictor = spec.custom->train(x, y, rng);
  } else {
    model.predictor = make_learner(spec)->train(x, y, rng);
  }
  if (!model.predictor) throw NumericalError("fit: learner returned no model");
  return model;
}

FittedModel fit(const LearnerSpec& spec, const Dataset& data, std::span<const std::size_t> subset, RngStream rng) {
  auto split = make_row_split(data.n(), spec.holdout_fraction, rng.child("holdout"));
  return fit(spec, data, subset, rng, std::move(split));
}

ValueResult value(const FittedModel& model, const Dataset& data) {
  check_compatible(model, data);
  const auto& rows = model.split->eval;
  const Eigen::VectorXd* in_sample = model.predictor->training_predictions();
  if (in_sample && model.split->eval == model.split->train && in_sample->size() == static_cast<Eigen::Index>(rows.size())) {
    return score(*in_sample, data.gather_response(rows));
  }
  return score(model.predictor->predict(data.gather(rows, model.subset)), data.gather_response(rows));
}

ValueResult dropout_value(const FittedModel& full_model, const Dataset& data, std::span<const std::size_t> subset) {
  check_compatible(full_model, data);
  if (full_model.train_column_means.size() != data.p()) {
    throw InvalidState("dropout_value: model has no stored column means (fit it in dropout mode)");
  }
  if (full_model.subset.size() != data.p()) throw InvalidState("dropout_value: model was not fitted on all features");
  check_subset(subset, data.p());
  std::vector<bool> keep(data.p(), false);
  for (auto j : subset) keep[j] = true;

  const auto& rows = full_model.split->eval;
  Eigen::MatrixXd x = data.gather(rows, full_model.subset);
  for (std::size_t c = 0; c < full_model.subset.size(); ++c) {
    const std::size_t feature = full_model.subset[c];
    if (!keep[feature]) x.col(static_cast<Eigen::Index>(c)).setConstant(full_model.train_column_means[feature]);
  }
  return score(full_model.predictor->predict(x), data.gather_response(rows));
}

}  // namespace minshap
