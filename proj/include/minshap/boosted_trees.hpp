#pragma once

#include "minshap/learners.hpp"

#include <cstdint>
#include <vector>

namespace minshap {

/// Gradient-boosted regression trees for squared error.
///
/// Features are bucketed into at most `max_bins` quantile bins once per fit;
/// trees grow level-wise to `max_depth` using histogram split search with the
/// sibling-subtraction trick. Leaves hold mean residuals scaled by the
/// learning rate. Each tree sees a fresh row subsample drawn without
/// replacement. No other regularization.
class BoostedTreesRegressor final : public Regressor {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // go left when x <= threshold
    std::int32_t child[2] = {-1, -1};  // left, right
    double value = 0.0;
  };

  BoostedTreesRegressor(double base_score, std::size_t n_features, std::vector<Node> nodes,
                        std::vector<std::size_t> roots, Eigen::VectorXd fitted = {})
      : base_score_(base_score),
        n_features_(n_features),
        nodes_(std::move(nodes)),
        roots_(std::move(roots)),
        fitted_(std::move(fitted)) {}

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override;
  [[nodiscard]] const Eigen::VectorXd* training_predictions() const override {
    return fitted_.size() > 0 ? &fitted_ : nullptr;
  }

  [[nodiscard]] std::size_t tree_count() const { return roots_.size(); }
  [[nodiscard]] double base_score() const { return base_score_; }

 private:
  double base_score_;
  std::size_t n_features_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> roots_;
  Eigen::VectorXd fitted_;
};

class BoostedTreesLearner final : public Learner {
 public:
  explicit BoostedTreesLearner(BoostedTreeParams params);
  [[nodiscard]] std::unique_ptr<Regressor> train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                 RngStream rng) const override;

 private:
  BoostedTreeParams params_;
};

}  // namespace minshap
