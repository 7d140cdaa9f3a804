#pragma once

#include "minshap/learners.hpp"

namespace minshap {

/// Linear model with unpenalized intercept, solved from the centered normal
/// equations (X'X + lambda I) beta = X'y.
class RidgeRegressor final : public Regressor {
 public:
  RidgeRegressor(double intercept, Eigen::VectorXd coef) : intercept_(intercept), coef_(std::move(coef)) {}

  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override;

  [[nodiscard]] double intercept() const { return intercept_; }
  [[nodiscard]] const Eigen::VectorXd& coef() const { return coef_; }

 private:
  double intercept_;
  Eigen::VectorXd coef_;
};

class RidgeLearner final : public Learner {
 public:
  explicit RidgeLearner(double lambda) : lambda_(lambda) {}
  [[nodiscard]] std::unique_ptr<Regressor> train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                 RngStream rng) const override;
  [[nodiscard]] std::unique_ptr<RidgeRegressor> train_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const;

 private:
  double lambda_;
};

/// Constant prediction; the null model f_{n,empty}.
class ConstantRegressor final : public Regressor {
 public:
  explicit ConstantRegressor(double value) : value_(value) {}
  [[nodiscard]] Eigen::VectorXd predict(const Eigen::MatrixXd& x) const override {
    return Eigen::VectorXd::Constant(x.rows(), value_);
  }
  [[nodiscard]] double value() const { return value_; }

 private:
  double value_;
};

}  // namespace minshap
