#include "minshap/ridge.hpp"

#include "minshap/errors.hpp"

namespace minshap {

Eigen::VectorXd RidgeRegressor::predict(const Eigen::MatrixXd& x) const {
  if (x.cols() != coef_.size()) throw InvalidArgument("ridge predict: column count mismatch");
  Eigen::VectorXd out = x * coef_;
  out.array() += intercept_;
  return out;
}

std::unique_ptr<RidgeRegressor> RidgeLearner::train_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) const {
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda_;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  Eigen::VectorXd coef;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) coef = ldlt.solve(rhs);
  if (coef.size() != rhs.size() || !coef.allFinite()) {
    // Singular Gram matrix (lambda = 0 with collinear columns): minimum-norm solution.
    coef = gram.completeOrthogonalDecomposition().solve(rhs);
  }
  if (!coef.allFinite()) throw NumericalError("ridge: normal equations produced non-finite coefficients");
  const double intercept = y_mean - x_mean.dot(coef);
  return std::make_unique<RidgeRegressor>(intercept, std::move(coef));
}

std::unique_ptr<Regressor> RidgeLearner::train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, RngStream) const {
  return train_ridge(x, y);
}

}  // namespace minshap
