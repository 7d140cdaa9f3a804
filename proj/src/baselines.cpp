#include "minshap/baselines.hpp"

#include "minshap/errors.hpp"
#include "minshap/parallel.hpp"
#include "minshap/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace minshap::baselines {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::size_t> all_but(std::size_t p, std::size_t j) {
  std::vector<std::size_t> out;
  out.reserve(p - 1);
  for (std::size_t c = 0; c < p; ++c) {
    if (c != j) out.push_back(c);
  }
  return out;
}

Eigen::VectorXd residuals(const LearnerSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const RngStream& rng) {
  if (x.cols() == 0) return y.array() - y.mean();
  const auto model = spec.custom ? spec.custom->train(x, y, rng) : make_learner(spec)->train(x, y, rng);
  return y - model->predict(x);
}

}  // namespace

double paired_difference_pvalue(std::span<const double> d) {
  const std::size_t m = d.size();
  if (m == 0) return 1.0;
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(m);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
  if (sd <= 0.0 || !std::isfinite(sd)) return mean > 0.0 ? 0.0 : 1.0;
  const double z = std::sqrt(static_cast<double>(m)) * mean / sd;
  return 1.0 - normal_cdf(z);
}

BaselineResult loco(const Dataset& data, const LearnerSpec& spec, double alpha, const RngStream& rng) {
  const auto start = Clock::now();
  if (data.n() < 20) throw InvalidArgument("loco: needs at least 20 rows");
  BaselineResult out;
  out.method = "loco";
  out.diagnostic_kind = "pvalue";
  const std::size_t p = data.p();
  const auto split = make_row_split(data.n(), 0.5, rng.child("split"));
  LearnerSpec plug = spec;
  plug.eval_mode = EvalMode::refit;

  const auto full = value(fit(plug, data, iota_indices(p), rng.child("full"), split), data);
  out.diagnostics.resize(p);
  std::vector<double> d(full.squared_residuals.size());
  for (std::size_t j = 0; j < p; ++j) {
    const auto reduced = value(fit(plug, data, all_but(p, j), rng.child("drop", j), split), data);
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = reduced.squared_residuals(static_cast<Eigen::Index>(i)) - full.squared_residuals(static_cast<Eigen::Index>(i));
    }
    out.diagnostics[j] = paired_difference_pvalue(d);
    if (out.diagnostics[j] < alpha) out.selected.push_back(j);
  }
  out.runtime_seconds = seconds_since(start);
  return out;
}

GcmStatistic gcm_statistic(std::span<const double> products) {
  GcmStatistic out;
  const std::size_t n = products.size();
  if (n == 0) return out;
  double sum = 0.0, sum_sq = 0.0;
  for (double r : products) {
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  if (!(var > 0.0) || !std::isfinite(var)) return out;
  out.t = std::sqrt(static_cast<double>(n)) * mean / std::sqrt(var);
  out.pvalue = two_sided_normal_pvalue(out.t);
  return out;
}

BaselineResult gcm(const Dataset& data, const LearnerSpec& spec, double alpha, const RngStream& rng) {
  const auto start = Clock::now();
  if (data.n() < 20) throw InvalidArgument("gcm: needs at least 20 rows");
  BaselineResult out;
  out.method = "gcm";
  out.diagnostic_kind = "pvalue";
  const std::size_t p = data.p();
  const auto rows = iota_indices(data.n());
  out.diagnostics.resize(p);
  std::vector<double> products(data.n());
  for (std::size_t j = 0; j < p; ++j) {
    const auto others = all_but(p, j);
    const Eigen::MatrixXd x_rest = data.gather(rows, others);
    const Eigen::VectorXd eps = residuals(spec, x_rest, data.response(), rng.child("gcm-y", j));
    const Eigen::VectorXd xi = residuals(spec, x_rest, data.features().col(static_cast<Eigen::Index>(j)),
                                         rng.child("gcm-x", j));
    for (std::size_t i = 0; i < data.n(); ++i) {
      products[i] = eps(static_cast<Eigen::Index>(i)) * xi(static_cast<Eigen::Index>(i));
    }
    out.diagnostics[j] = gcm_statistic(products).pvalue;
    if (out.diagnostics[j] < alpha) out.selected.push_back(j);
  }
  out.runtime_seconds = seconds_since(start);
  return out;
}

double soft_threshold(double rho, double lambda) {
  const double mag = std::fabs(rho) - lambda;
  return mag > 0.0 ? std::copysign(mag, rho) : 0.0;
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  // Same per-column dot products as the first coordinate sweep, so the
  // path is exactly zero at this value.
  double best = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) best = std::max(best, std::fabs(x.col(j).dot(y) / static_cast<double>(x.rows())));
  return best;
}

std::vector<double> lasso_lambda_grid(double lambda_max, const LassoOptions& options) {
  if (options.path_length == 0) throw InvalidArgument("lasso: empty path");
  std::vector<double> grid(options.path_length);
  if (options.path_length == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double log_hi = std::log(lambda_max);
  const double log_lo = std::log(lambda_max * options.min_ratio);
  for (std::size_t i = 0; i < options.path_length; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(options.path_length - 1);
    grid[i] = std::exp(log_hi + t * (log_lo - log_hi));
  }
  grid.front() = lambda_max;
  return grid;
}

Eigen::MatrixXd lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const double> lambdas,
                           const LassoOptions& options) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd path = Eigen::MatrixXd::Zero(p, static_cast<Eigen::Index>(lambdas.size()));
  const Eigen::VectorXd col_sq = x.colwise().squaredNorm().transpose() / n;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = y;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double lambda = lambdas[l];
    for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (col_sq(j) <= 0.0) continue;
        const double old = beta(j);
        const double rho = x.col(j).dot(resid) / n + col_sq(j) * old;
        const double updated = soft_threshold(rho, lambda) / col_sq(j);
        if (updated != old) {
          resid.noalias() -= (updated - old) * x.col(j);
          beta(j) = updated;
          max_change = std::max(max_change, std::fabs(updated - old) * std::sqrt(col_sq(j)));
        }
      }
      if (max_change < options.tolerance) break;
    }
    path.col(static_cast<Eigen::Index>(l)) = beta;
  }
  return path;
}

namespace {

struct Standardized {
  Eigen::MatrixXd x;
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;  // 0 marks a constant column
  Eigen::VectorXd y;
  double y_mean = 0.0;
};

Standardized standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Standardized s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().mean();
  s.x = x.rowwise() - s.mean;
  s.scale = (s.x.colwise().squaredNorm() / n).array().sqrt();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (s.scale(j) > 1e-12 * std::max(1.0, std::fabs(s.mean(j)))) {
      s.x.col(j) /= s.scale(j);
    } else {
      s.scale(j) = 0.0;
      s.x.col(j).setZero();
    }
  }
  s.y_mean = y.mean();
  s.y = y.array() - s.y_mean;
  return s;
}

Eigen::MatrixXd apply_standardization(const Standardized& s, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x.rowwise() - s.mean;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (s.scale(j) > 0.0) out.col(j) /= s.scale(j);
    else out.col(j).setZero();
  }
  return out;
}

}  // namespace

BaselineResult lasso_select(const Dataset& data, std::size_t folds, const RngStream& rng,
                            const LassoOptions& options) {
  const auto start = Clock::now();
  if (folds < 2) throw InvalidArgument("lasso: need at least 2 folds");
  if (folds > data.n()) throw InvalidArgument("lasso: more folds than rows");
  BaselineResult out;
  out.method = "lasso";
  out.diagnostic_kind = "coefficient";

  const auto full = standardize(data.features(), data.response());
  const double lambda_max = lasso_lambda_max(full.x, full.y);
  if (!(lambda_max > 0.0)) {
    out.diagnostics.assign(data.p(), 0.0);
    out.runtime_seconds = seconds_since(start);
    return out;
  }
  const auto grid = lasso_lambda_grid(lambda_max, options);

  auto order = iota_indices(data.n());
  RngStream fold_rng = rng.child("folds");
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[fold_rng.below(i)]);
  std::vector<double> cv_error(grid.size(), 0.0);
  const auto all_cols = iota_indices(data.p());
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, valid;
    for (std::size_t i = 0; i < order.size(); ++i) (i % folds == f ? valid : train).push_back(order[i]);
    const auto s = standardize(data.gather(train, all_cols), data.gather_response(train));
    const auto path = lasso_path(s.x, s.y, grid, options);
    const Eigen::MatrixXd xv = apply_standardization(s, data.gather(valid, all_cols));
    const Eigen::VectorXd yv = data.gather_response(valid);
    for (std::size_t l = 0; l < grid.size(); ++l) {
      const Eigen::VectorXd pred = (xv * path.col(static_cast<Eigen::Index>(l))).array() + s.y_mean;
      cv_error[l] += (yv - pred).squaredNorm() / static_cast<double>(valid.size()) / static_cast<double>(folds);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(cv_error.begin(), cv_error.end()) - cv_error.begin());
  const auto path = lasso_path(full.x, full.y, std::span<const double>(grid.data(), best + 1), options);
  const Eigen::VectorXd beta = path.col(static_cast<Eigen::Index>(best));
  out.diagnostics.assign(beta.data(), beta.data() + beta.size());
  for (std::size_t j = 0; j < data.p(); ++j) {
    if (beta(static_cast<Eigen::Index>(j)) != 0.0) out.selected.push_back(j);
  }
  out.log.push_back("lambda=" + std::to_string(grid[best]));
  out.runtime_seconds = seconds_since(start);
  return out;
}

BaselineResult stability_select(const Selector& base, const Dataset& data, std::size_t B, double rate,
                                double threshold, const RngStream& rng, std::size_t workers) {
  const auto start = Clock::now();
  if (B == 0) throw InvalidArgument("stability_select: B must be at least 1");
  if (!(rate > 0.0 && rate < 1.0)) throw InvalidArgument("stability_select: rate must be in (0, 1)");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InvalidArgument("stability_select: threshold must be in (0, 1]");
  const auto m = static_cast<std::size_t>(std::floor(rate * static_cast<double>(data.n())));
  if (m < 2) throw InvalidArgument("stability_select: subsample has fewer than 2 rows");

  const std::size_t p = data.p();
  std::vector<std::vector<std::size_t>> picks(B);
  std::vector<std::string> errors(B);
  std::vector<char> failed(B, 0);
  parallel_for(B, workers, [&](std::size_t b) {
    RngStream draw = rng.child("subsample", b);
    auto rows = iota_indices(data.n());
    for (std::size_t i = 0; i < m; ++i) std::swap(rows[i], rows[i + draw.below(data.n() - i)]);
    rows.resize(m);
    std::sort(rows.begin(), rows.end());
    try {
      picks[b] = base(data.subset_rows(rows), rng.child("base", b));
      for (auto j : picks[b]) {
        if (j >= p) throw InvalidArgument("selector returned index " + std::to_string(j));
      }
    } catch (const std::exception& e) {
      picks[b].clear();
      errors[b] = e.what();
      failed[b] = 1;
    }
  });

  BaselineResult out;
  out.method = "stability";
  out.diagnostic_kind = "frequency";
  std::vector<std::size_t> counts(p, 0);
  for (std::size_t b = 0; b < B; ++b) {
    if (failed[b]) {
      ++out.failures;
      out.log.push_back("subsample " + std::to_string(b) + " failed: " + errors[b]);
    }
    std::vector<bool> seen(p, false);
    for (auto j : picks[b]) {
      if (!seen[j]) ++counts[j];
      seen[j] = true;
    }
  }
  out.diagnostics.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    out.diagnostics[j] = static_cast<double>(counts[j]) / static_cast<double>(B);
    if (static_cast<double>(counts[j]) >= threshold * static_cast<double>(B) - 1e-9) out.selected.push_back(j);
  }
  out.runtime_seconds = seconds_since(start);
  return out;
}

}  // namespace minshap::baselines
