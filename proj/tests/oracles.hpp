#pragma once

// Reference implementations used only by tests. None of these call into the
// library; each one takes a different route to the same number.

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <set>
#include <vector>

namespace oracle {

inline constexpr long double kPi = 3.141592653589793238462643383279502884L;

/// erf through the all-positive series
///   erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)),
/// which has no cancellation, so it stays accurate for large |x|.
inline long double erf_series(long double x) {
  const long double ax = std::fabs(x);
  long double term = ax;
  long double sum = ax;
  for (int n = 1; n < 2000; ++n) {
    term *= 2.0L * ax * ax / static_cast<long double>(2 * n + 1);
    sum += term;
    if (term < sum * 1e-21L) break;
  }
  const long double r = 2.0L / std::sqrt(kPi) * std::exp(-ax * ax) * sum;
  return x < 0 ? -r : r;
}

inline double normal_cdf(double x) {
  return static_cast<double>(0.5L * (1.0L + erf_series(static_cast<long double>(x) / std::sqrt(2.0L))));
}

inline double two_sided_p(double z) { return 2.0 * (1.0 - normal_cdf(std::fabs(z))); }

/// Upper chi-square tail for even dof, summed term by term as written.
inline double chi2_tail_even_direct(double x, unsigned dof) {
  const long double h = 0.5L * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (unsigned i = 1; i < dof / 2; ++i) {
    term *= h / static_cast<long double>(i);
    sum += term;
  }
  return static_cast<double>(std::exp(-h) * sum);
}

/// Same tail via the regularized upper incomplete gamma function.
inline double chi2_tail_gamma(double x, unsigned dof) {
  return boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * x);
}

/// Solves exp(-t^2 / (2 sigma2)) = alpha for t >= 0 by bisection.
inline double minshap_threshold_bisect(double sigma2, double alpha) {
  if (sigma2 == 0.0 || alpha == 1.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  auto g = [&](double t) { return std::exp(-t * t / (2.0 * sigma2)) - alpha; };
  while (g(hi) > 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Counts K upward until (s/(s+1))^K drops to eps.
inline std::size_t recommend_K_brute(double s, double eps) {
  if (s == 0.0) return 1;
  const long double q = static_cast<long double>(s) / (static_cast<long double>(s) + 1.0L);
  long double power = q;
  std::size_t K = 1;
  while (power > eps) {
    power *= q;
    ++K;
  }
  return K;
}

/// Minimizer of 0.5 (b - rho)^2 + lambda |b| found by comparing the three
/// candidate points of the piecewise quadratic.
inline double soft_threshold_brute(double rho, double lambda) {
  auto obj = [&](double b) { return 0.5 * (b - rho) * (b - rho) + lambda * std::fabs(b); };
  // Stationary point of the b > 0 piece is rho - lambda, of the b < 0 piece rho + lambda.
  std::vector<double> candidates{0.0};
  if (rho - lambda > 0.0) candidates.push_back(rho - lambda);
  if (rho + lambda < 0.0) candidates.push_back(rho + lambda);
  double best = 0.0;
  for (double c : candidates) {
    if (obj(c) < obj(best)) best = c;
  }
  return best;
}

/// Stouffer partial-conjunction p from the K-u+1 smallest |z|.
inline double stouffer_pc(std::vector<double> absz, std::size_t u) {
  const std::size_t m = absz.size() - u + 1;
  std::vector<double> chosen;
  std::multiset<double> pool;
  for (double v : absz) pool.insert(std::fabs(v));
  auto it = pool.begin();
  for (std::size_t i = 0; i < m; ++i) chosen.push_back(*it++);
  long double s = 0.0L;
  for (double v : chosen) s += v;
  return two_sided_p(static_cast<double>(s / std::sqrt(static_cast<long double>(m))));
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Confusion confusion(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& truth,
                           std::size_t p) {
  const std::set<std::size_t> s(selected.begin(), selected.end());
  const std::set<std::size_t> t(truth.begin(), truth.end());
  std::set<std::size_t> all;
  for (std::size_t j = 0; j < p; ++j) all.insert(j);
  std::vector<std::size_t> inter, s_minus_t, t_minus_s, neither, uni;
  std::set_intersection(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(inter));
  std::set_difference(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(s_minus_t));
  std::set_difference(t.begin(), t.end(), s.begin(), s.end(), std::back_inserter(t_minus_s));
  std::set_union(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(uni));
  std::set_difference(all.begin(), all.end(), uni.begin(), uni.end(), std::back_inserter(neither));
  return {inter.size(), s_minus_t.size(), t_minus_s.size(), neither.size()};
}

inline double jaccard(const std::vector<std::vector<std::size_t>>& sets) {
  if (sets.size() < 2) return 1.0;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = a + 1; b < sets.size(); ++b) {
      const std::set<std::size_t> x(sets[a].begin(), sets[a].end());
      const std::set<std::size_t> y(sets[b].begin(), sets[b].end());
      std::vector<std::size_t> i, u;
      std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(i));
      std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(u));
      total += u.empty() ? 1.0 : static_cast<double>(i.size()) / static_cast<double>(u.size());
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

/// Var(Y | X_S) for a jointly Gaussian (X, Y) with covariance `cov`, Y last.
inline double gaussian_conditional_variance(const Eigen::MatrixXd& cov, const std::vector<std::size_t>& subset) {
  const auto y = cov.rows() - 1;
  if (subset.empty()) return cov(y, y);
  const auto s = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd sxx(s, s);
  Eigen::VectorXd sxy(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    sxy(a) = cov(static_cast<Eigen::Index>(subset[a]), y);
    for (Eigen::Index b = 0; b < s; ++b) sxx(a, b) = cov(static_cast<Eigen::Index>(subset[a]), static_cast<Eigen::Index>(subset[b]));
  }
  return cov(y, y) - sxy.dot(sxx.ldlt().solve(sxy));
}

/// Joint covariance of (X1, X2, X3, Y) in the chain X1 -> X2 -> X3 -> Y with
/// unit-variance innovations: entry (i, j) = min(i, j) + 1.
inline Eigen::MatrixXd chain_covariance() {
  Eigen::MatrixXd c(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) c(i, j) = std::min(i, j) + 1;
  }
  return c;
}

/// Population marginal contributions along `perm` for the chain model.
inline std::vector<double> chain_vi(const std::vector<std::size_t>& perm) {
  const Eigen::MatrixXd cov = chain_covariance();
  std::vector<double> vi(3, 0.0);
  std::vector<std::size_t> prefix;
  double cur = gaussian_conditional_variance(cov, prefix);
  for (auto j : perm) {
    prefix.push_back(j);
    const double next = gaussian_conditional_variance(cov, prefix);
    vi[j] = cur - next;
    cur = next;
  }
  return vi;
}

}  // namespace oracle
