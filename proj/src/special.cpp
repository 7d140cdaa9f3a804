#include "minshap/special.hpp"

#include "minshap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace minshap {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double two_sided_normal_pvalue(double z) {
  return std::min(1.0, std::erfc(std::fabs(z) / std::numbers::sqrt2));
}

double chi2_upper_tail_even(double x, unsigned dof) {
  if (dof == 0 || dof % 2 != 0) throw InvalidArgument("chi2_upper_tail_even: dof must be a positive even number");
  if (std::isnan(x)) throw InvalidArgument("chi2_upper_tail_even: NaN statistic");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double h = 0.5 * x;
  const unsigned m = dof / 2;
  // log-sum-exp over log(h^i / i!) - h
  std::vector<double> logs(m);
  double log_term = 0.0;
  for (unsigned i = 0; i < m; ++i) {
    if (i > 0) log_term += std::log(h) - std::log(static_cast<double>(i));
    logs[i] = log_term;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - top);
  return std::clamp(std::exp(top + std::log(sum) - h), 0.0, 1.0);
}

}  // namespace minshap
