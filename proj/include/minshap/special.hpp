#pragma once

namespace minshap {

/// Standard normal CDF.
double normal_cdf(double x);

/// 2 * (1 - Phi(|z|)), computed through erfc so tiny tails keep precision.
double two_sided_normal_pvalue(double z);

/// Upper tail P(chi^2_dof >= x) for an even number of degrees of freedom,
/// using the closed form exp(-x/2) * sum_{i<dof/2} (x/2)^i / i!.
double chi2_upper_tail_even(double x, unsigned dof);

}  // namespace minshap
