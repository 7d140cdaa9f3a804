#pragma once

#include "minshap/shapley.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace minshap::seltest {

enum class PchtMethod { bonferroni, stouffer, fisher };
inline constexpr std::array<PchtMethod, 3> kPchtMethods{PchtMethod::bonferroni, PchtMethod::stouffer,
                                                         PchtMethod::fisher};
std::string to_string(PchtMethod method);

/// Rejection rule for the MinShap statistic: reject when phi_min >= t with
/// t = sqrt(-2 ln(alpha) sigma2).
double minshap_threshold(double sigma2_assoc, double alpha);

struct PermPValues {
  std::vector<double> z;
  std::vector<double> pvals;
};

/// z = vi / sqrt(sigma2) and two-sided normal p-values. Cells with
/// sigma2 < 1e-15 get z = 0, p = 1.
PermPValues perm_pvalues(std::span<const double> vi, std::span<const double> sigma2);

inline constexpr double kDegenerateVariance = 1e-15;

double max_p(std::span<const double> pvals);

/// Partial-conjunction p-value for "at least u of K per-ordering nulls are
/// false", u in [1, K]. `absz` holds |z|.
double pcht_pvalue(PchtMethod method, std::span<const double> pvals, std::span<const double> absz, std::size_t u);

/// Running maximum over u, capped at 1.
std::vector<double> holm_adjust(std::span<const double> raw);

/// Holm-adjusted PCHT p-values for u = 1..K.
std::vector<double> adjusted_pcht(PchtMethod method, std::span<const double> pvals, std::span<const double> absz);

/// Smallest K with (s/(s+1))^K <= eps.
std::size_t recommend_K(double s, double eps);

struct FeatureTestRecord {
  std::size_t feature = 0;
  double phi_mean = 0.0;
  double phi_min = 0.0;
  double sigma2_assoc = 0.0;
  double threshold = 0.0;
  std::vector<double> z;
  std::vector<double> pvals;
  double p_max = 1.0;
  std::array<std::vector<double>, 3> adjusted;  // indexed by PchtMethod, entry u-1

  bool reject_minshap = false;
  bool reject_maxp = false;
  std::array<bool, 3> reject_pcht{false, false, false};

  [[nodiscard]] const std::vector<double>& adjusted_for(PchtMethod m) const {
    return adjusted[static_cast<std::size_t>(m)];
  }
  [[nodiscard]] bool rejects_pcht(PchtMethod m) const { return reject_pcht[static_cast<std::size_t>(m)]; }
};

/// Fills every test for every feature. MinShap rejects when phi_min >= t;
/// the p-value tests reject when p < alpha. PCHT decisions use the Holm
/// adjusted value at level u.
std::vector<FeatureTestRecord> run_all_tests(const ShapleyStats& stats, const VIMatrix& m, double alpha,
                                             std::size_t u);

enum class TestKind { minshap, maxp, pcht_bonferroni, pcht_stouffer, pcht_fisher };
inline constexpr std::array<TestKind, 5> kTestKinds{TestKind::minshap, TestKind::maxp, TestKind::pcht_bonferroni,
                                                    TestKind::pcht_stouffer, TestKind::pcht_fisher};
std::string to_string(TestKind kind);
TestKind parse_test_kind(const std::string& s);

/// Features rejected by `kind`, ascending.
std::vector<std::size_t> selected(std::span<const FeatureTestRecord> records, TestKind kind);

/// Features whose Holm-adjusted PCHT p at level u is below alpha.
std::vector<std::size_t> selected_at(std::span<const FeatureTestRecord> records, PchtMethod method, std::size_t u,
                                     double alpha);

/// Scores a candidate selected set; larger is better.
using SelectionScorer = std::function<double(const std::vector<std::size_t>& selected)>;

/// Picks u in [u_lo, u_hi] maximizing scorer(selected set at u). Ties go to
/// the larger u.
std::size_t screen_u(std::span<const FeatureTestRecord> records, PchtMethod method, std::size_t u_lo,
                     std::size_t u_hi, double alpha, const SelectionScorer& scorer);

/// Benchmark mode: F1 of the selected set against a known support.
SelectionScorer f1_scorer(std::vector<std::size_t> truth, std::size_t p);

/// Data mode: negative held-out MSE of a model refit on the selected features.
SelectionScorer holdout_mse_scorer(const Dataset& data, const LearnerSpec& spec, double holdout_fraction,
                                   const RngStream& rng);

}  // namespace minshap::seltest
