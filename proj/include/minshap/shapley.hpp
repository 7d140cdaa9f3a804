#pragma once

#include "minshap/dataset.hpp"
#include "minshap/learners.hpp"
#include "minshap/permutation.hpp"
#include "minshap/rng.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace minshap {

/// Marginal contributions of every feature along one ordering.
struct PermutationContribution {
  std::vector<double> vi;      // indexed by feature
  std::vector<double> sigma2;  // Var(e2_cur - e2_new) / m, unbiased divisor inside Var
};

/// p x K grid of marginal contributions and their variances.
struct VIMatrix {
  Eigen::MatrixXd vi;
  Eigen::MatrixXd sigma2;
  PermutationPlan plan;
  std::size_t n = 0;  // rows the contributions were scored on
  std::vector<std::string> feature_names;

  [[nodiscard]] std::size_t p() const { return static_cast<std::size_t>(vi.rows()); }
  [[nodiscard]] std::size_t K() const { return static_cast<std::size_t>(vi.cols()); }
};

struct ShapleyStats {
  std::vector<double> phi_mean;
  std::vector<double> phi_min;
  /// Variance paired with the ordering that attains phi_min.
  std::vector<double> sigma2_assoc;
  std::vector<std::size_t> argmin_perm;
};

/// State shared by every ordering of one run: the row split, the null model's
/// scores, and in dropout mode the single full-feature model.
///
/// The model for a feature subset S is trained with `rng.child("subset",
/// subset_key(S))`, so its value depends on S alone and not on the ordering
/// that reached it. Values of subsets that many orderings share (sizes 1,
/// p - 1 and p) are cached.
class PermutationContext {
 public:
  /// Split from `rng.child("holdout")`, dropout full model from `rng.child("full")`.
  PermutationContext(const Dataset& data, LearnerSpec spec, const RngStream& rng);

  [[nodiscard]] PermutationContribution evaluate(std::span<const std::size_t> perm) const;

  /// MSE and squared residuals of the model restricted to `subset`.
  [[nodiscard]] ValueResult subset_value(std::span<const std::size_t> subset) const;

  [[nodiscard]] double null_mse() const { return null_.mse; }
  [[nodiscard]] std::size_t eval_rows() const { return split_->eval.size(); }

 private:
  const Dataset& data_;
  LearnerSpec spec_;
  RngStream rng_;
  std::shared_ptr<const RowSplit> split_;
  ValueResult null_;
  std::optional<FittedModel> full_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::vector<std::size_t>, ValueResult> cache_;
};

/// Order-independent key of a feature subset.
std::uint64_t subset_key(std::span<const std::size_t> subset);

/// Walks `perm`, adding one feature at a time; vi[j] = V_cur - V_new at the
/// step that introduces j.
PermutationContribution evaluate_permutation(const Dataset& data, const LearnerSpec& spec,
                                             std::span<const std::size_t> perm, const RngStream& rng);

/// Columns run on up to `workers` threads; the result does not depend on the count.
VIMatrix build_vi_matrix(const Dataset& data, const LearnerSpec& spec, const PermutationPlan& plan,
                         const RngStream& rng, std::size_t workers = 1);

ShapleyStats reduce_stats(const VIMatrix& m);

void write_vi_matrix_csv(const VIMatrix& m, std::ostream& out);
VIMatrix read_vi_matrix_csv(std::istream& in);

}  // namespace minshap
