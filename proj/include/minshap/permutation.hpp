#pragma once

#include "minshap/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace minshap {

using Permutation = std::vector<std::size_t>;

/// K feature orderings plus the seed of the stream that drew them.
struct PermutationPlan {
  std::vector<Permutation> perms;
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t K() const { return perms.size(); }
  [[nodiscard]] std::size_t p() const { return perms.empty() ? 0 : perms.front().size(); }
};

/// K orderings drawn i.i.d. uniformly (with replacement) from the p! orderings.
/// Ordering k uses only `rng.child("perm", k)`.
PermutationPlan sample_permutations(std::size_t p, std::size_t K, const RngStream& rng);

/// Wraps explicit orderings; each must be a bijection on {0..p-1}.
PermutationPlan make_plan(std::vector<Permutation> perms, std::uint64_t seed = 0);

/// All p! orderings in lexicographic order. Limited to p <= 8.
std::vector<Permutation> all_permutations(std::size_t p);

bool is_permutation_of_range(std::span<const std::size_t> perm, std::size_t p);

struct OrderStatistics {
  std::vector<double> sorted;
  /// rank -> original position; ties keep original order.
  std::vector<std::size_t> positions;
};

OrderStatistics order_statistics(std::span<const double> values);

}  // namespace minshap
