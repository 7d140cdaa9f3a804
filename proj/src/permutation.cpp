#include "minshap/permutation.hpp"

#include "minshap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace minshap {

PermutationPlan sample_permutations(std::size_t p, std::size_t K, const RngStream& rng) {
  if (p == 0) throw InvalidArgument("sample_permutations: p must be at least 1");
  if (K == 0) throw InvalidArgument("sample_permutations: K must be at least 1");
  PermutationPlan plan;
  plan.seed = rng.key();
  plan.perms.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    RngStream stream = rng.child("perm", k);
    Permutation perm(p);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = p; i > 1; --i) {
      const auto j = static_cast<std::size_t>(stream.below(i));
      std::swap(perm[i - 1], perm[j]);
    }
    plan.perms.push_back(std::move(perm));
  }
  return plan;
}

bool is_permutation_of_range(std::span<const std::size_t> perm, std::size_t p) {
  if (perm.size() != p) return false;
  std::vector<bool> seen(p, false);
  for (auto v : perm) {
    if (v >= p || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

PermutationPlan make_plan(std::vector<Permutation> perms, std::uint64_t seed) {
  if (perms.empty()) throw InvalidArgument("make_plan: at least one permutation required");
  const std::size_t p = perms.front().size();
  if (p == 0) throw InvalidArgument("make_plan: empty permutation");
  for (std::size_t k = 0; k < perms.size(); ++k) {
    if (!is_permutation_of_range(perms[k], p)) {
      throw InvalidArgument("make_plan: entry " + std::to_string(k) + " is not a permutation of 0.." +
                            std::to_string(p - 1));
    }
  }
  return PermutationPlan{std::move(perms), seed};
}

std::vector<Permutation> all_permutations(std::size_t p) {
  if (p == 0 || p > 8) throw InvalidArgument("all_permutations: p must be in [1, 8]");
  std::vector<Permutation> out;
  Permutation perm(p);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  do {
    out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

OrderStatistics order_statistics(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("order_statistics: empty input");
  OrderStatistics out;
  out.positions.resize(values.size());
  std::iota(out.positions.begin(), out.positions.end(), std::size_t{0});
  std::stable_sort(out.positions.begin(), out.positions.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  out.sorted.reserve(values.size());
  for (auto i : out.positions) out.sorted.push_back(values[i]);
  return out;
}

}  // namespace minshap
