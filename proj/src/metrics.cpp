#include "minshap/metrics.hpp"

#include "minshap/errors.hpp"

#include <algorithm>
#include <string>

namespace minshap {

namespace {

std::vector<bool> indicator(std::span<const std::size_t> set, std::size_t p, const char* what) {
  std::vector<bool> out(p, false);
  for (auto j : set) {
    if (j >= p) throw InvalidArgument(std::string(what) + ": index " + std::to_string(j) + " out of range");
    out[j] = true;
  }
  return out;
}

}  // namespace

Confusion confusion_counts(std::span<const std::size_t> selected, std::span<const std::size_t> truth, std::size_t p) {
  const auto sel = indicator(selected, p, "confusion_metrics selected");
  const auto tru = indicator(truth, p, "confusion_metrics truth");
  Confusion c;
  for (std::size_t j = 0; j < p; ++j) {
    if (sel[j] && tru[j]) ++c.tp;
    else if (sel[j]) ++c.fp;
    else if (tru[j]) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Metrics confusion_metrics(std::span<const std::size_t> selected, std::span<const std::size_t> truth, std::size_t p) {
  const Confusion c = confusion_counts(selected, truth, p);
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, p);
  m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  m.type1 = ratio(c.fp, c.fp + c.tn);
  m.type2 = ratio(c.fn, c.tp + c.fn);
  m.fdr = ratio(c.fp, std::max<std::size_t>(1, c.tp + c.fp));
  return m;
}

double jaccard_stability(std::span<const std::vector<std::size_t>> selections) {
  const std::size_t N = selections.size();
  if (N < 2) throw InvalidArgument("jaccard_stability: need at least two selections");
  std::vector<std::vector<std::size_t>> sorted;
  sorted.reserve(N);
  for (const auto& s : selections) {
    auto copy = s;
    std::sort(copy.begin(), copy.end());
    copy.erase(std::unique(copy.begin(), copy.end()), copy.end());
    sorted.push_back(std::move(copy));
  }
  double total = 0.0;
  std::vector<std::size_t> scratch;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      const auto& a = sorted[i];
      const auto& b = sorted[j];
      scratch.clear();
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(scratch));
      const std::size_t inter = scratch.size();
      const std::size_t uni = a.size() + b.size() - inter;
      total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
  }
  return total * 2.0 / (static_cast<double>(N) * static_cast<double>(N - 1));
}

}  // namespace minshap
