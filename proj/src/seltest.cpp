#include "minshap/seltest.hpp"

#include "minshap/errors.hpp"
#include "minshap/metrics.hpp"
#include "minshap/special.hpp"

#include <algorithm>
#include <cmath>

namespace minshap::seltest {

std::string to_string(PchtMethod method) {
  switch (method) {
    case PchtMethod::bonferroni: return "bonferroni";
    case PchtMethod::stouffer: return "stouffer";
    case PchtMethod::fisher: return "fisher";
  }
  return "?";
}

double minshap_threshold(double sigma2_assoc, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("minshap_threshold: alpha must be in (0, 1]");
  if (!(sigma2_assoc >= 0.0)) throw InvalidArgument("minshap_threshold: variance must be non-negative");
  return std::max(0.0, std::sqrt(-2.0 * std::log(alpha) * sigma2_assoc));
}

PermPValues perm_pvalues(std::span<const double> vi, std::span<const double> sigma2) {
  if (vi.size() != sigma2.size()) throw InvalidArgument("perm_pvalues: length mismatch");
  PermPValues out;
  out.z.resize(vi.size());
  out.pvals.resize(vi.size());
  for (std::size_t k = 0; k < vi.size(); ++k) {
    if (sigma2[k] < 0.0 || std::isnan(sigma2[k])) throw InvalidArgument("perm_pvalues: negative variance");
    if (sigma2[k] < kDegenerateVariance) {
      out.z[k] = 0.0;
      out.pvals[k] = 1.0;
      continue;
    }
    out.z[k] = vi[k] / std::sqrt(sigma2[k]);
    out.pvals[k] = out.z[k] == 0.0 ? 1.0 : two_sided_normal_pvalue(out.z[k]);
  }
  return out;
}

double max_p(std::span<const double> pvals) {
  if (pvals.empty()) throw InvalidArgument("max_p: empty input");
  return *std::max_element(pvals.begin(), pvals.end());
}

double pcht_pvalue(PchtMethod method, std::span<const double> pvals, std::span<const double> absz, std::size_t u) {
  const std::size_t K = pvals.size();
  if (K == 0) throw InvalidArgument("pcht_pvalue: empty input");
  if (u < 1 || u > K) throw InvalidArgument("pcht_pvalue: u must be in [1, K]");
  const std::size_t tail = K - u + 1;
  switch (method) {
    case PchtMethod::bonferroni: {
      std::vector<double> p(pvals.begin(), pvals.end());
      std::sort(p.begin(), p.end());
      return std::min(1.0, static_cast<double>(tail) * p[u - 1]);
    }
    case PchtMethod::stouffer: {
      if (absz.size() != K) throw InvalidArgument("pcht_pvalue: |z| length mismatch");
      std::vector<double> z(absz.begin(), absz.end());
      for (auto& v : z) v = std::fabs(v);
      std::sort(z.begin(), z.end());
      double sum = 0.0;
      for (std::size_t k = 0; k < tail; ++k) sum += z[k];
      return two_sided_normal_pvalue(sum / std::sqrt(static_cast<double>(tail)));
    }
    case PchtMethod::fisher: {
      std::vector<double> p(pvals.begin(), pvals.end());
      std::sort(p.begin(), p.end());
      double stat = 0.0;
      for (std::size_t k = u - 1; k < K; ++k) {
        if (p[k] <= 0.0) return 0.0;
        stat -= 2.0 * std::log(p[k]);
      }
      return chi2_upper_tail_even(stat, static_cast<unsigned>(2 * tail));
    }
  }
  throw InvalidArgument("pcht_pvalue: unknown method");
}

std::vector<double> holm_adjust(std::span<const double> raw) {
  std::vector<double> out(raw.size());
  for (std::size_t u = 0; u < raw.size(); ++u) {
    const double prev = u == 0 ? raw[0] : std::max(out[u - 1], raw[u]);
    out[u] = std::min(1.0, prev);
  }
  return out;
}

std::vector<double> adjusted_pcht(PchtMethod method, std::span<const double> pvals, std::span<const double> absz) {
  std::vector<double> raw(pvals.size());
  for (std::size_t u = 1; u <= pvals.size(); ++u) raw[u - 1] = pcht_pvalue(method, pvals, absz, u);
  return holm_adjust(raw);
}

std::size_t recommend_K(double s, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("recommend_K: eps must be in (0, 1)");
  if (!(s >= 0.0)) throw InvalidArgument("recommend_K: s must be non-negative");
  if (s == 0.0) return 1;
  const double q = s / (s + 1.0);
  auto K = static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(eps) / std::log(q))));
  while (K > 1 && std::pow(q, static_cast<double>(K - 1)) <= eps) --K;
  while (std::pow(q, static_cast<double>(K)) > eps) ++K;
  return K;
}

std::vector<FeatureTestRecord> run_all_tests(const ShapleyStats& stats, const VIMatrix& m, double alpha,
                                             std::size_t u) {
  const std::size_t p = m.p();
  const std::size_t K = m.K();
  if (K == 0) throw InvalidArgument("run_all_tests: empty matrix");
  if (stats.phi_min.size() != p || stats.sigma2_assoc.size() != p || stats.phi_mean.size() != p) {
    throw InvalidArgument("run_all_tests: statistics do not match the matrix");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("run_all_tests: alpha must be in (0, 1]");
  if (u < 1 || u > K) throw InvalidArgument("run_all_tests: u must be in [1, K]");

  std::vector<FeatureTestRecord> records(p);
  std::vector<double> vi(K), s2(K), absz(K);
  for (std::size_t j = 0; j < p; ++j) {
    auto& r = records[j];
    r.feature = j;
    r.phi_mean = stats.phi_mean[j];
    r.phi_min = stats.phi_min[j];
    r.sigma2_assoc = stats.sigma2_assoc[j];
    r.threshold = minshap_threshold(r.sigma2_assoc, alpha);
    r.reject_minshap = r.phi_min >= r.threshold;
    // phi_min <= 0 never rejects, including the t = 0 case.
    if (r.phi_min <= 0.0) r.reject_minshap = false;

    for (std::size_t k = 0; k < K; ++k) {
      vi[k] = m.vi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      s2[k] = m.sigma2(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    }
    auto pv = perm_pvalues(vi, s2);
    for (std::size_t k = 0; k < K; ++k) absz[k] = std::fabs(pv.z[k]);
    r.p_max = max_p(pv.pvals);
    r.reject_maxp = r.p_max < alpha;
    for (auto method : kPchtMethods) {
      const auto idx = static_cast<std::size_t>(method);
      r.adjusted[idx] = adjusted_pcht(method, pv.pvals, absz);
      r.reject_pcht[idx] = r.adjusted[idx][u - 1] < alpha;
    }
    r.z = std::move(pv.z);
    r.pvals = std::move(pv.pvals);
  }
  return records;
}

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::minshap: return "minshap";
    case TestKind::maxp: return "maxp";
    case TestKind::pcht_bonferroni: return "pcht-bonferroni";
    case TestKind::pcht_stouffer: return "pcht-stouffer";
    case TestKind::pcht_fisher: return "pcht-fisher";
  }
  return "?";
}

TestKind parse_test_kind(const std::string& s) {
  for (auto kind : kTestKinds) {
    if (to_string(kind) == s) return kind;
  }
  throw ConfigError("unknown test '" + s + "'");
}

std::vector<std::size_t> selected(std::span<const FeatureTestRecord> records, TestKind kind) {
  std::vector<std::size_t> out;
  for (const auto& r : records) {
    bool reject = false;
    switch (kind) {
      case TestKind::minshap: reject = r.reject_minshap; break;
      case TestKind::maxp: reject = r.reject_maxp; break;
      case TestKind::pcht_bonferroni: reject = r.rejects_pcht(PchtMethod::bonferroni); break;
      case TestKind::pcht_stouffer: reject = r.rejects_pcht(PchtMethod::stouffer); break;
      case TestKind::pcht_fisher: reject = r.rejects_pcht(PchtMethod::fisher); break;
    }
    if (reject) out.push_back(r.feature);
  }
  return out;
}

std::vector<std::size_t> selected_at(std::span<const FeatureTestRecord> records, PchtMethod method, std::size_t u,
                                     double alpha) {
  std::vector<std::size_t> out;
  for (const auto& r : records) {
    const auto& adj = r.adjusted_for(method);
    if (u < 1 || u > adj.size()) throw InvalidArgument("selected_at: u out of range");
    if (adj[u - 1] < alpha) out.push_back(r.feature);
  }
  return out;
}

std::size_t screen_u(std::span<const FeatureTestRecord> records, PchtMethod method, std::size_t u_lo,
                     std::size_t u_hi, double alpha, const SelectionScorer& scorer) {
  if (u_lo < 1 || u_lo > u_hi) throw InvalidArgument("screen_u: empty u range");
  if (!records.empty() && u_hi > records.front().adjusted_for(method).size()) {
    throw InvalidArgument("screen_u: u range exceeds K");
  }
  std::size_t best_u = u_lo;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t u = u_lo; u <= u_hi; ++u) {
    const double score = scorer(selected_at(records, method, u, alpha));
    if (score >= best) {
      best = score;
      best_u = u;
    }
  }
  return best_u;
}

SelectionScorer f1_scorer(std::vector<std::size_t> truth, std::size_t p) {
  return [truth = std::move(truth), p](const std::vector<std::size_t>& sel) {
    return confusion_metrics(sel, truth, p).f1;
  };
}

SelectionScorer holdout_mse_scorer(const Dataset& data, const LearnerSpec& spec, double holdout_fraction,
                                   const RngStream& rng) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw InvalidArgument("holdout_mse_scorer: holdout fraction must be in (0, 1)");
  }
  auto split = make_row_split(data.n(), holdout_fraction, rng.child("screen-split"));
  return [&data, spec, split, rng](const std::vector<std::size_t>& sel) {
    const auto model = fit(spec, data, sel, rng.child("screen-fit"), split);
    return -value(model, data).mse;
  };
}

}  // namespace minshap::seltest
