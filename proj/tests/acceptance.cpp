// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include "minshap/baselines.hpp"
#include "minshap/metrics.hpp"
#include "minshap/permutation.hpp"
#include "minshap/seltest.hpp"
#include "minshap/shapley.hpp"
#include "minshap/simbench.hpp"
#include "minshap/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace minshap;

namespace {

// Pinned tolerances.
constexpr double kTableTol = 0.05;
constexpr double kChainRuntimeLimit = 30.0;
constexpr std::size_t kChainSeeds = 20;
constexpr std::size_t kChainSeedsNeeded = 19;
constexpr double kTelescopeTol = 1e-10;
constexpr std::size_t kTelescopeCases = 100;
constexpr double kDeskF1 = 0.90;
constexpr double kDeskType1 = 0.10;
constexpr double kDeskF1Gap = 0.05;
constexpr double kDeskRuntimeLimit = 600.0;
constexpr std::size_t kDeskReps = 20;
constexpr double kNullRate = 0.05 + 0.03;
constexpr std::size_t kNullReps = 500;
constexpr std::size_t kFuzzCases = 10000;
constexpr double kOracleTol = 1e-9;
constexpr std::size_t kOracleCases = 200;
constexpr std::size_t kSetCases = 1000;
constexpr double kStabilityFdr = 0.1;
constexpr std::size_t kFasterSeedsNeeded = 18;

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

sim::SimConfig chain_config(std::size_t n) {
  auto c = sim::default_config(sim::Model::chain);
  c.n = n;
  return c;
}

// Reference chain table: rows X1..X3, columns in lexicographic ordering.
constexpr double kTable[3][6] = {{1, 1, 0, 0, 0, 0}, {1, 0, 2, 2, 0, 0}, {1, 2, 1, 1, 3, 3}};

void chain_table() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto [data, truth] = sim::generate(chain_config(100000), RngStream(1));
  const auto plan = make_plan(all_permutations(3));
  const auto m = build_vi_matrix(data, LearnerSpec::make_ridge(), plan, RngStream(1).child("shapley"));
  const double runtime = seconds_since(t0);

  double worst = 0.0;
  double oracle_gap = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const auto pop = oracle::chain_vi(plan.perms[k]);
    for (std::size_t j = 0; j < 3; ++j) {
      const double v = m.vi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      worst = std::max(worst, std::fabs(v - kTable[j][k]));
      oracle_gap = std::max(oracle_gap, std::fabs(pop[j] - kTable[j][k]));
    }
  }
  const auto stats = reduce_stats(m);
  const double expect[3] = {1.0 / 3.0, 5.0 / 6.0, 11.0 / 6.0};
  double mean_gap = 0.0;
  for (std::size_t j = 0; j < 3; ++j) mean_gap = std::max(mean_gap, std::fabs(stats.phi_mean[j] - expect[j]));
  report(1, worst <= kTableTol && mean_gap <= kTableTol && oracle_gap < 1e-12 && runtime < kChainRuntimeLimit,
         fmt("max |VI - table| = %.4f, max |phi_mean - expected| = %.4f, runtime %.2fs", worst, mean_gap, runtime));
}

void chain_minshap() {
  std::size_t hits = 0;
  for (std::size_t s = 0; s < kChainSeeds; ++s) {
    const RngStream rng = RngStream(100).child("seed", s);
    const auto [data, truth] = sim::generate(chain_config(100000), rng.child("data"));
    const auto m = build_vi_matrix(data, LearnerSpec::make_ridge(), make_plan(all_permutations(3)), rng.child("shapley"));
    const auto records = seltest::run_all_tests(reduce_stats(m), m, 0.05, m.K());
    if (seltest::selected(records, seltest::TestKind::minshap) == std::vector<std::size_t>{2}) ++hits;
  }
  report(2, hits >= kChainSeedsNeeded, fmt("exactly {X3} selected in %zu/%zu seeds", hits, kChainSeeds));
}

void telescoping() {
  RngStream rng(300);
  double worst = 0.0;
  std::size_t ok = 0;
  for (std::size_t c = 0; c < kTelescopeCases; ++c) {
    const RngStream r = rng.child("case", c);
    RngStream draw = r.child("shape");
    const std::size_t p = 1 + draw.below(8);
    const std::size_t n = 40 + draw.below(300);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        x(i, j) = draw.normal();
        s += std::sin(x(i, j) * static_cast<double>(j + 1));
      }
      y(i) = s + draw.normal();
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
    const Dataset data(x, y, names);

    BoostedTreeParams tp;
    tp.n_trees = 10;
    const LearnerSpec spec = c % 2 == 0 ? LearnerSpec::make_ridge(draw.uniform()) : LearnerSpec::make_boosted_trees(tp);
    const PermutationContext ctx(data, spec, r.child("shapley"));
    std::vector<std::size_t> all(p);
    for (std::size_t j = 0; j < p; ++j) all[j] = j;
    const double total = ctx.null_mse() - ctx.subset_value(all).mse;

    const auto plan = sample_permutations(p, 5, r.child("perms"));
    bool case_ok = true;
    for (const auto& perm : plan.perms) {
      const auto contrib = ctx.evaluate(perm);
      double sum = 0.0;
      for (double v : contrib.vi) sum += v;
      const double gap = std::fabs(sum - total);
      worst = std::max(worst, gap);
      if (!(gap <= kTelescopeTol)) case_ok = false;
    }
    if (case_ok) ++ok;
  }
  report(3, ok == kTelescopeCases,
         fmt("%zu/%zu datasets telescope, max gap %.3g", ok, kTelescopeCases, worst));
}

sim::ExperimentOptions desk_options(std::vector<sim::Method> methods) {
  sim::ExperimentOptions o;
  o.methods = std::move(methods);
  o.reps = kDeskReps;
  o.K = 50;
  o.learner = LearnerSpec::make_boosted_trees();
  return o;
}

void desk_scale() {
  const auto cfg = sim::default_config(sim::Model::a);
  const RngStream rng(400);

  const auto t0 = std::chrono::steady_clock::now();
  const auto shap = sim::run_experiment(cfg, desk_options({sim::Method::minshap, sim::Method::maxp}), rng);
  const double wall = seconds_since(t0);
  const auto& ms = shap.row(sim::Method::minshap);
  const auto& mp = shap.row(sim::Method::maxp);
  const double gap = std::fabs(mp.mean.f1 - ms.mean.f1);
  report(4,
         ms.failures == 0 && ms.mean.f1 >= kDeskF1 && ms.mean.type1 <= kDeskType1 && gap <= kDeskF1Gap &&
             wall <= kDeskRuntimeLimit,
         fmt("MinShap F1 %.3f type1 %.3f, Max-p F1 %.3f (gap %.3f), %zu reps in %.0fs", ms.mean.f1, ms.mean.type1,
             mp.mean.f1, gap, kDeskReps, wall));

  // Same replication streams, so every seed sees identical data.
  const auto stab =
      sim::run_experiment(cfg, desk_options({sim::Method::lasso_stability, sim::Method::loco_stability}), rng);
  const auto& lasso = stab.row(sim::Method::lasso_stability);
  const auto& loco = stab.row(sim::Method::loco_stability);
  std::size_t faster = 0;
  const std::size_t seeds = std::min(ms.runtimes.size(), loco.runtimes.size());
  double ms_total = 0.0, loco_total = 0.0;
  for (std::size_t r = 0; r < seeds; ++r) {
    if (ms.runtimes[r] < loco.runtimes[r]) ++faster;
    ms_total += ms.runtimes[r];
    loco_total += loco.runtimes[r];
  }
  report(10, lasso.failures == 0 && lasso.mean.fdr <= kStabilityFdr && faster >= kFasterSeedsNeeded,
         fmt("Lasso-stability FDR %.3f; MinShap faster than LOCO-stability in %zu/%zu seeds (%.0fs vs %.0fs total)",
             lasso.mean.fdr, faster, seeds, ms_total, loco_total));
}

void null_calibration() {
  auto cfg = sim::default_config(sim::Model::null);
  cfg.n = 2000;
  cfg.p = 5;
  sim::ExperimentOptions o;
  o.methods = {sim::Method::minshap, sim::Method::maxp, sim::Method::gcm};
  o.reps = kNullReps;
  o.K = 10;
  o.learner = LearnerSpec::make_ridge();
  const auto res = sim::run_experiment(cfg, o, RngStream(500));
  bool ok = true;
  std::string detail;
  for (auto m : o.methods) {
    const auto& row = res.row(m);
    ok = ok && row.failures == 0 && row.mean.type1 <= kNullRate;
    detail += fmt("%s %.4f  ", sim::to_string(m).c_str(), row.mean.type1);
  }
  report(5, ok, "rejection rates " + detail + fmt("(limit %.2f)", kNullRate));
}

void pcht_identities() {
  RngStream rng(600);
  std::size_t holm_agree = 0, raw_agree = 0, monotone = 0;
  for (std::size_t c = 0; c < kFuzzCases; ++c) {
    RngStream r = rng.child("case", c);
    const std::size_t K = 1 + r.below(60);
    std::vector<double> p(K), absz(K);
    for (std::size_t k = 0; k < K; ++k) {
      // Mix of strong and weak signals so decisions land on both sides of alpha.
      absz[k] = std::fabs(r.normal() * 2.0 + (r.uniform() < 0.7 ? 2.5 : 0.0));
      p[k] = two_sided_normal_pvalue(absz[k]);
    }
    const double mp = seltest::max_p(p);
    const auto adj = seltest::adjusted_pcht(seltest::PchtMethod::bonferroni, p, absz);
    if ((adj[K - 1] < 0.05) == (mp < 0.05)) ++holm_agree;
    if ((seltest::pcht_pvalue(seltest::PchtMethod::bonferroni, p, absz, K) < 0.05) == (mp < 0.05)) ++raw_agree;

    bool mono = true;
    for (auto method : seltest::kPchtMethods) {
      const auto a = seltest::adjusted_pcht(method, p, absz);
      for (std::size_t u = 1; u < K; ++u) mono = mono && a[u - 1] <= a[u];
    }
    if (mono) ++monotone;
  }
  report(6, holm_agree == kFuzzCases && monotone == kFuzzCases,
         fmt("Holm-adjusted Bonferroni at u=K agrees with Max-p in %zu/%zu; unadjusted agrees in %zu/%zu; "
             "Holm monotone in %zu/%zu",
             holm_agree, kFuzzCases, raw_agree, kFuzzCases, monotone, kFuzzCases));
}

void closed_forms() {
  RngStream rng(700);
  double thr = 0.0, fisher = 0.0, stouffer = 0.0, soft = 0.0;
  std::size_t k_mismatch = 0;
  for (std::size_t c = 0; c < kOracleCases; ++c) {
    const double s2 = std::pow(10.0, -6.0 + 6.0 * rng.uniform());
    const double alpha = 0.001 + 0.5 * rng.uniform();
    thr = std::max(thr, std::fabs(seltest::minshap_threshold(s2, alpha) - oracle::minshap_threshold_bisect(s2, alpha)));

    const double s = static_cast<double>(rng.below(30)) + rng.uniform();
    const double eps = 0.001 + 0.9 * rng.uniform();
    if (seltest::recommend_K(s, eps) != oracle::recommend_K_brute(s, eps)) ++k_mismatch;

    const auto dof = static_cast<unsigned>(2 * (1 + rng.below(40)));
    const double x = 80.0 * rng.uniform();
    const double tail = chi2_upper_tail_even(x, dof);
    fisher = std::max({fisher, std::fabs(tail - oracle::chi2_tail_even_direct(x, dof)),
                       std::fabs(tail - oracle::chi2_tail_gamma(x, dof))});

    const std::size_t K = 1 + rng.below(30);
    const std::size_t u = 1 + rng.below(K);
    std::vector<double> absz(K), p(K);
    for (std::size_t k = 0; k < K; ++k) {
      absz[k] = 3.0 * std::fabs(rng.normal());
      p[k] = oracle::two_sided_p(absz[k]);
    }
    stouffer = std::max(stouffer, std::fabs(seltest::pcht_pvalue(seltest::PchtMethod::stouffer, p, absz, u) -
                                            oracle::stouffer_pc(absz, u)));

    const double rho = 4.0 * rng.normal();
    const double lambda = 3.0 * rng.uniform();
    soft = std::max(soft, std::fabs(baselines::soft_threshold(rho, lambda) - oracle::soft_threshold_brute(rho, lambda)));
  }
  const bool ok = thr <= kOracleTol && k_mismatch == 0 && fisher <= kOracleTol && stouffer <= kOracleTol &&
                  soft <= kOracleTol;
  report(7, ok,
         fmt("%zu inputs each: threshold %.2g, recommend_K mismatches %zu, chi2 tail %.2g, Stouffer %.2g, "
             "soft-threshold %.2g",
             kOracleCases, thr, k_mismatch, fisher, stouffer, soft));
}

void recommend_k_value() {
  const auto k = seltest::recommend_K(8.0, 0.05);
  report(8, k == 26, fmt("recommend_K(8, 0.05) = %zu", k));
}

void set_metrics() {
  RngStream rng(900);
  std::size_t ok = 0;
  for (std::size_t c = 0; c < kSetCases; ++c) {
    const std::size_t p = 1 + rng.below(30);
    const auto random_set = [&] {
      std::vector<std::size_t> s;
      const double keep = rng.uniform();
      for (std::size_t j = 0; j < p; ++j) {
        if (rng.uniform() < keep) s.push_back(j);
      }
      return s;
    };
    const auto sel = random_set();
    const auto truth = random_set();
    const auto got = confusion_counts(sel, truth, p);
    const auto want = oracle::confusion(sel, truth, p);

    const Metrics m = confusion_metrics(sel, truth, p);
    const double pos = static_cast<double>(want.tp + want.fn), neg = static_cast<double>(want.fp + want.tn);
    const double prec_den = static_cast<double>(want.tp + want.fp);
    const double f1_den = static_cast<double>(2 * want.tp + want.fp + want.fn);
    const auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    const bool metrics_ok =
        same(m.accuracy, static_cast<double>(want.tp + want.tn) / static_cast<double>(p)) &&
        same(m.type1, neg > 0 ? static_cast<double>(want.fp) / neg : 0.0) &&
        same(m.type2, pos > 0 ? static_cast<double>(want.fn) / pos : 0.0) &&
        same(m.fdr, prec_den > 0 ? static_cast<double>(want.fp) / prec_den : 0.0) &&
        same(m.f1, f1_den > 0 ? 2.0 * static_cast<double>(want.tp) / f1_den : 0.0);

    std::vector<std::vector<std::size_t>> sets(2 + rng.below(6));
    for (auto& s : sets) s = random_set();
    const bool jac_ok = jaccard_stability(sets) == oracle::jaccard(sets);

    if (got.tp == want.tp && got.fp == want.fp && got.fn == want.fn && got.tn == want.tn && metrics_ok && jac_ok) ++ok;
  }
  report(9, ok == kSetCases, fmt("%zu/%zu random cases match the set oracle exactly", ok, kSetCases));
}

}  // namespace

int main() {
  chain_table();
  chain_minshap();
  telescoping();
  null_calibration();
  pcht_identities();
  closed_forms();
  recommend_k_value();
  set_metrics();
  desk_scale();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "NOT ACCEPTED", failures);
  return failures == 0 ? 0 : 1;
}
