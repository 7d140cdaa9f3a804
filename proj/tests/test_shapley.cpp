#include "helpers.hpp"
#include "oracles.hpp"

#include "minshap/errors.hpp"
#include "minshap/ridge.hpp"
#include "minshap/shapley.hpp"
#include "minshap/simbench.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace minshap;

namespace {

const Dataset& chain_data() {
  static const Dataset d = sim::generate({sim::Model::chain, 100000, 3, 1, 0}, RngStream(2025)).first;
  return d;
}

// Ignores its inputs; every subset gets the same residuals.
class MeanLearner final : public Learner {
 public:
  std::unique_ptr<Regressor> train(const Eigen::MatrixXd&, const Eigen::VectorXd& y, RngStream) const override {
    return std::make_unique<ConstantRegressor>(y.mean());
  }
};

VIMatrix table_one() {
  VIMatrix m;
  m.vi.resize(3, 6);
  // columns follow the six orderings of the chain table
  m.vi << 1, 1, 0, 0, 0, 0,
          1, 0, 2, 2, 0, 0,
          1, 2, 1, 1, 3, 3;
  m.sigma2 = Eigen::MatrixXd::Constant(3, 6, 0.01);
  m.plan = make_plan(all_permutations(3));
  m.n = 100;
  m.feature_names = {"X1", "X2", "X3"};
  return m;
}

BoostedTreeParams small_trees() {
  BoostedTreeParams p;
  p.n_trees = 25;
  return p;
}

}  // namespace

TEST_SUITE("shapley") {

TEST_CASE("chain orderings reproduce the population contributions") {
  const Permutation x3_first{2, 0, 1};
  auto c = evaluate_permutation(chain_data(), LearnerSpec::make_ridge(), x3_first, RngStream(1));
  CHECK(std::abs(c.vi[0] - 0.0) < 0.05);
  CHECK(std::abs(c.vi[1] - 0.0) < 0.05);
  CHECK(std::abs(c.vi[2] - 3.0) < 0.05);

  const Permutation natural{0, 1, 2};
  c = evaluate_permutation(chain_data(), LearnerSpec::make_ridge(), natural, RngStream(1));
  for (double v : c.vi) CHECK(std::abs(v - 1.0) < 0.05);
}

TEST_CASE("all six chain orderings match the conditional-variance oracle") {
  const auto plan = make_plan(all_permutations(3));
  const auto m = build_vi_matrix(chain_data(), LearnerSpec::make_ridge(), plan, RngStream(3));
  for (std::size_t k = 0; k < 6; ++k) {
    const auto expected = oracle::chain_vi(plan.perms[k]);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(m.vi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) - expected[j]) < 0.05);
    }
  }
  const auto s = reduce_stats(m);
  CHECK(std::abs(s.phi_mean[0] - 1.0 / 3.0) < 0.05);
  CHECK(std::abs(s.phi_mean[1] - 5.0 / 6.0) < 0.05);
  CHECK(std::abs(s.phi_mean[2] - 11.0 / 6.0) < 0.05);
}

TEST_CASE("the population oracle agrees with the reference chain table") {
  const auto perms = all_permutations(3);
  const auto table = table_one();
  for (std::size_t k = 0; k < 6; ++k) {
    const auto vi = oracle::chain_vi(perms[k]);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(vi[j] == doctest::Approx(table.vi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k))));
    }
  }
}

TEST_CASE("constant response gives zero contributions and variances") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(60, 3);
  const Dataset d(x, Eigen::VectorXd::Constant(60, 4.2), testing::names(3));
  for (auto spec : {LearnerSpec::make_ridge(), LearnerSpec::make_boosted_trees(small_trees())}) {
    const auto c = evaluate_permutation(d, spec, Permutation{1, 2, 0}, RngStream(0));
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(c.vi[j]) < 1e-20);
      CHECK(c.sigma2[j] < 1e-30);
    }
  }
}

TEST_CASE("a feature that changes no residual has variance exactly 0") {
  const auto d = testing::linear_data(80, {1.0, 2.0, 3.0}, 1.0, 1);
  LearnerSpec spec;
  spec.custom = std::make_shared<MeanLearner>();
  const auto c = evaluate_permutation(d, spec, Permutation{2, 0, 1}, RngStream(0));
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(c.vi[j] == 0.0);
    CHECK(c.sigma2[j] == 0.0);
  }
}

TEST_CASE("K = 1 matrix equals a single permutation evaluation") {
  const auto d = testing::linear_data(300, {1.0, 0.0, -1.0, 0.5}, 1.0, 2);
  const auto spec = LearnerSpec::make_boosted_trees(small_trees());
  const RngStream rng(8);
  const Permutation perm{3, 1, 0, 2};
  const auto m = build_vi_matrix(d, spec, make_plan({perm}), rng);
  const auto c = evaluate_permutation(d, spec, perm, rng);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(m.vi(static_cast<Eigen::Index>(j), 0) == c.vi[j]);
    CHECK(m.sigma2(static_cast<Eigen::Index>(j), 0) == c.sigma2[j]);
  }
  const auto s = reduce_stats(m);
  for (std::size_t j = 0; j < 4; ++j) CHECK(s.phi_mean[j] == s.phi_min[j]);
}

TEST_CASE("matrices are reproducible and independent of the worker count") {
  const auto d = testing::linear_data(250, {1.0, -1.0, 0.0, 2.0, 0.0}, 1.0, 4);
  const auto spec = LearnerSpec::make_boosted_trees(small_trees());
  const auto plan = sample_permutations(5, 8, RngStream(1));
  const auto a = build_vi_matrix(d, spec, plan, RngStream(6), 1);
  const auto b = build_vi_matrix(d, spec, plan, RngStream(6), 1);
  const auto c = build_vi_matrix(d, spec, plan, RngStream(6), 4);
  CHECK((a.vi.array() == b.vi.array()).all());
  CHECK((a.vi.array() == c.vi.array()).all());
  CHECK((a.sigma2.array() == c.sigma2.array()).all());
}

TEST_CASE("a subset's value does not depend on the order that reached it") {
  const auto d = testing::linear_data(200, {1.0, 1.0, 1.0}, 1.0, 9);
  const PermutationContext ctx(d, LearnerSpec::make_boosted_trees(small_trees()), RngStream(2));
  const std::vector<std::size_t> ab{0, 2};
  const std::vector<std::size_t> ba{2, 0};
  const auto x = ctx.subset_value(ab);
  const auto y = ctx.subset_value(ba);
  CHECK(x.mse == y.mse);
  CHECK(subset_key(ab) == subset_key(ba));
  CHECK(subset_key(ab) != subset_key(std::vector<std::size_t>{0, 1}));

  // Identical columns tie on every split, so only a canonical column order
  // makes the fit independent of which ordering arrives first.
  Eigen::MatrixXd x2(200, 4);
  x2.col(0) = d.features().col(0);
  x2.col(1) = d.features().col(0);
  x2.col(2) = d.features().col(1);
  x2.col(3) = d.features().col(2);
  const Dataset dup(x2, d.response(), testing::names(4));
  const auto spec = LearnerSpec::make_boosted_trees(small_trees());
  const PermutationContext first(dup, spec, RngStream(2));
  const PermutationContext second(dup, spec, RngStream(2));
  const auto u = first.subset_value(std::vector<std::size_t>{0, 1, 2});
  const auto v = second.subset_value(std::vector<std::size_t>{2, 1, 0});
  CHECK(u.mse == v.mse);
  CHECK((u.squared_residuals.array() == v.squared_residuals.array()).all());
  const auto w = first.subset_value(std::vector<std::size_t>{1, 3});
  const auto z = second.subset_value(std::vector<std::size_t>{3, 1});
  CHECK(w.mse == z.mse);
}

TEST_CASE("telescoping holds for every ordering") {
  RngStream meta(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = static_cast<std::size_t>(1 + meta.below(6));
    std::vector<double> coef(p);
    for (auto& c : coef) c = meta.normal();
    const auto d = testing::linear_data(40 + meta.below(200), coef, 0.5, meta.next_u64());
    LearnerSpec spec = trial % 2 == 0 ? LearnerSpec::make_ridge(meta.uniform()) : LearnerSpec::make_boosted_trees(small_trees());
    if (trial % 5 == 4) spec.eval_mode = EvalMode::dropout;
    const RngStream rng(meta.next_u64());
    const PermutationContext ctx(d, spec, rng);
    const auto perm = sample_permutations(p, 1, RngStream(meta.next_u64())).perms[0];
    const auto c = ctx.evaluate(perm);
    double total = 0.0;
    for (double v : c.vi) total += v;
    const auto all = iota_indices(p);
    CHECK(std::abs(total - (ctx.null_mse() - ctx.subset_value(all).mse)) <= 1e-10);
  }
}

TEST_CASE("duplicated column gets a symmetric share") {
  RngStream rng(12);
  Eigen::MatrixXd x(800, 3);
  Eigen::VectorXd y(800);
  for (Eigen::Index i = 0; i < 800; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = x(i, 0);
    x(i, 2) = rng.normal();
    y(i) = 2.0 * x(i, 0) + x(i, 2) + rng.normal();
  }
  const Dataset d(x, y, {"a", "a_copy", "b"});
  const auto spec = LearnerSpec::make_ridge();

  const auto exhaustive = reduce_stats(build_vi_matrix(d, spec, make_plan(all_permutations(3)), RngStream(0)));
  CHECK(std::abs(exhaustive.phi_mean[0] - exhaustive.phi_mean[1]) < 1e-6);

  const std::size_t K = 300;
  const auto m = build_vi_matrix(d, spec, sample_permutations(3, K, RngStream(4)), RngStream(0));
  const Eigen::VectorXd diff = (m.vi.row(0) - m.vi.row(1)).transpose();
  const double sd = std::sqrt((diff.array() - diff.mean()).square().sum() / static_cast<double>(K - 1));
  CHECK(std::abs(diff.mean()) <= 4.0 * sd / std::sqrt(static_cast<double>(K)));
}

TEST_CASE("reduce_stats on the reference chain table") {
  const auto s = reduce_stats(table_one());
  CHECK(s.phi_mean[0] == doctest::Approx(2.0 / 6.0));
  CHECK(s.phi_mean[1] == doctest::Approx(5.0 / 6.0));
  CHECK(s.phi_mean[2] == doctest::Approx(11.0 / 6.0));
  CHECK(s.phi_min == std::vector<double>{0.0, 0.0, 1.0});
  // ties on the minimum resolve to the first ordering
  CHECK(s.argmin_perm == std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("reduce_stats invariants on random matrices") {
  RngStream rng(30);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = static_cast<Eigen::Index>(1 + rng.below(8));
    const auto K = static_cast<Eigen::Index>(1 + rng.below(12));
    VIMatrix m;
    m.vi.resize(p, K);
    m.sigma2.resize(p, K);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index k = 0; k < K; ++k) {
        m.vi(j, k) = static_cast<double>(rng.below(5)) - 1.0;
        m.sigma2(j, k) = rng.uniform();
      }
    }
    const auto s = reduce_stats(m);
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      CHECK(s.phi_min[jj] <= s.phi_mean[jj] + 1e-15);
      CHECK(s.phi_min[jj] == m.vi(j, static_cast<Eigen::Index>(s.argmin_perm[jj])));
      CHECK(s.sigma2_assoc[jj] == m.sigma2(j, static_cast<Eigen::Index>(s.argmin_perm[jj])));
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(s.argmin_perm[jj]); ++k) CHECK(m.vi(j, k) > s.phi_min[jj]);
    }
  }
}

TEST_CASE("matrix csv round trip is exact") {
  const auto d = testing::linear_data(120, {1.0, 0.0, 2.0}, 1.0, 3);
  const auto m = build_vi_matrix(d, LearnerSpec::make_ridge(), sample_permutations(3, 5, RngStream(2)), RngStream(1));
  std::stringstream buf;
  write_vi_matrix_csv(m, buf);
  const auto back = read_vi_matrix_csv(buf);
  CHECK((back.vi.array() == m.vi.array()).all());
  CHECK((back.sigma2.array() == m.sigma2.array()).all());
  CHECK(back.plan.perms == m.plan.perms);
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.n == m.n);
}

TEST_CASE("malformed matrix csv is a data error") {
  std::istringstream in("this is not a matrix\n");
  CHECK_THROWS_AS(read_vi_matrix_csv(in), DataError);
}

TEST_CASE("plan and data must agree") {
  const auto d = testing::linear_data(50, {1.0, 1.0}, 1.0, 1);
  CHECK_THROWS_AS(build_vi_matrix(d, LearnerSpec::make_ridge(), make_plan({{0, 1, 2}}), RngStream(0)), InvalidArgument);
}

TEST_CASE("holdout evaluation scores the held-out rows") {
  const auto d = testing::linear_data(200, {1.0, 0.0}, 1.0, 7);
  auto spec = LearnerSpec::make_ridge();
  spec.holdout_fraction = 0.3;
  const auto m = build_vi_matrix(d, spec, sample_permutations(2, 3, RngStream(0)), RngStream(1));
  CHECK(m.n == 60);
}

}  // TEST_SUITE
