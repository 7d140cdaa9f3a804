#include "minshap/simbench.hpp"

#include "minshap/baselines.hpp"
#include "minshap/errors.hpp"
#include "minshap/parallel.hpp"
#include "minshap/permutation.hpp"
#include "minshap/seltest.hpp"
#include "minshap/shapley.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>

namespace minshap::sim {

std::string to_string(Model model) {
  switch (model) {
    case Model::a: return "a";
    case Model::b: return "b";
    case Model::c: return "c";
    case Model::d: return "d";
    case Model::chain: return "chain";
    case Model::highdim_linear: return "highdim-linear";
    case Model::highdim_nonlinear: return "highdim-nonlinear";
    case Model::null: return "null";
  }
  return "?";
}

Model parse_model(const std::string& s) {
  for (auto m : {Model::a, Model::b, Model::c, Model::d, Model::chain, Model::highdim_linear,
                 Model::highdim_nonlinear, Model::null}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown simulation model '" + s + "'");
}

std::size_t base_support_size(Model model) {
  switch (model) {
    case Model::c: return 10;
    case Model::chain: return 1;
    case Model::null: return 0;
    default: return 8;
  }
}

namespace {

/// Columns one pattern copy occupies.
std::size_t pattern_width(Model model) {
  if (model == Model::chain) return 3;
  return base_support_size(model);
}

bool is_b_family(Model model) { return model == Model::b || model == Model::highdim_nonlinear; }

}  // namespace

void SimConfig::validate() const {
  if (n < 2) throw ConfigError("simulation: n must be at least 2");
  if (repeat_factor < 1) throw ConfigError("simulation: repeat_factor must be at least 1");
  if (p < 1) throw ConfigError("simulation: p must be at least 1");
  if (p < pattern_width(model) * repeat_factor) {
    throw ConfigError("simulation: model " + to_string(model) + " with repeat_factor " + std::to_string(repeat_factor) +
                      " needs p >= " + std::to_string(pattern_width(model) * repeat_factor));
  }
}

SimConfig default_config(Model model) {
  SimConfig c;
  c.model = model;
  switch (model) {
    case Model::chain:
      c.p = 3;
      c.n = 100000;
      break;
    case Model::highdim_linear:
    case Model::highdim_nonlinear:
      c.p = 200;
      c.repeat_factor = 2;
      c.n = 500;
      break;
    default:
      break;
  }
  return c;
}

GroundTruth ground_truth(const SimConfig& config) {
  config.validate();
  GroundTruth truth;
  const std::size_t width = pattern_width(config.model);
  for (std::size_t r = 0; r < config.repeat_factor; ++r) {
    for (std::size_t k = 0; k < base_support_size(config.model); ++k) {
      truth.support.push_back(config.model == Model::chain ? r * width + 2 : r * width + k);
    }
  }
  return truth;
}

Eigen::MatrixXd covariance_matrix(const SimConfig& config) {
  config.validate();
  const auto p = static_cast<Eigen::Index>(config.p);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
  auto set = [&](std::size_t i, std::size_t j, double v) {
    sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
  };
  if (is_b_family(config.model)) {
    constexpr double kBlockCorr[4] = {0.0, 0.2, 0.5, 0.8};
    for (std::size_t i = 0; i < config.p; ++i) {
      for (std::size_t j = i + 1; j < config.p && j / 5 == i / 5; ++j) set(i, j, kBlockCorr[(i / 5) % 4]);
    }
    return sigma;
  }
  for (std::size_t r = 0; r < config.repeat_factor; ++r) {
    const std::size_t o = r * pattern_width(config.model);
    switch (config.model) {
      case Model::a:
      case Model::highdim_linear:
        set(o + 2, o + 3, 0.5);
        break;
      case Model::c:
        set(o + 0, o + 1, 0.9);
        set(o + 5, o + 6, 0.9);
        set(o + 3, o + 4, 0.5);
        set(o + 8, o + 9, 0.5);
        break;
      case Model::d:
        set(o + 0, o + 1, 0.5);
        break;
      case Model::chain:
        // X1 ~ N(0,1), X2 = X1 + g, X3 = X2 + d
        set(o + 0, o + 1, 1.0);
        set(o + 0, o + 2, 1.0);
        set(o + 1, o + 2, 2.0);
        sigma(static_cast<Eigen::Index>(o + 1), static_cast<Eigen::Index>(o + 1)) = 2.0;
        sigma(static_cast<Eigen::Index>(o + 2), static_cast<Eigen::Index>(o + 2)) = 3.0;
        break;
      default:
        break;
    }
  }
  return sigma;
}

std::pair<Dataset, GroundTruth> generate(const SimConfig& config, const RngStream& rng) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.n);
  const auto p = static_cast<Eigen::Index>(config.p);
  RngStream draw = rng.child("features");
  Eigen::MatrixXd z(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = draw.normal();
  }

  Eigen::MatrixXd x;
  if (config.model == Model::chain) {
    // Structural equations, innovations taken from z.
    x = z;
    for (std::size_t r = 0; r < config.repeat_factor; ++r) {
      const auto o = static_cast<Eigen::Index>(3 * r);
      x.col(o + 1) = x.col(o) + z.col(o + 1);
      x.col(o + 2) = x.col(o + 1) + z.col(o + 2);
    }
  } else {
    const Eigen::MatrixXd sigma = covariance_matrix(config);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw ConfigError("simulation: covariance matrix is not positive definite");
    x = z * llt.matrixL().transpose();
  }

  RngStream noise = rng.child("noise");
  const double noise_sd = config.model == Model::d ? 0.1 : 1.0;
  Eigen::VectorXd y(n);
  GroundTruth truth = ground_truth(config);
  const std::size_t width = pattern_width(config.model);
  for (Eigen::Index i = 0; i < n; ++i) {
    double signal = 0.0;
    for (std::size_t r = 0; r < config.repeat_factor; ++r) {
      const auto o = static_cast<Eigen::Index>(r * width);
      auto X = [&](int k) { return x(i, o + k - 1); };  // 1-based within the pattern copy
      switch (config.model) {
        case Model::a:
        case Model::highdim_linear:
          signal += 4 * X(1) + 4 * X(2) + 3 * X(3) * X(4) + 3 * X(5) + 2 * X(6) + 2 * X(5) * X(6) + X(7) + X(8);
          break;
        case Model::b:
        case Model::highdim_nonlinear:
          signal += 2 * std::sin(X(1)) + 2 * std::log(std::fabs(X(2)) + 1) + X(1) * X(2) + 3 * std::cos(X(3) + X(4)) +
                    std::max(0.0, X(5)) + X(6) * X(7) * X(8);
          break;
        case Model::c:
          signal += 1.5 * X(1) * X(2) * (X(3) > 0 ? 1.0 : 0.0) + X(4) * X(5) * (X(3) < 0 ? 1.0 : 0.0) +
                    3 * X(6) * X(7) * (X(8) > 0 ? 1.0 : 0.0) + X(9) * X(10) * (X(8) < 0 ? 1.0 : 0.0);
          break;
        case Model::d:
          signal += 2.5 * X(1) + 2.5 * X(2) + 2 * X(3) * X(4) + 1.5 * X(5) + 1.5 * X(6) + X(7) * X(7) +
                    X(8) * X(8) * X(8);
          break;
        case Model::chain:
          signal += x(i, static_cast<Eigen::Index>(3 * r + 2));
          break;
        case Model::null:
          break;
      }
    }
    if (config.model == Model::d) signal = 1.0 / (1.0 + std::exp(-signal));
    y(i) = signal + noise_sd * noise.normal();
  }

  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < p; ++j) names.push_back("X" + std::to_string(j + 1));
  return {Dataset(std::move(x), std::move(y), std::move(names)), std::move(truth)};
}

std::pair<Dataset, GroundTruth> generate(const SimConfig& config) { return generate(config, RngStream(config.seed)); }

std::string to_string(Method method) {
  switch (method) {
    case Method::minshap: return "minshap";
    case Method::maxp: return "maxp";
    case Method::pcht_bonferroni: return "pcht-bonferroni";
    case Method::pcht_stouffer: return "pcht-stouffer";
    case Method::pcht_fisher: return "pcht-fisher";
    case Method::loco: return "loco";
    case Method::gcm: return "gcm";
    case Method::lasso: return "lasso";
    case Method::loco_stability: return "loco-stability";
    case Method::gcm_stability: return "gcm-stability";
    case Method::lasso_stability: return "lasso-stability";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (auto m : {Method::minshap, Method::maxp, Method::pcht_bonferroni, Method::pcht_stouffer, Method::pcht_fisher,
                 Method::loco, Method::gcm, Method::lasso, Method::loco_stability, Method::gcm_stability,
                 Method::lasso_stability}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown method '" + s + "'");
}

bool uses_shapley(Method method) {
  return method == Method::minshap || method == Method::maxp || method == Method::pcht_bonferroni ||
         method == Method::pcht_stouffer || method == Method::pcht_fisher;
}

const MethodSummary& BenchResult::row(Method method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw InvalidArgument("bench result has no row for " + to_string(method));
}

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  std::vector<std::size_t> selected;
  double runtime = 0.0;
  std::size_t u = 0;
  std::optional<std::string> error;
};

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

std::optional<seltest::PchtMethod> pcht_of(Method m) {
  switch (m) {
    case Method::pcht_bonferroni: return seltest::PchtMethod::bonferroni;
    case Method::pcht_stouffer: return seltest::PchtMethod::stouffer;
    case Method::pcht_fisher: return seltest::PchtMethod::fisher;
    default: return std::nullopt;
  }
}

std::vector<Outcome> run_rep(const SimConfig& config, const ExperimentOptions& opt, const RngStream& rep) {
  std::vector<Outcome> out(opt.methods.size());
  const auto [data, truth] = generate(config, rep.child("data"));
  const std::size_t u_lo = opt.u_lo ? opt.u_lo : static_cast<std::size_t>(std::ceil(0.7 * static_cast<double>(opt.K)));
  const std::size_t u_hi = opt.u_hi ? opt.u_hi : opt.K;

  bool need_shapley = false;
  for (auto m : opt.methods) need_shapley = need_shapley || uses_shapley(m);
  std::vector<seltest::FeatureTestRecord> records;
  double shapley_time = 0.0;
  std::optional<std::string> shapley_error;
  if (need_shapley) {
    const auto start = Clock::now();
    try {
      const auto plan = sample_permutations(data.p(), opt.K, rep.child("perms"));
      const auto m = build_vi_matrix(data, opt.learner, plan, rep.child("shapley"));
      records = seltest::run_all_tests(reduce_stats(m), m, opt.alpha, opt.K);
    } catch (const std::exception& e) {
      shapley_error = e.what();
    }
    shapley_time = elapsed(start);
  }

  const auto& learner = opt.learner;
  const double alpha = opt.alpha;
  const auto stability = [&](const baselines::Selector& base, const RngStream& r) {
    return baselines::stability_select(base, data, opt.stability_B, opt.stability_rate, opt.stability_threshold, r)
        .selected;
  };
  for (std::size_t i = 0; i < opt.methods.size(); ++i) {
    const Method method = opt.methods[i];
    auto& o = out[i];
    const auto start = Clock::now();
    try {
      if (uses_shapley(method)) {
        if (shapley_error) throw NumericalError(*shapley_error);
        if (method == Method::minshap) {
          o.selected = seltest::selected(records, seltest::TestKind::minshap);
        } else if (method == Method::maxp) {
          o.selected = seltest::selected(records, seltest::TestKind::maxp);
        } else {
          const auto pm = *pcht_of(method);
          o.u = seltest::screen_u(records, pm, u_lo, u_hi, alpha, seltest::f1_scorer(truth.support, data.p()));
          o.selected = seltest::selected_at(records, pm, o.u, alpha);
        }
      } else {
        const RngStream r = rep.child(to_string(method));
        switch (method) {
          case Method::loco: o.selected = baselines::loco(data, learner, alpha, r).selected; break;
          case Method::gcm: o.selected = baselines::gcm(data, learner, alpha, r).selected; break;
          case Method::lasso: o.selected = baselines::lasso_select(data, opt.lasso_folds, r).selected; break;
          case Method::loco_stability:
            o.selected = stability(
                [&](const Dataset& d, const RngStream& s) { return baselines::loco(d, learner, alpha, s).selected; }, r);
            break;
          case Method::gcm_stability:
            o.selected = stability(
                [&](const Dataset& d, const RngStream& s) { return baselines::gcm(d, learner, alpha, s).selected; }, r);
            break;
          case Method::lasso_stability:
            o.selected = stability(
                [&](const Dataset& d, const RngStream& s) {
                  return baselines::lasso_select(d, opt.lasso_folds, s).selected;
                },
                r);
            break;
          default: break;
        }
      }
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    o.runtime = elapsed(start) + (uses_shapley(method) ? shapley_time : 0.0);
  }
  return out;
}

void accumulate(MethodSummary& s) {
  const std::size_t r = s.per_rep.size();
  s.runs = r;
  if (r == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = Metrics{nan, nan, nan, nan, nan};
    s.sd = s.mean;
    s.jaccard = nan;
    s.mean_runtime = nan;
    return;
  }
  auto field = [](Metrics& m, int f) -> double& {
    switch (f) {
      case 0: return m.accuracy;
      case 1: return m.f1;
      case 2: return m.type1;
      case 3: return m.type2;
      default: return m.fdr;
    }
  };
  for (int f = 0; f < 5; ++f) {
    double sum = 0.0;
    for (auto m : s.per_rep) sum += field(m, f);
    const double mean = sum / static_cast<double>(r);
    double ss = 0.0;
    for (auto m : s.per_rep) ss += (field(m, f) - mean) * (field(m, f) - mean);
    field(s.mean, f) = mean;
    field(s.sd, f) = r > 1 ? std::sqrt(ss / static_cast<double>(r - 1)) : 0.0;
  }
  double total = 0.0;
  for (double t : s.runtimes) total += t;
  s.mean_runtime = total / static_cast<double>(r);
  s.jaccard = r >= 2 ? jaccard_stability(s.selections) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

BenchResult run_experiment(const SimConfig& config, const ExperimentOptions& options, const RngStream& rng) {
  config.validate();
  if (options.reps < 1) throw InvalidArgument("run_experiment: reps must be at least 1");
  if (options.methods.empty()) throw InvalidArgument("run_experiment: no methods requested");
  if (options.K < 1) throw InvalidArgument("run_experiment: K must be at least 1");
  const std::size_t u_hi = options.u_hi ? options.u_hi : options.K;
  if (u_hi > options.K || (options.u_lo && options.u_lo > u_hi)) {
    throw InvalidArgument("run_experiment: u range must lie in [1, K]");
  }
  options.learner.validate();

  std::vector<std::vector<Outcome>> outcomes(options.reps);
  parallel_for(options.reps, options.workers,
               [&](std::size_t r) { outcomes[r] = run_rep(config, options, rng.child("rep", r)); });

  const auto truth = ground_truth(config);
  BenchResult result{config, options, {}};
  for (std::size_t i = 0; i < options.methods.size(); ++i) {
    MethodSummary s;
    s.method = options.methods[i];
    for (std::size_t r = 0; r < options.reps; ++r) {
      const auto& o = outcomes[r][i];
      if (o.error) {
        ++s.failures;
        s.errors.push_back("rep " + std::to_string(r) + ": " + *o.error);
        continue;
      }
      s.selections.push_back(o.selected);
      s.per_rep.push_back(confusion_metrics(o.selected, truth.support, config.p));
      s.runtimes.push_back(o.runtime);
      if (pcht_of(s.method)) s.chosen_u.push_back(o.u);
    }
    accumulate(s);
    result.rows.push_back(std::move(s));
  }
  return result;
}

void write_bench_csv(const BenchResult& result, std::ostream& out) {
  out << "method,accuracy_mean,accuracy_sd,f1_mean,f1_sd,type1_mean,type1_sd,type2_mean,type2_sd,fdr_mean,fdr_sd,"
         "jaccard,runtime_mean,runs,failures\n";
  out << std::setprecision(10);
  for (const auto& r : result.rows) {
    out << to_string(r.method) << ',' << r.mean.accuracy << ',' << r.sd.accuracy << ',' << r.mean.f1 << ',' << r.sd.f1
        << ',' << r.mean.type1 << ',' << r.sd.type1 << ',' << r.mean.type2 << ',' << r.sd.type2 << ',' << r.mean.fdr
        << ',' << r.sd.fdr << ',' << r.jaccard << ',' << r.mean_runtime << ',' << r.runs << ',' << r.failures << '\n';
  }
}

}  // namespace minshap::sim
