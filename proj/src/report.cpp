#include "minshap/report.hpp"

#include "minshap/errors.hpp"

#include <cmath>

namespace minshap {

namespace {

// JSON has no NaN or infinity.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

json names_of(const std::vector<std::size_t>& idx, const std::vector<std::string>& names) {
  json out = json::array();
  for (auto j : idx) out.push_back(j < names.size() ? names[j] : std::to_string(j));
  return out;
}

template <class T>
T get_as(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("learner: bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

json metrics_json(const Metrics& m) {
  return json{{"accuracy", number(m.accuracy)},
              {"f1", number(m.f1)},
              {"type1", number(m.type1)},
              {"type2", number(m.type2)},
              {"fdr", number(m.fdr)}};
}

std::string pcht_test_name(seltest::PchtMethod m) {
  switch (m) {
    case seltest::PchtMethod::bonferroni: return "pcht-bonferroni";
    case seltest::PchtMethod::stouffer: return "pcht-stouffer";
    case seltest::PchtMethod::fisher: return "pcht-fisher";
  }
  return "?";
}

bool decision(const seltest::FeatureTestRecord& r, seltest::TestKind kind) {
  switch (kind) {
    case seltest::TestKind::minshap: return r.reject_minshap;
    case seltest::TestKind::maxp: return r.reject_maxp;
    case seltest::TestKind::pcht_bonferroni: return r.rejects_pcht(seltest::PchtMethod::bonferroni);
    case seltest::TestKind::pcht_stouffer: return r.rejects_pcht(seltest::PchtMethod::stouffer);
    case seltest::TestKind::pcht_fisher: return r.rejects_pcht(seltest::PchtMethod::fisher);
  }
  return false;
}

}  // namespace

json learner_to_json(const LearnerSpec& spec) {
  json hyper;
  if (spec.kind == LearnerKind::ridge) {
    hyper = json{{"lambda", spec.ridge.lambda}};
  } else {
    hyper = json{{"n_trees", spec.trees.n_trees},
                 {"max_depth", spec.trees.max_depth},
                 {"learning_rate", spec.trees.learning_rate},
                 {"subsample", spec.trees.subsample},
                 {"max_bins", spec.trees.max_bins}};
  }
  return json{{"kind", spec.custom ? std::string("custom") : to_string(spec.kind)},
              {"hyperparams", hyper},
              {"eval_mode", to_string(spec.eval_mode)},
              {"holdout_fraction", spec.holdout_fraction}};
}

LearnerSpec learner_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("learner: expected a JSON object");
  reject_unknown(j, {"kind", "hyperparams", "eval_mode", "holdout_fraction"}, "learner");
  LearnerSpec spec;
  spec.kind = parse_learner_kind(get_as<std::string>(j, "kind", to_string(spec.kind)));
  spec.eval_mode = parse_eval_mode(get_as<std::string>(j, "eval_mode", to_string(spec.eval_mode)));
  spec.holdout_fraction = get_as<double>(j, "holdout_fraction", spec.holdout_fraction);
  if (j.contains("hyperparams")) {
    const json& h = j.at("hyperparams");
    if (!h.is_object()) throw ConfigError("learner: hyperparams must be an object");
    if (spec.kind == LearnerKind::ridge) {
      reject_unknown(h, {"lambda"}, "ridge hyperparams");
      spec.ridge.lambda = get_as<double>(h, "lambda", spec.ridge.lambda);
    } else {
      reject_unknown(h, {"n_trees", "max_depth", "learning_rate", "subsample", "max_bins"}, "boosted_trees hyperparams");
      auto& t = spec.trees;
      t.n_trees = get_as<std::size_t>(h, "n_trees", t.n_trees);
      t.max_depth = get_as<std::size_t>(h, "max_depth", t.max_depth);
      t.learning_rate = get_as<double>(h, "learning_rate", t.learning_rate);
      t.subsample = get_as<double>(h, "subsample", t.subsample);
      t.max_bins = get_as<std::size_t>(h, "max_bins", t.max_bins);
    }
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

json record_to_json(const seltest::FeatureTestRecord& r, const std::vector<std::string>& names) {
  json pcht = json::object();
  for (auto m : seltest::kPchtMethods) pcht[seltest::to_string(m)] = numbers(r.adjusted_for(m));
  json decisions = json::object();
  for (auto kind : seltest::kTestKinds) decisions[seltest::to_string(kind)] = decision(r, kind);
  return json{{"feature", r.feature < names.size() ? names[r.feature] : std::to_string(r.feature)},
              {"index", r.feature},
              {"phi_mean", number(r.phi_mean)},
              {"phi_min", number(r.phi_min)},
              {"sigma2_assoc", number(r.sigma2_assoc)},
              {"threshold", number(r.threshold)},
              {"p_max", number(r.p_max)},
              {"z", numbers(r.z)},
              {"pvalues", numbers(r.pvals)},
              {"pcht_adjusted", pcht},
              {"decisions", decisions}};
}

json baseline_to_json(const baselines::BaselineResult& b, const std::vector<std::string>& names) {
  return json{{"method", b.method},
              {"selected", names_of(b.selected, names)},
              {"diagnostic_kind", b.diagnostic_kind},
              {"diagnostics", numbers(b.diagnostics)},
              {"runtime_seconds", b.runtime_seconds},
              {"failures", b.failures},
              {"log", b.log}};
}

json vi_matrix_to_json(const VIMatrix& m) {
  json perms = json::array();
  for (const auto& perm : m.plan.perms) perms.push_back(perm);
  json vi = json::array();
  json s2 = json::array();
  for (Eigen::Index j = 0; j < m.vi.rows(); ++j) {
    json a = json::array();
    json b = json::array();
    for (Eigen::Index k = 0; k < m.vi.cols(); ++k) {
      a.push_back(number(m.vi(j, k)));
      b.push_back(number(m.sigma2(j, k)));
    }
    vi.push_back(std::move(a));
    s2.push_back(std::move(b));
  }
  return json{{"n", m.n},
              {"seed", m.plan.seed},
              {"feature_names", m.feature_names},
              {"permutations", perms},
              {"vi", vi},
              {"sigma2", s2}};
}

json bench_to_json(const sim::BenchResult& result) {
  const auto& c = result.config;
  const auto& o = result.options;
  json methods = json::array();
  for (auto m : o.methods) methods.push_back(sim::to_string(m));
  json rows = json::array();
  for (const auto& r : result.rows) {
    json per_rep = json::array();
    for (const auto& m : r.per_rep) per_rep.push_back(metrics_json(m));
    rows.push_back(json{{"method", sim::to_string(r.method)},
                        {"mean", metrics_json(r.mean)},
                        {"sd", metrics_json(r.sd)},
                        {"jaccard", number(r.jaccard)},
                        {"runtime_mean", number(r.mean_runtime)},
                        {"runs", r.runs},
                        {"failures", r.failures},
                        {"selections", r.selections},
                        {"per_rep", per_rep},
                        {"runtimes", numbers(r.runtimes)},
                        {"chosen_u", r.chosen_u},
                        {"errors", r.errors}});
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"tool_version", kToolVersion},
              {"config",
               {{"model", sim::to_string(c.model)},
                {"n", c.n},
                {"p", c.p},
                {"repeat_factor", c.repeat_factor},
                {"seed", c.seed}}},
              {"options",
               {{"methods", methods},
                {"reps", o.reps},
                {"alpha", o.alpha},
                {"K", o.K},
                {"u_range", {o.u_lo, o.u_hi}},
                {"learner", learner_to_json(o.learner)},
                {"lasso_folds", o.lasso_folds},
                {"stability_B", o.stability_B},
                {"stability_rate", o.stability_rate},
                {"stability_threshold", o.stability_threshold},
                {"workers", o.workers}}},
              {"rows", rows}};
}

std::vector<std::size_t> SelectionReport::selected(seltest::TestKind kind) const {
  std::vector<std::size_t> out;
  for (const auto& r : records) {
    if (decision(r, kind)) out.push_back(r.feature);
  }
  return out;
}

json SelectionReport::to_json() const {
  json features = json::array();
  for (const auto& r : records) features.push_back(record_to_json(r, feature_names));
  json sel = json::object();
  const auto kinds = tests.empty() ? std::vector<seltest::TestKind>(seltest::kTestKinds.begin(), seltest::kTestKinds.end())
                                   : tests;
  for (auto kind : kinds) sel[seltest::to_string(kind)] = names_of(selected(kind), feature_names);
  json us = json::object();
  for (const auto& [m, u] : pcht_u) us[pcht_test_name(m)] = u;

  json out{{"schema_version", kReportSchemaVersion},
           {"metadata", metadata},
           {"pcht_u", us},
           {"features", features},
           {"selected", sel}};
  if (!baselines.empty()) {
    json b = json::object();
    for (const auto& r : baselines) b[r.method] = baseline_to_json(r, feature_names);
    out["baselines"] = b;
  }
  if (matrix) out["vi_matrix"] = vi_matrix_to_json(*matrix);
  return out;
}

}  // namespace minshap
