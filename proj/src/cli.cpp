#include "minshap/cli.hpp"

#include "minshap/baselines.hpp"
#include "minshap/errors.hpp"
#include "minshap/permutation.hpp"
#include "minshap/seltest.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace minshap::cli {

std::string to_string(Command command) {
  switch (command) {
    case Command::select: return "select";
    case Command::shapley: return "shapley";
    case Command::simulate: return "simulate";
    case Command::bench: return "bench";
  }
  return "?";
}

namespace {

enum class Kind { str, uint, real, list, flag, range };

struct Key {
  const char* name;  // JSON key; the flag is "--" + name with '_' -> '-'
  Kind kind;
  const char* help;
};

// Every configurable field. Learner hyperparameters are flat keys that
// override the "learner" object.
const std::vector<Key>& keys() {
  static const std::vector<Key> k{
      {"input", Kind::str, "CSV file with a header row"},
      {"response", Kind::str, "Response column name"},
      {"output", Kind::str, "Output path ('-' for stdout)"},
      {"learner", Kind::str, "ridge or boosted-trees"},
      {"lambda", Kind::real, "Ridge penalty"},
      {"n_trees", Kind::uint, "Boosting rounds"},
      {"max_depth", Kind::uint, "Tree depth"},
      {"learning_rate", Kind::real, "Shrinkage"},
      {"subsample", Kind::real, "Row subsample per tree"},
      {"max_bins", Kind::uint, "Histogram bins per feature (<= 256)"},
      {"eval_mode", Kind::str, "refit or dropout"},
      {"holdout", Kind::real, "Held-out row fraction for value evaluation (0 = plug-in)"},
      {"K", Kind::uint, "Number of sampled permutations"},
      {"alpha", Kind::real, "Significance level"},
      {"test", Kind::str, "minshap, maxp, pcht-bonferroni, pcht-stouffer, pcht-fisher or all"},
      {"u", Kind::uint, "Partial-conjunction level"},
      {"u_range", Kind::range, "Screening range lo,hi for u"},
      {"screen_holdout", Kind::real, "Held-out fraction scoring u candidates"},
      {"seed", Kind::uint, "Random seed (falls back to MINSHAP_SEED)"},
      {"workers", Kind::uint, "Worker threads"},
      {"perms_file", Kind::str, "Explicit permutations, one per line"},
      {"from_matrix", Kind::str, "Reuse a VI matrix CSV instead of fitting"},
      {"dump_matrix", Kind::flag, "Include the VI matrix in the report"},
      {"baselines", Kind::list, "Also run loco, gcm and/or lasso"},
      {"stats_output", Kind::str, "Statistics CSV path"},
      {"json_output", Kind::str, "JSON summary path"},
      {"truth_output", Kind::str, "Ground-truth JSON path"},
      {"model", Kind::str, "a, b, c, d, chain, highdim-linear, highdim-nonlinear or null"},
      {"n", Kind::uint, "Sample size"},
      {"p", Kind::uint, "Feature count"},
      {"repeat", Kind::uint, "Signal pattern copies"},
      {"reps", Kind::uint, "Replications"},
      {"methods", Kind::list, "Comma-separated methods"},
      {"lasso_folds", Kind::uint, "Lasso CV folds"},
      {"stability_B", Kind::uint, "Stability-selection subsamples"},
  };
  return k;
}

const std::map<Command, std::vector<std::string>>& command_keys() {
  static const std::vector<std::string> learner{"learner", "lambda", "n_trees", "max_depth", "learning_rate",
                                                "subsample", "max_bins", "eval_mode", "holdout"};
  auto join = [](std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  static const std::map<Command, std::vector<std::string>> m{
      {Command::select, join({"input", "response", "output", "K", "alpha", "test", "u", "u_range", "screen_holdout",
                              "seed", "workers", "perms_file", "from_matrix", "dump_matrix", "baselines"},
                             learner)},
      {Command::shapley,
       join({"input", "response", "output", "K", "seed", "workers", "perms_file", "stats_output"}, learner)},
      {Command::simulate, {"model", "n", "p", "repeat", "seed", "output", "truth_output"}},
      {Command::bench, join({"model", "n", "p", "repeat", "reps", "methods", "K", "alpha", "u_range", "seed", "workers",
                             "output", "json_output", "lasso_folds", "stability_B"},
                            learner)},
  };
  return m;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  for (auto& ch : f) {
    if (ch == '_') ch = '-';
  }
  return "--" + f;
}

std::uint64_t parse_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ConfigError(flag_name(key) + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError(flag_name(key) + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (seps.find(ch) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

json flag_value(const Key& key, const std::string& raw) {
  switch (key.kind) {
    case Kind::str: return raw;
    case Kind::uint: return parse_uint(key.name, raw);
    case Kind::real: return parse_real(key.name, raw);
    case Kind::flag: return true;
    case Kind::list: return split_list(raw, ",");
    case Kind::range: {
      const auto parts = split_list(raw, ",:");
      if (parts.size() != 2) throw ConfigError("--u-range: expected lo,hi");
      return json::array({parse_uint(key.name, parts[0]), parse_uint(key.name, parts[1])});
    }
  }
  return raw;
}

template <class T>
T typed(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "'");
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("MINSHAP_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  return parse_uint("seed", s);
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

PermutationPlan read_perms_file(const std::string& path, const std::vector<std::string>& names, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open permutations file '" + path + "'");
  std::vector<Permutation> perms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = split_list(line, ", \t");
    if (tokens.empty() || tokens.front().front() == '#') continue;
    Permutation perm;
    for (const auto& tok : tokens) {
      auto it = std::find(names.begin(), names.end(), tok);
      if (it != names.end()) {
        perm.push_back(static_cast<std::size_t>(it - names.begin()));
      } else {
        try {
          perm.push_back(parse_uint("perms_file", tok));
        } catch (const ConfigError&) {
          throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown feature '" + tok + "'");
        }
      }
    }
    if (!is_permutation_of_range(perm, names.size())) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": not a permutation of the " +
                        std::to_string(names.size()) + " features");
    }
    perms.push_back(std::move(perm));
  }
  if (perms.empty()) throw ConfigError("permutations file '" + path + "' has no permutations");
  return make_plan(std::move(perms), seed);
}

VIMatrix compute_matrix(const RunConfig& c, const Dataset& data, const RngStream& rng) {
  PermutationPlan plan = c.perms_file.empty() ? sample_permutations(data.p(), c.K, rng.child("perms"))
                                              : read_perms_file(c.perms_file, data.feature_names(), rng.key());
  if (!c.perms_file.empty() && c.K_given && plan.K() != c.K) {
    throw ConfigError("--K " + std::to_string(c.K) + " disagrees with the " + std::to_string(plan.K()) +
                      " permutations in '" + c.perms_file + "'");
  }
  return build_vi_matrix(data, c.learner, plan, rng.child("shapley"), c.workers);
}

VIMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open VI matrix '" + path + "'");
  return read_vi_matrix_csv(in);
}

template <class F>
void write_to(const std::string& path, std::ostream& fallback, F&& body) {
  if (path.empty() || path == "-") {
    body(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  body(f);
  if (!f) throw DataError("write to '" + path + "' failed");
}

}  // namespace

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (K < 1) throw ConfigError("K must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (u && (*u < 1 || *u > K)) throw ConfigError("u must be in [1, K]");
  if (u_range && (u_range->first < 1 || u_range->first > u_range->second || u_range->second > K)) {
    throw ConfigError("u range must satisfy 1 <= lo <= hi <= K");
  }
  if (u && u_range) throw ConfigError("give either u or a u range, not both");
  if (test != "all") seltest::parse_test_kind(test);
  if (!(screen_holdout > 0.0 && screen_holdout < 1.0)) throw ConfigError("screen holdout must be in (0, 1)");
  if (reps < 1) throw ConfigError("reps must be at least 1");
  for (const auto& b : baselines) {
    if (b != "loco" && b != "gcm" && b != "lasso") throw ConfigError("unknown baseline '" + b + "'");
  }
  try {
    learner.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (command == Command::simulate || command == Command::bench) sim.validate();
}

RunConfig config_from_json(Command command, const json& j, std::optional<std::uint64_t> seed_fallback) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const auto& key : keys()) known = known || k == key.name;
    if (!known) throw ConfigError("config: unknown key '" + k + "'");
  }
  RunConfig c;
  c.command = command;
  auto str = [&](const char* key, std::string& dst) {
    if (j.contains(key)) dst = typed<std::string>(j, key);
  };
  str("input", c.input);
  str("response", c.response);
  str("output", c.output);
  str("perms_file", c.perms_file);
  str("from_matrix", c.from_matrix);
  str("stats_output", c.stats_output);
  str("json_output", c.json_output);
  str("truth_output", c.truth_output);
  str("test", c.test);

  if (j.contains("learner")) {
    const json& l = j.at("learner");
    if (l.is_object()) {
      c.learner = learner_from_json(l);
    } else {
      c.learner.kind = parse_learner_kind(typed<std::string>(j, "learner"));
    }
  }
  if (j.contains("lambda")) c.learner.ridge.lambda = typed<double>(j, "lambda");
  if (j.contains("n_trees")) c.learner.trees.n_trees = typed<std::size_t>(j, "n_trees");
  if (j.contains("max_depth")) c.learner.trees.max_depth = typed<std::size_t>(j, "max_depth");
  if (j.contains("learning_rate")) c.learner.trees.learning_rate = typed<double>(j, "learning_rate");
  if (j.contains("subsample")) c.learner.trees.subsample = typed<double>(j, "subsample");
  if (j.contains("max_bins")) c.learner.trees.max_bins = typed<std::size_t>(j, "max_bins");
  if (j.contains("eval_mode")) c.learner.eval_mode = parse_eval_mode(typed<std::string>(j, "eval_mode"));
  if (j.contains("holdout")) c.learner.holdout_fraction = typed<double>(j, "holdout");

  if (j.contains("alpha")) c.alpha = typed<double>(j, "alpha");
  if (j.contains("u")) c.u = typed<std::size_t>(j, "u");
  if (j.contains("u_range")) {
    const auto r = typed<std::vector<std::size_t>>(j, "u_range");
    if (r.size() != 2) throw ConfigError("config: u_range needs two entries");
    c.u_range = std::pair{r[0], r[1]};
  }
  if (j.contains("screen_holdout")) c.screen_holdout = typed<double>(j, "screen_holdout");
  if (j.contains("seed")) {
    c.seed = typed<std::uint64_t>(j, "seed");
  } else if (seed_fallback) {
    c.seed = *seed_fallback;
  }
  if (j.contains("workers")) c.workers = typed<std::size_t>(j, "workers");
  if (j.contains("dump_matrix")) c.dump_matrix = typed<bool>(j, "dump_matrix");
  if (j.contains("baselines")) c.baselines = typed<std::vector<std::string>>(j, "baselines");

  if (j.contains("model")) c.sim = sim::default_config(sim::parse_model(typed<std::string>(j, "model")));
  if (j.contains("n")) c.sim.n = typed<std::size_t>(j, "n");
  if (j.contains("p")) c.sim.p = typed<std::size_t>(j, "p");
  if (j.contains("repeat")) c.sim.repeat_factor = typed<std::size_t>(j, "repeat");
  c.sim.seed = c.seed;
  if (j.contains("reps")) c.reps = typed<std::size_t>(j, "reps");
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : typed<std::vector<std::string>>(j, "methods")) c.methods.push_back(sim::parse_method(m));
  }
  if (j.contains("lasso_folds")) c.lasso_folds = typed<std::size_t>(j, "lasso_folds");
  if (j.contains("stability_B")) c.stability_B = typed<std::size_t>(j, "stability_B");

  if (j.contains("K")) {
    c.K = typed<std::size_t>(j, "K");
    c.K_given = true;
  } else if (command == Command::bench &&
             (c.sim.model == sim::Model::highdim_linear || c.sim.model == sim::Model::highdim_nonlinear)) {
    // Scale K with the true support size.
    c.K = static_cast<std::size_t>(std::ceil(1.5 * static_cast<double>(sim::ground_truth(c.sim).support.size())));
  }
  c.validate();
  return c;
}

std::pair<std::size_t, std::size_t> default_u_range(const RunConfig& c) {
  if (c.u_range) return *c.u_range;
  const bool highdim = c.sim.model == sim::Model::highdim_linear || c.sim.model == sim::Model::highdim_nonlinear;
  const double frac = c.command == Command::bench && highdim ? 0.6 : 0.7;
  const auto lo = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(c.K)));
  return {std::clamp<std::size_t>(lo, 1, c.K), c.K};
}

SelectionReport cmd_select(const RunConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  const RngStream rng(c.seed);
  if (c.input.empty() && c.from_matrix.empty()) throw ConfigError("select needs --input or --from-matrix");

  std::optional<Dataset> data;
  if (!c.input.empty()) data = read_csv(c.input, c.response);
  VIMatrix m = c.from_matrix.empty() ? compute_matrix(c, *data, rng) : load_matrix(c.from_matrix);
  if (data && m.feature_names != data->feature_names()) {
    throw DataError("VI matrix features do not match the input columns");
  }
  const std::size_t K = m.K();
  if (c.u && *c.u > K) throw ConfigError("u exceeds the number of permutations");
  if (c.u_range && c.u_range->second > K) throw ConfigError("u range exceeds the number of permutations");

  SelectionReport report;
  report.feature_names = m.feature_names;
  report.records = seltest::run_all_tests(reduce_stats(m), m, c.alpha, c.u.value_or(K));

  RunConfig range_cfg = c;
  range_cfg.K = K;
  const auto [u_lo, u_hi] = default_u_range(range_cfg);
  std::optional<seltest::SelectionScorer> scorer;
  std::map<std::vector<std::size_t>, double> cache;
  if (!c.u && data && u_lo < u_hi) {
    auto base = seltest::holdout_mse_scorer(*data, c.learner, c.screen_holdout, rng.child("screen"));
    scorer = [base, &cache](const std::vector<std::size_t>& sel) {
      auto it = cache.find(sel);
      if (it != cache.end()) return it->second;
      return cache[sel] = base(sel);
    };
  }
  for (auto method : seltest::kPchtMethods) {
    std::size_t u = c.u ? *c.u : u_hi;
    if (scorer) u = seltest::screen_u(report.records, method, u_lo, u_hi, c.alpha, *scorer);
    report.pcht_u[method] = u;
    for (auto& r : report.records) r.reject_pcht[static_cast<std::size_t>(method)] = r.adjusted_for(method)[u - 1] < c.alpha;
  }
  if (c.test != "all") report.tests = {seltest::parse_test_kind(c.test)};

  for (const auto& name : c.baselines) {
    if (!data) throw ConfigError("baselines need --input");
    const RngStream r = rng.child("baseline-" + name);
    if (name == "loco") report.baselines.push_back(baselines::loco(*data, c.learner, c.alpha, r));
    if (name == "gcm") report.baselines.push_back(baselines::gcm(*data, c.learner, c.alpha, r));
    if (name == "lasso") report.baselines.push_back(baselines::lasso_select(*data, 5, r));
  }
  if (c.dump_matrix) report.matrix = m;

  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.metadata = json{{"tool", "minshap"},
                         {"tool_version", kToolVersion},
                         {"command", "select"},
                         {"input", c.input},
                         {"from_matrix", c.from_matrix},
                         {"perms_file", c.perms_file},
                         {"response", c.response},
                         {"n", m.n},
                         {"p", m.p()},
                         {"K", K},
                         {"alpha", c.alpha},
                         {"test", c.test},
                         {"u", c.u ? json(*c.u) : json(nullptr)},
                         {"u_range", {u_lo, u_hi}},
                         {"u_screening", c.u ? "fixed" : (scorer ? "holdout-mse" : "upper-end")},
                         {"seed", c.seed},
                         {"permutation_seed", m.plan.seed},
                         {"workers", c.workers},
                         {"learner", learner_to_json(c.learner)},
                         {"started_at", started},
                         {"wall_clock_seconds", elapsed}};
  return report;
}

ShapleyOutput cmd_shapley(const RunConfig& c) {
  c.validate();
  if (c.input.empty()) throw ConfigError("shapley needs --input");
  const Dataset data = read_csv(c.input, c.response);
  VIMatrix m = compute_matrix(c, data, RngStream(c.seed));
  ShapleyStats stats = reduce_stats(m);
  return {std::move(m), std::move(stats)};
}

std::pair<Dataset, sim::GroundTruth> cmd_simulate(const RunConfig& c) {
  c.validate();
  return sim::generate(c.sim, RngStream(c.seed));
}

sim::BenchResult cmd_bench(const RunConfig& c) {
  c.validate();
  sim::ExperimentOptions o;
  o.methods = c.methods;
  o.reps = c.reps;
  o.alpha = c.alpha;
  o.K = c.K;
  std::tie(o.u_lo, o.u_hi) = default_u_range(c);
  o.learner = c.learner;
  o.lasso_folds = c.lasso_folds;
  o.stability_B = c.stability_B;
  o.workers = c.workers;
  return sim::run_experiment(c.sim, o, RngStream(c.seed));
}

void write_stats_csv(const VIMatrix& m, const ShapleyStats& stats, std::ostream& out) {
  out << "feature,phi_mean,phi_min,sigma2_assoc,argmin_perm\n" << std::setprecision(17);
  for (std::size_t j = 0; j < m.p(); ++j) {
    out << m.feature_names[j] << ',' << stats.phi_mean[j] << ',' << stats.phi_min[j] << ',' << stats.sigma2_assoc[j]
        << ',' << stats.argmin_perm[j] << '\n';
  }
}

namespace {

int execute(Command command, const RunConfig& c, std::ostream& out) {
  switch (command) {
    case Command::select: {
      const auto report = cmd_select(c);
      write_to(c.output, out, [&](std::ostream& os) { os << report.to_json().dump(2) << '\n'; });
      break;
    }
    case Command::shapley: {
      const auto res = cmd_shapley(c);
      write_to(c.output, out, [&](std::ostream& os) { write_vi_matrix_csv(res.matrix, os); });
      std::string stats_path = c.stats_output;
      if (stats_path.empty() && c.output != "-") stats_path = c.output + ".stats.csv";
      if (!stats_path.empty()) {
        write_to(stats_path, out, [&](std::ostream& os) { write_stats_csv(res.matrix, res.stats, os); });
      }
      break;
    }
    case Command::simulate: {
      const auto [data, truth] = cmd_simulate(c);
      write_to(c.output, out, [&](std::ostream& os) { write_csv(data, os, c.response); });
      if (!c.truth_output.empty()) {
        std::vector<std::string> names;
        for (auto j : truth.support) names.push_back(data.feature_names()[j]);
        const json t{{"model", sim::to_string(c.sim.model)}, {"support", truth.support}, {"support_names", names}};
        write_to(c.truth_output, out, [&](std::ostream& os) { os << t.dump(2) << '\n'; });
      }
      break;
    }
    case Command::bench: {
      const auto res = cmd_bench(c);
      write_to(c.output, out, [&](std::ostream& os) { sim::write_bench_csv(res, os); });
      std::string json_path = c.json_output;
      if (json_path.empty() && c.output != "-") json_path = c.output + ".json";
      if (!json_path.empty()) write_to(json_path, out, [&](std::ostream& os) { os << bench_to_json(res).dump(2) << '\n'; });
      break;
    }
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shapley-based conditional-independence feature selection"};
  app.require_subcommand(1);
  std::map<Command, CLI::App*> subs;
  std::map<Command, std::map<std::string, std::pair<CLI::Option*, std::string>>> raw;
  std::map<Command, std::string> config_paths;
  const std::map<Command, std::string> about{
      {Command::select, "Run the selection tests on CSV data and write a JSON report"},
      {Command::shapley, "Write the permutation VI matrix and Shapley statistics"},
      {Command::simulate, "Write a synthetic benchmark dataset as CSV"},
      {Command::bench, "Run a simulation benchmark and write metric tables"},
  };
  for (const auto& [command, names] : command_keys()) {
    CLI::App* sub = app.add_subcommand(to_string(command), about.at(command));
    subs[command] = sub;
    sub->add_option("--config", config_paths[command], "JSON config; flags override its values");
    auto& slots = raw[command];
    for (const auto& name : names) {
      const Key* key = nullptr;
      for (const auto& k : keys()) {
        if (name == k.name) key = &k;
      }
      auto& slot = slots[name];
      if (key->kind == Kind::flag) {
        slot.first = sub->add_flag(flag_name(name), key->help);
      } else {
        slot.first = sub->add_option(flag_name(name), slot.second, key->help);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Command command = Command::select;
  for (const auto& [c, sub] : subs) {
    if (sub->parsed()) command = c;
  }

  try {
    json j = json::object();
    if (!config_paths[command].empty()) {
      std::ifstream in(config_paths[command]);
      if (!in) throw ConfigError("cannot open config '" + config_paths[command] + "'");
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    }
    for (const auto& [name, slot] : raw[command]) {
      if (slot.first->count() == 0) continue;
      const Key* key = nullptr;
      for (const auto& k : keys()) {
        if (name == k.name) key = &k;
      }
      json v = flag_value(*key, slot.second);
      if (name == "learner" && j.contains("learner") && j["learner"].is_object()) {
        j["learner"]["kind"] = v;
      } else {
        j[name] = std::move(v);
      }
    }
    const RunConfig c = config_from_json(command, j, env_seed());
    return execute(command, c, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace minshap::cli
