#pragma once

#include "minshap/baselines.hpp"
#include "minshap/learners.hpp"
#include "minshap/seltest.hpp"
#include "minshap/shapley.hpp"
#include "minshap/simbench.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace minshap {

using json = nlohmann::ordered_json;

inline constexpr const char* kReportSchemaVersion = "1.0";
inline constexpr const char* kToolVersion = "0.1.0";

/// {"kind", "hyperparams", "eval_mode", "holdout_fraction"}. Missing keys
/// keep their defaults; unknown keys and bad values raise ConfigError.
json learner_to_json(const LearnerSpec& spec);
LearnerSpec learner_from_json(const json& j);

json record_to_json(const seltest::FeatureTestRecord& record, const std::vector<std::string>& names);
json baseline_to_json(const baselines::BaselineResult& result, const std::vector<std::string>& names);
json vi_matrix_to_json(const VIMatrix& m);
json bench_to_json(const sim::BenchResult& result);

struct SelectionReport {
  /// Echo of the run configuration plus versions and timing.
  json metadata = json::object();
  std::vector<std::string> feature_names;
  std::vector<seltest::FeatureTestRecord> records;
  /// u used for each PCHT method's decisions.
  std::map<seltest::PchtMethod, std::size_t> pcht_u;
  /// Tests whose selected sets are reported; all five when empty.
  std::vector<seltest::TestKind> tests;
  std::vector<baselines::BaselineResult> baselines;
  std::optional<VIMatrix> matrix;

  [[nodiscard]] std::vector<std::size_t> selected(seltest::TestKind kind) const;
  [[nodiscard]] json to_json() const;
};

}  // namespace minshap
