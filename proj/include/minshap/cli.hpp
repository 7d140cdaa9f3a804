#pragma once

#include "minshap/dataset.hpp"
#include "minshap/learners.hpp"
#include "minshap/report.hpp"
#include "minshap/shapley.hpp"
#include "minshap/simbench.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace minshap::cli {

enum class Command { select, shapley, simulate, bench };

std::string to_string(Command command);

/// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitInternal = 1;

struct RunConfig {
  Command command = Command::select;

  std::string input;
  std::string response = "y";
  std::string output = "-";
  std::string perms_file;
  std::string from_matrix;
  std::string stats_output;  // shapley: statistics CSV
  std::string json_output;   // bench: JSON summary
  std::string truth_output;  // simulate: ground-truth JSON

  LearnerSpec learner = LearnerSpec::make_boosted_trees();
  std::size_t K = 50;
  bool K_given = false;
  double alpha = 0.05;
  std::string test = "all";
  std::optional<std::size_t> u;
  std::optional<std::pair<std::size_t, std::size_t>> u_range;
  /// Held-out fraction used to score candidate u values on real data.
  double screen_holdout = 0.3;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool dump_matrix = false;
  std::vector<std::string> baselines;

  sim::SimConfig sim;
  std::size_t reps = 1;
  std::vector<sim::Method> methods{sim::Method::minshap, sim::Method::maxp};
  std::size_t lasso_folds = 5;
  std::size_t stability_B = 50;

  void validate() const;
};

/// Builds a RunConfig from a JSON object whose keys are the long flag names
/// with '-' replaced by '_'. `seed_fallback` applies when no seed key exists.
RunConfig config_from_json(Command command, const json& j, std::optional<std::uint64_t> seed_fallback = {});

/// PCHT u range used when none is configured.
std::pair<std::size_t, std::size_t> default_u_range(const RunConfig& config);

SelectionReport cmd_select(const RunConfig& config);

struct ShapleyOutput {
  VIMatrix matrix;
  ShapleyStats stats;
};
ShapleyOutput cmd_shapley(const RunConfig& config);

std::pair<Dataset, sim::GroundTruth> cmd_simulate(const RunConfig& config);

sim::BenchResult cmd_bench(const RunConfig& config);

void write_stats_csv(const VIMatrix& m, const ShapleyStats& stats, std::ostream& out);

/// Parses arguments, runs the command and maps failures onto exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace minshap::cli
