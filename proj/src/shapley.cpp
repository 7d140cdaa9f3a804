#include "minshap/shapley.hpp"

#include "minshap/errors.hpp"
#include "minshap/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace minshap {

namespace {

std::string describe(std::span<const std::size_t> prefix) {
  std::string out = "{";
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(prefix[i]);
  }
  return out + "}";
}

double unbiased_variance_over_n(const Eigen::VectorXd& d) {
  const auto m = d.size();
  if (m < 2) return 0.0;
  const double mean = d.mean();
  const double ss = (d.array() - mean).square().sum();
  return ss / static_cast<double>(m - 1) / static_cast<double>(m);
}

}  // namespace

PermutationContext::PermutationContext(const Dataset& data, LearnerSpec spec, const RngStream& rng)
    : data_(data), spec_(std::move(spec)), rng_(rng) {
  spec_.validate();
  split_ = make_row_split(data_.n(), spec_.holdout_fraction, rng.child("holdout"));
  null_ = value(fit(spec_, data_, {}, rng.child("null"), split_), data_);
  if (spec_.eval_mode == EvalMode::dropout) {
    const auto all = iota_indices(data_.p());
    try {
      full_ = fit(spec_, data_, all, rng.child("full"), split_);
    } catch (const std::exception& e) {
      throw NumericalError(std::string("dropout full-model fit failed: ") + e.what());
    }
  }
}

std::uint64_t subset_key(std::span<const std::size_t> subset) {
  std::vector<std::size_t> sorted(subset.begin(), subset.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto j : sorted) {
    h ^= static_cast<std::uint64_t>(j) + 1;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ValueResult PermutationContext::subset_value(std::span<const std::size_t> subset) const {
  if (subset.empty()) return null_;
  try {
    if (full_) return dropout_value(*full_, data_, subset);
    const std::size_t p = data_.p();
    const bool shared = subset.size() <= 1 || subset.size() + 1 >= p;
    // Fit on the sorted columns: tree split ties depend on column order, and
    // the value must be a function of the set alone.
    std::vector<std::size_t> key(subset.begin(), subset.end());
    std::sort(key.begin(), key.end());
    if (shared) {
      const std::lock_guard lock(cache_mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    ValueResult v = value(fit(spec_, data_, key, rng_.child("subset", subset_key(key)), split_), data_);
    if (shared) {
      const std::lock_guard lock(cache_mutex_);
      cache_.emplace(std::move(key), v);
    }
    return v;
  } catch (const NumericalError& e) {
    throw NumericalError("fit failed on prefix " + describe(subset) + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("fit failed on prefix " + describe(subset) + ": " + e.what());
  }
}

PermutationContribution PermutationContext::evaluate(std::span<const std::size_t> perm) const {
  const std::size_t p = data_.p();
  if (!is_permutation_of_range(perm, p)) throw InvalidArgument("evaluate_permutation: not a permutation of the features");
  PermutationContribution out{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};

  double v_cur = null_.mse;
  Eigen::VectorXd e2_cur = null_.squared_residuals;
  for (std::size_t step = 0; step < p; ++step) {
    const std::size_t j = perm[step];
    ValueResult next = subset_value(perm.subspan(0, step + 1));
    out.vi[j] = v_cur - next.mse;
    out.sigma2[j] = unbiased_variance_over_n(e2_cur - next.squared_residuals);
    v_cur = next.mse;
    e2_cur = std::move(next.squared_residuals);
  }
  return out;
}

PermutationContribution evaluate_permutation(const Dataset& data, const LearnerSpec& spec,
                                             std::span<const std::size_t> perm, const RngStream& rng) {
  return PermutationContext(data, spec, rng).evaluate(perm);
}

VIMatrix build_vi_matrix(const Dataset& data, const LearnerSpec& spec, const PermutationPlan& plan,
                         const RngStream& rng, std::size_t workers) {
  if (plan.K() == 0) throw InvalidArgument("build_vi_matrix: empty permutation plan");
  if (plan.p() != data.p()) {
    throw InvalidArgument("build_vi_matrix: plan orders " + std::to_string(plan.p()) + " features, data has " +
                          std::to_string(data.p()));
  }
  const PermutationContext context(data, spec, rng);
  VIMatrix m;
  m.vi.resize(static_cast<Eigen::Index>(data.p()), static_cast<Eigen::Index>(plan.K()));
  m.sigma2.resizeLike(m.vi);
  m.plan = plan;
  m.n = context.eval_rows();
  m.feature_names = data.feature_names();

  parallel_for(plan.K(), workers, [&](std::size_t k) {
    PermutationContribution column;
    try {
      column = context.evaluate(plan.perms[k]);
    } catch (const NumericalError& e) {
      throw NumericalError("permutation " + std::to_string(k) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("permutation " + std::to_string(k) + ": " + e.what());
    }
    for (std::size_t j = 0; j < data.p(); ++j) {
      m.vi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = column.vi[j];
      m.sigma2(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = column.sigma2[j];
    }
  });
  return m;
}

ShapleyStats reduce_stats(const VIMatrix& m) {
  if (m.K() == 0 || m.p() == 0) throw InvalidArgument("reduce_stats: empty matrix");
  ShapleyStats s;
  const std::size_t p = m.p();
  const std::size_t K = m.K();
  s.phi_mean.resize(p);
  s.phi_min.resize(p);
  s.sigma2_assoc.resize(p);
  s.argmin_perm.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto row = m.vi.row(static_cast<Eigen::Index>(j));
    std::size_t best = 0;
    for (std::size_t k = 1; k < K; ++k) {
      if (row(static_cast<Eigen::Index>(k)) < row(static_cast<Eigen::Index>(best))) best = k;
    }
    s.phi_mean[j] = row.mean();
    s.phi_min[j] = row(static_cast<Eigen::Index>(best));
    s.argmin_perm[j] = best;
    s.sigma2_assoc[j] = m.sigma2(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(best));
  }
  return s;
}

namespace {

constexpr const char* kMatrixMagic = "# minshap-vi-matrix v1";

std::string perm_label(const Permutation& perm) {
  std::string out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(perm[i]);
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line, std::size_t col) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw DataError("vi matrix: line " + std::to_string(line) + ", column " + std::to_string(col + 1) +
                    ": cannot parse '" + s + "'");
  }
  return v;
}

Permutation parse_perm_label(const std::string& header_field, std::string_view prefix) {
  if (header_field.size() < prefix.size() + 2 || header_field.compare(0, prefix.size(), prefix) != 0 ||
      header_field[prefix.size()] != '[' || header_field.back() != ']') {
    throw DataError("vi matrix: malformed header field '" + header_field + "'");
  }
  std::stringstream ss(header_field.substr(prefix.size() + 1, header_field.size() - prefix.size() - 2));
  Permutation perm;
  std::size_t v = 0;
  while (ss >> v) perm.push_back(v);
  return perm;
}

}  // namespace

void write_vi_matrix_csv(const VIMatrix& m, std::ostream& out) {
  out << kMatrixMagic << ",n=" << m.n << ",seed=" << m.plan.seed << '\n';
  out << "feature";
  for (std::size_t k = 0; k < m.K(); ++k) {
    const auto label = perm_label(m.plan.perms[k]);
    out << ",vi[" << label << "],sigma2[" << label << ']';
  }
  out << '\n' << std::setprecision(17);
  for (std::size_t j = 0; j < m.p(); ++j) {
    out << (j < m.feature_names.size() ? m.feature_names[j] : "X" + std::to_string(j + 1));
    for (std::size_t k = 0; k < m.K(); ++k) {
      out << ',' << m.vi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) << ','
          << m.sigma2(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    }
    out << '\n';
  }
}

VIMatrix read_vi_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMatrixMagic, 0) != 0) {
    throw DataError("vi matrix: missing '" + std::string(kMatrixMagic) + "' first line");
  }
  VIMatrix m;
  for (const auto& field : split_commas(line)) {
    if (field.rfind("n=", 0) == 0) m.n = static_cast<std::size_t>(parse_number(field.substr(2), 1, 0));
    if (field.rfind("seed=", 0) == 0) m.plan.seed = std::stoull(field.substr(5));
  }
  if (!std::getline(in, line)) throw DataError("vi matrix: missing header line");
  const auto header = split_commas(line);
  if (header.size() < 3 || (header.size() - 1) % 2 != 0 || header[0] != "feature") {
    throw DataError("vi matrix: header must be feature followed by vi/sigma2 column pairs");
  }
  const std::size_t K = (header.size() - 1) / 2;
  for (std::size_t k = 0; k < K; ++k) {
    auto perm = parse_perm_label(header[1 + 2 * k], "vi");
    if (parse_perm_label(header[2 + 2 * k], "sigma2") != perm) {
      throw DataError("vi matrix: vi/sigma2 column pair " + std::to_string(k) + " name different orderings");
    }
    m.plan.perms.push_back(std::move(perm));
  }
  std::vector<std::vector<double>> vi_rows, s2_rows;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw DataError("vi matrix: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    m.feature_names.push_back(fields[0]);
    std::vector<double> vi(K), s2(K);
    for (std::size_t k = 0; k < K; ++k) {
      vi[k] = parse_number(fields[1 + 2 * k], line_no, 1 + 2 * k);
      s2[k] = parse_number(fields[2 + 2 * k], line_no, 2 + 2 * k);
      if (s2[k] < 0.0) throw DataError("vi matrix: negative variance on line " + std::to_string(line_no));
    }
    vi_rows.push_back(std::move(vi));
    s2_rows.push_back(std::move(s2));
  }
  const std::size_t p = vi_rows.size();
  if (p == 0) throw DataError("vi matrix: no feature rows");
  for (const auto& perm : m.plan.perms) {
    if (!is_permutation_of_range(perm, p)) throw DataError("vi matrix: header ordering is not a permutation of the rows");
  }
  m.vi.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(K));
  m.sigma2.resizeLike(m.vi);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < K; ++k) {
      m.vi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = vi_rows[j][k];
      m.sigma2(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = s2_rows[j][k];
    }
  }
  return m;
}

}  // namespace minshap
