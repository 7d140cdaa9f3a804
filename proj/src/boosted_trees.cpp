#include "minshap/boosted_trees.hpp"

#include "minshap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace minshap {

Eigen::VectorXd BoostedTreesRegressor::predict(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != n_features_) {
    throw InvalidArgument("boosted trees predict: column count mismatch");
  }
  const Eigen::Index rows = x.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(rows, base_score_);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  const auto stride = static_cast<std::size_t>(xr.cols());
  const Node* nodes = nodes_.data();
  for (const std::size_t root : roots_) {
    const double* row = xr.data();
    for (Eigen::Index i = 0; i < rows; ++i, row += stride) {
      const Node* node = nodes + root;
      while (node->feature >= 0) {
        node = nodes + node->child[row[node->feature] > node->threshold];
      }
      out(i) += node->value;
    }
  }
  return out;
}

BoostedTreesLearner::BoostedTreesLearner(BoostedTreeParams params) : params_(params) {
  if (params_.n_trees == 0) throw InvalidArgument("boosted trees: n_trees must be positive");
  if (params_.max_depth == 0 || params_.max_depth > 16) throw InvalidArgument("boosted trees: max_depth must be in [1, 16]");
  if (!(params_.learning_rate > 0.0)) throw InvalidArgument("boosted trees: learning_rate must be positive");
  if (!(params_.subsample > 0.0 && params_.subsample <= 1.0)) {
    throw InvalidArgument("boosted trees: subsample must be in (0, 1]");
  }
  if (params_.max_bins < 2 || params_.max_bins > 256) throw InvalidArgument("boosted trees: max_bins must be in [2, 256]");
}

namespace {

struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint32_t> bins;          // row-major rows x cols, offset by the column's histogram start
  std::vector<std::vector<double>> cuts;    // bin b holds values in (cuts[b-1], cuts[b]]
  std::vector<std::size_t> offsets;         // histogram offset per column
  std::size_t total_bins = 0;
};

BinnedMatrix bin_columns(const Eigen::MatrixXd& x, std::size_t max_bins) {
  BinnedMatrix out;
  out.rows = static_cast<std::size_t>(x.rows());
  const auto cols = static_cast<std::size_t>(x.cols());
  out.cols = cols;
  out.bins.resize(out.rows * cols);
  out.cuts.resize(cols);
  out.offsets.resize(cols);
  std::vector<double> sorted(out.rows);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto col = x.col(static_cast<Eigen::Index>(c));
    std::copy(col.data(), col.data() + out.rows, sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> uniq;
    uniq.reserve(sorted.size());
    std::unique_copy(sorted.begin(), sorted.end(), std::back_inserter(uniq));
    auto& cuts = out.cuts[c];
    if (uniq.size() <= max_bins) {
      for (std::size_t i = 0; i + 1 < uniq.size(); ++i) cuts.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    } else {
      for (std::size_t b = 1; b < max_bins; ++b) {
        const double q = sorted[b * out.rows / max_bins];
        if (cuts.empty() || q > cuts.back()) cuts.push_back(q);
      }
      if (!cuts.empty() && cuts.back() >= uniq.back()) cuts.pop_back();
    }
    out.offsets[c] = out.total_bins;
    out.total_bins += cuts.size() + 1;
    for (std::size_t r = 0; r < out.rows; ++r) {
      out.bins[r * cols + c] = static_cast<std::uint32_t>(
          out.offsets[c] + (std::lower_bound(cuts.begin(), cuts.end(), col(static_cast<Eigen::Index>(r))) - cuts.begin()));
    }
  }
  return out;
}

struct Cell {
  double grad = 0.0;
  std::uint64_t count = 0;
};
using Histogram = std::vector<Cell>;

struct Split {
  std::size_t feature = 0;
  std::size_t bin = 0;
  double gain = 0.0;
  double left_grad = 0.0;
  std::size_t left_count = 0;
  bool found = false;
};

struct WorkNode {
  std::size_t begin = 0;
  std::size_t end = 0;
  double grad = 0.0;
  std::size_t hist = 0;
  std::size_t tree_node = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedMatrix& binned, const BoostedTreeParams& params)
      : binned_(binned), params_(params) {}

  /// Grows one tree on rows_[0, sample) and appends it to `nodes`. Returns the root index.
  /// Residuals of the rows reaching each leaf are reduced by its value.
  std::size_t grow(std::vector<std::size_t>& rows, std::size_t sample, std::vector<double>& residual,
                   Eigen::VectorXd& fitted, std::vector<BoostedTreesRegressor::Node>& nodes) {
    rows_ = &rows;
    residual_ = &residual;
    fitted_ = &fitted;
    free_hists_.clear();
    for (std::size_t h = 0; h < hists_.size(); ++h) free_hists_.push_back(h);

    const std::size_t root_index = nodes.size();
    nodes.emplace_back();
    WorkNode root;
    root.begin = 0;
    root.end = sample;
    for (std::size_t i = 0; i < sample; ++i) root.grad += residual[rows[i]];
    root.tree_node = root_index;
    root.hist = acquire();
    build_hist(root);

    std::vector<WorkNode> level{root};
    for (std::size_t depth = 0; depth < params_.max_depth && !level.empty(); ++depth) {
      const bool children_split = depth + 1 < params_.max_depth;
      std::vector<WorkNode> next;
      for (const WorkNode& node : level) {
        const Split split = best_split(node);
        if (!split.found) {
          make_leaf(nodes[node.tree_node], node);
          release(node.hist);
          continue;
        }
        const std::size_t mid_index = partition(rows, node, split);

        WorkNode left{node.begin, mid_index, split.left_grad, 0, nodes.size()};
        nodes.emplace_back();
        WorkNode right{mid_index, node.end, node.grad - split.left_grad, 0, nodes.size()};
        nodes.emplace_back();
        auto& parent = nodes[node.tree_node];
        parent.feature = static_cast<std::int32_t>(split.feature);
        parent.threshold = binned_.cuts[split.feature][split.bin];
        parent.child[0] = static_cast<std::int32_t>(left.tree_node);
        parent.child[1] = static_cast<std::int32_t>(right.tree_node);

        if (!children_split) {
          make_leaf(nodes[left.tree_node], left);
          make_leaf(nodes[right.tree_node], right);
          release(node.hist);
          continue;
        }
        // Build the smaller child directly; the larger one is parent minus smaller.
        WorkNode& small = (left.end - left.begin) <= (right.end - right.begin) ? left : right;
        WorkNode& large = (&small == &left) ? right : left;
        small.hist = acquire();
        build_hist(small);
        large.hist = node.hist;
        subtract(large.hist, small.hist);
        next.push_back(left);
        next.push_back(right);
      }
      level = std::move(next);
    }
    for (const WorkNode& node : level) {
      make_leaf(nodes[node.tree_node], node);
      release(node.hist);
    }
    return root_index;
  }

 private:
  std::size_t acquire() {
    if (!free_hists_.empty()) {
      const std::size_t h = free_hists_.back();
      free_hists_.pop_back();
      std::fill(hists_[h].begin(), hists_[h].end(), Cell{});
      return h;
    }
    hists_.emplace_back(binned_.total_bins);
    return hists_.size() - 1;
  }

  // Stable, branch-free split of rows[begin, end) by bin; returns the boundary.
  std::size_t partition(std::vector<std::size_t>& rows, const WorkNode& node, const Split& split) {
    const std::uint32_t* col = binned_.bins.data() + split.feature;
    const std::size_t limit = binned_.offsets[split.feature] + split.bin;
    const std::size_t stride = binned_.cols;
    scratch_.resize(node.end - node.begin);
    std::size_t nl = node.begin;
    std::size_t nr = 0;
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t r = rows[i];
      const bool left = col[r * stride] <= limit;
      rows[nl] = r;
      scratch_[nr] = r;
      nl += left;
      nr += !left;
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(nr), rows.begin() + static_cast<std::ptrdiff_t>(nl));
    return nl;
  }

  void release(std::size_t h) { free_hists_.push_back(h); }

  void build_hist(const WorkNode& node) {
    auto& hist = hists_[node.hist];
    const auto& rows = *rows_;
    const auto& residual = *residual_;
    const std::size_t cols = binned_.cols;
    Cell* cells = hist.data();
    // Row-major so that consecutive updates hit different features.
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t r = rows[i];
      const double g = residual[r];
      const std::uint32_t* b = binned_.bins.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) {
        Cell& cell = cells[b[c]];
        cell.grad += g;
        ++cell.count;
      }
    }
  }

  void subtract(std::size_t target, std::size_t other) {
    auto& t = hists_[target];
    const auto& o = hists_[other];
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i].grad -= o[i].grad;
      t[i].count -= o[i].count;
    }
  }

  Split best_split(const WorkNode& node) const {
    Split best;
    const std::size_t total = node.end - node.begin;
    if (total < 2) return best;
    const auto& hist = hists_[node.hist];
    const double parent_score = node.grad * node.grad / static_cast<double>(total);
    for (std::size_t c = 0; c < binned_.cuts.size(); ++c) {
      const std::size_t nb = binned_.cuts[c].size() + 1;
      const Cell* cell = hist.data() + binned_.offsets[c];
      double gl = 0.0;
      std::size_t nl = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        // An empty bin repeats the previous partition.
        if (cell[b].count == 0) continue;
        gl += cell[b].grad;
        nl += cell[b].count;
        const std::size_t nr = total - nl;
        if (nr == 0) break;
        const double gr = node.grad - gl;
        const double gain = gl * gl / static_cast<double>(nl) + gr * gr / static_cast<double>(nr) - parent_score;
        if (gain > best.gain + 1e-12) {
          best = Split{c, b, gain, gl, nl, true};
        }
      }
    }
    return best;
  }

  void make_leaf(BoostedTreesRegressor::Node& node, const WorkNode& work) {
    const std::size_t count = work.end - work.begin;
    node.feature = -1;
    node.value = count == 0 ? 0.0 : params_.learning_rate * work.grad / static_cast<double>(count);
    auto& residual = *residual_;
    const auto& rows = *rows_;
    auto& fitted = *fitted_;
    for (std::size_t i = work.begin; i < work.end; ++i) {
      residual[rows[i]] -= node.value;
      fitted(static_cast<Eigen::Index>(rows[i])) += node.value;
    }
  }

  const BinnedMatrix& binned_;
  const BoostedTreeParams& params_;
  std::vector<Histogram> hists_;
  std::vector<std::size_t> free_hists_;
  std::vector<std::size_t> scratch_;
  std::vector<std::size_t>* rows_ = nullptr;
  std::vector<double>* residual_ = nullptr;
  Eigen::VectorXd* fitted_ = nullptr;
};

}  // namespace

std::unique_ptr<Regressor> BoostedTreesLearner::train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                                      RngStream rng) const {
  const auto m = static_cast<std::size_t>(x.rows());
  if (m == 0 || static_cast<std::size_t>(y.size()) != m) throw InvalidArgument("boosted trees: bad training shape");
  const BinnedMatrix binned = bin_columns(x, params_.max_bins);

  const double base = y.mean();
  std::vector<double> residual(m);
  // Accumulated in tree order, exactly as predict() sums.
  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m), base);
  for (std::size_t i = 0; i < m; ++i) residual[i] = y(static_cast<Eigen::Index>(i)) - base;

  const std::size_t sample =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(params_.subsample * static_cast<double>(m))), 1, m);
  std::vector<std::size_t> pool(m);
  std::iota(pool.begin(), pool.end(), std::size_t{0});

  std::vector<BoostedTreesRegressor::Node> nodes;
  nodes.reserve(params_.n_trees * ((std::size_t{2} << params_.max_depth) - 1));
  std::vector<std::size_t> roots;
  roots.reserve(params_.n_trees);
  TreeBuilder builder(binned, params_);
  std::vector<std::uint32_t> split_bin;

  for (std::size_t t = 0; t < params_.n_trees; ++t) {
    // Drawing the m - sample excluded rows into the tail leaves a uniformly
    // random subset in front with fewer draws.
    for (std::size_t i = m - 1; i >= sample; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(pool[i], pool[j]);
    }
    const std::size_t root = builder.grow(pool, sample, residual, fitted, nodes);
    roots.push_back(root);
    // bin <= split bin  <=>  x <= cut value
    split_bin.resize(nodes.size());
    for (std::size_t k = root; k < nodes.size(); ++k) {
      if (nodes[k].feature < 0) continue;
      const auto& cuts = binned.cuts[static_cast<std::size_t>(nodes[k].feature)];
      split_bin[k] = static_cast<std::uint32_t>(binned.offsets[static_cast<std::size_t>(nodes[k].feature)] +
                                                (std::lower_bound(cuts.begin(), cuts.end(), nodes[k].threshold) - cuts.begin()));
    }
    // Rows left out of the subsample are routed through the new tree.
    for (std::size_t i = sample; i < m; ++i) {
      const std::size_t r = pool[i];
      const std::uint32_t* b = binned.bins.data() + r * binned.cols;
      std::size_t k = root;
      while (nodes[k].feature >= 0) {
        k = static_cast<std::size_t>(nodes[k].child[b[nodes[k].feature] > split_bin[k]]);
      }
      residual[r] -= nodes[k].value;
      fitted(static_cast<Eigen::Index>(r)) += nodes[k].value;
    }
    if (!std::isfinite(residual[0])) throw NumericalError("boosted trees: residuals diverged");
  }
  return std::make_unique<BoostedTreesRegressor>(base, static_cast<std::size_t>(x.cols()), std::move(nodes),
                                                 std::move(roots), std::move(fitted));
}

}  // namespace minshap
