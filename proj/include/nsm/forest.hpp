#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nsm/core/binary_io.hpp"
#include "nsm/core/cloud_io.hpp"
#include "nsm/core/error.hpp"
#include "nsm/core/hash.hpp"
#include "nsm/core/parallel.hpp"
#include "nsm/core/random.hpp"

namespace nsm {

enum class ClassBalance {
  none,        ///< train on all rows as given
  downsample,  ///< keep at most negative_ratio negatives per positive
  weight,      ///< keep all rows, weight classes inversely to frequency
};

struct RfParams {
  std::size_t n_trees = 250;
  std::size_t max_depth = 50;
  std::size_t min_leaf = 1;
  std::size_t features_per_split = 0;  ///< 0 selects round(sqrt(width))
  double bootstrap = 1.0;              ///< bootstrap sample size as a fraction of the rows
  std::uint64_t seed = 42;
  ClassBalance balance = ClassBalance::downsample;
  double negative_ratio = 1.0;        ///< negatives kept per positive when downsampling
  bool allow_single_class = false;  ///< permit degenerate one-class forests (constant score)
  unsigned threads = 1;

  void validate() const {
    if (n_trees < 1) throw ValidationError("rf.trees must be >= 1");
    if (max_depth < 1) throw ValidationError("rf.depth must be >= 1");
    if (min_leaf < 1) throw ValidationError("rf.min_leaf must be >= 1");
    if (!(bootstrap > 0.0) || bootstrap > 1.0) throw ValidationError("rf.bootstrap must be in (0, 1]");
    if (!(negative_ratio > 0.0)) throw ValidationError("rf.negative_ratio must be > 0");
  }

  std::size_t split_features(std::size_t width) const {
    if (features_per_split > 0) return std::min(features_per_split, width);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(width)))));
  }
};

/// Fixed-width rows with binary labels (1 = match).
struct TrainingSet {
  std::size_t width = 0;
  std::vector<double> features;  ///< row-major
  std::vector<std::uint8_t> labels;

  TrainingSet() = default;
  explicit TrainingSet(std::size_t w) : width(w) {}

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * width, width}; }

  void add(std::span<const double> x, bool label) {
    if (x.size() != width) throw ValidationError("TrainingSet: row width " + std::to_string(x.size()) + " != " + std::to_string(width));
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label ? 1 : 0);
  }

  std::size_t positives() const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)); }
};

/// Axis-aligned split node; leaves have feature == -1. Children always have larger indices.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  ///< positive-class fraction at a leaf
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  /// x goes left when x[feature] <= threshold.
  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
  }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      best = std::max(best, d[i]);
      if (nodes[i].feature >= 0) {
        d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
        d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
      }
    }
    return best;
  }

  bool operator==(const DecisionTree& o) const {
    if (nodes.size() != o.nodes.size()) return false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto &a = nodes[i], &b = o.nodes[i];
      if (a.feature != b.feature || a.threshold != b.threshold || a.left != b.left || a.right != b.right || a.value != b.value) return false;
    }
    return true;
  }
};

struct ForestModel {
  std::size_t width = 0;
  std::vector<DecisionTree> trees;
  std::string fingerprint;

  bool operator==(const ForestModel&) const = default;
};

struct TrainStats {
  std::size_t rows_used = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t oob_rows = 0;     ///< rows left out of at least one tree
  double oob_accuracy = 0.0;    ///< accuracy at score >= 0.5 over oob_rows
};

/// Mean of the per-tree leaf values; always in [0, 1].
inline double rf_score(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.width) {
    throw ValidationError("rf_score: input width " + std::to_string(x.size()) + " != model width " + std::to_string(model.width));
  }
  if (model.trees.empty()) throw ValidationError("rf_score: model has no trees");
  double sum = 0.0;
  for (const auto& t : model.trees) sum += t.predict(x);
  return sum / static_cast<double>(model.trees.size());
}

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const std::vector<double>& row_weight, const RfParams& params, Rng rng)
      : data_(data), weight_(row_weight), params_(params), rng_(std::move(rng)), mtry_(params.split_features(data.width)) {
    features_.resize(data.width);
  }

  DecisionTree grow(std::vector<std::uint32_t> samples) {
    samples_ = std::move(samples);
    tree_.nodes.clear();
    build(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  static double weighted_gini(double pos, double total) {
    // total * gini = total - (pos^2 + neg^2) / total
    if (total <= 0.0) return 0.0;
    const double neg = total - pos;
    return total - (pos * pos + neg * neg) / total;
  }

  std::int32_t build(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto index = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    double pos = 0.0, total = 0.0;
    std::size_t pos_count = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto s = samples_[i];
      total += weight_[s];
      if (data_.labels[s]) {
        pos += weight_[s];
        ++pos_count;
      }
    }
    const std::size_t count = end - begin;
    const double value = total > 0.0 ? pos / total : 0.0;

    const bool pure = pos_count == 0 || pos_count == count;
    if (pure || depth >= params_.max_depth || count < 2 * params_.min_leaf) {
      tree_.nodes[static_cast<std::size_t>(index)].value = value;
      return index;
    }

    const Split best = find_split(begin, end);
    if (best.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(index)].value = value;
      return index;
    }

    const auto f = static_cast<std::size_t>(best.feature);
    const auto mid_it = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                       samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                       [&](std::uint32_t s) { return data_.row(s)[f] <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());

    const std::int32_t left = build(begin, mid, depth + 1);
    const std::int32_t right = build(mid, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    node.value = value;
    return index;
  }

  Split find_split(std::size_t begin, std::size_t end) {
    const std::size_t width = data_.width;
    std::iota(features_.begin(), features_.end(), 0u);
    Split best;
    // Lazy Fisher-Yates: examine mtry random features, keep drawing if none of them splits.
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t pick = j + uniform_index(rng_, width - j);
      std::swap(features_[j], features_[pick]);
      evaluate_feature(features_[j], begin, end, best);
      if (j + 1 >= mtry_ && best.feature >= 0) break;
    }
    return best;
  }

  void evaluate_feature(std::uint32_t feature, std::size_t begin, std::size_t end, Split& best) {
    buffer_.clear();
    double total = 0.0, pos_total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto s = samples_[i];
      buffer_.emplace_back(data_.row(s)[feature], s);
      total += weight_[s];
      if (data_.labels[s]) pos_total += weight_[s];
    }
    std::sort(buffer_.begin(), buffer_.end());
    const std::size_t n = buffer_.size();
    const std::size_t min_leaf = params_.min_leaf;
    double left_total = 0.0, left_pos = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto s = buffer_[i].second;
      left_total += weight_[s];
      if (data_.labels[s]) left_pos += weight_[s];
      const double a = buffer_[i].first, b = buffer_[i + 1].first;
      if (!(a < b)) continue;
      if (i + 1 < min_leaf || n - (i + 1) < min_leaf) continue;
      const double impurity = weighted_gini(left_pos, left_total) + weighted_gini(pos_total - left_pos, total - left_total);
      if (impurity < best.impurity) {
        double thr = a + 0.5 * (b - a);
        if (!(thr < b)) thr = a;
        best = {static_cast<std::int32_t>(feature), thr, impurity};
      }
    }
  }

  const TrainingSet& data_;
  const std::vector<double>& weight_;
  const RfParams& params_;
  Rng rng_;
  std::size_t mtry_;
  std::vector<std::uint32_t> features_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::pair<double, std::uint32_t>> buffer_;
  DecisionTree tree_;
};

inline std::string forest_fingerprint(const RfParams& p, const TrainingSet& data, std::size_t rows_used) {
  std::ostringstream s;
  s << "trees=" << p.n_trees << ";depth=" << p.max_depth << ";min_leaf=" << p.min_leaf
    << ";mtry=" << p.split_features(data.width) << ";bootstrap=" << p.bootstrap << ";seed=" << p.seed
    << ";balance=" << static_cast<int>(p.balance) << ";ratio=" << p.negative_ratio << ";width=" << data.width
    << ";rows=" << data.rows() << ";used=" << rows_used;
  return hex64(fnv1a64(s.str()));
}

}  // namespace detail

/**
 * @brief Trains a binary Random Forest with CART/Gini trees.
 *
 * Each tree draws a bootstrap sample (with replacement) of round(bootstrap * rows)
 * rows from its own RNG stream derived from (seed, tree index), so the model is
 * identical for any thread count.
 */
inline ForestModel rf_train(const TrainingSet& data, const RfParams& params, TrainStats* stats = nullptr) {
  params.validate();
  if (data.width == 0) throw ValidationError("rf_train: zero-width training set");
  if (data.features.size() != data.rows() * data.width) throw ValidationError("rf_train: feature buffer width mismatch");
  const std::size_t positives = data.positives();
  const std::size_t negatives = data.rows() - positives;
  if (data.rows() == 0) throw ValidationError("rf_train: empty training set");
  if ((positives == 0 || negatives == 0) && !params.allow_single_class) {
    throw ValidationError("rf_train: training data must contain both classes");
  }

  // Row selection and per-row class weights.
  std::vector<std::uint32_t> used;
  used.reserve(data.rows());
  std::vector<double> weight(data.rows(), 1.0);
  if (params.balance == ClassBalance::downsample && positives > 0 &&
      static_cast<double>(negatives) > params.negative_ratio * static_cast<double>(positives)) {
    std::vector<std::uint32_t> neg;
    for (std::uint32_t i = 0; i < data.rows(); ++i) {
      if (data.labels[i]) {
        used.push_back(i);
      } else {
        neg.push_back(i);
      }
    }
    const auto keep = static_cast<std::size_t>(std::floor(params.negative_ratio * static_cast<double>(positives)));
    Rng rng = make_rng(params.seed, {0xd0d0ULL});
    for (std::size_t j = 0; j < keep; ++j) std::swap(neg[j], neg[j + uniform_index(rng, neg.size() - j)]);
    used.insert(used.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(used.begin(), used.end());
  } else {
    for (std::uint32_t i = 0; i < data.rows(); ++i) used.push_back(i);
    if (params.balance == ClassBalance::weight && positives > 0 && negatives > 0) {
      const double n = static_cast<double>(data.rows());
      const double wp = n / (2.0 * static_cast<double>(positives));
      const double wn = n / (2.0 * static_cast<double>(negatives));
      for (std::size_t i = 0; i < data.rows(); ++i) weight[i] = data.labels[i] ? wp : wn;
    }
  }

  const auto draws = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.bootstrap * static_cast<double>(used.size()))));
  ForestModel model;
  model.width = data.width;
  model.trees.resize(params.n_trees);
  std::vector<std::vector<std::uint32_t>> in_bag;
  if (stats) in_bag.resize(params.n_trees);

  parallel_for(params.n_trees, params.threads, [&](std::size_t t) {
    Rng rng = make_rng(params.seed, {0x7ee5ULL, t});
    std::vector<std::uint32_t> sample(draws);
    for (auto& s : sample) s = used[uniform_index(rng, used.size())];
    if (stats) in_bag[t] = sample;
    detail::TreeBuilder builder(data, weight, params, std::move(rng));
    model.trees[t] = builder.grow(std::move(sample));
  });
  model.fingerprint = detail::forest_fingerprint(params, data, used.size());

  if (stats) {
    *stats = {};
    stats->rows_used = used.size();
    for (auto i : used) (data.labels[i] ? stats->positives : stats->negatives)++;
    std::vector<double> oob_sum(data.rows(), 0.0);
    std::vector<std::uint32_t> oob_n(data.rows(), 0);
    std::vector<std::uint8_t> seen(data.rows(), 0);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
      std::fill(seen.begin(), seen.end(), 0);
      for (auto s : in_bag[t]) seen[s] = 1;
      for (auto i : used) {
        if (seen[i]) continue;
        oob_sum[i] += model.trees[t].predict(data.row(i));
        ++oob_n[i];
      }
    }
    std::size_t correct = 0;
    for (auto i : used) {
      if (oob_n[i] == 0) continue;
      ++stats->oob_rows;
      const bool predicted = oob_sum[i] / oob_n[i] >= 0.5;
      if (predicted == (data.labels[i] != 0)) ++correct;
    }
    stats->oob_accuracy = stats->oob_rows ? static_cast<double>(correct) / static_cast<double>(stats->oob_rows) : 0.0;
  }
  return model;
}

// ============================================================================
// Model persistence
// ============================================================================

inline constexpr char kForestMagic[8] = {'N', 'S', 'M', 'F', 'O', 'R', 'S', 'T'};
inline constexpr std::uint32_t kForestFormatVersion = 1;

inline void rf_save(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out.write(kForestMagic, sizeof kForestMagic);
  binary::write_le<std::uint32_t>(out, kForestFormatVersion);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.width));
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.trees.size()));
  binary::write_string(out, model.fingerprint);
  for (const auto& tree : model.trees) {
    binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const auto& n : tree.nodes) {
      binary::write_le(out, n.feature);
      binary::write_le(out, n.threshold);
      binary::write_le(out, n.left);
      binary::write_le(out, n.right);
      binary::write_le(out, n.value);
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline ForestModel rf_load(const std::filesystem::path& path) {
  if (path.empty() || !std::filesystem::exists(path)) throw IoError("file not found: '" + path.string() + "'");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  char magic[sizeof kForestMagic];
  in.read(magic, sizeof magic);
  if (in.gcount() != static_cast<std::streamsize>(sizeof magic) || !std::equal(magic, magic + sizeof magic, kForestMagic)) {
    throw ParseError(path.string() + ": not a forest model (bad magic)");
  }
  const auto version = binary::read_le<std::uint32_t>(in, "version");
  if (version != kForestFormatVersion) {
    throw VersionMismatch(path.string() + ": forest format version " + std::to_string(version) + ", expected " +
                          std::to_string(kForestFormatVersion));
  }
  ForestModel model;
  model.width = binary::read_le<std::uint32_t>(in, "width");
  const auto n_trees = binary::read_le<std::uint32_t>(in, "tree count");
  model.fingerprint = binary::read_string(in, "fingerprint");
  if (model.width == 0 || n_trees == 0) throw ParseError(path.string() + ": empty model");
  model.trees.resize(n_trees);
  for (auto& tree : model.trees) {
    const auto n_nodes = binary::read_le<std::uint32_t>(in, "node count");
    if (n_nodes == 0 || n_nodes > (1u << 28)) throw ParseError(path.string() + ": implausible node count");
    tree.nodes.resize(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      auto& n = tree.nodes[i];
      n.feature = binary::read_le<std::int32_t>(in, "node");
      n.threshold = binary::read_le<double>(in, "node");
      n.left = binary::read_le<std::int32_t>(in, "node");
      n.right = binary::read_le<std::int32_t>(in, "node");
      n.value = binary::read_le<double>(in, "node");
      if (n.feature >= 0) {
        const bool ok = static_cast<std::uint32_t>(n.feature) < model.width && n.left > static_cast<std::int32_t>(i) &&
                        n.right > static_cast<std::int32_t>(i) && static_cast<std::uint32_t>(n.left) < n_nodes &&
                        static_cast<std::uint32_t>(n.right) < n_nodes;
        if (!ok) throw ParseError(path.string() + ": corrupt tree node");
      } else if (!(n.value >= 0.0 && n.value <= 1.0)) {
        throw ParseError(path.string() + ": leaf value outside [0, 1]");
      }
    }
  }
  return model;
}

// ============================================================================
// pairs.csv: rows `label,f_1,...,f_D`
// ============================================================================

inline TrainingSet read_pairs_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  TrainingSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> cols;
    std::string_view view(line);
    for (std::size_t start = 0;;) {
      const auto comma = view.find(',', start);
      cols.push_back(view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    double label = 0.0;
    if (!detail::parse_double(cols[0], label)) {
      if (line_no == 1) continue;  // header row
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad label");
    }
    if (label != 0.0 && label != 1.0) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
    if (set.width == 0) set.width = cols.size() - 1;
    if (cols.size() - 1 != set.width || set.width == 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(set.width) + " features");
    }
    std::vector<double> row(set.width);
    for (std::size_t j = 0; j < set.width; ++j) row[j] = detail::parse_double_or_throw(cols[j + 1], path, line_no);
    set.add(row, label == 1.0);
  }
  return set;
}

inline void write_pairs_csv(const TrainingSet& set, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (std::size_t i = 0; i < set.rows(); ++i) {
    out << static_cast<int>(set.labels[i]);
    for (double v : set.row(i)) out << ',' << detail::format_double(v);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace nsm
