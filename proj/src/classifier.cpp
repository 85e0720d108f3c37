#include "arousal/classifier.hpp"

#include <algorithm>
#include <numeric>

#include "arousal/parallel.hpp"
#include "arousal/rng.hpp"

namespace arousal {

void TrainParams::validate() const {
  if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
  if (!(bootstrap_fraction > 0.0)) throw std::invalid_argument("bootstrap_fraction must be > 0");
}

double gini(std::size_t n_pos, std::size_t n_neg) {
  const std::size_t n = n_pos + n_neg;
  if (n == 0) throw std::invalid_argument("gini of an empty node");
  const double p = static_cast<double>(n_pos) / static_cast<double>(n);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

const TreeNode& Tree::leaf_for(std::span<const double> x) const {
  if (nodes.empty()) throw std::logic_error("empty tree");
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto f = static_cast<std::size_t>(nodes[i].feature);
    if (f >= x.size()) {
      throw std::invalid_argument("feature vector has " + std::to_string(x.size()) + " values, tree uses index " +
                                  std::to_string(f));
    }
    i = static_cast<std::size_t>(x[f] <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
  }
  return nodes[i];
}

std::size_t Tree::depth() const {
  // Preorder layout: walk with an explicit stack of (node, depth).
  std::size_t best = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
    }
  }
  return best;
}

namespace {

// Minimum impurity decrease that counts as an improvement; screens out
// rounding noise on splits that leave class proportions unchanged.
constexpr double kMinDecrease = 1e-12;

struct Split {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double decrease = kMinDecrease;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& X, std::span<const std::uint8_t> y, const TrainParams& params)
      : X_(X), y_(y), params_(params) {}

  Tree build(std::vector<std::size_t> rows) {
    Tree tree;
    grow(tree, rows, 0);
    return tree;
  }

 private:
  std::int32_t grow(Tree& tree, std::vector<std::size_t>& rows, std::uint32_t depth) {
    const auto index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += y_[r];
    const std::size_t n = rows.size();

    const auto make_leaf = [&] {
      TreeNode& leaf = tree.nodes[static_cast<std::size_t>(index)];
      leaf.arousal_fraction = static_cast<double>(pos) / static_cast<double>(n);
      leaf.n_train = static_cast<std::uint32_t>(n);
      return index;
    };
    if (depth >= params_.max_depth || pos == 0 || pos == n || n < 2 * static_cast<std::size_t>(params_.min_leaf)) {
      return make_leaf();
    }
    const Split split = best_split(rows, pos);
    if (split.feature < 0) return make_leaf();

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (X_.row(r)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const std::int32_t l = grow(tree, left, depth + 1);
    const std::int32_t r = grow(tree, right, depth + 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    node.n_train = static_cast<std::uint32_t>(n);
    return index;
  }

  Split best_split(const std::vector<std::size_t>& rows, std::size_t pos) {
    const std::size_t n = rows.size();
    const double parent = gini(pos, n - pos);
    const std::size_t min_leaf = params_.min_leaf;
    Split best;
    scratch_.resize(n);
    for (std::size_t f = 0; f < X_.cols; ++f) {
      for (std::size_t i = 0; i < n; ++i) scratch_[i] = {X_.row(rows[i])[f], y_[rows[i]]};
      std::sort(scratch_.begin(), scratch_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (scratch_.front().first == scratch_.back().first) continue;
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += scratch_[i].second;
        const double a = scratch_[i].first, b = scratch_[i + 1].first;
        const std::size_t nl = i + 1, nr = n - nl;
        if (a == b || nl < min_leaf || nr < min_leaf) continue;
        const double decrease = parent - (static_cast<double>(nl) * gini(left_pos, nl - left_pos) +
                                          static_cast<double>(nr) * gini(pos - left_pos, nr - (pos - left_pos))) /
                                             static_cast<double>(n);
        if (decrease > best.decrease) {
          double t = a + (b - a) / 2.0;
          if (!(t >= a && t < b)) t = a;
          best = {static_cast<std::int32_t>(f), t, decrease};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& X_;
  std::span<const std::uint8_t> y_;
  const TrainParams& params_;
  std::vector<std::pair<double, std::uint8_t>> scratch_;
};

void check_xy(const FeatureMatrix& X, std::span<const std::uint8_t> y) {
  if (X.cols == 0 || X.values.size() % X.cols != 0) throw std::invalid_argument("malformed feature matrix");
  if (X.rows() != y.size()) {
    throw std::invalid_argument("feature matrix has " + std::to_string(X.rows()) + " rows but " +
                                std::to_string(y.size()) + " labels");
  }
  if (std::any_of(y.begin(), y.end(), [](std::uint8_t v) { return v > 1; })) {
    throw std::invalid_argument("labels must be 0 or 1");
  }
}

}  // namespace

Tree fit_tree(const FeatureMatrix& X, std::span<const std::uint8_t> y, const TrainParams& params,
              std::span<const std::size_t> rows) {
  check_xy(X, y);
  params.validate();
  if (rows.empty()) throw std::invalid_argument("fit_tree needs at least one row");
  for (std::size_t r : rows) {
    if (r >= X.rows()) throw std::invalid_argument("row index out of range");
  }
  return TreeBuilder(X, y, params).build({rows.begin(), rows.end()});
}

Tree fit_tree(const FeatureMatrix& X, std::span<const std::uint8_t> y, const TrainParams& params) {
  std::vector<std::size_t> rows(X.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_tree(X, y, params, rows);
}

double BaggedEnsemble::predict_proba(std::span<const double> x) const {
  if (trees.empty()) throw std::logic_error("empty ensemble");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return std::clamp(sum / static_cast<double>(trees.size()), 0.0, 1.0);
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, const TrainParams& params, std::uint32_t tree_index) {
  Rng rng(hash64(params.seed, static_cast<std::uint64_t>(tree_index)));
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.bootstrap_fraction * static_cast<double>(n))));
  std::vector<std::size_t> rows(m);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
  return rows;
}

BaggedEnsemble fit_bagged(const FeatureMatrix& X, std::span<const std::uint8_t> y, const TrainParams& params) {
  check_xy(X, y);
  params.validate();
  const std::size_t pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), std::uint8_t{1}));
  if (y.size() < 2 || pos == 0 || pos == y.size()) {
    throw std::invalid_argument("fit_bagged needs both classes present");
  }
  BaggedEnsemble ens;
  ens.params = params;
  ens.trees.resize(params.n_trees);
  const auto n_trees = static_cast<std::ptrdiff_t>(params.n_trees);
  // Runs serially when already inside a parallel region (nested parallelism off).
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    const auto rows = bootstrap_rows(X.rows(), params, static_cast<std::uint32_t>(t));
    ens.trees[static_cast<std::size_t>(t)] = TreeBuilder(X, y, params).build(rows);
  }
  return ens;
}

TrainingSet training_set(const Record& record, double epoch_s, const FeatureConfig& config) {
  const auto epochs = labeled_epochs(record, epoch_s);
  std::vector<EpochSpan> spans;
  TrainingSet set;
  set.subject_id = record.subject_id;
  for (const auto& e : epochs) {
    spans.push_back(e.span);
    set.y.push_back(e.label == EpochLabel::Arousal ? 1 : 0);
  }
  set.X = extract_epochs(record, spans, config);
  return set;
}

std::uint64_t subject_seed(std::uint64_t global_seed, const std::string& subject_id) {
  return hash64(global_seed, subject_id);
}

TrainOutcome train_subject(const TrainingSet& data, const TrainParams& params) {
  params.validate();
  ClassCounts counts;
  for (std::uint8_t v : data.y) (v ? counts.arousal : counts.non_arousal)++;
  if (counts.arousal == 0 || counts.non_arousal == 0) return Skipped{data.subject_id, "single-class"};
  TrainParams p = params;
  p.seed = subject_seed(params.seed, data.subject_id);
  SubjectModel model;
  model.subject_id = data.subject_id;
  model.ensemble = fit_bagged(data.X, data.y, p);
  model.n_epochs_train = static_cast<std::uint32_t>(data.y.size());
  model.class_counts = counts;
  return model;
}

TrainOutcome train_subject(const Record& record, const TrainParams& params, double epoch_s,
                           const FeatureConfig& config) {
  return train_subject(training_set(record, epoch_s, config), params);
}

double ModelDatabase::predict_proba(std::span<const double> x) const {
  if (models.empty()) throw std::logic_error("empty model database");
  double sum = 0.0;
  for (const auto& m : models) sum += m.ensemble.predict_proba(x);
  return std::clamp(sum / static_cast<double>(models.size()), 0.0, 1.0);
}

void ModelDatabase::add(SubjectModel model) {
  const auto it = std::lower_bound(models.begin(), models.end(), model.subject_id,
                                   [](const SubjectModel& m, const std::string& id) { return m.subject_id < id; });
  if (it != models.end() && it->subject_id == model.subject_id) {
    throw std::invalid_argument("duplicate subject id " + model.subject_id);
  }
  models.insert(it, std::move(model));
}

}  // namespace arousal
