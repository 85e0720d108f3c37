#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "arousal/features.hpp"
#include "arousal/record.hpp"

namespace arousal {

struct TrainParams {
  std::uint32_t n_trees = 30;
  std::uint32_t max_depth = 20;
  std::uint32_t min_leaf = 1;
  double bootstrap_fraction = 1.0;  // sampled with replacement
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainParams&) const = default;
};

/// Flat tree node. Internal nodes route value <= threshold to `left`.
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double arousal_fraction = 0.0;  // leaves only
  std::uint32_t n_train = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Nodes in preorder; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return leaf_for(x).arousal_fraction; }
  std::size_t depth() const;
  bool operator==(const Tree&) const = default;
};

/// Gini impurity of a two-class node.
double gini(std::size_t n_pos, std::size_t n_neg);

/// Greedy CART on the given rows of X (duplicates allowed, as in a bootstrap
/// sample). Every feature and every midpoint between consecutive distinct
/// values is scanned; ties keep the lowest feature index, then the smallest
/// threshold.
Tree fit_tree(const FeatureMatrix& X, std::span<const std::uint8_t> y, const TrainParams& params,
              std::span<const std::size_t> rows);
/// All rows, once each.
Tree fit_tree(const FeatureMatrix& X, std::span<const std::uint8_t> y, const TrainParams& params);

struct BaggedEnsemble {
  std::vector<Tree> trees;
  TrainParams params;

  /// Mean over trees of the reached leaf's arousal fraction.
  double predict_proba(std::span<const double> x) const;
  bool operator==(const BaggedEnsemble&) const = default;
};

/// Bootstrap row indices for tree `tree_index` (deterministic substream).
std::vector<std::size_t> bootstrap_rows(std::size_t n, const TrainParams& params, std::uint32_t tree_index);

/// Pure bagging: no feature subsampling. Requires both classes.
BaggedEnsemble fit_bagged(const FeatureMatrix& X, std::span<const std::uint8_t> y, const TrainParams& params);

struct ClassCounts {
  std::uint32_t arousal = 0;
  std::uint32_t non_arousal = 0;
  bool operator==(const ClassCounts&) const = default;
};

struct SubjectModel {
  std::string subject_id;
  BaggedEnsemble ensemble;
  std::uint32_t n_epochs_train = 0;
  ClassCounts class_counts;
  bool operator==(const SubjectModel&) const = default;
};

struct Skipped {
  std::string subject_id;
  std::string reason;

  bool operator==(const Skipped&) const = default;
};

using TrainOutcome = std::variant<SubjectModel, Skipped>;

/// Labeled training epochs of one record, features and 0/1 labels.
struct TrainingSet {
  std::string subject_id;
  FeatureMatrix X;
  std::vector<std::uint8_t> y;
};

TrainingSet training_set(const Record& record, double epoch_s = 30.0, const FeatureConfig& config = {});

/// Per-subject seed: hash64(global_seed, subject_id).
std::uint64_t subject_seed(std::uint64_t global_seed, const std::string& subject_id);

/// Fits a subject model, or Skipped("single-class") when one class is absent.
/// `params.seed` is the global seed.
TrainOutcome train_subject(const TrainingSet& data, const TrainParams& params);
TrainOutcome train_subject(const Record& record, const TrainParams& params, double epoch_s = 30.0,
                           const FeatureConfig& config = {});

struct ModelDatabase {
  std::vector<SubjectModel> models;  // sorted by subject id, ids unique
  std::string schema_version = kSchemaVersion;
  std::uint64_t schema_hash = arousal::schema_hash();
  FeatureConfig feature_config;
  double epoch_seconds = 30.0;

  /// Mean of every model's predict_proba.
  double predict_proba(std::span<const double> x) const;
  /// Sorts by subject id; throws on duplicates.
  void add(SubjectModel model);
  bool operator==(const ModelDatabase&) const = default;
};

class ModelDbError : public std::runtime_error {
 public:
  enum class Kind { Io, Corrupt, Version, SchemaMismatch };
  ModelDbError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint32_t kModelDbVersion = 1;

void save_db(const ModelDatabase& db, const std::filesystem::path& path);
/// Throws ModelDbError; a file written for a different feature schema is
/// refused with Kind::SchemaMismatch.
ModelDatabase load_db(const std::filesystem::path& path);

}  // namespace arousal
