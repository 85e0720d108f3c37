#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "arousal/classifier.hpp"
#include "arousal/epoching.hpp"
#include "arousal/record.hpp"

namespace arousal {

/// Per-sample arousal probability, one value per record sample.
using ProbabilityVector = std::vector<double>;

/// Each sample gets the mean of the probabilities of every span covering it,
/// accumulated in span order as a running mean (equal inputs stay exact).
ProbabilityVector fuse_epoch_probabilities(std::size_t record_len, std::span<const EpochSpan> spans,
                                           std::span<const double> epoch_probs);

/// Sliding-window inference with every model in the database. Epoch length
/// and feature settings come from the database.
ProbabilityVector predict_record(const Record& record, const ModelDatabase& db, double test_overlap = 0.5);

class VecError : public std::runtime_error {
 public:
  VecError(std::size_t line, const std::string& what) : std::runtime_error(what), line_(line) {}
  /// 1-based; 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// One probability per line, three decimals.
void write_vec(std::span<const double> probs, const std::filesystem::path& path);
ProbabilityVector read_vec(const std::filesystem::path& path);

/// Average precision with tied scores grouped into one threshold step.
/// labels are 0/1; both classes must be present.
double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Mann-Whitney AUC with half credit for ties.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct ScoreReport {
  double auprc = 0.0;
  double auroc = 0.0;
  std::size_t n_scored = 0;
  std::size_t n_excluded = 0;
  double prevalence = 0.0;
};

struct ScoredRecord {
  std::span<const double> probs;
  std::span<const std::int8_t> annotations;
};

class UnscorableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pools every record, drops samples annotated -1, scores the remainder.
/// Throws UnscorableError when the pool holds a single class.
ScoreReport gross_score(std::span<const ScoredRecord> records);

}  // namespace arousal
