#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "arousal/record.hpp"

namespace arousal {

/// Half-open sample interval [start, end).
struct EpochSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  bool operator==(const EpochSpan&) const = default;
};

enum class EpochLabel { NonArousal, Arousal, Excluded };

struct LabeledEpoch {
  EpochSpan span;
  EpochLabel label;  // never Excluded
};

/// Samples per epoch: round(fs * epoch_s).
std::size_t epoch_length(double fs, double epoch_s);

/// Non-overlapping spans from sample 0; a trailing partial window is dropped.
std::vector<EpochSpan> segment_train(std::size_t record_len, double fs, double epoch_s);

/// Overlapping spans stepping epoch_len*(1-overlap). When the last regular
/// span ends before record_len, one span anchored at [N-epoch_len, N) is
/// appended so every sample is covered.
std::vector<EpochSpan> segment_test(std::size_t record_len, double fs, double epoch_s, double overlap = 0.5);

/// Plurality label over {1, 0, -1}. All-undefined slices are Excluded; an
/// undefined plurality in a mixed slice falls back to the binary majority.
/// 1-vs-0 ties go to Arousal.
EpochLabel majority_label(std::span<const std::int8_t> annotations, std::size_t epoch_len);

std::vector<LabeledEpoch> labeled_epochs(const Record& record, double epoch_s = 30.0);

}  // namespace arousal
