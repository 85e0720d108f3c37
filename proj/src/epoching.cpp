#include "arousal/epoching.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace arousal {

std::size_t epoch_length(double fs, double epoch_s) {
  if (!(fs > 0.0) || !(epoch_s > 0.0)) throw std::invalid_argument("fs and epoch length must be positive");
  const auto len = static_cast<std::size_t>(std::llround(fs * epoch_s));
  if (len == 0) throw std::invalid_argument("epoch shorter than one sample");
  return len;
}

namespace {
void require_one_epoch(std::size_t record_len, std::size_t len) {
  if (record_len < len) {
    throw std::invalid_argument("record of " + std::to_string(record_len) + " samples is shorter than one epoch (" +
                                std::to_string(len) + " samples)");
  }
}
}  // namespace

std::vector<EpochSpan> segment_train(std::size_t record_len, double fs, double epoch_s) {
  const std::size_t len = epoch_length(fs, epoch_s);
  require_one_epoch(record_len, len);
  std::vector<EpochSpan> spans;
  spans.reserve(record_len / len);
  for (std::size_t start = 0; start + len <= record_len; start += len) spans.push_back({start, start + len});
  return spans;
}

std::vector<EpochSpan> segment_test(std::size_t record_len, double fs, double epoch_s, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("overlap must be in [0,1)");
  const std::size_t len = epoch_length(fs, epoch_s);
  require_one_epoch(record_len, len);
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1.0 - overlap))));
  std::vector<EpochSpan> spans;
  for (std::size_t start = 0; start + len <= record_len; start += step) spans.push_back({start, start + len});
  if (spans.back().end < record_len) spans.push_back({record_len - len, record_len});
  return spans;
}

EpochLabel majority_label(std::span<const std::int8_t> annotations, std::size_t epoch_len) {
  if (annotations.size() != epoch_len) {
    throw std::invalid_argument("annotation slice has " + std::to_string(annotations.size()) +
                                " samples, expected " + std::to_string(epoch_len));
  }
  std::size_t pos = 0, neg = 0, undef = 0;
  for (std::int8_t a : annotations) {
    switch (a) {
      case kArousal: ++pos; break;
      case kNonArousal: ++neg; break;
      case kUndefined: ++undef; break;
      default: throw std::invalid_argument("annotation value " + std::to_string(a) + " outside {-1,0,1}");
    }
  }
  if (undef == annotations.size()) return EpochLabel::Excluded;
  // Whether or not -1 holds the plurality, a mixed epoch resolves to the
  // binary majority.
  return pos >= neg ? EpochLabel::Arousal : EpochLabel::NonArousal;
}

std::vector<LabeledEpoch> labeled_epochs(const Record& record, double epoch_s) {
  const auto spans = segment_train(record.length(), record.sampling_rate, epoch_s);
  const std::span<const std::int8_t> ann(record.annotations);
  std::vector<LabeledEpoch> out;
  out.reserve(spans.size());
  for (const auto& span : spans) {
    const EpochLabel label = majority_label(ann.subspan(span.start, span.size()), span.size());
    if (label != EpochLabel::Excluded) out.push_back({span, label});
  }
  return out;
}

}  // namespace arousal
