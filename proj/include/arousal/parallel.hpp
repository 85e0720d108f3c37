#pragma once

// Data-parallel drivers. Each has a serial twin kept as the reference the
// tests and the benchmark compare against; outputs are bit-identical for any
// thread count because every work item writes only its own slot.

#include <span>

#include "arousal/classifier.hpp"
#include "arousal/epoching.hpp"
#include "arousal/features.hpp"
#include "arousal/record.hpp"

namespace arousal {

/// 0 means the OpenMP default.
void set_thread_count(int threads);
int thread_count();

FeatureMatrix extract_epochs(const Record& record, std::span<const EpochSpan> spans, const FeatureConfig& config);
FeatureMatrix extract_epochs_serial(const Record& record, std::span<const EpochSpan> spans,
                                    const FeatureConfig& config);

/// Database probability for each feature row.
std::vector<double> predict_rows(const ModelDatabase& db, const FeatureMatrix& X);
std::vector<double> predict_rows_serial(const ModelDatabase& db, const FeatureMatrix& X);

/// Trains every subject concurrently; outcomes keep the input order.
std::vector<TrainOutcome> train_subjects(std::span<const TrainingSet> sets, const TrainParams& params);

}  // namespace arousal
