#include "arousal/parallel.hpp"

#include <omp.h>

#include <exception>
#include <mutex>

namespace arousal {
namespace {

// Rethrows the first exception raised inside a parallel region.
class ErrorSlot {
 public:
  template <typename F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

FeatureMatrix empty_matrix(std::size_t rows) {
  FeatureMatrix X;
  X.values.resize(rows * kFeatureCount);
  return X;
}

void extract_one(const Record& record, const EpochSpan& span, const FeatureConfig& config, std::span<double> out) {
  const auto fv = extract_epoch(EpochSignals::from_record(record, span), record.sampling_rate, config);
  std::copy(fv.values.begin(), fv.values.end(), out.begin());
}

}  // namespace

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

FeatureMatrix extract_epochs(const Record& record, std::span<const EpochSpan> spans, const FeatureConfig& config) {
  FeatureMatrix X = empty_matrix(spans.size());
  ErrorSlot errors;
  const auto n = static_cast<std::ptrdiff_t>(spans.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    errors.run([&] { extract_one(record, spans[idx], config, X.row(idx)); });
  }
  errors.rethrow();
  return X;
}

FeatureMatrix extract_epochs_serial(const Record& record, std::span<const EpochSpan> spans,
                                    const FeatureConfig& config) {
  FeatureMatrix X = empty_matrix(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) extract_one(record, spans[i], config, X.row(i));
  return X;
}

std::vector<double> predict_rows(const ModelDatabase& db, const FeatureMatrix& X) {
  std::vector<double> p(X.rows());
  const auto n = static_cast<std::ptrdiff_t>(X.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = db.predict_proba(X.row(static_cast<std::size_t>(i)));
  return p;
}

std::vector<double> predict_rows_serial(const ModelDatabase& db, const FeatureMatrix& X) {
  std::vector<double> p(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) p[i] = db.predict_proba(X.row(i));
  return p;
}

std::vector<TrainOutcome> train_subjects(std::span<const TrainingSet> sets, const TrainParams& params) {
  std::vector<TrainOutcome> out(sets.size());
  ErrorSlot errors;
  const auto n = static_cast<std::ptrdiff_t>(sets.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    errors.run([&] { out[idx] = train_subject(sets[idx], params); });
  }
  errors.rethrow();
  return out;
}

}  // namespace arousal
