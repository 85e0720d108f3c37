#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "arousal/classifier.hpp"
#include "arousal/features.hpp"

namespace arousal {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PipelineConfig {
  double epoch_seconds = 30.0;
  double test_overlap = 0.5;
  std::uint32_t trees = 30;
  std::uint32_t max_depth = 20;
  std::uint32_t min_leaf = 1;
  std::uint64_t seed = 0;
  double wamp_threshold_factor = 0.5;
  std::size_t eog_smooth_window = 51;
  std::size_t airflow_smooth_window = 201;
  double xcorr_max_lag_s = 5.0;
  int threads = 0;  // 0 = OpenMP default

  /// Sets one key from its text value. Unknown keys, unparsable values and
  /// out-of-range values throw ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Applies a `key=value` file (blank lines and `#` comments allowed).
  void merge_file(const std::filesystem::path& path);
  void validate() const;

  FeatureConfig features() const;
  TrainParams train_params() const;

  static const std::vector<std::string_view>& keys();
};

}  // namespace arousal
