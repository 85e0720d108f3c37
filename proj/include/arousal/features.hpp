#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arousal/epoching.hpp"
#include "arousal/record.hpp"

namespace arousal {

inline constexpr std::size_t kFeatureCount = 428;
inline constexpr const char* kSchemaVersion = "arousal-features/1";

enum class FeatureFamily : std::uint8_t { EEG, SaO2, ChinEMG, AbdominalEMG, ChestEMG, EOG, Airflow, Interaction };

struct FamilyLayout {
  FeatureFamily family;
  const char* name;
  std::size_t offset;
  std::size_t count;
};

inline constexpr std::array<FamilyLayout, 8> kFamilyLayout = {{
    {FeatureFamily::EEG, "eeg", 0, 119},
    {FeatureFamily::SaO2, "sao2", 119, 9},
    {FeatureFamily::ChinEMG, "chin_emg", 128, 64},
    {FeatureFamily::AbdominalEMG, "abd_emg", 192, 64},
    {FeatureFamily::ChestEMG, "chest_emg", 256, 64},
    {FeatureFamily::EOG, "eog", 320, 15},
    {FeatureFamily::Airflow, "airflow", 335, 68},
    {FeatureFamily::Interaction, "interaction", 403, 25},
}};

/// The ten EEG bands as half-open [lo, hi) Hz intervals tiling [1, 101).
struct Band {
  const char* name;
  double lo_hz;
  double hi_hz;
};
inline constexpr std::array<Band, 10> kEegBands = {{
    {"delta", 1, 4},
    {"theta", 4, 8},
    {"alpha1", 8, 10},
    {"alpha2", 10, 13},
    {"beta1", 13, 18},
    {"beta2", 18, 31},
    {"gamma1", 31, 41},
    {"gamma2", 41, 51},
    {"high1", 51, 71},
    {"high2", 71, 101},
}};

struct FeatureInfo {
  std::string name;
  FeatureFamily family;
  std::string description;
};

/// The frozen 428-entry schema. Validated (count, family sizes, unique
/// names) on first use; a malformed schema throws std::logic_error.
const std::vector<FeatureInfo>& feature_schema();

/// FNV-1a over the schema version and every feature name, in order.
std::uint64_t schema_hash();

struct FeatureConfig {
  double wamp_threshold_factor = 0.5;
  std::size_t eog_smooth_window = 51;
  std::size_t airflow_smooth_window = 201;
  double xcorr_max_lag_s = 5.0;

  bool operator==(const FeatureConfig&) const = default;
};

/// Per-role signal slices for one epoch, indexed by ChannelRole (ECG unused).
struct EpochSignals {
  std::array<std::vector<double>, kRequiredRoles.size()> channels;

  const std::vector<double>& operator[](ChannelRole role) const {
    return channels[static_cast<std::size_t>(role)];
  }
  std::vector<double>& operator[](ChannelRole role) { return channels[static_cast<std::size_t>(role)]; }
  std::size_t length() const { return channels[0].size(); }

  static EpochSignals from_record(const Record& record, const EpochSpan& span);
};

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::string schema_version = kSchemaVersion;

  std::span<const double> family(FeatureFamily f) const;
};

std::vector<double> eeg_features(std::span<const std::span<const double>> eeg, double fs);
std::vector<double> sao2_features(std::span<const double> sao2);
std::vector<double> emg_features(std::span<const double> x, double wamp_threshold_factor = 0.5);
std::vector<double> eog_features(std::span<const double> eog, double fs, std::size_t smooth_window = 51);
std::vector<double> airflow_features(std::span<const double> airflow, double fs, const FeatureConfig& config = {});
std::vector<double> interaction_features(const EpochSignals& epoch, double fs, const FeatureConfig& config = {});

FeatureVector extract_epoch(const EpochSignals& epoch, double fs, const FeatureConfig& config = {});

/// Row-major epochs x features.
struct FeatureMatrix {
  std::size_t cols = kFeatureCount;
  std::vector<double> values;

  std::size_t rows() const noexcept { return cols == 0 ? 0 : values.size() / cols; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
};

}  // namespace arousal
