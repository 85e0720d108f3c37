#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace arousal {

inline constexpr double kSamplingRateHz = 200.0;

enum class ChannelRole : std::uint8_t {
  EEG1,
  EEG2,
  EEG3,
  EEG4,
  EEG5,
  EEG6,
  EOG,
  ChinEMG,
  AbdominalEMG,
  ChestEMG,
  Airflow,
  SaO2,
  ECG,
};

inline constexpr std::size_t kRoleCount = 13;

/// Roles every record must carry (all but ECG), in canonical order.
inline constexpr std::array<ChannelRole, 12> kRequiredRoles = {
    ChannelRole::EEG1,    ChannelRole::EEG2,         ChannelRole::EEG3,
    ChannelRole::EEG4,    ChannelRole::EEG5,         ChannelRole::EEG6,
    ChannelRole::EOG,     ChannelRole::ChinEMG,      ChannelRole::AbdominalEMG,
    ChannelRole::ChestEMG, ChannelRole::Airflow,     ChannelRole::SaO2,
};

inline constexpr std::array<ChannelRole, 6> kEegRoles = {
    ChannelRole::EEG1, ChannelRole::EEG2, ChannelRole::EEG3,
    ChannelRole::EEG4, ChannelRole::EEG5, ChannelRole::EEG6,
};

std::string_view role_name(ChannelRole role);
std::optional<ChannelRole> parse_role(std::string_view name);

/// Sample-wise annotation codes.
enum Annotation : std::int8_t {
  kUndefined = -1,
  kNonArousal = 0,
  kArousal = 1,
};

struct Record {
  std::string subject_id;
  double sampling_rate = kSamplingRateHz;
  std::map<ChannelRole, std::vector<float>> channels;
  std::vector<std::int8_t> annotations;

  std::size_t length() const noexcept { return annotations.size(); }
  bool has(ChannelRole role) const { return channels.contains(role); }
  /// Throws RecordError if the role is absent.
  const std::vector<float>& channel(ChannelRole role) const;

  bool operator==(const Record&) const = default;
};

enum class RecordErrc {
  InvalidRecord,
  Io,
  MalformedHeader,
  MissingChannel,
  LengthMismatch,
  InvalidAnnotation,
};

class RecordError : public std::runtime_error {
 public:
  RecordError(RecordErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  RecordErrc code() const noexcept { return code_; }

 private:
  RecordErrc code_;
};

struct ValidationReport {
  enum class Kind { LengthMismatch, MissingChannel, SamplingRate, SaO2Range, Annotation, NonFinite, SubjectId };
  struct Violation {
    Kind kind;
    std::string message;
  };
  std::vector<Violation> violations;
  /// Informational only; never makes a record invalid.
  std::vector<std::string> notes;

  bool ok() const noexcept { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate_record(const Record& record);

/// Writes `<dir>/<subject_id>/` containing header.txt, one `<role>.f32` per
/// channel and annotations.i8. Returns the record directory. Nothing is
/// written if the record does not validate.
std::filesystem::path write_record(const Record& record, const std::filesystem::path& dir);

/// Reads a record directory written by write_record.
Record read_record(const std::filesystem::path& record_dir);

/// Reads only the subject id and annotation vector of a record directory.
std::pair<std::string, std::vector<std::int8_t>> read_annotations(
    const std::filesystem::path& record_dir);

/// Record directories (those holding header.txt) directly below `dir`,
/// sorted by name.
std::vector<std::filesystem::path> list_record_dirs(const std::filesystem::path& dir);

struct SynthParams {
  std::string subject_id = "synth";
  double duration_s = 3600.0;
  double arousal_rate = 24.0;         // events per hour
  double arousal_duration_s = 15.0;   // mean event length
  double signature_strength = 1.0;
  /// Width of the undefined margin on each side of an event, as a fraction
  /// of that event's duration.
  double undefined_fraction = 0.1;
  /// Leading undefined block (lights-on period).
  double undefined_lead_s = 30.0;
  bool with_ecg = false;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument on out-of-range parameters.
void validate_synth_params(const SynthParams& params);

/// Deterministic synthetic polysomnogram.
Record synth_record(const SynthParams& params);

}  // namespace arousal
