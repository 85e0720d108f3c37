#include "arousal/record.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace arousal {
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, kRoleCount> kRoleNames = {
    "EEG1", "EEG2",    "EEG3",         "EEG4",     "EEG5",    "EEG6", "EOG",
    "ChinEMG", "AbdominalEMG", "ChestEMG", "Airflow", "SaO2", "ECG",
};

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

void write_floats(const fs::path& file, const std::vector<float>& data) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw RecordError(RecordErrc::Io, "cannot open " + file.string() + " for writing");
  std::vector<std::uint32_t> words(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) words[i] = to_le(std::bit_cast<std::uint32_t>(data[i]));
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) throw RecordError(RecordErrc::Io, "write failed: " + file.string());
}

std::vector<char> slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw RecordError(RecordErrc::Io, "cannot open " + file.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<float> read_floats(const fs::path& file, std::size_t n) {
  std::error_code ec;
  const auto size = fs::file_size(file, ec);
  if (ec) throw RecordError(RecordErrc::MissingChannel, "missing channel file " + file.string());
  if (size != n * sizeof(float)) {
    throw RecordError(RecordErrc::LengthMismatch,
                      file.filename().string() + " holds " + std::to_string(size / sizeof(float)) +
                          " samples (" + std::to_string(size) + " bytes), header declares n=" +
                          std::to_string(n));
  }
  const auto bytes = slurp(file);
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t w;
    std::memcpy(&w, bytes.data() + i * 4, 4);
    data[i] = std::bit_cast<float>(to_le(w));
  }
  return data;
}

struct Header {
  std::string subject;
  double fs = 0.0;
  std::size_t n = 0;
  std::vector<ChannelRole> roles;
};

Header parse_header(const fs::path& dir) {
  const fs::path file = dir / "header.txt";
  std::ifstream in(file);
  if (!in) throw RecordError(RecordErrc::Io, "cannot open " + file.string());
  Header h;
  bool have_subject = false, have_fs = false, have_n = false, have_channels = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw RecordError(RecordErrc::MalformedHeader,
                        file.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "subject") {
        h.subject = value;
        have_subject = true;
      } else if (key == "fs") {
        h.fs = std::stod(value);
        have_fs = true;
      } else if (key == "n") {
        h.n = std::stoull(value);
        have_n = true;
      } else if (key == "channels") {
        std::stringstream ss(value);
        std::string name;
        while (std::getline(ss, name, ',')) {
          const auto role = parse_role(name);
          if (!role) throw RecordError(RecordErrc::MalformedHeader, "unknown channel role '" + name + "'");
          if (std::find(h.roles.begin(), h.roles.end(), *role) != h.roles.end()) {
            throw RecordError(RecordErrc::MalformedHeader, "duplicate channel role '" + name + "'");
          }
          h.roles.push_back(*role);
        }
        have_channels = true;
      } else {
        throw RecordError(RecordErrc::MalformedHeader, "unknown header key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw RecordError(RecordErrc::MalformedHeader,
                        file.string() + ":" + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  if (!have_subject || !have_fs || !have_n || !have_channels) {
    throw RecordError(RecordErrc::MalformedHeader,
                      file.string() + ": header needs subject, fs, n and channels");
  }
  return h;
}

std::vector<std::int8_t> read_annotation_file(const fs::path& dir, std::size_t n) {
  const fs::path file = dir / "annotations.i8";
  std::error_code ec;
  const auto size = fs::file_size(file, ec);
  if (ec) throw RecordError(RecordErrc::Io, "missing annotation file " + file.string());
  if (size != n) {
    throw RecordError(RecordErrc::LengthMismatch,
                      "annotations.i8 holds " + std::to_string(size) + " samples, header declares n=" +
                          std::to_string(n));
  }
  const auto bytes = slurp(file);
  std::vector<std::int8_t> ann(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = static_cast<std::int8_t>(bytes[i]);
    if (v < -1 || v > 1) {
      throw RecordError(RecordErrc::InvalidAnnotation,
                        "annotation value " + std::to_string(v) + " at sample " + std::to_string(i) +
                            " outside {-1,0,1}");
    }
    ann[i] = v;
  }
  return ann;
}

bool safe_subject_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

std::string_view role_name(ChannelRole role) { return kRoleNames[static_cast<std::size_t>(role)]; }

std::optional<ChannelRole> parse_role(std::string_view name) {
  for (std::size_t i = 0; i < kRoleCount; ++i) {
    if (kRoleNames[i] == name) return static_cast<ChannelRole>(i);
  }
  return std::nullopt;
}

const std::vector<float>& Record::channel(ChannelRole role) const {
  const auto it = channels.find(role);
  if (it == channels.end()) {
    throw RecordError(RecordErrc::MissingChannel,
                      "record " + subject_id + " has no " + std::string(role_name(role)) + " channel");
  }
  return it->second;
}

std::string ValidationReport::summary() const {
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += v.message;
  }
  return s;
}

ValidationReport validate_record(const Record& record) {
  using Kind = ValidationReport::Kind;
  ValidationReport report;
  const std::size_t n = record.length();
  if (!safe_subject_id(record.subject_id)) {
    report.violations.push_back({Kind::SubjectId, "subject id '" + record.subject_id +
                                                      "' must be non-empty [A-Za-z0-9._-]"});
  }
  if (record.sampling_rate != kSamplingRateHz) {
    report.violations.push_back(
        {Kind::SamplingRate, "sampling rate " + std::to_string(record.sampling_rate) + " Hz, expected 200 Hz"});
  }
  for (ChannelRole role : kRequiredRoles) {
    if (!record.has(role)) {
      report.violations.push_back({Kind::MissingChannel, "missing channel " + std::string(role_name(role))});
    }
  }
  for (const auto& [role, data] : record.channels) {
    const std::string name(role_name(role));
    if (data.size() != n) {
      report.violations.push_back({Kind::LengthMismatch, name + " has " + std::to_string(data.size()) +
                                                             " samples, annotations have " + std::to_string(n)});
    }
    const auto bad = std::find_if(data.begin(), data.end(), [](float v) { return !std::isfinite(v); });
    if (bad != data.end()) {
      report.violations.push_back({Kind::NonFinite, name + " has a non-finite sample at index " +
                                                        std::to_string(bad - data.begin())});
    }
    if (role == ChannelRole::SaO2) {
      const auto out = std::find_if(data.begin(), data.end(), [](float v) { return v < 0.0f || v > 100.0f; });
      if (out != data.end()) {
        report.violations.push_back({Kind::SaO2Range, "SaO2 sample " + std::to_string(*out) + " at index " +
                                                          std::to_string(out - data.begin()) +
                                                          " outside [0,100]"});
      }
    }
  }
  const auto bad_ann = std::find_if(record.annotations.begin(), record.annotations.end(),
                                    [](std::int8_t a) { return a < -1 || a > 1; });
  if (bad_ann != record.annotations.end()) {
    report.violations.push_back({Kind::Annotation, "annotation value " + std::to_string(*bad_ann) +
                                                       " at sample " +
                                                       std::to_string(bad_ann - record.annotations.begin()) +
                                                       " outside {-1,0,1}"});
  }
  if (n > 0 && std::all_of(record.annotations.begin(), record.annotations.end(),
                           [](std::int8_t a) { return a == kUndefined; })) {
    report.notes.push_back("all annotations undefined");
  }
  return report;
}

fs::path write_record(const Record& record, const fs::path& dir) {
  const auto report = validate_record(record);
  if (!report.ok()) throw RecordError(RecordErrc::InvalidRecord, "invalid record: " + report.summary());

  const fs::path out = dir / record.subject_id;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw RecordError(RecordErrc::Io, "cannot create " + out.string() + ": " + ec.message());

  std::string roles;
  for (const auto& [role, data] : record.channels) {
    if (!roles.empty()) roles += ',';
    roles += role_name(role);
    write_floats(out / (std::string(role_name(role)) + ".f32"), data);
  }
  {
    std::ofstream ann(out / "annotations.i8", std::ios::binary | std::ios::trunc);
    ann.write(reinterpret_cast<const char*>(record.annotations.data()),
              static_cast<std::streamsize>(record.annotations.size()));
    if (!ann) throw RecordError(RecordErrc::Io, "write failed: annotations.i8");
  }
  // Header last: a directory with a header is complete.
  std::ofstream header(out / "header.txt", std::ios::trunc);
  header << "subject=" << record.subject_id << '\n'
         << "fs=" << static_cast<int>(record.sampling_rate) << '\n'
         << "n=" << record.length() << '\n'
         << "channels=" << roles << '\n';
  if (!header) throw RecordError(RecordErrc::Io, "write failed: header.txt");
  return out;
}

Record read_record(const fs::path& record_dir) {
  const Header h = parse_header(record_dir);
  for (ChannelRole role : kRequiredRoles) {
    if (std::find(h.roles.begin(), h.roles.end(), role) == h.roles.end()) {
      throw RecordError(RecordErrc::MissingChannel, record_dir.string() + ": header lacks required channel " +
                                                        std::string(role_name(role)));
    }
  }
  Record r;
  r.subject_id = h.subject;
  r.sampling_rate = h.fs;
  for (ChannelRole role : h.roles) {
    r.channels[role] = read_floats(record_dir / (std::string(role_name(role)) + ".f32"), h.n);
  }
  r.annotations = read_annotation_file(record_dir, h.n);
  const auto report = validate_record(r);
  if (!report.ok()) throw RecordError(RecordErrc::InvalidRecord, record_dir.string() + ": " + report.summary());
  return r;
}

std::pair<std::string, std::vector<std::int8_t>> read_annotations(const fs::path& record_dir) {
  const Header h = parse_header(record_dir);
  return {h.subject, read_annotation_file(record_dir, h.n)};
}

std::vector<fs::path> list_record_dirs(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory() && fs::exists(entry.path() / "header.txt")) out.push_back(entry.path());
  }
  if (ec) throw RecordError(RecordErrc::Io, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace arousal
