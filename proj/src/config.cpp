#include "arousal/config.hpp"

#include <charconv>
#include <fstream>

namespace arousal {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  }
  return v;
}

void require(bool ok, std::string_view key, const char* range) {
  if (!ok) throw ConfigError("config key '" + std::string(key) + "' must be " + range);
}

}  // namespace

const std::vector<std::string_view>& PipelineConfig::keys() {
  static const std::vector<std::string_view> k = {
      "epoch_seconds", "test_overlap",    "trees",           "max_depth",
      "min_leaf",      "seed",            "wamp_threshold_factor", "eog_smooth_window",
      "airflow_smooth_window", "xcorr_max_lag_s", "threads",
  };
  return k;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  PipelineConfig next = *this;
  if (key == "epoch_seconds") next.epoch_seconds = parse_number<double>(key, value);
  else if (key == "test_overlap") next.test_overlap = parse_number<double>(key, value);
  else if (key == "trees") next.trees = parse_number<std::uint32_t>(key, value);
  else if (key == "max_depth") next.max_depth = parse_number<std::uint32_t>(key, value);
  else if (key == "min_leaf") next.min_leaf = parse_number<std::uint32_t>(key, value);
  else if (key == "seed") next.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "wamp_threshold_factor") next.wamp_threshold_factor = parse_number<double>(key, value);
  else if (key == "eog_smooth_window") next.eog_smooth_window = parse_number<std::size_t>(key, value);
  else if (key == "airflow_smooth_window") next.airflow_smooth_window = parse_number<std::size_t>(key, value);
  else if (key == "xcorr_max_lag_s") next.xcorr_max_lag_s = parse_number<double>(key, value);
  else if (key == "threads") next.threads = parse_number<int>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
  next.validate();
  *this = next;
}

void PipelineConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      set(trim(text.substr(0, eq)), text.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void PipelineConfig::validate() const {
  require(epoch_seconds >= 1.0 && epoch_seconds <= 600.0, "epoch_seconds", "in [1, 600]");
  require(test_overlap >= 0.0 && test_overlap < 1.0, "test_overlap", "in [0, 1)");
  require(trees >= 1 && trees <= 10000, "trees", "in [1, 10000]");
  require(max_depth >= 1 && max_depth <= 1000, "max_depth", "in [1, 1000]");
  require(min_leaf >= 1, "min_leaf", ">= 1");
  require(wamp_threshold_factor >= 0.0 && wamp_threshold_factor <= 100.0, "wamp_threshold_factor", "in [0, 100]");
  require(eog_smooth_window % 2 == 1 && eog_smooth_window <= 100001, "eog_smooth_window", "odd, <= 100001");
  require(airflow_smooth_window % 2 == 1 && airflow_smooth_window <= 100001, "airflow_smooth_window",
          "odd, <= 100001");
  require(xcorr_max_lag_s >= 0.0 && xcorr_max_lag_s <= 600.0, "xcorr_max_lag_s", "in [0, 600]");
  require(threads >= 0 && threads <= 1024, "threads", "in [0, 1024]");
}

FeatureConfig PipelineConfig::features() const {
  return {wamp_threshold_factor, eog_smooth_window, airflow_smooth_window, xcorr_max_lag_s};
}

TrainParams PipelineConfig::train_params() const {
  TrainParams p;
  p.n_trees = trees;
  p.max_depth = max_depth;
  p.min_leaf = min_leaf;
  p.seed = seed;
  return p;
}

}  // namespace arousal
