#include "arousal/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "arousal/dsp.hpp"

namespace arousal {
namespace {

constexpr double kLogFloor = 1e-12;

double log10_guarded(double p) { return std::log10(p + kLogFloor); }
double ln_guarded(double v) { return v > 0.0 ? std::log(v + kLogFloor) : std::log(kLogFloor); }
double safe_ratio(double num, double den) { return den != 0.0 ? num / den : 0.0; }

void require_finite(std::span<const double> x, const char* what) {
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}

std::string two_digit(std::size_t i) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02zu", i);
  return buf;
}

constexpr std::array<const char*, 24> kEmgScalarNames = {
    "mean",    "min",     "max",     "range",     "variance",  "cv",         "skewness",     "kurtosis",
    "iav",     "mav",     "zcr",     "ssc",       "wl",        "rms",        "arv",          "wamp",
    "log_m0",  "log_m2",  "log_m4",  "log_m0_m2", "log_m0_m4", "sparseness", "irregularity", "wl_ratio",
};

void add_emg_names(std::vector<FeatureInfo>& out, const std::string& prefix, FeatureFamily family,
                   const std::string& what) {
  for (const char* n : kEmgScalarNames) out.push_back({prefix + "_" + n, family, what + " " + n});
  for (std::size_t b = 1; b <= 20; ++b)
    out.push_back({prefix + "_hist_count_" + two_digit(b), family, what + " histogram count, bin " + std::to_string(b)});
  for (std::size_t b = 1; b <= 20; ++b)
    out.push_back({prefix + "_hist_freq_" + two_digit(b), family, what + " histogram relative frequency, bin " + std::to_string(b)});
}

const char* const kInteractionSignals[5] = {"sao2", "airflow", "chest", "abd", "chin"};

std::vector<FeatureInfo> build_schema() {
  std::vector<FeatureInfo> s;
  s.reserve(kFeatureCount);
  using F = FeatureFamily;
  for (std::size_t c = 1; c <= 6; ++c)
    for (const auto& b : kEegBands)
      s.push_back({"eeg_logpow_" + std::string(b.name) + "_ch" + std::to_string(c), F::EEG,
                   "log10 band power, EEG channel " + std::to_string(c)});
  for (const auto& b : kEegBands)
    s.push_back({"eeg_meanlogpow_" + std::string(b.name), F::EEG, "mean over channels of log10 band power"});
  for (std::size_t i = 1; i <= 6; ++i)
    for (std::size_t j = i + 1; j <= 6; ++j)
      s.push_back({"eeg_tcorr_" + std::to_string(i) + "_" + std::to_string(j), F::EEG, "temporal Pearson correlation"});
  for (std::size_t k = 1; k <= 6; ++k)
    s.push_back({"eeg_tcorr_eig" + std::to_string(k), F::EEG, "eigenvalue of temporal correlation matrix, descending"});
  for (std::size_t i = 1; i <= 6; ++i)
    for (std::size_t j = i + 1; j <= 6; ++j)
      s.push_back({"eeg_fcorr_" + std::to_string(i) + "_" + std::to_string(j), F::EEG,
                   "Pearson correlation of log spectra over [1,101) Hz"});
  for (std::size_t k = 1; k <= 6; ++k)
    s.push_back({"eeg_fcorr_eig" + std::to_string(k), F::EEG, "eigenvalue of spectral correlation matrix, descending"});
  for (std::size_t c = 1; c <= 6; ++c)
    s.push_back({"eeg_totlogpow_ch" + std::to_string(c), F::EEG, "log10 power over [1,101) Hz"});
  s.push_back({"eeg_totlogpow_mean", F::EEG, "mean of per-channel total log power"});

  for (const char* n : {"mean", "std", "cv", "skewness", "kurtosis"}) s.push_back({std::string("sao2_") + n, F::SaO2, n});
  s.push_back({"sao2_pct_ge96", F::SaO2, "percent of samples with SaO2 >= 96"});
  s.push_back({"sao2_pct_90_96", F::SaO2, "percent of samples with 90 <= SaO2 < 96"});
  s.push_back({"sao2_pct_80_90", F::SaO2, "percent of samples with 80 <= SaO2 < 90"});
  s.push_back({"sao2_pct_lt80", F::SaO2, "percent of samples with SaO2 < 80"});

  add_emg_names(s, "chin_emg", F::ChinEMG, "chin EMG");
  add_emg_names(s, "abd_emg", F::AbdominalEMG, "abdominal EMG");
  add_emg_names(s, "chest_emg", F::ChestEMG, "chest EMG");

  for (const char* n : {"min", "max", "range", "mean", "median", "skewness", "kurtosis", "iav", "energy", "rms",
                        "form_factor", "d1_std_ratio", "d2_std_ratio", "d1_iav", "std"})
    s.push_back({std::string("eog_") + n, F::EOG, std::string("smoothed EOG ") + n});

  s.push_back({"airflow_diff_std", F::Airflow, "std of first difference"});
  s.push_back({"airflow_diff_cv", F::Airflow, "cv of first difference"});
  s.push_back({"airflow_lag1_autocorr", F::Airflow, "lag-1 autocorrelation"});
  s.push_back({"airflow_area_diff", F::Airflow, "area above minus area below the epoch median"});
  add_emg_names(s, "airflow_sm", F::Airflow, "smoothed airflow");

  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j)
      s.push_back({std::string("lag_") + kInteractionSignals[i] + "_" + kInteractionSignals[j], F::Interaction,
                   "cross-correlation peak lag, seconds"});
  for (std::size_t i = 1; i <= 6; ++i)
    for (std::size_t j = i + 1; j <= 6; ++j)
      s.push_back({"lag_eeg" + std::to_string(i) + "_eeg" + std::to_string(j), F::Interaction,
                   "cross-correlation peak lag, seconds"});
  return s;
}

void validate_schema(const std::vector<FeatureInfo>& s) {
  if (s.size() != kFeatureCount) throw std::logic_error("feature schema has " + std::to_string(s.size()) + " entries");
  std::set<std::string> names;
  for (const auto& f : s) {
    if (!names.insert(f.name).second) throw std::logic_error("duplicate feature name " + f.name);
  }
  for (const auto& layout : kFamilyLayout) {
    for (std::size_t i = layout.offset; i < layout.offset + layout.count; ++i) {
      if (s[i].family != layout.family) throw std::logic_error("feature " + s[i].name + " outside its family block");
    }
  }
}

// Row-major k x k correlation matrix with unit diagonal.
std::vector<double> correlation_matrix(std::span<const std::vector<double>> xs) {
  const std::size_t k = xs.size();
  std::vector<double> m(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    m[i * k + i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) m[i * k + j] = m[j * k + i] = pearson(xs[i], xs[j]);
  }
  return m;
}

void append_upper(std::vector<double>& out, const std::vector<double>& m, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) out.push_back(m[i * k + j]);
}

}  // namespace

const std::vector<FeatureInfo>& feature_schema() {
  static const std::vector<FeatureInfo> schema = [] {
    auto s = build_schema();
    validate_schema(s);
    return s;
  }();
  return schema;
}

std::uint64_t schema_hash() {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view text) {
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;
    h *= 0x100000001b3ULL;
  };
  feed(kSchemaVersion);
  for (const auto& f : feature_schema()) feed(f.name);
  return h;
}

EpochSignals EpochSignals::from_record(const Record& record, const EpochSpan& span) {
  if (span.end > record.length() || span.start >= span.end) {
    throw std::invalid_argument("epoch span outside record " + record.subject_id);
  }
  EpochSignals e;
  for (ChannelRole role : kRequiredRoles) {
    const auto& data = record.channel(role);
    e[role].assign(data.begin() + static_cast<std::ptrdiff_t>(span.start),
                   data.begin() + static_cast<std::ptrdiff_t>(span.end));
  }
  return e;
}

std::span<const double> FeatureVector::family(FeatureFamily f) const {
  const auto& layout = kFamilyLayout[static_cast<std::size_t>(f)];
  return std::span<const double>(values).subspan(layout.offset, layout.count);
}

std::vector<double> eeg_features(std::span<const std::span<const double>> eeg, double fs) {
  if (eeg.size() != 6) throw std::invalid_argument("eeg_features needs 6 channels, got " + std::to_string(eeg.size()));
  const std::size_t n = eeg[0].size();
  for (const auto& ch : eeg) {
    if (ch.size() != n) throw std::invalid_argument("eeg_features: channel lengths differ");
    require_finite(ch, "eeg_features");
  }

  std::vector<Spectrum> spectra;
  spectra.reserve(6);
  for (const auto& ch : eeg) spectra.push_back(periodogram(ch, fs));

  std::vector<double> out;
  out.reserve(119);
  std::array<double, kEegBands.size()> band_sum{};
  for (const auto& s : spectra) {
    for (std::size_t b = 0; b < kEegBands.size(); ++b) {
      const double lp = log10_guarded(band_power(s, kEegBands[b].lo_hz, kEegBands[b].hi_hz));
      out.push_back(lp);
      band_sum[b] += lp;
    }
  }
  for (double v : band_sum) out.push_back(v / 6.0);

  std::vector<std::vector<double>> temporal;
  for (const auto& ch : eeg) temporal.emplace_back(ch.begin(), ch.end());
  const auto tcorr = correlation_matrix(temporal);
  append_upper(out, tcorr, 6);
  for (double v : sym_eigenvalues(tcorr, 6)) out.push_back(v);

  std::vector<std::vector<double>> log_spectra(6);
  for (std::size_t c = 0; c < 6; ++c) {
    const auto& s = spectra[c];
    for (std::size_t k = 0; k < s.power.size(); ++k) {
      if (s.frequency(k) >= 1.0 && s.frequency(k) < 101.0) log_spectra[c].push_back(log10_guarded(s.power[k]));
    }
  }
  const auto fcorr = correlation_matrix(log_spectra);
  append_upper(out, fcorr, 6);
  for (double v : sym_eigenvalues(fcorr, 6)) out.push_back(v);

  double total_sum = 0.0;
  for (const auto& s : spectra) {
    const double lp = log10_guarded(band_power(s, 1.0, 101.0));
    out.push_back(lp);
    total_sum += lp;
  }
  out.push_back(total_sum / 6.0);
  return out;
}

std::vector<double> sao2_features(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("sao2_features of empty input");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 100.0)) throw std::invalid_argument("SaO2 value " + std::to_string(v) + " outside [0,100]");
  }
  const auto m = stat_moments(x);
  std::size_t normal = 0, mild = 0, moderate = 0, severe = 0;
  for (double v : x) {
    if (v >= 96.0) ++normal;
    else if (v >= 90.0) ++mild;
    else if (v >= 80.0) ++moderate;
    else ++severe;
  }
  const double pct = 100.0 / static_cast<double>(x.size());
  return {m.mean, m.std, m.cv, m.skewness, m.kurtosis,
          static_cast<double>(normal) * pct, static_cast<double>(mild) * pct,
          static_cast<double>(moderate) * pct, static_cast<double>(severe) * pct};
}

std::vector<double> emg_features(std::span<const double> x, double wamp_threshold_factor) {
  if (x.size() < 3) throw std::invalid_argument("emg_features needs at least 3 samples");
  require_finite(x, "emg_features");
  const std::size_t n = x.size();
  const auto m = stat_moments(x);

  std::vector<double> out;
  out.reserve(64);
  for (double v : {m.mean, m.min, m.max, m.range, m.variance, m.cv, m.skewness, m.kurtosis}) out.push_back(v);

  double iav = 0, sumsq = 0, wl = 0;
  std::size_t zcr = 0, ssc = 0, wamp = 0;
  const double theta = wamp_threshold_factor * m.std;
  for (std::size_t i = 0; i < n; ++i) {
    iav += std::abs(x[i]);
    sumsq += x[i] * x[i];
    if (i + 1 < n) {
      const double step = std::abs(x[i + 1] - x[i]);
      wl += step;
      if (x[i] * x[i + 1] < 0.0) ++zcr;
      if (step > 0.0 && step >= theta) ++wamp;
    }
    if (i > 0 && i + 1 < n && (x[i] - x[i - 1]) * (x[i] - x[i + 1]) > 0.0) ++ssc;
  }
  std::vector<double> rectified(n);
  std::transform(x.begin(), x.end(), rectified.begin(), [](double v) { return std::abs(v); });
  const double arv = mean(rectified);
  const double count = static_cast<double>(n);
  for (double v : {iav, iav / count, static_cast<double>(zcr), static_cast<double>(ssc), wl,
                   std::sqrt(sumsq / count), arv, static_cast<double>(wamp)})
    out.push_back(v);

  // Time-domain spectral moments.
  const auto d1 = diff(x);
  const auto d2 = diff(d1);
  double s2 = 0, s4 = 0, wl2 = 0;
  for (double v : d1) s2 += v * v;
  for (double v : d2) {
    s4 += v * v;
    wl2 += std::abs(v);
  }
  const double m0 = std::sqrt(sumsq), m2 = std::sqrt(s2), m4 = std::sqrt(s4);
  const double sparse_den = (m0 - m2) * (m0 - m4);
  out.push_back(ln_guarded(m0));
  out.push_back(ln_guarded(m2));
  out.push_back(ln_guarded(m4));
  out.push_back(ln_guarded(m0 - m2));
  out.push_back(ln_guarded(m0 - m4));
  out.push_back(sparse_den > 0.0 ? m0 / std::sqrt(sparse_den) : 0.0);
  out.push_back(m0 * m4 > 0.0 ? m2 / std::sqrt(m0 * m4) : 0.0);
  out.push_back(safe_ratio(wl, wl2));

  // 20 equal-width bins over [min, max]; a zero-width range lands in bin 1.
  std::array<std::size_t, 20> hist{};
  for (double v : x) {
    std::size_t bin = 0;
    if (m.range > 0.0) bin = std::min<std::size_t>(19, static_cast<std::size_t>((v - m.min) / m.range * 20.0));
    ++hist[bin];
  }
  for (std::size_t c : hist) out.push_back(static_cast<double>(c));
  for (std::size_t c : hist) out.push_back(static_cast<double>(c) / count);
  return out;
}

std::vector<double> eog_features(std::span<const double> eog, double /*fs*/, std::size_t smooth_window) {
  if (eog.size() < 3) throw std::invalid_argument("eog_features needs at least 3 samples");
  require_finite(eog, "eog_features");
  const auto s = moving_average(eog, smooth_window);
  const auto m = stat_moments(s);
  const auto d1 = diff(s);
  const auto d2 = diff(d1);
  const double sd1 = stddev(d1), sd2 = stddev(d2);

  double iav = 0, energy = 0, d1_iav = 0;
  for (double v : s) {
    iav += std::abs(v);
    energy += v * v;
  }
  for (double v : d1) d1_iav += std::abs(v);
  const double mobility = safe_ratio(sd1, m.std);
  const double form_factor = mobility != 0.0 ? safe_ratio(sd2, sd1) / mobility : 0.0;
  return {m.min,
          m.max,
          m.range,
          m.mean,
          m.median,
          m.skewness,
          m.kurtosis,
          iav,
          energy,
          std::sqrt(energy / static_cast<double>(s.size())),
          form_factor,
          mobility,
          safe_ratio(sd2, m.std),
          d1_iav,
          m.std};
}

std::vector<double> airflow_features(std::span<const double> x, double /*fs*/, const FeatureConfig& config) {
  if (x.size() < 3) throw std::invalid_argument("airflow_features needs at least 3 samples");
  require_finite(x, "airflow_features");
  const auto d = diff(x);
  const auto dm = stat_moments(d);
  const double lag1 = pearson(x.first(x.size() - 1), x.subspan(1));
  const double median = stat_moments(x).median;
  double above = 0.0, below = 0.0;
  for (double v : x) {
    if (v > median) above += v - median;
    else below += median - v;
  }
  std::vector<double> out = {dm.std, dm.cv, lag1, above - below};
  const auto smoothed = moving_average(x, config.airflow_smooth_window);
  const auto emg = emg_features(smoothed, config.wamp_threshold_factor);
  out.insert(out.end(), emg.begin(), emg.end());
  return out;
}

std::vector<double> interaction_features(const EpochSignals& epoch, double fs, const FeatureConfig& config) {
  const std::size_t n = epoch.length();
  if (n < 2) throw std::invalid_argument("interaction_features needs at least 2 samples");
  const auto smoothed_airflow = moving_average(epoch[ChannelRole::Airflow], config.airflow_smooth_window);
  const auto max_lag = std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::llround(config.xcorr_max_lag_s * fs)));

  std::vector<std::span<const double>> signals = {
      epoch[ChannelRole::SaO2], smoothed_airflow, epoch[ChannelRole::ChestEMG],
      epoch[ChannelRole::AbdominalEMG], epoch[ChannelRole::ChinEMG],
  };
  for (ChannelRole role : kEegRoles) signals.emplace_back(epoch[role]);
  for (const auto& s : signals) {
    if (s.size() != n) throw std::invalid_argument("interaction_features: channel lengths differ");
  }
  const CrossCorrelator xc(signals, max_lag);

  std::vector<double> out;
  out.reserve(25);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) out.push_back(static_cast<double>(xc.max_lag_between(i, j)) / fs);
  for (std::size_t i = 5; i < 11; ++i)
    for (std::size_t j = i + 1; j < 11; ++j) out.push_back(static_cast<double>(xc.max_lag_between(i, j)) / fs);
  return out;
}

FeatureVector extract_epoch(const EpochSignals& epoch, double fs, const FeatureConfig& config) {
  const std::size_t n = epoch.length();
  for (const auto& ch : epoch.channels) {
    if (ch.size() != n) throw std::invalid_argument("extract_epoch: channel lengths differ");
  }
  FeatureVector fv;
  std::size_t pos = 0;
  auto put = [&](const std::vector<double>& part, FeatureFamily family) {
    const auto& layout = kFamilyLayout[static_cast<std::size_t>(family)];
    if (pos != layout.offset || part.size() != layout.count) {
      throw std::logic_error(std::string("feature family ") + layout.name + " produced " +
                             std::to_string(part.size()) + " values at offset " + std::to_string(pos));
    }
    std::copy(part.begin(), part.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += part.size();
  };

  std::array<std::span<const double>, 6> eeg;
  for (std::size_t c = 0; c < 6; ++c) eeg[c] = epoch[kEegRoles[c]];
  put(eeg_features(eeg, fs), FeatureFamily::EEG);
  put(sao2_features(epoch[ChannelRole::SaO2]), FeatureFamily::SaO2);
  put(emg_features(epoch[ChannelRole::ChinEMG], config.wamp_threshold_factor), FeatureFamily::ChinEMG);
  put(emg_features(epoch[ChannelRole::AbdominalEMG], config.wamp_threshold_factor), FeatureFamily::AbdominalEMG);
  put(emg_features(epoch[ChannelRole::ChestEMG], config.wamp_threshold_factor), FeatureFamily::ChestEMG);
  put(eog_features(epoch[ChannelRole::EOG], fs, config.eog_smooth_window), FeatureFamily::EOG);
  put(airflow_features(epoch[ChannelRole::Airflow], fs, config), FeatureFamily::Airflow);
  put(interaction_features(epoch, fs, config), FeatureFamily::Interaction);
  return fv;
}

}  // namespace arousal
