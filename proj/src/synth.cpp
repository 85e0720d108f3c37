#include "arousal/record.hpp"
#include "arousal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace arousal {
namespace {

constexpr double kPi = std::numbers::pi;

// RBJ constant-peak bandpass.
class Bandpass {
 public:
  Bandpass(double center_hz, double q, double fs) {
    const double w0 = 2.0 * kPi * center_hz / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    b0_ = alpha / a0;
    b2_ = -alpha / a0;
    a1_ = -2.0 * std::cos(w0) / a0;
    a2_ = (1.0 - alpha) / a0;
  }
  double operator()(double x) {
    const double y = b0_ * x + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double b0_, b2_, a1_, a2_;
  double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

// First-order lowpass normalized to unit stationary variance for unit white input.
class OnePole {
 public:
  explicit OnePole(double a) : a_(a), gain_(std::sqrt(1.0 - a * a)) {}
  double operator()(double x) {
    y_ = a_ * y_ + gain_ * x;
    return y_;
  }

 private:
  double a_, gain_;
  double y_ = 0.0;
};

struct Event {
  std::size_t onset;
  std::size_t offset;  // exclusive
};

std::vector<Event> place_events(const SynthParams& p, std::size_t n, double fs) {
  std::vector<Event> events;
  if (p.arousal_rate <= 0.0) return events;
  Rng rng(hash64(p.seed, "events"));
  const double min_gap_s = 10.0;
  const double cycle_s = 3600.0 / p.arousal_rate;
  const double mean_gap_s = std::max(1.0, cycle_s - p.arousal_duration_s - min_gap_s);
  double t = p.undefined_lead_s + rng.exponential(mean_gap_s);
  const double duration_s = static_cast<double>(n) / fs;
  while (true) {
    const double dur = p.arousal_duration_s * (0.5 + rng.uniform());
    if (t + dur >= duration_s) break;
    events.push_back({static_cast<std::size_t>(t * fs), static_cast<std::size_t>((t + dur) * fs)});
    t += dur + min_gap_s + rng.exponential(mean_gap_s);
  }
  return events;
}

// 1 inside events with 0.5 s linear ramps at the inner edges.
std::vector<double> event_envelope(const std::vector<Event>& events, std::size_t n, double fs) {
  std::vector<double> env(n, 0.0);
  const auto ramp = static_cast<std::size_t>(0.5 * fs);
  for (const auto& e : events) {
    const std::size_t len = e.offset - e.onset;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t from_edge = std::min(i, len - 1 - i);
      const double v = from_edge >= ramp ? 1.0 : static_cast<double>(from_edge + 1) / static_cast<double>(ramp + 1);
      env[e.onset + i] = std::max(env[e.onset + i], v);
    }
  }
  return env;
}

// Desaturation profile: raised-cosine dip starting 15 s before onset, bottoming
// at onset and recovering 10 s after.
std::vector<double> desaturation(const std::vector<Event>& events, std::size_t n, double fs) {
  std::vector<double> dip(n, 0.0);
  const auto before = static_cast<std::ptrdiff_t>(15.0 * fs);
  const auto after = static_cast<std::ptrdiff_t>(10.0 * fs);
  for (const auto& e : events) {
    const auto onset = static_cast<std::ptrdiff_t>(e.onset);
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, onset - before);
         i < std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n), onset + after); ++i) {
      const double u = i < onset ? static_cast<double>(i - (onset - before)) / static_cast<double>(before)
                                 : 1.0 - static_cast<double>(i - onset) / static_cast<double>(after);
      const double v = 0.5 - 0.5 * std::cos(kPi * u);
      dip[static_cast<std::size_t>(i)] = std::max(dip[static_cast<std::size_t>(i)], v);
    }
  }
  return dip;
}

std::vector<float> to_float(const std::vector<double>& x) { return {x.begin(), x.end()}; }

}  // namespace

void validate_synth_params(const SynthParams& p) {
  if (!(p.duration_s >= 60.0)) throw std::invalid_argument("duration_s must be >= 60");
  if (!(p.arousal_rate >= 0.0)) throw std::invalid_argument("arousal_rate must be >= 0");
  if (!(p.arousal_duration_s > 0.0)) throw std::invalid_argument("arousal_duration_s must be > 0");
  if (!(p.signature_strength >= 0.0)) throw std::invalid_argument("signature_strength must be >= 0");
  if (!(p.undefined_fraction >= 0.0 && p.undefined_fraction <= 1.0)) {
    throw std::invalid_argument("undefined_fraction must be in [0,1]");
  }
  if (!(p.undefined_lead_s >= 0.0 && p.undefined_lead_s < p.duration_s)) {
    throw std::invalid_argument("undefined_lead_s must be in [0, duration_s)");
  }
}

Record synth_record(const SynthParams& p) {
  validate_synth_params(p);
  const double fs = kSamplingRateHz;
  const auto n = static_cast<std::size_t>(std::llround(p.duration_s * fs));
  const double s = p.signature_strength;

  Record r;
  r.subject_id = p.subject_id;
  r.sampling_rate = fs;

  const auto events = place_events(p, n, fs);
  const auto env = event_envelope(events, n, fs);

  // Annotations: lead block undefined, margins around events undefined.
  r.annotations.assign(n, kNonArousal);
  for (const auto& e : events) {
    const auto margin = static_cast<std::size_t>(p.undefined_fraction * static_cast<double>(e.offset - e.onset));
    for (std::size_t i = e.onset >= margin ? e.onset - margin : 0; i < std::min(n, e.offset + margin); ++i) {
      if (r.annotations[i] == kNonArousal) r.annotations[i] = kUndefined;
    }
    std::fill(r.annotations.begin() + static_cast<std::ptrdiff_t>(e.onset),
              r.annotations.begin() + static_cast<std::ptrdiff_t>(e.offset), kArousal);
  }
  const auto lead = std::min(n, static_cast<std::size_t>(p.undefined_lead_s * fs));
  std::fill(r.annotations.begin(), r.annotations.begin() + static_cast<std::ptrdiff_t>(lead), kUndefined);

  // Per-subject gains so subject models differ.
  Rng subject_rng(hash64(p.seed, "subject"));
  auto gain = [&subject_rng] { return std::exp(0.2 * subject_rng.normal()); };

  // EEG: shared slow background, per-channel slow noise, alpha and beta bands.
  {
    Rng common_rng(hash64(p.seed, "eeg-common"));
    OnePole common_lp(0.97);
    std::vector<double> common(n);
    for (auto& v : common) v = common_lp(common_rng.normal());
    for (std::size_t c = 0; c < kEegRoles.size(); ++c) {
      const ChannelRole role = kEegRoles[c];
      Rng rng(hash64(p.seed, role_name(role)));
      OnePole slow(0.95);
      Bandpass alpha(10.0, 3.0, fs);
      Bandpass beta(24.0, 2.0, fs);
      const double g = gain();
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double background = 20.0 * (0.6 * common[i] + 0.8 * slow(rng.normal()));
        const double a = 8.0 * alpha(rng.normal());
        const double b = 4.0 * beta(rng.normal()) * (1.0 + 2.0 * s * env[i]);
        x[i] = g * (background + a + b) + 2.0 * rng.normal();
      }
      r.channels[role] = to_float(x);
    }
  }

  // EOG: slow eye-movement potential.
  {
    Rng rng(hash64(p.seed, "EOG"));
    OnePole slow(0.995);
    const double g = gain();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = g * 40.0 * slow(rng.normal()) + 3.0 * rng.normal();
    r.channels[ChannelRole::EOG] = to_float(x);
  }

  // Respiration drives airflow and the chest/abdominal effort channels.
  Rng resp_rng(hash64(p.seed, "respiration"));
  const double resp_hz = 0.2 + 0.1 * resp_rng.uniform();
  std::vector<double> phase(n);
  std::vector<double> amplitude(n);
  {
    OnePole wander(0.9995);
    OnePole amp_wander(0.9995);
    double ph = 2.0 * kPi * resp_rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      const double jitter = wander(resp_rng.normal()) * (0.15 + 0.6 * s * env[i]);
      ph += 2.0 * kPi * resp_hz * (1.0 + jitter) / fs;
      phase[i] = ph;
      amplitude[i] = 1.0 + 0.1 * amp_wander(resp_rng.normal()) + 0.6 * s * env[i];
    }
  }

  {
    Rng rng(hash64(p.seed, "ChinEMG"));
    const double g = gain();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = g * 5.0 * rng.normal() * (1.0 + 1.5 * s * env[i]);
    r.channels[ChannelRole::ChinEMG] = to_float(x);
  }
  for (const auto& [role, lag_s] : {std::pair{ChannelRole::ChestEMG, 0.0}, std::pair{ChannelRole::AbdominalEMG, 0.4}}) {
    Rng rng(hash64(p.seed, role_name(role)));
    const double g = gain();
    const double lag = 2.0 * kPi * resp_hz * lag_s;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = g * (1.5 * amplitude[i] * std::sin(phase[i] - lag) + 3.0 * rng.normal());
    r.channels[role] = to_float(x);
  }

  {
    Rng rng(hash64(p.seed, "Airflow"));
    OnePole irregular(0.99);
    const double g = gain();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double breath = amplitude[i] * std::sin(phase[i]);
      x[i] = g * (breath + 0.8 * s * env[i] * irregular(rng.normal()) + 0.05 * rng.normal());
    }
    r.channels[ChannelRole::Airflow] = to_float(x);
  }

  {
    Rng rng(hash64(p.seed, "SaO2"));
    OnePole slow(0.999);
    const auto dip = desaturation(events, n, fs);
    const double baseline = 96.5 + rng.uniform();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::clamp(baseline + 0.4 * slow(rng.normal()) - 3.0 * s * dip[i], 0.0, 100.0);
    }
    r.channels[ChannelRole::SaO2] = to_float(x);
  }

  if (p.with_ecg) {
    Rng rng(hash64(p.seed, "ECG"));
    const double hr_hz = 1.0 + 0.3 * rng.uniform();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      const double beat = std::fmod(t * hr_hz, 1.0) - 0.5;
      x[i] = std::exp(-beat * beat / 0.0005) + 0.02 * rng.normal();
    }
    r.channels[ChannelRole::ECG] = to_float(x);
  }
  return r;
}

}  // namespace arousal
