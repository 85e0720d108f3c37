#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace arousal {

/// One-sided power spectrum. power[k] sits at k * fs / n Hz, k = 0..n/2.
struct Spectrum {
  double fs = 0.0;
  std::size_t n = 0;
  std::vector<double> power;

  double bin_hz() const noexcept { return fs / static_cast<double>(n); }
  /// Computed as k*fs/n so integer band edges land exactly on bins.
  double frequency(std::size_t k) const noexcept {
    return static_cast<double>(k) * fs / static_cast<double>(n);
  }
  double total() const;
};

/// Mean-removed periodogram under a 10% Tukey taper, normalized to the taper's
/// power: Σ power = Σ w²(x - mean)² / Σ w². Requires at least 16 finite samples.
Spectrum periodogram(std::span<const double> x, double fs);

/// Power over bins with lo <= f < hi. A band whose upper edge reaches fs/2
/// also takes the Nyquist bin.
double band_power(const Spectrum& s, double lo_hz, double hi_hz);

/// Centered moving mean with truncated edges. `window` must be odd and >= 1.
std::vector<double> moving_average(std::span<const double> x, std::size_t window);

struct StatMoments {
  double min = 0, max = 0, range = 0;
  double mean = 0, median = 0;
  double variance = 0, std = 0;
  double cv = 0;        // std / |mean|
  double skewness = 0;  // standardized third moment
  double kurtosis = 0;  // non-excess
};

/// Population (1/N) moments. Zero-variance input gives cv = skewness =
/// kurtosis = 0; cv is also 0 when the mean is exactly 0.
StatMoments stat_moments(std::span<const double> x);

double mean(std::span<const double> x);
/// Population standard deviation, 0 for constant input.
double stddev(std::span<const double> x);
/// First difference, length n-1.
std::vector<double> diff(std::span<const double> x);

/// Pearson correlation; 0 if either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Lag l in [-max_lag, max_lag] maximizing |sum_n xc[n] * yc[n + l]| over the
/// overlap, xc/yc mean-removed. Ties go to the smallest |l|, then negative l.
/// FFT correlation picks candidates; candidates are rescored exactly.
std::ptrdiff_t xcorr_max_lag(std::span<const double> x, std::span<const double> y, std::size_t max_lag);

/// Serial O(n * max_lag) reference for xcorr_max_lag.
std::ptrdiff_t xcorr_max_lag_direct(std::span<const double> x, std::span<const double> y, std::size_t max_lag);

/// Eigenvalues of a k x k symmetric matrix (row-major), descending.
std::vector<double> sym_eigenvalues(std::span<const double> m, std::size_t k);

}  // namespace arousal

namespace arousal {

/// Batch form of xcorr_max_lag: transforms each signal once, then answers
/// pairwise lag queries. Signals must share one length.
class CrossCorrelator {
 public:
  CrossCorrelator(std::span<const std::span<const double>> signals, std::size_t max_lag);
  ~CrossCorrelator();
  CrossCorrelator(const CrossCorrelator&) = delete;
  CrossCorrelator& operator=(const CrossCorrelator&) = delete;

  std::ptrdiff_t max_lag_between(std::size_t i, std::size_t j) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace arousal
