#include "arousal/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace arousal {

double Spectrum::total() const { return std::accumulate(power.begin(), power.end(), 0.0); }

Spectrum periodogram(std::span<const double> x, double fs) {
  const std::size_t n = x.size();
  if (n < 16) throw std::invalid_argument("periodogram needs at least 16 samples, got " + std::to_string(n));
  if (!(fs > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("periodogram input has non-finite samples");
  }
  const double mu = mean(x);
  auto buf = detail::alloc_real(n);
  const auto& w = detail::taper(n);
  double wss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    buf[i] = (x[i] - mu) * w[i];
    wss += w[i] * w[i];
  }
  auto spec = detail::alloc_complex(n / 2 + 1);
  detail::rfft(n, buf.get(), spec.get());

  Spectrum s;
  s.fs = fs;
  s.n = n;
  s.power.resize(n / 2 + 1);
  const double norm = 1.0 / (static_cast<double>(n) * wss);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const bool unpaired = k == 0 || (n % 2 == 0 && k == n / 2);
    s.power[k] = (unpaired ? 1.0 : 2.0) * std::norm(spec[k]) * norm;
  }
  return s;
}

double band_power(const Spectrum& s, double lo_hz, double hi_hz) {
  const double nyquist = s.fs / 2.0;
  if (!(lo_hz >= 0.0) || !(hi_hz >= lo_hz) || lo_hz > nyquist) {
    throw std::invalid_argument("invalid band [" + std::to_string(lo_hz) + ", " + std::to_string(hi_hz) + ")");
  }
  const bool to_top = hi_hz >= nyquist;
  double p = 0.0;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    const double f = s.frequency(k);
    if (f >= lo_hz && (f < hi_hz || (to_top && lo_hz < hi_hz))) p += s.power[k];
  }
  return p;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  if (window == 0 || window % 2 == 0) {
    throw std::invalid_argument("moving average window must be odd and positive, got " + std::to_string(window));
  }
  const std::size_t n = x.size();
  const std::size_t half = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    out[i] = window == 1 ? x[i] : (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return 0.0;
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

std::vector<double> diff(std::span<const double> x) {
  if (x.size() < 2) return {};
  std::vector<double> d(x.size() - 1);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
  return d;
}

StatMoments stat_moments(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("stat_moments of empty input");
  StatMoments m;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  m.min = *lo;
  m.max = *hi;
  m.range = m.max - m.min;
  m.mean = mean(x);

  std::vector<double> sorted(x.begin(), x.end());
  const std::size_t mid = sorted.size() / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  m.median = sorted[mid];
  if (sorted.size() % 2 == 0) {
    const double lower = *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid));
    m.median = 0.5 * (lower + m.median);
  }

  if (m.range == 0.0) return m;  // constant: degenerate moments stay 0
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double count = static_cast<double>(x.size());
  m2 /= count;
  m3 /= count;
  m4 /= count;
  m.variance = m2;
  m.std = std::sqrt(m2);
  m.cv = m.mean != 0.0 ? m.std / std::abs(m.mean) : 0.0;
  if (m2 > 0.0) {
    m.skewness = m3 / (m2 * m.std);
    m.kurtosis = m4 / (m2 * m2);
  }
  return m;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("pearson: length mismatch " + std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()));
  }
  if (x.size() < 2) throw std::invalid_argument("pearson needs at least 2 samples");
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  if (*xlo == *xhi || *ylo == *yhi || sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Cross-correlation

namespace {

void check_xcorr_args(std::size_t nx, std::size_t ny, std::size_t max_lag) {
  if (nx != ny) {
    throw std::invalid_argument("xcorr: length mismatch " + std::to_string(nx) + " vs " + std::to_string(ny));
  }
  if (max_lag >= nx) {
    throw std::invalid_argument("xcorr: max_lag " + std::to_string(max_lag) + " must be below length " +
                                std::to_string(nx));
  }
}

std::vector<double> centered(std::span<const double> x) {
  const double mu = mean(x);
  std::vector<double> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] - mu;
  return c;
}

// sum_n x[n] * y[n + lag] over the overlap.
double lagged_product(std::span<const double> x, std::span<const double> y, std::ptrdiff_t lag) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  double acc = 0.0;
  for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, -lag); i < std::min(n, n - lag); ++i) {
    acc += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + lag)];
  }
  return acc;
}

// Lags in preference order: 0, -1, +1, -2, +2, ...
template <typename Visit>
void for_each_lag_preferred(std::size_t max_lag, Visit&& visit) {
  visit(std::ptrdiff_t{0});
  for (std::size_t k = 1; k <= max_lag; ++k) {
    visit(-static_cast<std::ptrdiff_t>(k));
    visit(static_cast<std::ptrdiff_t>(k));
  }
}

}  // namespace

std::ptrdiff_t xcorr_max_lag_direct(std::span<const double> x, std::span<const double> y, std::size_t max_lag) {
  check_xcorr_args(x.size(), y.size(), max_lag);
  const auto xc = centered(x);
  const auto yc = centered(y);
  std::ptrdiff_t best = 0;
  double best_abs = -1.0;
  for_each_lag_preferred(max_lag, [&](std::ptrdiff_t lag) {
    const double v = std::abs(lagged_product(xc, yc, lag));
    if (v > best_abs) {
      best_abs = v;
      best = lag;
    }
  });
  return best;
}

struct CrossCorrelator::Impl {
  std::size_t n = 0;
  std::size_t max_lag = 0;
  std::size_t fft_len = 0;
  std::vector<std::vector<double>> centered;
  std::vector<double> norms;
  std::vector<detail::FftwArray<std::complex<double>>> spectra;
};

CrossCorrelator::CrossCorrelator(std::span<const std::span<const double>> signals, std::size_t max_lag)
    : impl_(std::make_unique<Impl>()) {
  if (signals.empty()) throw std::invalid_argument("CrossCorrelator needs at least one signal");
  impl_->n = signals.front().size();
  impl_->max_lag = max_lag;
  for (const auto& s : signals) check_xcorr_args(impl_->n, s.size(), max_lag);
  impl_->fft_len = detail::fast_size(impl_->n + max_lag);
  const std::size_t m = impl_->fft_len;
  auto buf = detail::alloc_real(m);
  for (const auto& s : signals) {
    auto c = arousal::centered(s);
    double ss = 0.0;
    for (double v : c) ss += v * v;
    std::fill(buf.get(), buf.get() + m, 0.0);
    std::copy(c.begin(), c.end(), buf.get());
    auto spec = detail::alloc_complex(m / 2 + 1);
    detail::rfft(m, buf.get(), spec.get());
    impl_->centered.push_back(std::move(c));
    impl_->norms.push_back(std::sqrt(ss));
    impl_->spectra.push_back(std::move(spec));
  }
}

CrossCorrelator::~CrossCorrelator() = default;

std::ptrdiff_t CrossCorrelator::max_lag_between(std::size_t i, std::size_t j) const {
  const Impl& d = *impl_;
  const double scale = d.norms.at(i) * d.norms.at(j);
  if (scale == 0.0) return 0;  // a flat signal correlates equally at every lag

  const std::size_t m = d.fft_len;
  auto prod = detail::alloc_complex(m / 2 + 1);
  for (std::size_t k = 0; k <= m / 2; ++k) prod[k] = std::conj(d.spectra[i][k]) * d.spectra[j][k];
  auto corr = detail::alloc_real(m);
  detail::irfft(m, prod.get(), corr.get());
  const double inv_m = 1.0 / static_cast<double>(m);
  auto at = [&](std::ptrdiff_t lag) {
    const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag) : m - static_cast<std::size_t>(-lag);
    return std::abs(corr[idx] * inv_m);
  };

  double peak = 0.0;
  for_each_lag_preferred(d.max_lag, [&](std::ptrdiff_t lag) { peak = std::max(peak, at(lag)); });

  // FFT rounding is far below this band; anything inside it is rescored exactly.
  const double tol = 1e-9 * scale;
  std::ptrdiff_t best = 0;
  double best_abs = -1.0;
  for_each_lag_preferred(d.max_lag, [&](std::ptrdiff_t lag) {
    if (at(lag) < peak - tol) return;
    const double v = std::abs(lagged_product(d.centered[i], d.centered[j], lag));
    if (v > best_abs) {
      best_abs = v;
      best = lag;
    }
  });
  return best;
}

std::ptrdiff_t xcorr_max_lag(std::span<const double> x, std::span<const double> y, std::size_t max_lag) {
  check_xcorr_args(x.size(), y.size(), max_lag);
  const std::span<const double> signals[] = {x, y};
  return CrossCorrelator(signals, max_lag).max_lag_between(0, 1);
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi for small symmetric matrices.

std::vector<double> sym_eigenvalues(std::span<const double> m, std::size_t k) {
  if (m.size() != k * k) {
    throw std::invalid_argument("sym_eigenvalues: expected " + std::to_string(k * k) + " entries, got " +
                                std::to_string(m.size()));
  }
  std::vector<double> a(m.begin(), m.end());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double x = a[i * k + j], y = a[j * k + i];
      if (!std::isfinite(x) || !std::isfinite(y) ||
          std::abs(x - y) > 1e-9 * std::max({1.0, std::abs(x), std::abs(y)})) {
        throw std::invalid_argument("sym_eigenvalues: matrix is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
      a[j * k + i] = a[i * k + j] = 0.5 * (x + y);
    }
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = p + 1; q < k; ++q) off += a[p * k + q] * a[p * k + q];
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = a[p * k + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < k; ++r) {
          const double arp = a[r * k + p], arq = a[r * k + q];
          a[r * k + p] = c * arp - s * arq;
          a[r * k + q] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double apr = a[p * k + r], aqr = a[q * k + r];
          a[p * k + r] = c * apr - s * aqr;
          a[q * k + r] = s * apr + c * aqr;
        }
      }
    }
  }
  std::vector<double> eig(k);
  for (std::size_t i = 0; i < k; ++i) eig[i] = a[i * k + i];
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

}  // namespace arousal
