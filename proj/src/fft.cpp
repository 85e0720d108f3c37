#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <numbers>
#include <mutex>
#include <vector>

namespace arousal::detail {
namespace {

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

std::mutex g_mutex;
std::map<std::size_t, Plans> g_plans;
std::map<std::size_t, std::vector<double>> g_tapers;

constexpr double kTaperFraction = 0.1;

// FFTW_ESTIMATE keeps plan choice (and so rounding) identical across runs.
const Plans& plans_for(std::size_t n) {
  std::lock_guard lock(g_mutex);
  auto it = g_plans.find(n);
  if (it != g_plans.end()) return it->second;
  auto in = alloc_real(n);
  auto out = alloc_complex(n / 2 + 1);
  Plans p;
  const int len = static_cast<int>(n);
  p.forward = fftw_plan_dft_r2c_1d(len, in.get(), reinterpret_cast<fftw_complex*>(out.get()), FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(len, reinterpret_cast<fftw_complex*>(out.get()), in.get(), FFTW_ESTIMATE);
  return g_plans.emplace(n, p).first->second;
}

}  // namespace

void FftwDeleter::operator()(void* p) const noexcept { fftw_free(p); }

FftwArray<double> alloc_real(std::size_t n) {
  return FftwArray<double>(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
}

FftwArray<std::complex<double>> alloc_complex(std::size_t n) {
  return FftwArray<std::complex<double>>(
      static_cast<std::complex<double>*>(fftw_malloc(sizeof(std::complex<double>) * n)));
}

void rfft(std::size_t n, double* in, std::complex<double>* out) {
  fftw_execute_dft_r2c(plans_for(n).forward, in, reinterpret_cast<fftw_complex*>(out));
}

void irfft(std::size_t n, std::complex<double>* in, double* out) {
  fftw_execute_dft_c2r(plans_for(n).inverse, reinterpret_cast<fftw_complex*>(in), out);
}

const std::vector<double>& taper(std::size_t n) {
  std::lock_guard lock(g_mutex);
  auto it = g_tapers.find(n);
  if (it != g_tapers.end()) return it->second;
  std::vector<double> w(n, 1.0);
  const double edge = kTaperFraction * static_cast<double>(n - 1) / 2.0;
  for (std::size_t i = 0; i < n && static_cast<double>(i) <= edge; ++i) {
    const double v = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) / edge));
    w[i] = v;
    w[n - 1 - i] = v;
  }
  return g_tapers.emplace(n, std::move(w)).first->second;
}

std::size_t fast_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2, 3, 5})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

}  // namespace arousal::detail
