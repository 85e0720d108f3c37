#pragma once

// Thin FFTW wrapper. Plans are created once per size under a lock and
// executed through the new-array interface, which is thread-safe.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace arousal::detail {

struct FftwDeleter {
  void operator()(void* p) const noexcept;
};

template <typename T>
using FftwArray = std::unique_ptr<T[], FftwDeleter>;

FftwArray<double> alloc_real(std::size_t n);
FftwArray<std::complex<double>> alloc_complex(std::size_t n);

/// Forward real transform of in[0..n) into out[0..n/2].
void rfft(std::size_t n, double* in, std::complex<double>* out);
/// Unnormalized inverse of rfft; clobbers `in`.
void irfft(std::size_t n, std::complex<double>* in, double* out);

/// Symmetric Tukey window of length n with cosine fraction 0.1, cached per size.
const std::vector<double>& taper(std::size_t n);

/// Smallest 2^a 3^b 5^c >= n.
std::size_t fast_size(std::size_t n);

}  // namespace arousal::detail
