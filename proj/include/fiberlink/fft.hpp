#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fiberlink::fft {

/// Forward real-to-complex DFT: X[k] = sum_n x[n] exp(-2*pi*i*k*n/N),
/// k = 0..N/2. Backed by FFTW3 with deterministic (estimate-mode) planning;
/// plan creation is serialized internally so calls are thread-safe.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Inverse of rfft, including the 1/N normalization: irfft(rfft(x), N) == x.
/// The imaginary parts of X[0] and (for even N) X[N/2] are ignored.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

std::size_t next_pow2(std::size_t n);

/// Zero-phase filtering by a real amplitude response H(f), applied on a
/// power-of-two padded grid (circular; callers must accept wrap-around for
/// signal content where H is not small). The DC bin uses the first-bin gain.
std::vector<double> filter_amplitude(std::span<const double> x, double rate_hz,
                                     const std::function<double(double)>& amplitude);

}  // namespace fiberlink::fft
