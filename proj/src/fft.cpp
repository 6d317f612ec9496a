#include "fiberlink/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace fiberlink::fft {

namespace {
// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("rfft: need at least 2 samples");
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    if (!plan) throw std::runtime_error("rfft: fftw plan failed");
    fftw_execute(plan);
    {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n) {
    if (n < 2) throw std::invalid_argument("irfft: need at least 2 samples");
    if (spectrum.size() != n / 2 + 1)
        throw std::invalid_argument("irfft: spectrum length must be n/2+1");
    std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
    in.front().imag(0.0);
    if (n % 2 == 0) in.back().imag(0.0);
    std::vector<double> out(n);
    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                    reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                    FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("irfft: fftw plan failed");
    fftw_execute(plan);
    {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= scale;
    return out;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<double> filter_amplitude(std::span<const double> x, double rate_hz,
                                     const std::function<double(double)>& amplitude) {
    if (x.size() < 2) throw std::invalid_argument("filter_amplitude: need at least 2 samples");
    const std::size_t nfft = std::max<std::size_t>(next_pow2(x.size()), 4);
    std::vector<double> padded(x.begin(), x.end());
    padded.resize(nfft, x.back());
    auto spectrum = rfft(padded);
    const double df = rate_hz / static_cast<double>(nfft);
    spectrum[0] *= amplitude(df);
    for (std::size_t k = 1; k < spectrum.size(); ++k)
        spectrum[k] *= amplitude(static_cast<double>(k) * df);
    auto y = irfft(spectrum, nfft);
    y.resize(x.size());
    return y;
}

}  // namespace fiberlink::fft
