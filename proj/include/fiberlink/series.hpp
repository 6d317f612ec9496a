#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fiberlink {

/// Uniformly sampled phase in radians (at the optical carrier or an RF beat,
/// stated per series by its producer).
struct PhaseSeries {
    std::vector<double> samples;
    double rate_hz = 0.0;
    double t0_s = 0.0;
};

/// Fractional-frequency samples y_k (dimensionless).
struct FrequencySeries {
    std::vector<double> samples;
    double rate_hz = 0.0;
    double t0_s = 0.0;
};

/// Delay in seconds versus time.
struct DelaySeries {
    std::vector<double> samples;
    double rate_hz = 0.0;
    double t0_s = 0.0;
};

template <class S>
void check_series(const S& s, const char* what) {
    if (!(s.rate_hz > 0.0))
        throw std::invalid_argument(std::string(what) + ": rate must be > 0");
    if (s.samples.size() < 2)
        throw std::invalid_argument(std::string(what) + ": need at least 2 samples");
}

}  // namespace fiberlink
