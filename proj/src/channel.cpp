#include "fiberlink/channel.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fiberlink/fft.hpp"

namespace fiberlink::channel {

namespace {

/// 4-point Lagrange interpolation at fractional offset mu in [0, 1) between
/// the middle two samples.
inline double lagrange4(double ym1, double y0, double y1, double y2, double mu) {
    const double c_m1 = -mu * (mu - 1.0) * (mu - 2.0) / 6.0;
    const double c_0 = (mu * mu - 1.0) * (mu - 2.0) / 2.0;
    const double c_1 = -mu * (mu + 1.0) * (mu - 2.0) / 2.0;
    const double c_2 = mu * (mu * mu - 1.0) / 6.0;
    return c_m1 * ym1 + c_0 * y0 + c_1 * y1 + c_2 * y2;
}

template <class Fetch>
double read_fractional(Fetch&& fetch, double index) {
    const double fl = std::floor(index);
    const auto j = static_cast<long long>(fl);
    const double mu = index - fl;
    return lagrange4(fetch(j - 1), fetch(j), fetch(j + 1), fetch(j + 2), mu);
}

}  // namespace

void FiberSpan::validate() const {
    if (!(length_km > 0.0)) throw std::invalid_argument("FiberSpan: length must be > 0");
    if (!(loss_per_km_db > 0.0)) throw std::invalid_argument("FiberSpan: loss must be > 0");
    if (!(group_index >= 1.4 && group_index <= 1.5))
        throw std::invalid_argument("FiberSpan: group_index must be in [1.4, 1.5]");
    if (connectors < 0 || oadm_count < 0)
        throw std::invalid_argument("FiberSpan: element counts must be >= 0");
    for (const auto& e : edfa)
        if (e.position_km < 0.0 || e.position_km > length_km)
            throw std::invalid_argument("FiberSpan: EDFA position outside span");
}

void LinkSegment::validate() const {
    for (const auto& s : spans) s.validate();
    noise.validate();
    if (noise_taps < 1) throw std::invalid_argument("LinkSegment: need at least one noise tap");
    const double len = total_length_km();
    for (double p : tap_positions_km)
        if (p < 0.0 || p > len)
            throw std::invalid_argument("LinkSegment: tap position outside segment");
    if (!tap_positions_km.empty() &&
        tap_positions_km.size() != static_cast<std::size_t>(noise_taps))
        throw std::invalid_argument("LinkSegment: tap position count must equal noise_taps");
}

double LinkSegment::total_length_km() const {
    double len = 0.0;
    for (const auto& s : spans) len += s.length_km;
    return len;
}

std::vector<double> LinkSegment::tap_fractions() const {
    std::vector<double> frac;
    const double len = total_length_km();
    if (!tap_positions_km.empty()) {
        for (double p : tap_positions_km) frac.push_back(len > 0.0 ? p / len : 0.0);
        return frac;
    }
    const int k = noise_taps;
    for (int i = 0; i < k; ++i)
        frac.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(k));
    return frac;
}

double one_way_delay_s(const LinkSegment& segment) {
    double tau = 0.0;
    for (const auto& s : segment.spans)
        tau += s.group_index * s.length_km * 1e3 / kSpeedOfLight;
    return tau;
}

LinkBudget link_budget(const LinkSegment& segment, const BudgetParams& params) {
    LinkBudget budget;
    double loss = 0.0, gain = 0.0;
    int span_no = 1;
    auto km = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g km", v);
        return std::string(buf);
    };
    for (const auto& s : segment.spans) {
        const std::string tag = "span " + std::to_string(span_no++);
        const double fiber = s.length_km * s.loss_per_km_db;
        budget.items.push_back({tag + " fiber " + km(s.length_km), fiber});
        loss += fiber;
        if (s.connectors > 0) {
            const double c = s.connectors * params.connector_loss_db;
            budget.items.push_back({tag + " connectors x" + std::to_string(s.connectors), c});
            loss += c;
        }
        if (s.oadm_count > 0) {
            const double o = s.oadm_count * params.oadm_loss_db;
            budget.items.push_back({tag + " OADM x" + std::to_string(s.oadm_count), o});
            loss += o;
        }
        for (const auto& e : s.edfa) {
            budget.items.push_back({tag + " EDFA @" + km(e.position_km), -e.gain_db});
            gain += e.gain_db;
        }
    }
    if (params.extra_loss_db > 0.0) {
        budget.items.push_back({"patch/splice allowance", params.extra_loss_db});
        loss += params.extra_loss_db;
    }
    budget.one_way_passive_db = loss;
    budget.round_trip_passive_db = 2.0 * loss;
    budget.one_way_db = loss - gain;
    budget.round_trip_db = 2.0 * budget.one_way_db;
    budget.margin_db = params.receiver_max_roundtrip_db - budget.round_trip_db;
    return budget;
}

void SegmentLine::History::init(std::size_t capacity_pow2) {
    buf.assign(capacity_pow2, 0.0);
    mask = capacity_pow2 - 1;
}

double SegmentLine::History::read(double index, std::size_t newest) const {
    auto fetch = [&](long long j) -> double {
        if (j < 0) return 0.0;
        const auto uj = static_cast<std::size_t>(j);
        if (uj > newest) return buf[newest & mask];
        return buf[uj & mask];
    };
    return read_fractional(fetch, index);
}

SegmentLine::SegmentLine(const LinkSegment& segment, double rate_hz, double carrier_hz,
                         std::vector<std::span<const float>> tap_noise,
                         std::span<const double> delay_fluct, double delay_scale)
    : rate_(rate_hz),
      carrier_hz_(carrier_hz),
      tau0_(one_way_delay_s(segment) * delay_scale),
      tap_frac_(segment.tap_fractions()),
      taps_(std::move(tap_noise)),
      delay_fluct_(delay_fluct) {
    segment.validate();
    if (!(rate_hz > 0.0)) throw std::invalid_argument("SegmentLine: rate must be > 0");
    if (!(delay_scale > 0.0)) throw std::invalid_argument("SegmentLine: delay_scale must be > 0");
    if (taps_.size() != tap_frac_.size())
        throw std::invalid_argument("SegmentLine: tap series count must equal noise_taps");
    if (tau0_ * rate_ < 4.0)
        throw std::invalid_argument("SegmentLine: segment delay must be >= 4 samples");
    backward_scale_ = (carrier_hz_ + segment.backward_offset_hz) / carrier_hz_;

    double max_fluct = 0.0;
    for (double d : delay_fluct_) max_fluct = std::max(max_fluct, std::abs(d));
    const auto cap = fft::next_pow2(
        static_cast<std::size_t>(std::ceil((tau0_ + max_fluct) * rate_)) + 8);
    fwd_.init(cap);
    bwd_.init(cap);
}

void SegmentLine::add_tap_step(std::size_t tap, std::size_t sample_index, double step_rad) {
    if (tap >= taps_.size()) throw std::invalid_argument("add_tap_step: no such tap");
    tap_steps_.push_back({tap, sample_index, step_rad});
}

double SegmentLine::delay_at(std::size_t n) const {
    double tau = tau0_;
    if (!delay_fluct_.empty()) tau += delay_fluct_[std::min(n, delay_fluct_.size() - 1)];
    return tau;
}

double SegmentLine::tap_read(std::size_t tap, double index) const {
    const auto& arr = taps_[tap];
    auto fetch = [&](long long j) -> double {
        if (j < 0 || arr.empty()) return 0.0;
        const auto uj = static_cast<std::size_t>(j);
        return arr[std::min(uj, arr.size() - 1)];
    };
    double v = read_fractional(fetch, index);
    for (const auto& s : tap_steps_)
        if (s.tap == tap && index + 1e-9 >= static_cast<double>(s.index)) v += s.step_rad;
    return v;
}

double SegmentLine::read_forward(std::size_t n) {
    const double tau = delay_at(n);
    const double d_samples = tau * rate_;
    const std::size_t newest = n > 0 ? n - 1 : 0;
    double out = fwd_.read(static_cast<double>(n) - d_samples, newest);
    double accum = -2.0 * M_PI * carrier_hz_ * (tau - tau0_);
    for (std::size_t k = 0; k < taps_.size(); ++k) {
        const double residual = (1.0 - tap_frac_[k]) * d_samples;
        accum += tap_read(k, static_cast<double>(n) - residual);
    }
    fwd_accum_ = accum;
    return out + accum;
}

double SegmentLine::read_backward(std::size_t n) const {
    const double tau = delay_at(n);
    const double d_samples = tau * rate_;
    const std::size_t newest = n > 0 ? n - 1 : 0;
    double out = bwd_.read(static_cast<double>(n) - d_samples, newest);
    double accum = -2.0 * M_PI * carrier_hz_ * (tau - tau0_);
    for (std::size_t k = 0; k < taps_.size(); ++k) {
        const double residual = tap_frac_[k] * d_samples;
        accum += tap_read(k, static_cast<double>(n) - residual);
    }
    return out + backward_scale_ * accum;
}

void SegmentLine::push(std::size_t n, double forward_input, double backward_input) {
    fwd_.push(n, forward_input);
    bwd_.push(n, backward_input);
}

PhaseSeries propagate(const PhaseSeries& input, const LinkSegment& segment,
                      Direction direction, const DelaySeries& delay_fluct,
                      std::span<const PhaseSeries> tap_noise, double carrier_hz) {
    check_series(input, "propagate");
    segment.validate();
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("propagate: carrier must be > 0");
    if (tap_noise.size() != static_cast<std::size_t>(segment.noise_taps))
        throw std::invalid_argument("propagate: expected exactly noise_taps tap series");
    for (const auto& t : tap_noise)
        if (t.rate_hz != input.rate_hz)
            throw std::invalid_argument("propagate: tap noise rate mismatch");
    if (!delay_fluct.samples.empty() && delay_fluct.rate_hz != input.rate_hz)
        throw std::invalid_argument("propagate: delay series rate mismatch");

    const double rate = input.rate_hz;
    const double tau0 = one_way_delay_s(segment);
    if (tau0 * rate < 2.0)
        throw std::invalid_argument("propagate: segment delay must be >= 2 samples");

    const auto frac = segment.tap_fractions();
    const double scale = direction == Direction::Backward
                             ? (carrier_hz + segment.backward_offset_hz) / carrier_hz
                             : 1.0;

    auto read_clamped = [](const std::vector<double>& arr, double index) {
        auto fetch = [&](long long j) -> double {
            if (j < 0) return arr.front();
            const auto uj = static_cast<std::size_t>(j);
            return arr[std::min(uj, arr.size() - 1)];
        };
        return read_fractional(fetch, index);
    };

    PhaseSeries out;
    out.rate_hz = rate;
    out.t0_s = input.t0_s;
    out.samples.resize(input.samples.size());
    for (std::size_t n = 0; n < input.samples.size(); ++n) {
        double tau = tau0;
        if (!delay_fluct.samples.empty())
            tau += delay_fluct.samples[std::min(n, delay_fluct.samples.size() - 1)];
        const double d_samples = tau * rate;
        double v = read_clamped(input.samples, static_cast<double>(n) - d_samples);
        double accum = -2.0 * M_PI * carrier_hz * (tau - tau0);
        for (std::size_t k = 0; k < frac.size(); ++k) {
            const double residual =
                (direction == Direction::Forward ? (1.0 - frac[k]) : frac[k]) * d_samples;
            accum += read_clamped(tap_noise[k].samples, static_cast<double>(n) - residual);
        }
        out.samples[n] = v + scale * accum;
    }
    return out;
}

}  // namespace fiberlink::channel
