#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "srce/error.hpp"
#include "srce/random.hpp"

namespace srce::ofdm {

using cd = std::complex<double>;
/// H(k, m): rows are subcarriers k = 0..N-1, columns OFDM symbols m = 0..M-1.
using ChannelMatrix = Eigen::MatrixXcd;

inline constexpr double kSpeedOfLight = 3.0e8;

struct ChannelParams {
    double carrier_freq = 2.6e9;     // Hz
    double mobile_velocity = 15.0;   // m/s
    std::size_t num_taps = 16;       // delays 0..num_taps-1 samples
    std::size_t num_subcarriers = 64;
    std::size_t symbols_per_frame = 20;
    double pdp_decay = std::log(100.0) / 15.0;  // per-tap exponential rate; last of 16 taps at -20 dB
    std::size_t num_sinusoids = 16;
    double sample_rate = 1.0e6;      // Hz
    std::size_t cp_length = 16;

    double max_doppler() const { return mobile_velocity * carrier_freq / kSpeedOfLight; }

    double symbol_duration() const {
        return static_cast<double>(num_subcarriers + cp_length) / sample_rate;
    }

    void validate() const {
        if (num_subcarriers == 0) throw ConfigError("channel: num_subcarriers must be > 0");
        if (symbols_per_frame == 0) throw ConfigError("channel: symbols_per_frame must be > 0");
        if (!(mobile_velocity >= 0.0) || !std::isfinite(mobile_velocity))
            throw ConfigError("channel: mobile_velocity must be finite and >= 0");
        if (!(carrier_freq > 0.0)) throw ConfigError("channel: carrier_freq must be > 0");
        if (!(sample_rate > 0.0)) throw ConfigError("channel: sample_rate must be > 0");
        if (num_taps == 0) throw ConfigError("channel: num_taps must be > 0");
        if (num_taps > cp_length) throw ConfigError("channel: num_taps exceeds cyclic prefix length");
        if (num_taps > num_subcarriers) throw ConfigError("channel: num_taps exceeds num_subcarriers");
        if (num_sinusoids == 0) throw ConfigError("channel: num_sinusoids must be > 0");
        if (!(pdp_decay >= 0.0) || !std::isfinite(pdp_decay))
            throw ConfigError("channel: pdp_decay must be finite and >= 0");
    }
};

/// Exponential power-delay profile normalized to unit total power.
inline std::vector<double> power_delay_profile(const ChannelParams& p) {
    std::vector<double> w(p.num_taps);
    double total = 0.0;
    for (std::size_t l = 0; l < p.num_taps; ++l) {
        w[l] = std::exp(-p.pdp_decay * static_cast<double>(l));
        total += w[l];
    }
    for (auto& x : w) x /= total;
    return w;
}

/// One unit-power Rayleigh tap as a sum of sinusoids with random angles of
/// arrival and independent per-sinusoid phases on each quadrature branch:
///
///   x(t) = S^-1/2 * sum_n [ cos(wd t cos a_n + phi_n) + j cos(wd t sin a_n + psi_n) ]
///   a_n  = (2 pi n - pi + theta_n) / (4 S)
///
/// The ensemble autocorrelation is J0(wd * tau) for any S.
class SosTap {
public:
    SosTap(std::size_t num_sinusoids, double max_doppler, Rng& rng)
        : omega_(2.0 * std::numbers::pi * max_doppler), cos_a_(num_sinusoids), sin_a_(num_sinusoids),
          phi_(num_sinusoids), psi_(num_sinusoids) {
        std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
        const double s = static_cast<double>(num_sinusoids);
        for (std::size_t n = 0; n < num_sinusoids; ++n) {
            const double theta = u(rng);
            const double a = (2.0 * std::numbers::pi * static_cast<double>(n + 1) - std::numbers::pi + theta) / (4.0 * s);
            cos_a_[n] = std::cos(a);
            sin_a_[n] = std::sin(a);
            phi_[n] = u(rng);
            psi_[n] = u(rng);
        }
        scale_ = 1.0 / std::sqrt(s);
    }

    cd operator()(double t) const {
        double re = 0.0, im = 0.0;
        for (std::size_t n = 0; n < phi_.size(); ++n) {
            re += std::cos(omega_ * t * cos_a_[n] + phi_[n]);
            im += std::cos(omega_ * t * sin_a_[n] + psi_[n]);
        }
        return {scale_ * re, scale_ * im};
    }

private:
    double omega_;
    double scale_ = 1.0;
    std::vector<double> cos_a_, sin_a_, phi_, psi_;
};

/// Time-domain taps h_l(m) sampled once per OFDM symbol, rows = taps.
inline Eigen::MatrixXcd generate_taps(const ChannelParams& params, std::uint64_t seed) {
    params.validate();
    Rng rng(seed);
    const auto pdp = power_delay_profile(params);
    const double fd = params.max_doppler();
    const double ts = params.symbol_duration();
    Eigen::MatrixXcd taps(params.num_taps, params.symbols_per_frame);
    for (std::size_t l = 0; l < params.num_taps; ++l) {
        SosTap tap(params.num_sinusoids, fd, rng);
        const double g = std::sqrt(pdp[l]);
        for (std::size_t m = 0; m < params.symbols_per_frame; ++m)
            taps(l, m) = g * tap(static_cast<double>(m) * ts);
    }
    return taps;
}

/// Frequency response H(k, m) = sum_l h_l(m) exp(-j 2 pi k l / N).
/// The channel is constant within a symbol and evolves symbol to symbol.
inline ChannelMatrix generate_channel(const ChannelParams& params, std::uint64_t seed) {
    const Eigen::MatrixXcd taps = generate_taps(params, seed);
    const auto n = static_cast<Eigen::Index>(params.num_subcarriers);
    const auto l = static_cast<Eigen::Index>(params.num_taps);
    Eigen::MatrixXcd dft(n, l);
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index t = 0; t < l; ++t)
            dft(k, t) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n));
    return dft * taps;
}

/// Empirical normalized autocorrelation Re E[h(m) h*(0)] / E|h(0)|^2 of a single
/// tap at symbol-time lags 0..max_lag.
inline std::vector<double> tap_autocorrelation(const ChannelParams& params, std::size_t num_realizations,
                                               std::size_t max_lag, std::uint64_t seed = 0) {
    params.validate();
    if (num_realizations < 1000) throw InputError("tap_autocorrelation: need at least 1000 realizations");
    const double fd = params.max_doppler();
    const double ts = params.symbol_duration();
    std::vector<double> acc(max_lag + 1, 0.0);
    double power = 0.0;
    for (std::size_t r = 0; r < num_realizations; ++r) {
        Rng rng(derive_seed(seed, {r}));
        SosTap tap(params.num_sinusoids, fd, rng);
        const cd h0 = tap(0.0);
        power += std::norm(h0);
        for (std::size_t lag = 0; lag <= max_lag; ++lag)
            acc[lag] += (tap(static_cast<double>(lag) * ts) * std::conj(h0)).real();
    }
    for (auto& a : acc) a /= power;
    return acc;
}

}  // namespace srce::ofdm
