#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "srce/error.hpp"

namespace srce {

/// Signal-to-noise ratio in dB with an explicit noiseless state.
/// An infinite SNR is a flag, never a large float.
class Snr {
public:
    static Snr db(double value) {
        if (!std::isfinite(value)) throw InputError("SNR in dB must be finite; use Snr::infinite()");
        return Snr(value, false);
    }
    static Snr infinite() { return Snr(0.0, true); }

    bool is_infinite() const noexcept { return infinite_; }

    double value_db() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : db_;
    }

    // 10^(dB/10)
    double linear() const {
        return infinite_ ? std::numeric_limits<double>::infinity() : std::pow(10.0, db_ / 10.0);
    }

    // Noise variance for unit average signal power; 0 when noiseless.
    double noise_variance() const { return infinite_ ? 0.0 : 1.0 / linear(); }

    std::string to_string() const {
        if (infinite_) return "inf";
        std::string s = std::to_string(db_);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    friend bool operator==(const Snr& a, const Snr& b) {
        return a.infinite_ == b.infinite_ && (a.infinite_ || a.db_ == b.db_);
    }
    friend bool operator<(const Snr& a, const Snr& b) {
        if (a.infinite_ != b.infinite_) return b.infinite_;
        return !a.infinite_ && a.db_ < b.db_;
    }

private:
    Snr(double v, bool inf) : db_(v), infinite_(inf) {}
    double db_;
    bool infinite_;
};

}  // namespace srce
