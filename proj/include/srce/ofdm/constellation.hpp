#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srce/error.hpp"

namespace srce::ofdm {

using cd = std::complex<double>;

enum class Modulation { QPSK, QAM16 };

inline std::string to_string(Modulation m) { return m == Modulation::QPSK ? "QPSK" : "16QAM"; }

inline Modulation parse_modulation(std::string_view s) {
    if (s == "QPSK" || s == "qpsk") return Modulation::QPSK;
    if (s == "16QAM" || s == "16qam" || s == "QAM16" || s == "qam16") return Modulation::QAM16;
    throw ConfigError("unknown modulation '" + std::string(s) + "'");
}

/// Gray-mapped constellation with unit average energy.
///
/// points[i] is the symbol for the bit tuple whose integer value is i, read
/// MSB first (for 16QAM: b0 b1 select the in-phase level, b2 b3 quadrature).
class Constellation {
public:
    static Constellation qpsk() {
        // b0 -> sign of I, b1 -> sign of Q; (0,0) maps to (1+1i)/sqrt(2).
        const double a = 1.0 / std::sqrt(2.0);
        std::vector<cd> pts(4);
        for (unsigned v = 0; v < 4; ++v) {
            const unsigned b0 = (v >> 1) & 1U, b1 = v & 1U;
            pts[v] = {a * (1.0 - 2.0 * b0), a * (1.0 - 2.0 * b1)};
        }
        return Constellation(Modulation::QPSK, 2, std::move(pts));
    }

    static Constellation qam16() {
        // per-axis Gray code: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
        const double s = 1.0 / std::sqrt(10.0);
        auto level = [](unsigned two_bits) {
            switch (two_bits) {
                case 0b00: return -3.0;
                case 0b01: return -1.0;
                case 0b11: return 1.0;
                default: return 3.0;
            }
        };
        std::vector<cd> pts(16);
        for (unsigned v = 0; v < 16; ++v) pts[v] = {s * level(v >> 2), s * level(v & 3U)};
        return Constellation(Modulation::QAM16, 4, std::move(pts));
    }

    static Constellation make(Modulation m) {
        return m == Modulation::QPSK ? qpsk() : qam16();
    }

    Modulation kind() const noexcept { return kind_; }
    unsigned bits_per_symbol() const noexcept { return bits_; }
    std::span<const cd> points() const noexcept { return points_; }

    /// Maps bits_per_symbol() bits (each 0/1, MSB first) to a point.
    cd map(std::span<const std::uint8_t> bits) const {
        if (bits.size() != bits_) throw InputError("constellation map: wrong bit count");
        unsigned v = 0;
        for (auto b : bits) v = (v << 1) | (b & 1U);
        return points_[v];
    }

    /// Inverse of map() by nearest point (bijection on the exact points).
    unsigned index_of(cd x) const {
        unsigned best = 0;
        double best_d = std::norm(x - points_[0]);
        for (unsigned i = 1; i < points_.size(); ++i) {
            const double d = std::norm(x - points_[i]);
            if (d < best_d) best_d = d, best = i;
        }
        return best;
    }

private:
    Constellation(Modulation k, unsigned bits, std::vector<cd> pts)
        : kind_(k), bits_(bits), points_(std::move(pts)) {}

    Modulation kind_;
    unsigned bits_;
    std::vector<cd> points_;
};

}  // namespace srce::ofdm
