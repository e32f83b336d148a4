#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "srce/error.hpp"
#include "srce/ofdm/channel.hpp"
#include "srce/ofdm/constellation.hpp"
#include "srce/random.hpp"
#include "srce/snr.hpp"

namespace srce::ofdm {

using ComplexGrid = Eigen::MatrixXcd;

/// Comb-type pilot layout shared by every OFDM symbol of a frame.
struct PilotPattern {
    std::vector<std::size_t> positions;  // strictly increasing, in [0, N)
    std::vector<cd> symbols;             // unit modulus, one per position

    /// Equally spaced pilots from subcarrier 0 with stride N / num_pilots,
    /// every pilot (1+1i)/sqrt(2).
    static PilotPattern comb(std::size_t num_subcarriers, std::size_t num_pilots) {
        if (num_pilots == 0 || num_pilots > num_subcarriers || num_subcarriers % num_pilots != 0)
            throw ConfigError("pilot count must divide the number of subcarriers");
        PilotPattern p;
        const std::size_t stride = num_subcarriers / num_pilots;
        const double a = 1.0 / std::sqrt(2.0);
        for (std::size_t i = 0; i < num_pilots; ++i) {
            p.positions.push_back(i * stride);
            p.symbols.emplace_back(a, a);
        }
        return p;
    }

    std::size_t size() const noexcept { return positions.size(); }

    void validate(std::size_t num_subcarriers) const {
        if (positions.size() != symbols.size()) throw InputError("pilot pattern: positions/symbols length mismatch");
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (positions[i] >= num_subcarriers) throw InputError("pilot pattern: position out of range");
            if (i > 0 && positions[i] <= positions[i - 1]) throw InputError("pilot pattern: positions not strictly increasing");
            if (std::abs(std::abs(symbols[i]) - 1.0) > 1e-12) throw InputError("pilot pattern: pilot symbols must have unit modulus");
        }
    }

    /// Complement of positions, ascending.
    std::vector<std::size_t> data_positions(std::size_t num_subcarriers) const {
        std::vector<std::size_t> out;
        std::size_t j = 0;
        for (std::size_t k = 0; k < num_subcarriers; ++k) {
            if (j < positions.size() && positions[j] == k) { ++j; continue; }
            out.push_back(k);
        }
        return out;
    }
};

struct OfdmFrame {
    ComplexGrid tx;  // X(k, m)
    ComplexGrid rx;  // Y(k, m)
    PilotPattern pattern;
    Snr snr = Snr::infinite();
};

inline std::vector<std::uint8_t> random_bits(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint8_t> bits(count);
    for (std::size_t i = 0; i < count; i += 64) {
        const std::uint64_t word = rng();
        for (std::size_t b = 0; b < 64 && i + b < count; ++b) bits[i + b] = static_cast<std::uint8_t>((word >> b) & 1U);
    }
    return bits;
}

inline std::size_t bits_per_frame(const Constellation& c, const PilotPattern& pattern, std::size_t n, std::size_t m) {
    return (n - pattern.size()) * m * c.bits_per_symbol();
}

/// Data subcarriers carry Gray-mapped points in ascending subcarrier order,
/// column by column; pilot subcarriers carry pattern.symbols in every column.
inline ComplexGrid modulate_frame(std::span<const std::uint8_t> bits, const Constellation& constellation,
                                  const PilotPattern& pattern, std::size_t n, std::size_t m) {
    pattern.validate(n);
    const std::size_t need = bits_per_frame(constellation, pattern, n, m);
    if (bits.size() < need) throw InputError("modulate_frame: insufficient bits");
    const auto data = pattern.data_positions(n);
    const unsigned bps = constellation.bits_per_symbol();
    ComplexGrid grid(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    std::size_t cursor = 0;
    for (std::size_t col = 0; col < m; ++col) {
        for (std::size_t i = 0; i < pattern.size(); ++i)
            grid(static_cast<Eigen::Index>(pattern.positions[i]), static_cast<Eigen::Index>(col)) = pattern.symbols[i];
        for (auto k : data) {
            grid(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(col)) = constellation.map(bits.subspan(cursor, bps));
            cursor += bps;
        }
    }
    return grid;
}

/// Y = H o X + W with W ~ CN(0, 1/linear SNR) (unit average transmit power).
inline OfdmFrame transmit(const ComplexGrid& tx, const ChannelMatrix& h, const PilotPattern& pattern, Snr snr,
                          std::uint64_t seed) {
    if (tx.rows() != h.rows() || tx.cols() != h.cols()) throw InputError("transmit: tx and channel dimensions differ");
    OfdmFrame f;
    f.tx = tx;
    f.rx = h.cwiseProduct(tx);
    f.pattern = pattern;
    f.snr = snr;
    if (!snr.is_infinite()) {
        Rng rng(seed);
        const double var = snr.noise_variance();
        for (Eigen::Index c = 0; c < f.rx.cols(); ++c)
            for (Eigen::Index r = 0; r < f.rx.rows(); ++r) f.rx(r, c) += complex_gaussian(rng, var);
    }
    return f;
}

}  // namespace srce::ofdm
