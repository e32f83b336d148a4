#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "srce/config.hpp"
#include "srce/dataset/dataset_file.hpp"
#include "srce/dataset/normalization.hpp"
#include "srce/dataset/planes.hpp"
#include "srce/estimators/estimators.hpp"
#include "srce/ofdm/channel.hpp"
#include "srce/ofdm/constellation.hpp"
#include "srce/ofdm/frame.hpp"
#include "srce/random.hpp"

namespace srce::data {

/// Seed-stream tags. Sample i of a stream draws its channel from
/// derive_seed(seeds.channel, {tag, i}), payload bits from
/// derive_seed(seeds.noise, {tag, i, 0}) and noise from derive_seed(seeds.noise, {tag, i, 1}).
/// Streams for different tags never overlap; the same index at different
/// SNRs shares channel, bits and the unit noise draw.
enum class Stream : std::uint64_t { Train = 1, Val = 2, Test = 3, Autocorrelation = 4 };

inline Stream stream_of(Split s) {
    switch (s) {
        case Split::Train: return Stream::Train;
        case Split::Val: return Stream::Val;
        default: return Stream::Test;
    }
}

struct SimulatedFrame {
    ofdm::ChannelMatrix channel;
    ofdm::OfdmFrame frame;
};

inline SimulatedFrame simulate_frame(const ExperimentConfig& cfg, Stream stream, std::uint64_t index, Snr snr) {
    const auto tag = static_cast<std::uint64_t>(stream);
    SimulatedFrame out;
    out.channel = ofdm::generate_channel(cfg.channel, derive_seed(cfg.seeds.channel, {tag, index}));
    const auto pattern = ofdm::PilotPattern::comb(cfg.n(), cfg.pilots);
    const auto constellation = ofdm::Constellation::make(cfg.modulation);
    const auto bits = ofdm::random_bits(ofdm::bits_per_frame(constellation, pattern, cfg.n(), cfg.m()),
                                        derive_seed(cfg.seeds.noise, {tag, index, 0}));
    const auto tx = ofdm::modulate_frame(bits, constellation, pattern, cfg.n(), cfg.m());
    out.frame = ofdm::transmit(tx, out.channel, pattern, snr, derive_seed(cfg.seeds.noise, {tag, index, 1}));
    return out;
}

/// Ground-truth channels used to estimate R_{HpHp}; disjoint from all splits.
inline std::vector<ofdm::ChannelMatrix> autocorrelation_channels(const ExperimentConfig& cfg) {
    std::vector<ofdm::ChannelMatrix> hs;
    hs.reserve(cfg.sizes.autocorrelation_channels);
    const auto tag = static_cast<std::uint64_t>(Stream::Autocorrelation);
    for (std::size_t i = 0; i < cfg.sizes.autocorrelation_channels; ++i)
        hs.push_back(ofdm::generate_channel(cfg.channel, derive_seed(cfg.seeds.channel, {tag, i})));
    return hs;
}

/// Simulates `count` frames and records (planes of coarse LS estimate, planes of H).
inline DatasetFile generate_dataset(const ExperimentConfig& cfg, Split split, std::size_t count, Snr snr) {
    cfg.validate();
    DatasetFile f;
    auto& h = f.header;
    h.n = static_cast<std::uint32_t>(cfg.n());
    h.m = static_cast<std::uint32_t>(cfg.m());
    h.count = count;
    h.snr = snr;
    h.pilots = static_cast<std::uint32_t>(cfg.pilots);
    h.modulation = cfg.modulation;
    h.split = split;
    h.interpolation = cfg.interpolation;
    h.channel_seed = cfg.seeds.channel;
    h.noise_seed = cfg.seeds.noise;
    f.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto sim = simulate_frame(cfg, stream_of(split), i, snr);
        const auto ls = est::estimate_ls_full(sim.frame, cfg.interpolation);
        Sample s{complex_to_planes(ls), complex_to_planes(sim.channel)};
        if (planes_to_complex(s.target) != sim.channel) throw NumericError("dataset: target planes do not reconstruct H");
        f.samples.push_back(std::move(s));
    }
    return f;
}

/// Pooled mean / population std over every input-plane entry.
inline NormalizationStats fit_normalization(const DatasetFile& train) {
    if (train.samples.empty()) throw ConfigError("fit_normalization: empty training set");
    double sum = 0.0, count = 0.0;
    for (const auto& s : train.samples) {
        sum += s.input.real_plane.sum() + s.input.imag_plane.sum();
        count += static_cast<double>(s.input.real_plane.size() + s.input.imag_plane.size());
    }
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& s : train.samples) {
        ss += (s.input.real_plane.array() - mean).square().sum();
        ss += (s.input.imag_plane.array() - mean).square().sum();
    }
    NormalizationStats st{mean, std::sqrt(ss / count)};
    if (!(st.std > 0.0)) throw ConfigError("fit_normalization: training inputs have zero variance");
    return st;
}

}  // namespace srce::data
