#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "srce/error.hpp"
#include "srce/estimators/spline.hpp"
#include "srce/models/architecture.hpp"
#include "srce/ofdm/channel.hpp"
#include "srce/ofdm/constellation.hpp"
#include "srce/snr.hpp"

namespace srce::ofdm {

using json = nlohmann::json;

inline void to_json(json& j, const ChannelParams& p) {
    j = {{"carrier_freq", p.carrier_freq},       {"mobile_velocity", p.mobile_velocity},
         {"num_taps", p.num_taps},               {"num_subcarriers", p.num_subcarriers},
         {"symbols_per_frame", p.symbols_per_frame}, {"pdp_decay", p.pdp_decay},
         {"num_sinusoids", p.num_sinusoids},     {"sample_rate", p.sample_rate},
         {"cp_length", p.cp_length}};
}

inline void from_json(const json& j, ChannelParams& p) {
    p.carrier_freq = j.value("carrier_freq", p.carrier_freq);
    p.mobile_velocity = j.value("mobile_velocity", p.mobile_velocity);
    p.num_taps = j.value("num_taps", p.num_taps);
    p.num_subcarriers = j.value("num_subcarriers", p.num_subcarriers);
    p.symbols_per_frame = j.value("symbols_per_frame", p.symbols_per_frame);
    p.pdp_decay = j.value("pdp_decay", p.pdp_decay);
    p.num_sinusoids = j.value("num_sinusoids", p.num_sinusoids);
    p.sample_rate = j.value("sample_rate", p.sample_rate);
    p.cp_length = j.value("cp_length", p.cp_length);
}

}  // namespace srce::ofdm

namespace srce {

using json = nlohmann::json;

/// Mini-batch Adam schedule; lr(e) = initial_lr / decay_factor^floor(e / decay_every).
struct TrainSchedule {
    std::size_t batch_frames = 100;  // one frame = two plane samples
    std::size_t epochs = 100;
    double initial_lr = 1e-3;
    double decay_factor = 5.0;
    std::size_t decay_every = 25;

    static TrainSchedule desk_scale() { return {}; }
    static TrainSchedule full_scale() { return {100, 800, 1e-3, 5.0, 200}; }

    double lr(std::size_t epoch) const {
        return initial_lr / std::pow(decay_factor, static_cast<double>(epoch / decay_every));
    }

    void validate() const {
        if (batch_frames == 0 || epochs == 0 || decay_every == 0) throw ConfigError("schedule: counts must be > 0");
        if (!(initial_lr > 0.0) || !(decay_factor > 0.0)) throw ConfigError("schedule: rates must be > 0");
    }

    bool operator==(const TrainSchedule&) const = default;
};

struct DatasetSizes {
    std::size_t train_frames = 4000;
    std::size_t val_frames = 500;
    std::size_t test_frames = 1000;
    std::size_t autocorrelation_channels = 2000;

    bool operator==(const DatasetSizes&) const = default;
};

struct Seeds {
    std::uint64_t channel = 1;
    std::uint64_t noise = 2;
    std::uint64_t init = 3;
    std::uint64_t shuffle = 4;

    bool operator==(const Seeds&) const = default;
};

struct ExperimentConfig {
    ofdm::ChannelParams channel;
    std::size_t pilots = 8;
    ofdm::Modulation modulation = ofdm::Modulation::QPSK;
    est::Interpolation interpolation = est::Interpolation::Spline;
    double train_snr_db = 20.0;
    std::vector<double> test_snr_grid{0, 5, 10, 15, 20, 25};
    models::ArchitectureSpec architecture = models::ArchitectureSpec::fsrcnn(4);
    TrainSchedule schedule;
    DatasetSizes sizes;
    Seeds seeds;

    std::size_t n() const { return channel.num_subcarriers; }
    std::size_t m() const { return channel.symbols_per_frame; }

    void validate() const {
        channel.validate();
        if (pilots < 2 || channel.num_subcarriers % pilots != 0) throw ConfigError("pilots must be >= 2 and divide N");
        if (test_snr_grid.empty()) throw ConfigError("test SNR grid must not be empty");
        for (double s : test_snr_grid)
            if (!std::isfinite(s)) throw ConfigError("test SNR grid entries must be finite");
        if (!std::isfinite(train_snr_db)) throw ConfigError("train SNR must be finite");
        if (sizes.train_frames == 0) throw ConfigError("training set must not be empty");
        if (sizes.autocorrelation_channels == 0) throw ConfigError("autocorrelation needs channels");
        architecture.validate();
        schedule.validate();
    }
};

inline void to_json(json& j, const TrainSchedule& s) {
    j = {{"batch_frames", s.batch_frames}, {"epochs", s.epochs}, {"initial_lr", s.initial_lr},
         {"decay_factor", s.decay_factor}, {"decay_every", s.decay_every}};
}

inline void from_json(const json& j, TrainSchedule& s) {
    s.batch_frames = j.value("batch_frames", s.batch_frames);
    s.epochs = j.value("epochs", s.epochs);
    s.initial_lr = j.value("initial_lr", s.initial_lr);
    s.decay_factor = j.value("decay_factor", s.decay_factor);
    s.decay_every = j.value("decay_every", s.decay_every);
}

inline void to_json(json& j, const DatasetSizes& s) {
    j = {{"train_frames", s.train_frames}, {"val_frames", s.val_frames}, {"test_frames", s.test_frames},
         {"autocorrelation_channels", s.autocorrelation_channels}};
}

inline void from_json(const json& j, DatasetSizes& s) {
    s.train_frames = j.value("train_frames", s.train_frames);
    s.val_frames = j.value("val_frames", s.val_frames);
    s.test_frames = j.value("test_frames", s.test_frames);
    s.autocorrelation_channels = j.value("autocorrelation_channels", s.autocorrelation_channels);
}

inline void to_json(json& j, const Seeds& s) {
    j = {{"channel", s.channel}, {"noise", s.noise}, {"init", s.init}, {"shuffle", s.shuffle}};
}

inline void from_json(const json& j, Seeds& s) {
    s.channel = j.value("channel", s.channel);
    s.noise = j.value("noise", s.noise);
    s.init = j.value("init", s.init);
    s.shuffle = j.value("shuffle", s.shuffle);
}

inline std::string to_string(est::Interpolation i) { return i == est::Interpolation::Spline ? "spline" : "linear"; }

inline est::Interpolation parse_interpolation(const std::string& s) {
    if (s == "spline") return est::Interpolation::Spline;
    if (s == "linear") return est::Interpolation::Linear;
    throw ConfigError("unknown interpolation '" + s + "'");
}

inline void to_json(json& j, const ExperimentConfig& c) {
    j = {{"channel", c.channel},
         {"pilots", c.pilots},
         {"modulation", ofdm::to_string(c.modulation)},
         {"interpolation", to_string(c.interpolation)},
         {"train_snr_db", c.train_snr_db},
         {"test_snr_grid", c.test_snr_grid},
         {"architecture", c.architecture},
         {"schedule", c.schedule},
         {"sizes", c.sizes},
         {"seeds", c.seeds}};
}

/// Missing keys keep their defaults, so a config file may list overrides only.
inline void from_json(const json& j, ExperimentConfig& c) {
    if (j.contains("channel")) j.at("channel").get_to(c.channel);
    c.pilots = j.value("pilots", c.pilots);
    if (j.contains("modulation")) c.modulation = ofdm::parse_modulation(j.at("modulation").get<std::string>());
    if (j.contains("interpolation")) c.interpolation = parse_interpolation(j.at("interpolation").get<std::string>());
    c.train_snr_db = j.value("train_snr_db", c.train_snr_db);
    if (j.contains("test_snr_grid")) c.test_snr_grid = j.at("test_snr_grid").get<std::vector<double>>();
    if (j.contains("architecture")) {
        const auto& a = j.at("architecture");
        c.architecture = a.is_string() ? models::ArchitectureSpec::parse(a.get<std::string>()) : a.get<models::ArchitectureSpec>();
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        if (s.is_string()) {
            if (s == "full") c.schedule = TrainSchedule::full_scale();
            else if (s == "desk") c.schedule = TrainSchedule::desk_scale();
            else throw ConfigError("schedule must be 'full', 'desk' or an object");
        } else {
            s.get_to(c.schedule);
        }
    }
    if (j.contains("sizes")) j.at("sizes").get_to(c.sizes);
    if (j.contains("seeds")) j.at("seeds").get_to(c.seeds);
}

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

/// 64-bit FNV-1a; stable across runs and platforms, used for cache keys.
/// Pass a previous result as `h` to continue hashing.
inline std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = kFnvOffset) { return fnv1a(s.data(), s.size(), h); }

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

}  // namespace srce
