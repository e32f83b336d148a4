#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "srce/binary_io.hpp"
#include "srce/dataset/planes.hpp"
#include "srce/error.hpp"
#include "srce/estimators/spline.hpp"
#include "srce/ofdm/constellation.hpp"
#include "srce/snr.hpp"

namespace srce::data {

using json = nlohmann::json;

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

inline std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        default: return "test";
    }
}

inline Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "val") return Split::Val;
    if (s == "test") return Split::Test;
    throw ConfigError("unknown split '" + s + "'");
}

inline constexpr std::array<char, 8> kDatasetMagic{'S', 'R', 'C', 'E', 'D', 'S', 'E', 'T'};
inline constexpr std::uint32_t kDatasetVersion = 1;

/// Fixed 60-byte little-endian header:
///   magic[8] version:u32 N:u32 M:u32 count:u64 snr_db:f64 snr_infinite:u8
///   pilots:u32 modulation:u8 split:u8 interpolation:u8 channel_seed:u64 noise_seed:u64
struct DatasetHeader {
    std::uint32_t version = kDatasetVersion;
    std::uint32_t n = 0;
    std::uint32_t m = 0;
    std::uint64_t count = 0;
    Snr snr = Snr::infinite();
    std::uint32_t pilots = 0;
    ofdm::Modulation modulation = ofdm::Modulation::QPSK;
    Split split = Split::Train;
    est::Interpolation interpolation = est::Interpolation::Spline;
    std::uint64_t channel_seed = 0;
    std::uint64_t noise_seed = 0;

    bool operator==(const DatasetHeader&) const = default;
};

/// One frame: planes of the coarse LS estimate and of the true channel.
struct Sample {
    PlanePair input;
    PlanePair target;

    bool operator==(const Sample&) const = default;
};

struct DatasetFile {
    DatasetHeader header;
    std::vector<Sample> samples;

    std::size_t payload_bytes() const { return samples.size() * 4 * header.n * header.m * sizeof(double); }
};

inline json header_json(const DatasetHeader& h) {
    return {{"format", "srce-dataset"},
            {"version", h.version},
            {"N", h.n},
            {"M", h.m},
            {"count", h.count},
            {"snr_db", h.snr.is_infinite() ? json("inf") : json(h.snr.value_db())},
            {"pilots", h.pilots},
            {"modulation", ofdm::to_string(h.modulation)},
            {"split", to_string(h.split)},
            {"interpolation", h.interpolation == est::Interpolation::Spline ? "spline" : "linear"},
            {"channel_seed", h.channel_seed},
            {"noise_seed", h.noise_seed},
            {"payload_bytes", h.count * 4 * h.n * h.m * sizeof(double)},
            {"sample_layout", "input.real, input.imag, target.real, target.imag; each N x M, column-major (subcarrier fastest)"}};
}

/// Writes the binary file and a <path>.json sidecar duplicating the header.
inline void write_dataset(const std::string& path, const DatasetFile& file, const json& extra = json::object()) {
    const auto& h = file.header;
    if (h.count != file.samples.size()) throw InputError("write_dataset: header count differs from sample count");
    io::Writer w(path);
    w.put_bytes(kDatasetMagic);
    w.put(h.version);
    w.put(h.n);
    w.put(h.m);
    w.put(h.count);
    w.put(h.snr.is_infinite() ? 0.0 : h.snr.value_db());
    w.put(static_cast<std::uint8_t>(h.snr.is_infinite() ? 1 : 0));
    w.put(h.pilots);
    w.put(static_cast<std::uint8_t>(h.modulation == ofdm::Modulation::QPSK ? 0 : 1));
    w.put(static_cast<std::uint8_t>(h.split));
    w.put(static_cast<std::uint8_t>(h.interpolation == est::Interpolation::Spline ? 0 : 1));
    w.put(h.channel_seed);
    w.put(h.noise_seed);
    const auto expect_rows = static_cast<Eigen::Index>(h.n), expect_cols = static_cast<Eigen::Index>(h.m);
    for (const auto& s : file.samples) {
        for (const Plane* p : {&s.input.real_plane, &s.input.imag_plane, &s.target.real_plane, &s.target.imag_plane}) {
            if (p->rows() != expect_rows || p->cols() != expect_cols) throw InputError("write_dataset: plane size differs from header");
            w.put_doubles({p->data(), static_cast<std::size_t>(p->size())});
        }
    }
    w.close();
    json side = header_json(h);
    if (!extra.empty()) side["config"] = extra;
    io::write_text(path + ".json", side.dump(2) + "\n");
}

inline DatasetFile read_dataset(const std::string& path) {
    io::Reader r(path);
    std::array<char, 8> magic{};
    r.get_bytes(magic);
    if (magic != kDatasetMagic) throw IoError(path, "not a dataset file (bad magic)");
    DatasetFile f;
    auto& h = f.header;
    h.version = r.get<std::uint32_t>();
    if (h.version != kDatasetVersion) throw IoError(path, "unsupported dataset version " + std::to_string(h.version));
    h.n = r.get<std::uint32_t>();
    h.m = r.get<std::uint32_t>();
    h.count = r.get<std::uint64_t>();
    const double snr_db = r.get<double>();
    h.snr = r.get<std::uint8_t>() ? Snr::infinite() : Snr::db(snr_db);
    h.pilots = r.get<std::uint32_t>();
    const auto mod = r.get<std::uint8_t>();
    if (mod > 1) throw IoError(path, "bad modulation code");
    h.modulation = mod == 0 ? ofdm::Modulation::QPSK : ofdm::Modulation::QAM16;
    const auto split = r.get<std::uint8_t>();
    if (split > 2) throw IoError(path, "bad split code");
    h.split = static_cast<Split>(split);
    h.interpolation = r.get<std::uint8_t>() == 0 ? est::Interpolation::Spline : est::Interpolation::Linear;
    h.channel_seed = r.get<std::uint64_t>();
    h.noise_seed = r.get<std::uint64_t>();

    const auto expected = static_cast<std::uintmax_t>(60 + h.count * 4 * h.n * h.m * sizeof(double));
    if (std::filesystem::file_size(path) != expected) throw IoError(path, "payload length does not match header");
    f.samples.resize(h.count);
    const auto rows = static_cast<Eigen::Index>(h.n), cols = static_cast<Eigen::Index>(h.m);
    for (auto& s : f.samples) {
        for (Plane* p : {&s.input.real_plane, &s.input.imag_plane, &s.target.real_plane, &s.target.imag_plane}) {
            p->resize(rows, cols);
            r.get_doubles({p->data(), static_cast<std::size_t>(p->size())});
        }
    }
    return f;
}

}  // namespace srce::data
