#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "srce/dataset/normalization.hpp"
#include "srce/error.hpp"
#include "srce/nn/init.hpp"
#include "srce/nn/model.hpp"
#include "srce/ofdm/channel.hpp"
#include "srce/random.hpp"

namespace srce::models {

using json = nlohmann::json;

enum class ArchitectureKind { SRCNN, FSRCNN };

struct LayerRow {
    std::size_t kernel = 1;  // square kernel side
    std::size_t out_channels = 1;
    bool relu = false;
    bool transposed = false;

    bool operator==(const LayerRow&) const = default;
};

struct ArchitectureSpec {
    ArchitectureKind kind = ArchitectureKind::FSRCNN;
    std::size_t mapping_layers = 4;  // FSRCNN only
    // 1: real and imaginary planes are independent images; 2: stacked channels.
    std::size_t io_channels = 1;

    static ArchitectureSpec fsrcnn(std::size_t x = 4) { return {ArchitectureKind::FSRCNN, x, 1}; }
    static ArchitectureSpec srcnn() { return {ArchitectureKind::SRCNN, 0, 1}; }

    /// "fsrcnn-4", "FSRCNN", "srcnn", ...
    static ArchitectureSpec parse(const std::string& s) {
        std::string t;
        for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (t == "srcnn" || t == "srce") return srcnn();
        for (const char* prefix : {"fsrcnn", "fsrce"}) {
            const std::string p(prefix);
            if (t == p) return fsrcnn();
            if (t.rfind(p + "-", 0) == 0) {
                const std::string num = t.substr(p.size() + 1);
                if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
                    throw ConfigError("bad architecture '" + s + "'");
                return fsrcnn(std::stoul(num));
            }
        }
        throw ConfigError("unknown architecture '" + s + "'");
    }

    void validate() const {
        if (kind == ArchitectureKind::FSRCNN && mapping_layers < 1)
            throw ConfigError("FSRCNN needs at least one mapping layer");
        if (io_channels != 1 && io_channels != 2) throw ConfigError("io_channels must be 1 or 2");
    }

    std::string name() const {
        return kind == ArchitectureKind::SRCNN ? "SRCNN" : "FSRCNN-" + std::to_string(mapping_layers);
    }

    // Label used for the estimator in reports.
    std::string estimator_name() const {
        return kind == ArchitectureKind::SRCNN ? "SRCE" : "FSRCE-" + std::to_string(mapping_layers);
    }

    std::vector<LayerRow> layer_table() const {
        validate();
        if (kind == ArchitectureKind::SRCNN)
            return {{9, 64, true, false}, {1, 32, true, false}, {5, io_channels, false, false}};
        std::vector<LayerRow> t{{5, 56, true, false}, {1, 12, true, false}};
        for (std::size_t i = 0; i < mapping_layers; ++i) t.push_back({3, 12, true, false});
        t.push_back({1, 56, true, false});
        t.push_back({9, io_channels, false, true});
        return t;
    }

    bool operator==(const ArchitectureSpec&) const = default;
};

inline void to_json(json& j, const ArchitectureSpec& a) {
    j = {{"kind", a.kind == ArchitectureKind::SRCNN ? "SRCNN" : "FSRCNN"},
         {"mapping_layers", a.mapping_layers},
         {"io_channels", a.io_channels}};
}

inline void from_json(const json& j, ArchitectureSpec& a) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "SRCNN") a.kind = ArchitectureKind::SRCNN;
    else if (kind == "FSRCNN") a.kind = ArchitectureKind::FSRCNN;
    else throw ConfigError("unknown architecture kind '" + kind + "'");
    a.mapping_layers = j.value("mapping_layers", a.kind == ArchitectureKind::FSRCNN ? std::size_t{4} : std::size_t{0});
    a.io_channels = j.value("io_channels", std::size_t{1});
    a.validate();
}

/// He-initialized model in layer-table order; layer i draws from
/// derive_seed(seed, {i}).
inline nn::Model build_model(const ArchitectureSpec& spec, std::uint64_t seed) {
    nn::Model m;
    std::size_t in = spec.io_channels;
    std::size_t idx = 0;
    for (const auto& row : spec.layer_table()) {
        auto layer = nn::ConvLayer::make(in, row.out_channels, row.kernel, row.kernel, row.transposed);
        nn::he_init(layer, derive_seed(seed, {idx++}));
        m.layers.emplace_back(std::move(layer));
        if (row.relu) m.layers.emplace_back(nn::Relu{});
        in = row.out_channels;
    }
    m.validate();
    return m;
}

/// (rows x cols) plane <-> tensor plane with height = rows (subcarriers).
inline void plane_to_tensor(const Eigen::MatrixXd& p, nn::Tensor4& t, std::size_t b, std::size_t c) {
    for (Eigen::Index k = 0; k < p.rows(); ++k)
        for (Eigen::Index m = 0; m < p.cols(); ++m)
            t(b, c, static_cast<std::size_t>(k), static_cast<std::size_t>(m)) = p(k, m);
}

inline Eigen::MatrixXd tensor_to_plane(const nn::Tensor4& t, std::size_t b, std::size_t c) {
    Eigen::MatrixXd p(static_cast<Eigen::Index>(t.height()), static_cast<Eigen::Index>(t.width()));
    for (Eigen::Index k = 0; k < p.rows(); ++k)
        for (Eigen::Index m = 0; m < p.cols(); ++m) p(k, m) = t(b, c, static_cast<std::size_t>(k), static_cast<std::size_t>(m));
    return p;
}

/// Normalize, run the single-channel model on one plane, denormalize.
inline Eigen::MatrixXd infer(const nn::Model& model, const Eigen::MatrixXd& plane, const data::NormalizationStats& norm) {
    if (!plane.allFinite()) throw InputError("infer: non-finite input plane");
    if (model.input_channels() > 1) throw InputError("infer: model expects stacked planes; use refine()");
    nn::Tensor4 x(1, 1, static_cast<std::size_t>(plane.rows()), static_cast<std::size_t>(plane.cols()));
    plane_to_tensor(norm.apply(plane), x, 0, 0);
    const nn::Tensor4 y = nn::model_predict(model, std::move(x));
    return norm.invert(tensor_to_plane(y, 0, 0));
}

/// Refines a full coarse channel estimate: real and imaginary planes go
/// through the network (as two images or as one 2-channel image) and are
/// reassembled into a complex matrix.
inline ofdm::ChannelMatrix refine(const nn::Model& model, const ofdm::ChannelMatrix& coarse,
                                  const data::NormalizationStats& norm) {
    const Eigen::MatrixXd re = coarse.real(), im = coarse.imag();
    if (!re.allFinite() || !im.allFinite()) throw InputError("refine: non-finite coarse estimate");
    const auto n = static_cast<std::size_t>(coarse.rows()), m = static_cast<std::size_t>(coarse.cols());
    const bool stacked = model.input_channels() == 2;
    nn::Tensor4 x(stacked ? 1 : 2, stacked ? 2 : 1, n, m);
    plane_to_tensor(norm.apply(re), x, 0, 0);
    plane_to_tensor(norm.apply(im), x, stacked ? 0 : 1, stacked ? 1 : 0);
    const nn::Tensor4 y = nn::model_predict(model, std::move(x));
    const Eigen::MatrixXd ore = norm.invert(tensor_to_plane(y, 0, 0));
    const Eigen::MatrixXd oim = norm.invert(stacked ? tensor_to_plane(y, 0, 1) : tensor_to_plane(y, 1, 0));
    ofdm::ChannelMatrix out(coarse.rows(), coarse.cols());
    out.real() = ore;
    out.imag() = oim;
    return out;
}

}  // namespace srce::models
