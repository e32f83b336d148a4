#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "srce/binary_io.hpp"
#include "srce/error.hpp"
#include "srce/nn/model.hpp"

namespace srce::nn {

using json = nlohmann::json;

inline constexpr const char* kCheckpointFormat = "srce-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    Model model;
    json metadata;  // architecture, normalization, seeds, training history
};

inline std::string blob_path_for(const std::string& manifest_path) {
    std::filesystem::path p(manifest_path);
    p.replace_extension(".bin");
    return p.string();
}

/// Writes <name>.json (layer table + metadata) and <name>.bin (all kernels and
/// biases, layer order, kernel before bias, little-endian float64).
inline void save_checkpoint(const std::string& manifest_path, const Model& model, const json& metadata) {
    json layers = json::array();
    std::size_t count = 0;
    for (const auto& l : model.layers) {
        if (const auto* c = std::get_if<ConvLayer>(&l)) {
            const auto& d = c->kernel.dims();
            layers.push_back({{"type", "conv"},
                              {"transposed", c->transposed},
                              {"kernel_dims", {d[0], d[1], d[2], d[3]}},
                              {"in_channels", c->in_channels()},
                              {"out_channels", c->out_channels()},
                              {"padding", {c->pad_h(), c->pad_w()}},
                              {"stride", {1, 1}},
                              {"offset", count}});
            count += c->parameter_count();
        } else {
            layers.push_back({{"type", "relu"}});
        }
    }
    const std::string blob = blob_path_for(manifest_path);
    json manifest = {{"format", kCheckpointFormat},
                     {"version", kCheckpointVersion},
                     {"blob", std::filesystem::path(blob).filename().string()},
                     {"parameter_count", count},
                     {"layers", layers},
                     {"metadata", metadata}};

    io::Writer w(blob);
    for (const auto* c : model.conv_layers()) {
        w.put_doubles(c->kernel.span());
        w.put_doubles(c->bias);
    }
    w.close();
    io::write_text(manifest_path, manifest.dump(2) + "\n");
}

inline Checkpoint load_checkpoint(const std::string& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(io::read_text(manifest_path));
    } catch (const json::exception& e) {
        throw IoError(manifest_path, std::string("malformed checkpoint manifest: ") + e.what());
    }
    if (manifest.value("format", "") != kCheckpointFormat) throw IoError(manifest_path, "not a checkpoint manifest");
    if (manifest.value("version", 0) != kCheckpointVersion) throw IoError(manifest_path, "unsupported checkpoint version");

    Checkpoint ck;
    ck.metadata = manifest.at("metadata");
    std::size_t count = 0;
    for (const auto& l : manifest.at("layers")) {
        if (l.at("type") == "relu") {
            ck.model.layers.emplace_back(Relu{});
            continue;
        }
        const auto d = l.at("kernel_dims").get<std::vector<std::size_t>>();
        if (d.size() != 4) throw IoError(manifest_path, "kernel_dims must have 4 entries");
        const bool transposed = l.at("transposed").get<bool>();
        ConvLayer c = transposed ? ConvLayer::make(d[0], d[1], d[2], d[3], true) : ConvLayer::make(d[1], d[0], d[2], d[3], false);
        count += c.parameter_count();
        ck.model.layers.emplace_back(std::move(c));
    }
    if (count != manifest.at("parameter_count").get<std::size_t>()) throw IoError(manifest_path, "parameter count mismatch");

    const std::string blob = (std::filesystem::path(manifest_path).parent_path() / manifest.at("blob").get<std::string>()).string();
    std::error_code ec;
    const auto blob_size = std::filesystem::file_size(blob, ec);
    if (ec) throw IoError(blob, "cannot stat parameter blob: " + ec.message());
    if (blob_size != count * sizeof(double)) throw IoError(blob, "blob size does not match manifest");
    io::Reader r(blob);
    for (auto& l : ck.model.layers) {
        if (auto* c = std::get_if<ConvLayer>(&l)) {
            r.get_doubles(c->kernel.span());
            r.get_doubles(c->bias);
        }
    }
    ck.model.validate();
    return ck;
}

}  // namespace srce::nn
