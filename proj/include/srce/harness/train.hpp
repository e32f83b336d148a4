#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "srce/config.hpp"
#include "srce/dataset/dataset_file.hpp"
#include "srce/dataset/generate.hpp"
#include "srce/dataset/normalization.hpp"
#include "srce/error.hpp"
#include "srce/models/architecture.hpp"
#include "srce/nn/loss.hpp"
#include "srce/nn/model.hpp"
#include "srce/random.hpp"

namespace srce::harness {

using json = nlohmann::json;

/// Network-ready copy of a dataset: normalized inputs and normalized targets,
/// one tensor sample per frame (2 channels) so a frame's planes stay together.
struct TensorSet {
    nn::Tensor4 input;   // (frames, 2, N, M): real, imag
    nn::Tensor4 target;  // same layout, normalized with the input statistics
    std::size_t frames() const { return input.batch(); }
};

inline TensorSet to_tensors(const data::DatasetFile& f, const data::NormalizationStats& norm) {
    const std::size_t n = f.header.n, m = f.header.m, count = f.samples.size();
    TensorSet t{nn::Tensor4(count, 2, n, m), nn::Tensor4(count, 2, n, m)};
    for (std::size_t i = 0; i < count; ++i) {
        const auto& s = f.samples[i];
        models::plane_to_tensor(norm.apply(s.input.real_plane), t.input, i, 0);
        models::plane_to_tensor(norm.apply(s.input.imag_plane), t.input, i, 1);
        models::plane_to_tensor(norm.apply(s.target.real_plane), t.target, i, 0);
        models::plane_to_tensor(norm.apply(s.target.imag_plane), t.target, i, 1);
    }
    return t;
}

namespace detail {

/// Gathers frames[idx[first..last)] into a network batch: two 1-channel
/// images per frame, or one 2-channel image in stacked mode.
inline nn::Tensor4 gather(const nn::Tensor4& src, const std::vector<std::size_t>& idx, std::size_t first,
                          std::size_t last, bool stacked) {
    const std::size_t frame_size = 2 * src.plane();
    const std::size_t count = last - first;
    nn::Tensor4 out = nn::Tensor4::uninitialized(
        stacked ? nn::Tensor4::Dims{count, 2, src.height(), src.width()}
                : nn::Tensor4::Dims{2 * count, 1, src.height(), src.width()});
    for (std::size_t k = 0; k < count; ++k)
        std::copy_n(src.sample(idx[first + k]), frame_size, out.data() + k * frame_size);
    return out;
}

}  // namespace detail

/// Loss of a model over a set, in physical (denormalized) units:
/// mean over planes of ||H_hat - H||_F^2.
inline double set_loss(const nn::Model& model, const TensorSet& set, const data::NormalizationStats& norm,
                       std::size_t chunk_frames = 16) {
    if (set.frames() == 0) return std::numeric_limits<double>::quiet_NaN();
    const bool stacked = model.input_channels() == 2;
    std::vector<std::size_t> idx(set.frames());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double total = 0.0;
    for (std::size_t b = 0; b < set.frames(); b += chunk_frames) {
        const std::size_t e = std::min(b + chunk_frames, set.frames());
        const nn::Tensor4 y = nn::model_predict(model, detail::gather(set.input, idx, b, e, stacked));
        const nn::Tensor4 t = detail::gather(set.target, idx, b, e, stacked);
        for (std::size_t i = 0; i < y.size(); ++i) total += (y[i] - t[i]) * (y[i] - t[i]);
    }
    return norm.std * norm.std * total / (2.0 * static_cast<double>(set.frames()));
}

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

inline void to_json(json& j, const EpochLog& e) {
    j = {{"epoch", e.epoch}, {"lr", e.lr}, {"train_loss", e.train_loss},
         {"val_loss", std::isfinite(e.val_loss) ? json(e.val_loss) : json(nullptr)}};
}

inline void from_json(const json& j, EpochLog& e) {
    e.epoch = j.at("epoch").get<std::size_t>();
    e.lr = j.at("lr").get<double>();
    e.train_loss = j.at("train_loss").get<double>();
    e.val_loss = j.at("val_loss").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("val_loss").get<double>();
}

struct TrainResult {
    nn::Model final_model;
    nn::Model best_model;  // lowest validation loss; equals final without validation data
    std::size_t best_epoch = 0;
    data::NormalizationStats norm;
    std::vector<EpochLog> history;
};

struct TrainOptions {
    std::size_t micro_batch_frames = 2;  // frames per forward/backward pass; does not change the result's maths
    std::function<void(const EpochLog&)> on_epoch;
};

/// Mini-batch Adam on (normalized LS planes -> H planes). Each batch of
/// `batch_frames` frames contributes 2 * batch_frames plane samples; the loss
/// is their mean squared Frobenius error in denormalized units.
inline TrainResult train(const ExperimentConfig& cfg, const data::DatasetFile& train_set,
                         const data::DatasetFile& val_set, const TrainOptions& opts = {}) {
    cfg.validate();
    if (train_set.samples.empty()) throw ConfigError("train: empty training set");
    if (train_set.header.n != cfg.n() || train_set.header.m != cfg.m())
        throw ConfigError("train: dataset dimensions differ from the configuration");
    if (!val_set.samples.empty() && (val_set.header.n != train_set.header.n || val_set.header.m != train_set.header.m))
        throw ConfigError("train: validation dimensions differ from training");
    if (opts.micro_batch_frames == 0) throw ConfigError("train: micro batch must be > 0");

    TrainResult res;
    res.norm = data::fit_normalization(train_set);
    const TensorSet tr = to_tensors(train_set, res.norm);
    const TensorSet va = to_tensors(val_set, res.norm);
    const bool stacked = cfg.architecture.io_channels == 2;
    const double scale = res.norm.std * res.norm.std;

    nn::Model model = models::build_model(cfg.architecture, cfg.seeds.init);
    res.best_model = model;
    double best_val = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> order(tr.frames());
    const std::size_t bf = cfg.schedule.batch_frames;
    for (std::size_t epoch = 0; epoch < cfg.schedule.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(cfg.seeds.shuffle, {epoch}));
        std::shuffle(order.begin(), order.end(), rng);

        model.adam.lr = cfg.schedule.lr(epoch);
        double epoch_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t b = 0; b < order.size(); b += bf, ++batch_index) {
            const std::size_t e = std::min(b + bf, order.size());
            const double planes = 2.0 * static_cast<double>(e - b);
            nn::ModelGrads acc;
            double batch_loss = 0.0;
            for (std::size_t c = b; c < e; c += opts.micro_batch_frames) {
                const std::size_t ce = std::min(c + opts.micro_batch_frames, e);
                auto cache = nn::model_forward(model, detail::gather(tr.input, order, c, ce, stacked));
                const nn::Tensor4 target = detail::gather(tr.target, order, c, ce, stacked);
                nn::LossResult l = nn::mse_loss(cache.output, target, planes);
                // d/dy of std^2 * loss in normalized units
                for (auto& g : l.grad.span()) g *= scale;
                batch_loss += scale * l.loss;
                nn::accumulate(acc, nn::model_backward(model, std::move(cache), std::move(l.grad), false));
            }
            if (!std::isfinite(batch_loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(batch_index));
            try {
                nn::adam_step(model, acc);
            } catch (const NumericError& ex) {
                throw NumericError("train: epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_index) +
                                   ": " + ex.what());
            }
            epoch_sum += batch_loss * planes;
        }

        EpochLog log{epoch, model.adam.lr, epoch_sum / (2.0 * static_cast<double>(order.size())),
                     set_loss(model, va, res.norm)};
        if (va.frames() > 0 && !std::isfinite(log.val_loss))
            throw NumericError("train: non-finite validation loss at epoch " + std::to_string(epoch));
        if (va.frames() == 0 || log.val_loss < best_val) {
            best_val = va.frames() == 0 ? best_val : log.val_loss;
            res.best_model = model;
            res.best_epoch = epoch;
        }
        res.history.push_back(log);
        if (opts.on_epoch) opts.on_epoch(log);
    }
    res.final_model = std::move(model);
    return res;
}

/// Checkpoint metadata shared by the final and best-validation models.
inline json checkpoint_metadata(const ExperimentConfig& cfg, const TrainResult& r, const std::string& which) {
    return {{"checkpoint", which},
            {"architecture", cfg.architecture},
            {"normalization", {{"mean", r.norm.mean}, {"std", r.norm.std}}},
            {"N", cfg.n()},
            {"M", cfg.m()},
            {"pilots", cfg.pilots},
            {"train_snr_db", cfg.train_snr_db},
            {"best_epoch", r.best_epoch},
            {"history", r.history},
            {"config", cfg}};
}

inline data::NormalizationStats normalization_from(const json& metadata) {
    data::NormalizationStats s{metadata.at("normalization").at("mean").get<double>(),
                               metadata.at("normalization").at("std").get<double>()};
    s.validate();
    return s;
}

}  // namespace srce::harness
