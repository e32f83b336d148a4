#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "json.hpp"

#include "srce/config.hpp"
#include "srce/dataset/dataset_file.hpp"
#include "srce/dataset/generate.hpp"
#include "srce/harness/evaluate.hpp"
#include "srce/harness/train.hpp"
#include "srce/nn/checkpoint.hpp"

namespace srce::harness {

namespace fs = std::filesystem;

inline constexpr const char* kTrainingKeyVersion = "srce-train-1";

/// Cache key of a training run: architecture, schedule, init/shuffle seeds
/// and the exact bytes of the training and validation sets. Conditions that
/// produce identical datasets share a model.
inline std::string training_key(const ExperimentConfig& cfg, const data::DatasetFile& train_set,
                                const data::DatasetFile& val_set) {
    const json k = {{"v", kTrainingKeyVersion},
                    {"architecture", cfg.architecture},
                    {"schedule", cfg.schedule},
                    {"init", cfg.seeds.init},
                    {"shuffle", cfg.seeds.shuffle}};
    std::uint64_t h = fnv1a(k.dump());
    for (const auto* set : {&train_set, &val_set}) {
        h = fnv1a(&set->header.n, sizeof set->header.n, h);
        h = fnv1a(&set->header.m, sizeof set->header.m, h);
        for (const auto& s : set->samples)
            for (const auto* p : {&s.input.real_plane, &s.input.imag_plane, &s.target.real_plane, &s.target.imag_plane})
                h = fnv1a(p->data(), static_cast<std::size_t>(p->size()) * sizeof(double), h);
    }
    return hex64(h);
}

struct TrainedModel {
    NamedModel net;           // the final model (no early stopping)
    json metadata;
    fs::path final_manifest;
    fs::path best_manifest;
    bool from_cache = false;
};

/// Output tree: datasets/, models/<arch>-<key>/{final,best}.{json,bin}, reports/.
class Workspace {
public:
    explicit Workspace(fs::path root) : root_(std::move(root)) {}

    const fs::path& root() const noexcept { return root_; }
    fs::path datasets() const { return root_ / "datasets"; }
    fs::path models() const { return root_ / "models"; }
    fs::path reports() const { return root_ / "reports"; }

    /// Trains the configured model at cfg.train_snr_db, or loads it when an
    /// identical run is already on disk.
    TrainedModel train_cached(const ExperimentConfig& cfg, const TrainOptions& opts = {},
                              const std::function<void(const std::string&)>& log = {}) const {
        const Snr snr = Snr::db(cfg.train_snr_db);
        const auto tr = data::generate_dataset(cfg, data::Split::Train, cfg.sizes.train_frames, snr);
        const auto va = data::generate_dataset(cfg, data::Split::Val, cfg.sizes.val_frames, snr);
        std::string arch = cfg.architecture.name();
        for (auto& c : arch) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const fs::path dir = models() / (arch + "-" + training_key(cfg, tr, va));
        TrainedModel out;
        out.final_manifest = dir / "final.json";
        out.best_manifest = dir / "best.json";
        if (fs::exists(out.final_manifest) && fs::exists(out.best_manifest)) {
            if (log) log("loading cached model " + out.final_manifest.string());
            auto ck = nn::load_checkpoint(out.final_manifest.string());
            out.net = {cfg.architecture.estimator_name(), std::move(ck.model), normalization_from(ck.metadata)};
            out.metadata = std::move(ck.metadata);
            out.from_cache = true;
            return out;
        }
        if (log) log("training " + cfg.architecture.name() + " at " + Snr::db(cfg.train_snr_db).to_string() + ", " +
                     std::to_string(cfg.pilots) + " pilots -> " + dir.string());
        TrainOptions o = opts;
        if (!o.on_epoch && log)
            o.on_epoch = [&](const EpochLog& e) {
                log("  epoch " + std::to_string(e.epoch) + " lr " + format_double(e.lr) + " train " +
                    format_double(e.train_loss) + " val " + format_double(e.val_loss));
            };
        TrainResult r = train(cfg, tr, va, o);
        fs::create_directories(dir);
        // best first: a present final.json marks a complete run
        nn::save_checkpoint(out.best_manifest.string(), r.best_model, checkpoint_metadata(cfg, r, "best"));
        out.metadata = checkpoint_metadata(cfg, r, "final");
        nn::save_checkpoint(out.final_manifest.string(), r.final_model, out.metadata);
        out.net = {cfg.architecture.estimator_name(), std::move(r.final_model), r.norm};
        return out;
    }

private:
    fs::path root_;
};

}  // namespace srce::harness
