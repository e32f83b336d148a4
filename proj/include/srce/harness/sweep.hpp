#pragma once

#include <functional>
#include <string>
#include <vector>

#include "srce/config.hpp"
#include "srce/dataset/generate.hpp"
#include "srce/harness/evaluate.hpp"
#include "srce/harness/report.hpp"
#include "srce/harness/workspace.hpp"

namespace srce::harness {

struct SweepContext {
    const Workspace* workspace = nullptr;  // required: models are cached there
    TrainOptions train;
    std::function<void(const std::string&)> log;
};

namespace detail {

inline void begin(MseReport& out, const ExperimentConfig& cfg, const std::string& sweep, std::size_t expected) {
    out.metadata["sweep"] = sweep;
    out.metadata["config"] = cfg;
    out.metadata["seeds"] = cfg.seeds;
    out.metadata["expected_cells"] = expected;
    out.metadata["complete"] = false;
}

inline void finish(MseReport& out) {
    out.metadata["complete"] = report_complete(out, out.metadata.at("expected_cells").get<std::size_t>());
}

inline const Workspace& need_workspace(const SweepContext& ctx) {
    if (!ctx.workspace) throw ConfigError("sweep: no workspace configured");
    return *ctx.workspace;
}

/// Evaluates baselines (optional) and `nets` over cfg.test_snr_grid,
/// appending rows to `out` one SNR at a time.
inline void evaluate_grid(const ExperimentConfig& cfg, const Baselines* baselines, const std::vector<NamedModel>& nets,
                          MseReport& out, const SweepContext& ctx) {
    for (double s : cfg.test_snr_grid) {
        if (ctx.log) ctx.log("evaluating " + std::to_string(cfg.pilots) + " pilots at " + format_double(s) + " dB");
        const auto test = data::generate_dataset(cfg, data::Split::Test, cfg.sizes.test_frames, Snr::db(s));
        for (auto& r : evaluate(test, baselines, nets)) out.rows.push_back(std::move(r));
    }
}

}  // namespace detail

/// One model per architecture at cfg.train_snr_db, evaluated with LS, LMMSE
/// and MMSE over the test grid.
inline void sweep_snr(const ExperimentConfig& cfg, const std::vector<models::ArchitectureSpec>& archs, MseReport& out,
                      const SweepContext& ctx) {
    cfg.validate();
    if (archs.empty()) throw ConfigError("sweep snr: no architectures");
    detail::begin(out, cfg, "snr", (3 + archs.size()) * cfg.test_snr_grid.size());
    std::vector<NamedModel> nets;
    for (const auto& a : archs) {
        ExperimentConfig c = cfg;
        c.architecture = a;
        nets.push_back(detail::need_workspace(ctx).train_cached(c, ctx.train, ctx.log).net);
    }
    const auto base = Baselines::make(cfg);
    detail::evaluate_grid(cfg, &base, nets, out, ctx);
    detail::finish(out);
}

/// One model and one set of baselines per pilot count.
inline void sweep_pilots(const ExperimentConfig& cfg, const std::vector<std::size_t>& pilots, MseReport& out,
                         const SweepContext& ctx) {
    cfg.validate();
    if (pilots.empty()) throw ConfigError("sweep pilots: empty pilot list");
    detail::begin(out, cfg, "pilots", 4 * pilots.size() * cfg.test_snr_grid.size());
    for (std::size_t p : pilots) {
        ExperimentConfig c = cfg;
        c.pilots = p;
        c.validate();
        const std::vector<NamedModel> nets{detail::need_workspace(ctx).train_cached(c, ctx.train, ctx.log).net};
        const auto base = Baselines::make(c);
        detail::evaluate_grid(c, &base, nets, out, ctx);
    }
    detail::finish(out);
}

/// FSRCNN-x for each x, with shared baselines.
inline void sweep_layers(const ExperimentConfig& cfg, const std::vector<std::size_t>& mapping_layers, MseReport& out,
                         const SweepContext& ctx) {
    cfg.validate();
    if (mapping_layers.empty()) throw ConfigError("sweep layers: empty layer list");
    detail::begin(out, cfg, "layers", (3 + mapping_layers.size()) * cfg.test_snr_grid.size());
    std::vector<NamedModel> nets;
    for (std::size_t x : mapping_layers) {
        ExperimentConfig c = cfg;
        c.architecture = models::ArchitectureSpec::fsrcnn(x);
        c.architecture.io_channels = cfg.architecture.io_channels;
        c.validate();
        nets.push_back(detail::need_workspace(ctx).train_cached(c, ctx.train, ctx.log).net);
    }
    const auto base = Baselines::make(cfg);
    detail::evaluate_grid(cfg, &base, nets, out, ctx);
    detail::finish(out);
}

/// Estimator name of the model trained at `train_snr_db` in a mismatch sweep.
inline std::string mismatch_name(const ExperimentConfig& cfg, double train_snr_db) {
    return cfg.architecture.estimator_name() + "@" + format_double(train_snr_db) + "dB";
}

/// One model per training SNR, each evaluated over the full test grid.
inline void sweep_mismatch(const ExperimentConfig& cfg, const std::vector<double>& train_snrs, MseReport& out,
                           const SweepContext& ctx) {
    cfg.validate();
    if (train_snrs.empty()) throw ConfigError("sweep mismatch: empty training SNR list");
    detail::begin(out, cfg, "mismatch", (3 + train_snrs.size()) * cfg.test_snr_grid.size());
    std::vector<NamedModel> nets;
    for (double s : train_snrs) {
        ExperimentConfig c = cfg;
        c.train_snr_db = s;
        c.validate();
        auto net = detail::need_workspace(ctx).train_cached(c, ctx.train, ctx.log).net;
        net.name = mismatch_name(cfg, s);
        nets.push_back(std::move(net));
    }
    const auto base = Baselines::make(cfg);
    detail::evaluate_grid(cfg, &base, nets, out, ctx);
    detail::finish(out);
}

}  // namespace srce::harness
