#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "srce/config.hpp"
#include "srce/dataset/dataset_file.hpp"
#include "srce/dataset/generate.hpp"
#include "srce/dataset/normalization.hpp"
#include "srce/estimators/estimators.hpp"
#include "srce/harness/report.hpp"
#include "srce/models/architecture.hpp"
#include "srce/nn/model.hpp"
#include "srce/ofdm/frame.hpp"

namespace srce::harness {

/// A trained network and the statistics its inputs were normalized with.
struct NamedModel {
    std::string name;
    nn::Model model;
    data::NormalizationStats norm;
};

/// R_{HpHp} and beta for one (channel, pilots, modulation) condition.
struct Baselines {
    ofdm::PilotPattern pattern;
    std::shared_ptr<const est::LmmseEstimator> lmmse;

    static Baselines make(const ExperimentConfig& cfg) {
        const auto pattern = ofdm::PilotPattern::comb(cfg.n(), cfg.pilots);
        const auto hs = data::autocorrelation_channels(cfg);
        auto r = est::empirical_autocorrelation(hs, pattern);
        return Baselines{pattern, std::make_shared<const est::LmmseEstimator>(
                                      std::move(r), est::beta_constant(ofdm::Constellation::make(cfg.modulation)))};
    }
};

using EstimatorFn = std::function<ofdm::ChannelMatrix(const data::Sample&)>;

/// Mean over test frames of ||H_hat - H||_F^2 / (N M).
inline MseRow evaluate_estimator(const data::DatasetFile& test, const std::string& name, const EstimatorFn& fn) {
    double acc = 0.0;
    for (const auto& s : test.samples) acc += est::mse(fn(s), data::planes_to_complex(s.target));
    const auto& h = test.header;
    return {name, h.snr.value_db(), h.pilots, ofdm::to_string(h.modulation),
            test.samples.empty() ? 0.0 : acc / static_cast<double>(test.samples.size()), test.samples.size()};
}

/// LS / LMMSE / MMSE (when `baselines` is given) and every network on one
/// test set. LMMSE uses the set's true SNR.
inline std::vector<MseRow> evaluate(const data::DatasetFile& test, const Baselines* baselines,
                                    const std::vector<NamedModel>& nets) {
    const auto& h = test.header;
    for (const auto& net : nets) {
        if (net.model.input_channels() != 1 && net.model.input_channels() != 2)
            throw ConfigError("evaluate: model '" + net.name + "' has unsupported input channels");
        net.norm.validate();
    }
    std::vector<MseRow> rows;
    const auto ls = [](const data::Sample& s) { return data::planes_to_complex(s.input); };
    if (baselines) {
        if (baselines->pattern.size() != h.pilots)
            throw ConfigError("evaluate: baseline pilot count differs from the test set");
        const est::Interpolator interp(baselines->pattern.positions, h.n, h.interpolation);
        const auto lm = baselines->lmmse->filter(h.snr);
        const auto mm = est::mmse_filter(baselines->lmmse->autocorrelation(), baselines->pattern.symbols,
                                         h.snr.noise_variance());
        rows.push_back(evaluate_estimator(test, "LS", ls));
        rows.push_back(evaluate_estimator(test, "LMMSE", [&](const data::Sample& s) {
            return est::refilter_ls_grid(ls(s), interp, *lm);
        }));
        rows.push_back(evaluate_estimator(test, "MMSE", [&](const data::Sample& s) {
            return est::refilter_ls_grid(ls(s), interp, mm);
        }));
    }
    for (const auto& net : nets)
        rows.push_back(evaluate_estimator(test, net.name, [&](const data::Sample& s) {
            return models::refine(net.model, ls(s), net.norm);
        }));
    return rows;
}

}  // namespace srce::harness
