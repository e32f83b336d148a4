#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "srce/error.hpp"

namespace srce::nn {

struct AdamState {
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
    std::size_t step_count = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct ParamSlot {
    std::span<double> value;
    std::span<const double> grad;
    std::string name;
};

/// One bias-corrected Adam update over every slot. Gradients are checked for
/// finiteness before any parameter is touched.
inline void adam_step(std::span<const ParamSlot> slots, AdamState& state) {
    if (state.first_moment.empty()) {
        for (const auto& s : slots) {
            state.first_moment.emplace_back(s.value.size(), 0.0);
            state.second_moment.emplace_back(s.value.size(), 0.0);
        }
    }
    if (state.first_moment.size() != slots.size()) throw InputError("adam_step: state/parameter count mismatch");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& s = slots[i];
        if (s.grad.size() != s.value.size() || state.first_moment[i].size() != s.value.size())
            throw InputError("adam_step: shape mismatch for " + s.name);
        for (double g : s.grad)
            if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in " + s.name);
    }
    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        const auto& s = slots[i];
        for (std::size_t j = 0; j < s.value.size(); ++j) {
            const double g = s.grad[j];
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g;
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g * g;
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            s.value[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

}  // namespace srce::nn
