#pragma once

#include <optional>

#include "srce/nn/tensor.hpp"

namespace srce::nn {

struct LossResult {
    double loss = 0.0;
    Tensor4 grad;
};

/// loss = (1/S) * sum ||pred - target||^2, grad = (2/S)(pred - target).
/// S defaults to the batch size; a larger S lets callers split a batch.
inline LossResult mse_loss(const Tensor4& pred, const Tensor4& target, std::optional<double> normalizer = {}) {
    require_same_shape(pred, target, "mse_loss");
    const double s = normalizer.value_or(static_cast<double>(pred.batch()));
    if (!(s > 0.0)) throw InputError("mse_loss: empty batch");
    LossResult r{0.0, Tensor4(pred.dims())};
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
        r.grad[i] = 2.0 * d / s;
    }
    r.loss = acc / s;
    return r;
}

}  // namespace srce::nn
