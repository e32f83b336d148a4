#pragma once

#include <string>
#include <variant>
#include <vector>

#include "srce/error.hpp"
#include "srce/nn/activation.hpp"
#include "srce/nn/adam.hpp"
#include "srce/nn/conv.hpp"
#include "srce/nn/tensor.hpp"

namespace srce::nn {

struct Relu {
    bool operator==(const Relu&) const = default;
};

using Layer = std::variant<ConvLayer, Relu>;

struct Model {
    std::vector<Layer> layers;
    AdamState adam;

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers)
            if (const auto* c = std::get_if<ConvLayer>(&l)) n += c->parameter_count();
        return n;
    }

    std::vector<const ConvLayer*> conv_layers() const {
        std::vector<const ConvLayer*> out;
        for (const auto& l : layers)
            if (const auto* c = std::get_if<ConvLayer>(&l)) out.push_back(c);
        return out;
    }

    /// Checks that adjacent conv layers agree on channel counts.
    void validate() const {
        std::size_t prev = 0;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const auto* c = std::get_if<ConvLayer>(&layers[i]);
            if (!c) continue;
            if (prev != 0 && c->in_channels() != prev)
                throw ConfigError("model: layer " + std::to_string(i) + " expects " + std::to_string(c->in_channels()) +
                                  " channels, previous layer produces " + std::to_string(prev));
            prev = c->out_channels();
        }
    }

    std::size_t input_channels() const {
        for (const auto& l : layers)
            if (const auto* c = std::get_if<ConvLayer>(&l)) return c->in_channels();
        return 0;
    }
};

/// Activations kept for backward. inputs[i] is the input to layer i (left
/// empty for ReLU layers, whose backward uses the output sign); output is
/// the network output. Consumed by model_backward.
struct ForwardCache {
    std::vector<Tensor4> inputs;
    Tensor4 output;
};

inline ForwardCache model_forward(const Model& model, Tensor4 input) {
    ForwardCache cache;
    cache.inputs.reserve(model.layers.size());
    Tensor4 x = std::move(input);
    for (const auto& layer : model.layers) {
        if (const auto* c = std::get_if<ConvLayer>(&layer)) {
            Tensor4 y = layer_forward(x, *c);
            cache.inputs.push_back(std::move(x));
            x = std::move(y);
        } else {
            relu_inplace(x);
            cache.inputs.emplace_back();
        }
    }
    cache.output = std::move(x);
    return cache;
}

inline Tensor4 model_predict(const Model& model, Tensor4 input) {
    Tensor4 x = std::move(input);
    for (const auto& layer : model.layers) {
        if (const auto* c = std::get_if<ConvLayer>(&layer))
            x = layer_forward(x, *c);
        else
            relu_inplace(x);
    }
    return x;
}

struct LayerGrads {
    Tensor4 kernel;
    std::vector<double> bias;
};

/// Gradients for every conv layer in layer order, plus d(loss)/d(input).
struct ModelGrads {
    std::vector<LayerGrads> layers;
    Tensor4 input;
};

/// With need_input_grad = false, grads.input is left empty and the first
/// layer skips its input gradient.
inline ModelGrads model_backward(const Model& model, ForwardCache&& cache, Tensor4 grad_out,
                                 bool need_input_grad = true) {
    require_same_shape(cache.output, grad_out, "model_backward");
    if (cache.inputs.size() != model.layers.size()) throw InputError("model_backward: cache does not match model");
    ModelGrads grads;
    Tensor4 g = std::move(grad_out);
    // output of layer i, needed by ReLU backward
    const Tensor4* next_out = &cache.output;
    std::vector<LayerGrads> rev;
    for (std::size_t i = model.layers.size(); i-- > 0;) {
        if (const auto* c = std::get_if<ConvLayer>(&model.layers[i])) {
            ConvGrads cg = layer_backward(cache.inputs[i], *c, g, need_input_grad || i > 0);
            rev.push_back({std::move(cg.kernel), std::move(cg.bias)});
            g = std::move(cg.input);
            next_out = &cache.inputs[i];
        } else {
            // y > 0 exactly where x > 0
            relu_backward_inplace(*next_out, g);
        }
    }
    grads.layers.assign(std::make_move_iterator(rev.rbegin()), std::make_move_iterator(rev.rend()));
    grads.input = std::move(g);
    cache = ForwardCache{};
    return grads;
}

/// Adds b into a (same structure).
inline void accumulate(ModelGrads& a, const ModelGrads& b) {
    if (a.layers.empty()) {
        a.layers = b.layers;
        return;
    }
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        for (std::size_t j = 0; j < a.layers[i].kernel.size(); ++j) a.layers[i].kernel[j] += b.layers[i].kernel[j];
        for (std::size_t j = 0; j < a.layers[i].bias.size(); ++j) a.layers[i].bias[j] += b.layers[i].bias[j];
    }
}

inline void adam_step(Model& model, const ModelGrads& grads) {
    std::vector<ParamSlot> slots;
    std::size_t ci = 0;
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        auto* c = std::get_if<ConvLayer>(&model.layers[i]);
        if (!c) continue;
        if (ci >= grads.layers.size()) throw InputError("adam_step: missing gradients");
        const auto& lg = grads.layers[ci++];
        slots.push_back({c->kernel.span(), lg.kernel.span(), "layer " + std::to_string(i) + " kernel"});
        slots.push_back({c->bias, lg.bias, "layer " + std::to_string(i) + " bias"});
    }
    adam_step(slots, model.adam);
}

}  // namespace srce::nn
