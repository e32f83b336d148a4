#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "srce/nn/conv.hpp"
#include "srce/random.hpp"

namespace srce::nn {

/// Kernel ~ Normal(0, 2 / fan_in) with fan_in = in_channels * kh * kw; bias = 0.
inline void he_init(ConvLayer& layer, std::uint64_t seed) {
    const double fan_in = static_cast<double>(layer.in_channels() * layer.kernel_h() * layer.kernel_w());
    Rng rng(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(2.0 / fan_in));
    for (auto& w : layer.kernel.span()) w = n(rng);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
}

}  // namespace srce::nn
