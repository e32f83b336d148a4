#pragma once

#include "srce/nn/tensor.hpp"

namespace srce::nn {

inline Tensor4 relu_forward(const Tensor4& x) {
    Tensor4 y = Tensor4::uninitialized(x.dims());
    const double* src = x.data();
    double* dst = y.data();
    for (std::size_t i = 0, n = x.size(); i < n; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
    return y;
}

// Subgradient at 0 is 0.
inline Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out) {
    require_same_shape(x, grad_out, "relu_backward");
    Tensor4 g = Tensor4::uninitialized(x.dims());
    const double* xs = x.data();
    const double* go = grad_out.data();
    double* dst = g.data();
    for (std::size_t i = 0, n = x.size(); i < n; ++i) dst[i] = xs[i] > 0.0 ? go[i] : 0.0;
    return g;
}

inline void relu_inplace(Tensor4& x) {
    double* p = x.data();
    for (std::size_t i = 0, n = x.size(); i < n; ++i) p[i] = p[i] > 0.0 ? p[i] : 0.0;
}

// Masks grad in place where x <= 0.
inline void relu_backward_inplace(const Tensor4& x, Tensor4& grad) {
    require_same_shape(x, grad, "relu_backward");
    const double* xs = x.data();
    double* g = grad.data();
    for (std::size_t i = 0, n = x.size(); i < n; ++i) g[i] = xs[i] > 0.0 ? g[i] : 0.0;
}

}  // namespace srce::nn
