#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srce/error.hpp"
#include "srce/nn/tensor.hpp"

namespace srce::nn {

/// Stride-1 convolution or transposed convolution with "same" zero padding.
///
/// For an ordinary layer kernel is (out, in, kh, kw). A transposed layer
/// applies the adjoint of the convolution described by its kernel, so its
/// kernel is (in, out, kh, kw): the same array gives <deconv(x), y> = <x, conv(y)>.
struct ConvLayer {
    Tensor4 kernel;
    std::vector<double> bias;
    bool transposed = false;

    static ConvLayer make(std::size_t in_channels, std::size_t out_channels, std::size_t kh, std::size_t kw,
                          bool transposed = false) {
        if (kh % 2 == 0 || kw % 2 == 0) throw ConfigError("conv: kernel sizes must be odd");
        if (in_channels == 0 || out_channels == 0) throw ConfigError("conv: channel counts must be > 0");
        ConvLayer l;
        l.transposed = transposed;
        l.kernel = transposed ? Tensor4(in_channels, out_channels, kh, kw) : Tensor4(out_channels, in_channels, kh, kw);
        l.bias.assign(out_channels, 0.0);
        return l;
    }

    std::size_t in_channels() const noexcept { return transposed ? kernel.dims()[0] : kernel.dims()[1]; }
    std::size_t out_channels() const noexcept { return transposed ? kernel.dims()[1] : kernel.dims()[0]; }
    std::size_t kernel_h() const noexcept { return kernel.dims()[2]; }
    std::size_t kernel_w() const noexcept { return kernel.dims()[3]; }
    std::size_t pad_h() const noexcept { return (kernel_h() - 1) / 2; }
    std::size_t pad_w() const noexcept { return (kernel_w() - 1) / 2; }
    std::size_t parameter_count() const noexcept { return kernel.size() + bias.size(); }
    // Channels of the underlying (non-transposed) convolution's input.
    std::size_t im2col_channels() const noexcept { return kernel.dims()[1]; }

    bool operator==(const ConvLayer&) const = default;
};

struct ConvGrads {
    Tensor4 input;
    Tensor4 kernel;
    std::vector<double> bias;
};

namespace detail {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using CMatMap = Eigen::Map<const Eigen::MatrixXd>;

// col(p, (c*kh + i)*kw + j) = x[c][h + i - ph][w + j - pw], zero outside.
inline void im2col(const double* x, std::size_t c, std::size_t h, std::size_t w, std::size_t kh, std::size_t kw,
                   Eigen::MatrixXd& col) {
    const std::size_t hw = h * w;
    const auto ph = static_cast<std::ptrdiff_t>((kh - 1) / 2), pw = static_cast<std::ptrdiff_t>((kw - 1) / 2);
    col.resize(static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(c * kh * kw));
    double* dst = col.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double* xc = x + ch * hw;
        for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j, dst += hw) {
                const std::ptrdiff_t di = static_cast<std::ptrdiff_t>(i) - ph;
                const std::ptrdiff_t dj = static_cast<std::ptrdiff_t>(j) - pw;
                const std::ptrdiff_t w0 = std::max<std::ptrdiff_t>(0, -dj);
                const std::ptrdiff_t w1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w), static_cast<std::ptrdiff_t>(w) - dj);
                for (std::size_t r = 0; r < h; ++r) {
                    double* out = dst + r * w;
                    const std::ptrdiff_t rs = static_cast<std::ptrdiff_t>(r) + di;
                    if (rs < 0 || rs >= static_cast<std::ptrdiff_t>(h) || w0 >= w1) {
                        std::fill(out, out + w, 0.0);
                        continue;
                    }
                    const double* src = xc + static_cast<std::size_t>(rs) * w;
                    std::fill(out, out + w0, 0.0);
                    for (std::ptrdiff_t q = w0; q < w1; ++q) out[q] = src[q + dj];
                    std::fill(out + w1, out + w, 0.0);
                }
            }
        }
    }
}

// Adjoint of im2col: x[c][h + i - ph][w + j - pw] += col(p, q).  x must be zeroed by the caller.
inline void col2im_add(const Eigen::MatrixXd& col, std::size_t c, std::size_t h, std::size_t w, std::size_t kh,
                       std::size_t kw, double* x) {
    const std::size_t hw = h * w;
    const auto ph = static_cast<std::ptrdiff_t>((kh - 1) / 2), pw = static_cast<std::ptrdiff_t>((kw - 1) / 2);
    const double* src = col.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
        double* xc = x + ch * hw;
        for (std::size_t i = 0; i < kh; ++i) {
            for (std::size_t j = 0; j < kw; ++j, src += hw) {
                const std::ptrdiff_t di = static_cast<std::ptrdiff_t>(i) - ph;
                const std::ptrdiff_t dj = static_cast<std::ptrdiff_t>(j) - pw;
                const std::ptrdiff_t w0 = std::max<std::ptrdiff_t>(0, -dj);
                const std::ptrdiff_t w1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w), static_cast<std::ptrdiff_t>(w) - dj);
                for (std::size_t r = 0; r < h; ++r) {
                    const std::ptrdiff_t rs = static_cast<std::ptrdiff_t>(r) + di;
                    if (rs < 0 || rs >= static_cast<std::ptrdiff_t>(h)) continue;
                    const double* in = src + r * w;
                    double* dst = xc + static_cast<std::size_t>(rs) * w;
                    for (std::ptrdiff_t q = w0; q < w1; ++q) dst[q + dj] += in[q];
                }
            }
        }
    }
}

inline bool is_pointwise(const ConvLayer& l) { return l.kernel_h() == 1 && l.kernel_w() == 1; }

inline void check_input(const Tensor4& input, const ConvLayer& layer, bool transposed, const char* op) {
    if (layer.transposed != transposed)
        throw InputError(std::string(op) + (transposed ? ": layer is not transposed" : ": layer is transposed"));
    if (input.channels() != layer.in_channels())
        throw InputError(std::string(op) + ": input has " + std::to_string(input.channels()) + " channels, layer expects " +
                         std::to_string(layer.in_channels()));
    if (layer.bias.size() != layer.out_channels()) throw InputError(std::string(op) + ": bias size mismatch");
}

inline void add_bias(double* out, std::size_t hw, const std::vector<double>& bias) {
    MatMap o(out, static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(bias.size()));
    o.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
}

}  // namespace detail

/// Cross-correlation with zero "same" padding, stride 1, plus per-channel bias.
inline Tensor4 conv2d_forward(const Tensor4& input, const ConvLayer& layer) {
    detail::check_input(input, layer, false, "conv2d_forward");
    const std::size_t h = input.height(), w = input.width(), hw = h * w;
    const std::size_t cin = layer.in_channels(), cout = layer.out_channels();
    const auto k = static_cast<Eigen::Index>(cin * layer.kernel_h() * layer.kernel_w());
    Tensor4 out = Tensor4::uninitialized({input.batch(), cout, h, w});
    detail::CMatMap kmat(layer.kernel.data(), k, static_cast<Eigen::Index>(cout));
    Eigen::MatrixXd col;
    for (std::size_t b = 0; b < input.batch(); ++b) {
        detail::MatMap o(out.sample(b), static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(cout));
        if (detail::is_pointwise(layer)) {
            o.noalias() = detail::CMatMap(input.sample(b), static_cast<Eigen::Index>(hw), k) * kmat;
        } else {
            detail::im2col(input.sample(b), cin, h, w, layer.kernel_h(), layer.kernel_w(), col);
            o.noalias() = col * kmat;
        }
        detail::add_bias(out.sample(b), hw, layer.bias);
    }
    return out;
}

/// Gradients of conv2d_forward. With need_input_grad = false the returned
/// input gradient is empty (first layer of a network).
inline ConvGrads conv2d_backward(const Tensor4& input, const ConvLayer& layer, const Tensor4& grad_out,
                                 bool need_input_grad = true) {
    detail::check_input(input, layer, false, "conv2d_backward");
    const std::size_t h = input.height(), w = input.width(), hw = h * w;
    const std::size_t cin = layer.in_channels(), cout = layer.out_channels();
    if (grad_out.dims() != Tensor4::Dims{input.batch(), cout, h, w}) throw InputError("conv2d_backward: grad_out shape mismatch");
    const auto k = static_cast<Eigen::Index>(cin * layer.kernel_h() * layer.kernel_w());
    ConvGrads g{need_input_grad ? Tensor4(input.dims()) : Tensor4(), Tensor4(layer.kernel.dims()),
                std::vector<double>(cout, 0.0)};
    detail::CMatMap kmat(layer.kernel.data(), k, static_cast<Eigen::Index>(cout));
    detail::MatMap gk(g.kernel.data(), k, static_cast<Eigen::Index>(cout));
    Eigen::Map<Eigen::RowVectorXd> gb(g.bias.data(), static_cast<Eigen::Index>(cout));
    Eigen::MatrixXd col, gcol;
    for (std::size_t b = 0; b < input.batch(); ++b) {
        detail::CMatMap go(grad_out.sample(b), static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(cout));
        gb += go.colwise().sum();
        if (detail::is_pointwise(layer)) {
            detail::CMatMap x(input.sample(b), static_cast<Eigen::Index>(hw), k);
            gk.noalias() += x.transpose() * go;
            if (need_input_grad)
                detail::MatMap(g.input.sample(b), static_cast<Eigen::Index>(hw), k).noalias() = go * kmat.transpose();
        } else {
            detail::im2col(input.sample(b), cin, h, w, layer.kernel_h(), layer.kernel_w(), col);
            gk.noalias() += col.transpose() * go;
            if (need_input_grad) {
                gcol.noalias() = go * kmat.transpose();
                detail::col2im_add(gcol, cin, h, w, layer.kernel_h(), layer.kernel_w(), g.input.sample(b));
            }
        }
    }
    return g;
}

/// Transposed convolution: the adjoint of conv2d_forward's linear map for the
/// same kernel, plus bias.
inline Tensor4 deconv2d_forward(const Tensor4& input, const ConvLayer& layer) {
    detail::check_input(input, layer, true, "deconv2d_forward");
    const std::size_t h = input.height(), w = input.width(), hw = h * w;
    const std::size_t cin = layer.in_channels(), cout = layer.out_channels();
    const auto k = static_cast<Eigen::Index>(cout * layer.kernel_h() * layer.kernel_w());
    Tensor4 out(input.batch(), cout, h, w);
    detail::CMatMap kmat(layer.kernel.data(), k, static_cast<Eigen::Index>(cin));
    Eigen::MatrixXd col;
    for (std::size_t b = 0; b < input.batch(); ++b) {
        detail::CMatMap x(input.sample(b), static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(cin));
        if (detail::is_pointwise(layer)) {
            detail::MatMap(out.sample(b), static_cast<Eigen::Index>(hw), k).noalias() = x * kmat.transpose();
        } else {
            col.noalias() = x * kmat.transpose();
            detail::col2im_add(col, cout, h, w, layer.kernel_h(), layer.kernel_w(), out.sample(b));
        }
        detail::add_bias(out.sample(b), hw, layer.bias);
    }
    return out;
}

inline ConvGrads deconv2d_backward(const Tensor4& input, const ConvLayer& layer, const Tensor4& grad_out,
                                   bool need_input_grad = true) {
    detail::check_input(input, layer, true, "deconv2d_backward");
    const std::size_t h = input.height(), w = input.width(), hw = h * w;
    const std::size_t cin = layer.in_channels(), cout = layer.out_channels();
    if (grad_out.dims() != Tensor4::Dims{input.batch(), cout, h, w}) throw InputError("deconv2d_backward: grad_out shape mismatch");
    const auto k = static_cast<Eigen::Index>(cout * layer.kernel_h() * layer.kernel_w());
    ConvGrads g{need_input_grad ? Tensor4::uninitialized(input.dims()) : Tensor4(), Tensor4(layer.kernel.dims()),
                std::vector<double>(cout, 0.0)};
    detail::CMatMap kmat(layer.kernel.data(), k, static_cast<Eigen::Index>(cin));
    detail::MatMap gk(g.kernel.data(), k, static_cast<Eigen::Index>(cin));
    Eigen::Map<Eigen::RowVectorXd> gb(g.bias.data(), static_cast<Eigen::Index>(cout));
    Eigen::MatrixXd col;
    for (std::size_t b = 0; b < input.batch(); ++b) {
        detail::CMatMap go(grad_out.sample(b), static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(cout));
        detail::CMatMap x(input.sample(b), static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(cin));
        gb += go.colwise().sum();
        const double* gsrc = grad_out.sample(b);
        if (!detail::is_pointwise(layer)) {
            detail::im2col(grad_out.sample(b), cout, h, w, layer.kernel_h(), layer.kernel_w(), col);
            gsrc = col.data();
        }
        detail::CMatMap gcol(gsrc, static_cast<Eigen::Index>(hw), k);
        gk.noalias() += gcol.transpose() * x;
        if (need_input_grad)
            detail::MatMap(g.input.sample(b), static_cast<Eigen::Index>(hw), static_cast<Eigen::Index>(cin)).noalias() = gcol * kmat;
    }
    return g;
}

inline Tensor4 layer_forward(const Tensor4& input, const ConvLayer& layer) {
    return layer.transposed ? deconv2d_forward(input, layer) : conv2d_forward(input, layer);
}

inline ConvGrads layer_backward(const Tensor4& input, const ConvLayer& layer, const Tensor4& grad_out,
                                bool need_input_grad = true) {
    return layer.transposed ? deconv2d_backward(input, layer, grad_out, need_input_grad)
                            : conv2d_backward(input, layer, grad_out, need_input_grad);
}

}  // namespace srce::nn
