#pragma once

// Independent reference implementations used as test oracles.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "srce/nn/conv.hpp"
#include "srce/nn/model.hpp"
#include "srce/nn/tensor.hpp"

namespace oracle {

using srce::nn::ConvLayer;
using srce::nn::Tensor4;

inline Tensor4 random_tensor(Tensor4::Dims d, std::uint64_t seed, double scale = 1.0) {
    Tensor4 t(d);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    for (auto& v : t.span()) v = n(rng);
    return t;
}

inline void randomize(ConvLayer& l, std::uint64_t seed, double scale = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    for (auto& v : l.kernel.span()) v = n(rng);
    for (auto& v : l.bias) v = n(rng);
}

inline bool inside(long v, std::size_t n) { return v >= 0 && v < static_cast<long>(n); }

/// Direct nested-loop "same" cross-correlation, kernel (out, in, kh, kw).
inline Tensor4 conv_ref(const Tensor4& x, const ConvLayer& l) {
    const std::size_t co = l.kernel.dims()[0], ci = l.kernel.dims()[1], kh = l.kernel.dims()[2], kw = l.kernel.dims()[3];
    const long ph = static_cast<long>(kh / 2), pw = static_cast<long>(kw / 2);
    Tensor4 y(x.batch(), co, x.height(), x.width());
    for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t o = 0; o < co; ++o)
            for (std::size_t r = 0; r < x.height(); ++r)
                for (std::size_t c = 0; c < x.width(); ++c) {
                    double acc = l.bias[o];
                    for (std::size_t i = 0; i < ci; ++i)
                        for (std::size_t u = 0; u < kh; ++u)
                            for (std::size_t v = 0; v < kw; ++v) {
                                const long rr = static_cast<long>(r + u) - ph, cc = static_cast<long>(c + v) - pw;
                                if (inside(rr, x.height()) && inside(cc, x.width()))
                                    acc += l.kernel(o, i, u, v) * x(b, i, static_cast<std::size_t>(rr), static_cast<std::size_t>(cc));
                            }
                    y(b, o, r, c) = acc;
                }
    return y;
}

/// Direct scatter form of the transposed convolution, kernel (in, out, kh, kw).
inline Tensor4 deconv_ref(const Tensor4& x, const ConvLayer& l) {
    const std::size_t ci = l.kernel.dims()[0], co = l.kernel.dims()[1], kh = l.kernel.dims()[2], kw = l.kernel.dims()[3];
    const long ph = static_cast<long>(kh / 2), pw = static_cast<long>(kw / 2);
    Tensor4 y(x.batch(), co, x.height(), x.width());
    for (std::size_t b = 0; b < x.batch(); ++b) {
        for (std::size_t o = 0; o < co; ++o)
            for (std::size_t r = 0; r < x.height(); ++r)
                for (std::size_t c = 0; c < x.width(); ++c) y(b, o, r, c) = l.bias[o];
        for (std::size_t i = 0; i < ci; ++i)
            for (std::size_t r = 0; r < x.height(); ++r)
                for (std::size_t c = 0; c < x.width(); ++c)
                    for (std::size_t o = 0; o < co; ++o)
                        for (std::size_t u = 0; u < kh; ++u)
                            for (std::size_t v = 0; v < kw; ++v) {
                                const long rr = static_cast<long>(r + u) - ph, cc = static_cast<long>(c + v) - pw;
                                if (inside(rr, x.height()) && inside(cc, x.width()))
                                    y(b, o, static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) +=
                                        l.kernel(i, o, u, v) * x(b, i, r, c);
                            }
    }
    return y;
}

inline Tensor4 layer_ref(const Tensor4& x, const ConvLayer& l) { return l.transposed ? deconv_ref(x, l) : conv_ref(x, l); }

inline double dot(const Tensor4& a, const Tensor4& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// ||a - b|| / max(||a||, ||b||, tiny).
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(d) / std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
}

/// Central difference of f with respect to *p.
inline double central_diff(const std::function<double()>& f, double* p, double h = 1e-6) {
    const double keep = *p;
    *p = keep + h;
    const double fp = f();
    *p = keep - h;
    const double fm = f();
    *p = keep;
    return (fp - fm) / (2.0 * h);
}

/// Indices 0..n-1 when n <= cap, else `cap` distinct indices drawn with a fixed seed.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t cap, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (n <= cap) return idx;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(cap);
    return idx;
}

/// Bessel J0 by its power series (adequate for |x| < 20).
inline double bessel_j0(double x) {
    double term = 1.0, sum = 1.0;
    const double q = -(x * x) / 4.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

/// Not-a-knot cubic spline evaluated at integer points by solving the full
/// 4(n-1) coefficient system for piecewise cubics (dense, small n only).
inline Eigen::VectorXd spline_ref(const std::vector<double>& xs, const Eigen::VectorXd& ys, std::size_t n_out) {
    const int n = static_cast<int>(xs.size()), segs = n - 1, unknowns = 4 * segs;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(unknowns, unknowns);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
    int row = 0;
    // segment s: y = a0 + a1 t + a2 t^2 + a3 t^3, t = x - xs[s]
    for (int s = 0; s < segs; ++s) {
        const double h = xs[static_cast<std::size_t>(s + 1)] - xs[static_cast<std::size_t>(s)];
        a(row, 4 * s) = 1;
        rhs(row++) = ys(s);
        a(row, 4 * s) = 1, a(row, 4 * s + 1) = h, a(row, 4 * s + 2) = h * h, a(row, 4 * s + 3) = h * h * h;
        rhs(row++) = ys(s + 1);
    }
    for (int s = 0; s + 1 < segs; ++s) {
        const double h = xs[static_cast<std::size_t>(s + 1)] - xs[static_cast<std::size_t>(s)];
        // first and second derivative continuity at xs[s+1]
        a(row, 4 * s + 1) = 1, a(row, 4 * s + 2) = 2 * h, a(row, 4 * s + 3) = 3 * h * h, a(row, 4 * (s + 1) + 1) = -1;
        ++row;
        a(row, 4 * s + 2) = 2, a(row, 4 * s + 3) = 6 * h, a(row, 4 * (s + 1) + 2) = -2;
        ++row;
    }
    // not-a-knot: third derivative continuous at xs[1] and xs[n-2]
    a(row, 3) = 1, a(row, 7) = -1;
    ++row;
    a(row, 4 * (segs - 2) + 3) = 1, a(row, 4 * (segs - 1) + 3) = -1;
    ++row;
    const Eigen::VectorXd c = a.fullPivLu().solve(rhs);
    Eigen::VectorXd out(static_cast<Eigen::Index>(n_out));
    for (std::size_t k = 0; k < n_out; ++k) {
        const double x = static_cast<double>(k);
        int s = 0;
        while (s + 1 < segs && x > xs[static_cast<std::size_t>(s + 1)]) ++s;
        const double t = x - xs[static_cast<std::size_t>(s)];
        out(static_cast<Eigen::Index>(k)) = c(4 * s) + t * (c(4 * s + 1) + t * (c(4 * s + 2) + t * c(4 * s + 3)));
    }
    return out;
}

}  // namespace oracle
