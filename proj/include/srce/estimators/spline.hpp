#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "srce/error.hpp"

namespace srce::est {

enum class Interpolation { Spline, Linear };

/// Piecewise-cubic not-a-knot spline (or piecewise-linear) interpolation from
/// sample abscissae onto 0..N-1, stored as the N x n linear operator it is.
/// Points outside [x_0, x_{n-1}] use the end piece's polynomial.
///
/// Fewer than 4 samples fall back to linear; fewer than 2 is an error.
class Interpolator {
public:
    Interpolator(std::span<const std::size_t> positions, std::size_t n, Interpolation mode = Interpolation::Spline)
        : n_(n), positions_(positions.begin(), positions.end()) {
        const std::size_t p = positions.size();
        if (p < 2) throw InputError("interpolation needs at least 2 pilots");
        for (std::size_t i = 0; i < p; ++i) {
            if (positions[i] >= n) throw InputError("interpolation: pilot position out of range");
            if (i > 0 && positions[i] <= positions[i - 1]) throw InputError("interpolation: positions not increasing");
        }
        mode_ = (mode == Interpolation::Spline && p >= 4) ? Interpolation::Spline : Interpolation::Linear;
        weights_ = mode_ == Interpolation::Spline ? spline_weights() : linear_weights();
        // interpolants pass through the samples; pin those rows exactly
        for (std::size_t i = 0; i < p; ++i) {
            weights_.row(static_cast<Eigen::Index>(positions[i])).setZero();
            weights_(static_cast<Eigen::Index>(positions[i]), static_cast<Eigen::Index>(i)) = 1.0;
        }
    }

    Interpolation mode() const noexcept { return mode_; }
    std::size_t size() const noexcept { return n_; }
    const std::vector<std::size_t>& positions() const noexcept { return positions_; }
    const Eigen::MatrixXd& weights() const noexcept { return weights_; }

    template <typename Derived>
    auto apply(const Eigen::MatrixBase<Derived>& values) const {
        if (values.rows() != static_cast<Eigen::Index>(positions_.size()))
            throw InputError("interpolation: value count differs from pilot count");
        using Scalar = typename Derived::Scalar;
        return Eigen::Matrix<Scalar, Eigen::Dynamic, Derived::ColsAtCompileTime>(weights_.cast<Scalar>() * values);
    }

private:
    // Segment index used to evaluate abscissa x (end pieces extend outward).
    std::size_t segment(double x) const {
        std::size_t s = 0;
        while (s + 2 < positions_.size() && x > static_cast<double>(positions_[s + 1])) ++s;
        return s;
    }

    Eigen::MatrixXd linear_weights() const {
        const std::size_t p = positions_.size();
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(p));
        for (std::size_t k = 0; k < n_; ++k) {
            const double x = static_cast<double>(k);
            const std::size_t s = segment(x);
            const double x0 = static_cast<double>(positions_[s]), x1 = static_cast<double>(positions_[s + 1]);
            const double t = (x - x0) / (x1 - x0);
            w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) = 1.0 - t;
            w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s + 1)) = t;
        }
        return w;
    }

    // Second-derivative formulation: interior rows are the usual C2 equations,
    // the end rows force a continuous third derivative at x_1 and x_{n-2}.
    Eigen::MatrixXd spline_weights() const {
        const auto p = static_cast<Eigen::Index>(positions_.size());
        std::vector<double> h(static_cast<std::size_t>(p - 1));
        for (Eigen::Index i = 0; i + 1 < p; ++i)
            h[static_cast<std::size_t>(i)] = static_cast<double>(positions_[static_cast<std::size_t>(i + 1)] - positions_[static_cast<std::size_t>(i)]);
        auto hh = [&](Eigen::Index i) { return h[static_cast<std::size_t>(i)]; };

        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);  // rhs = b * y
        a(0, 0) = hh(1);
        a(0, 1) = -(hh(0) + hh(1));
        a(0, 2) = hh(0);
        for (Eigen::Index i = 1; i + 1 < p; ++i) {
            a(i, i - 1) = hh(i - 1);
            a(i, i) = 2.0 * (hh(i - 1) + hh(i));
            a(i, i + 1) = hh(i);
            b(i, i + 1) += 6.0 / hh(i);
            b(i, i) -= 6.0 / hh(i) + 6.0 / hh(i - 1);
            b(i, i - 1) += 6.0 / hh(i - 1);
        }
        a(p - 1, p - 3) = hh(p - 2);
        a(p - 1, p - 2) = -(hh(p - 3) + hh(p - 2));
        a(p - 1, p - 1) = hh(p - 3);

        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
        if (!(lu.rcond() > 1e-14)) throw NumericError("spline system is singular");
        const Eigen::MatrixXd m2 = lu.solve(b);  // second derivatives = m2 * y

        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), p);
        for (std::size_t k = 0; k < n_; ++k) {
            const double x = static_cast<double>(k);
            const auto s = static_cast<Eigen::Index>(segment(x));
            const double x0 = static_cast<double>(positions_[static_cast<std::size_t>(s)]);
            const double x1 = static_cast<double>(positions_[static_cast<std::size_t>(s + 1)]);
            const double hs = x1 - x0, u = x1 - x, v = x - x0;
            const double cm0 = (u * u * u / hs - hs * u) / 6.0;
            const double cm1 = (v * v * v / hs - hs * v) / 6.0;
            auto row = w.row(static_cast<Eigen::Index>(k));
            row += cm0 * m2.row(s) + cm1 * m2.row(s + 1);
            row(s) += u / hs;
            row(s + 1) += v / hs;
        }
        return w;
    }

    std::size_t n_;
    std::vector<std::size_t> positions_;
    Interpolation mode_ = Interpolation::Spline;
    Eigen::MatrixXd weights_;
};

}  // namespace srce::est
