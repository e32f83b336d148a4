#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "srce/error.hpp"
#include "srce/estimators/spline.hpp"
#include "srce/ofdm/channel.hpp"
#include "srce/ofdm/constellation.hpp"
#include "srce/ofdm/frame.hpp"
#include "srce/snr.hpp"

namespace srce::est {

using cd = std::complex<double>;
using ofdm::ChannelMatrix;

/// Channel estimate at the pilot subcarriers.
struct PilotEstimate {
    Eigen::VectorXcd values;
    std::vector<std::size_t> positions;
};

/// R_{HpHp} = E{h_p h_p^H}, estimated from samples.
struct ChannelAutocorrelation {
    Eigen::MatrixXcd matrix;
    std::size_t sample_count = 0;
};

/// beta = E{|x|^2} E{|1/x|^2}; >= 1 by Cauchy-Schwarz.
struct BetaConstant {
    double value = 1.0;
};

inline PilotEstimate ls_pilot_estimate(std::span<const cd> rx_pilots, std::span<const cd> tx_pilots,
                                       std::span<const std::size_t> positions) {
    if (rx_pilots.size() != tx_pilots.size() || rx_pilots.size() != positions.size())
        throw InputError("ls_pilot_estimate: length mismatch");
    PilotEstimate e;
    e.positions.assign(positions.begin(), positions.end());
    e.values.resize(static_cast<Eigen::Index>(rx_pilots.size()));
    for (std::size_t i = 0; i < rx_pilots.size(); ++i) {
        if (tx_pilots[i] == cd{0.0, 0.0}) throw InputError("ls_pilot_estimate: zero pilot symbol");
        e.values(static_cast<Eigen::Index>(i)) = rx_pilots[i] / tx_pilots[i];
    }
    return e;
}

inline Eigen::VectorXcd interpolate_full(const PilotEstimate& est, std::size_t n,
                                         Interpolation mode = Interpolation::Spline) {
    const Interpolator interp(est.positions, n, mode);
    return interp.apply(est.values);
}

inline BetaConstant beta_constant(std::span<const cd> points) {
    if (points.empty()) throw InputError("beta_constant: empty constellation");
    double e2 = 0.0, inv2 = 0.0;
    for (const auto& x : points) {
        const double p = std::norm(x);
        if (p == 0.0) throw InputError("beta_constant: constellation contains the origin");
        e2 += p;
        inv2 += 1.0 / p;
    }
    const auto n = static_cast<double>(points.size());
    return {(e2 / n) * (inv2 / n)};
}

inline BetaConstant beta_constant(const ofdm::Constellation& c) { return beta_constant(c.points()); }

/// Sample mean of h_p h_p^H over every (realization, symbol) column.
inline ChannelAutocorrelation empirical_autocorrelation(std::span<const ChannelMatrix> channels,
                                                        const ofdm::PilotPattern& pattern) {
    if (channels.empty()) throw InputError("empirical_autocorrelation: no channel realizations");
    const auto np = static_cast<Eigen::Index>(pattern.size());
    ChannelAutocorrelation r;
    r.matrix = Eigen::MatrixXcd::Zero(np, np);
    Eigen::VectorXcd hp(np);
    for (const auto& h : channels) {
        for (Eigen::Index m = 0; m < h.cols(); ++m) {
            for (Eigen::Index i = 0; i < np; ++i) {
                const auto k = static_cast<Eigen::Index>(pattern.positions[static_cast<std::size_t>(i)]);
                if (k >= h.rows()) throw InputError("empirical_autocorrelation: pilot outside channel");
                hp(i) = h(k, m);
            }
            r.matrix.noalias() += hp * hp.adjoint();
            ++r.sample_count;
        }
    }
    r.matrix /= static_cast<double>(r.sample_count);
    return r;
}

/// Immutable pilot-domain filter  F = R (R + D)^{-1}.
class PilotFilter {
public:
    static PilotFilter identity(Eigen::Index n) { return PilotFilter(Eigen::MatrixXcd::Identity(n, n)); }

    /// Solves with the Hermitian regularized matrix A = R + D using partial
    /// pivoting; F = (A^{-1} R)^H because A and R are Hermitian.
    static PilotFilter regularized(const Eigen::MatrixXcd& r, const Eigen::MatrixXcd& d) {
        const Eigen::MatrixXcd a = r + d;
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        if (!(lu.rcond() > 1e-13)) throw NumericError("singular regularized autocorrelation matrix");
        Eigen::MatrixXcd f = lu.solve(r).adjoint();
        if (!f.allFinite()) throw NumericError("non-finite estimation filter");
        return PilotFilter(std::move(f));
    }

    const Eigen::MatrixXcd& matrix() const noexcept { return f_; }

    PilotEstimate apply(const PilotEstimate& in) const {
        if (in.values.size() != f_.cols()) throw InputError("filter dimension differs from pilot count");
        return {f_ * in.values, in.positions};
    }

private:
    explicit PilotFilter(Eigen::MatrixXcd f) : f_(std::move(f)) {}
    Eigen::MatrixXcd f_;
};

inline void check_square(const ChannelAutocorrelation& r, Eigen::Index np) {
    if (r.matrix.rows() != np || r.matrix.cols() != np)
        throw InputError("autocorrelation dimension differs from pilot count");
}

inline PilotFilter lmmse_filter(const ChannelAutocorrelation& r, BetaConstant beta, Snr snr) {
    const auto np = r.matrix.rows();
    check_square(r, np);
    if (snr.is_infinite()) return PilotFilter::identity(np);
    const Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(np, np) * cd(beta.value / snr.linear(), 0.0);
    return PilotFilter::regularized(r.matrix, d);
}

inline PilotFilter mmse_filter(const ChannelAutocorrelation& r, std::span<const cd> tx_pilots, double noise_var) {
    const auto np = r.matrix.rows();
    check_square(r, np);
    if (static_cast<Eigen::Index>(tx_pilots.size()) != np) throw InputError("mmse: pilot count mismatch");
    if (!(noise_var >= 0.0)) throw InputError("mmse: negative noise variance");
    for (const auto& x : tx_pilots)
        if (x == cd{0.0, 0.0}) throw InputError("mmse: zero pilot symbol");
    if (noise_var == 0.0) return PilotFilter::identity(np);
    // (X_p X_p^H)^{-1} is diagonal with entries 1/|x_p|^2
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(np, np);
    for (Eigen::Index i = 0; i < np; ++i) d(i, i) = noise_var / std::norm(tx_pilots[static_cast<std::size_t>(i)]);
    return PilotFilter::regularized(r.matrix, d);
}

inline PilotEstimate lmmse_estimate(const PilotEstimate& est, const ChannelAutocorrelation& r, BetaConstant beta,
                                    Snr snr) {
    check_square(r, est.values.size());
    return lmmse_filter(r, beta, snr).apply(est);
}

inline PilotEstimate mmse_estimate(const PilotEstimate& est, const ChannelAutocorrelation& r,
                                   std::span<const cd> tx_pilots, double noise_var) {
    check_square(r, est.values.size());
    return mmse_filter(r, tx_pilots, noise_var).apply(est);
}

/// Caches one LMMSE filter per operating SNR for a fixed (R, beta).
/// Cached filters are immutable; lookups are thread-safe.
class LmmseEstimator {
public:
    LmmseEstimator(ChannelAutocorrelation r, BetaConstant beta) : r_(std::move(r)), beta_(beta) {}

    std::shared_ptr<const PilotFilter> filter(Snr snr) const {
        std::lock_guard lock(mu_);
        auto it = cache_.find(snr);
        if (it != cache_.end()) return it->second;
        auto f = std::make_shared<const PilotFilter>(lmmse_filter(r_, beta_, snr));
        cache_.emplace(snr, f);
        return f;
    }

    const ChannelAutocorrelation& autocorrelation() const noexcept { return r_; }
    BetaConstant beta() const noexcept { return beta_; }

private:
    ChannelAutocorrelation r_;
    BetaConstant beta_;
    mutable std::mutex mu_;
    mutable std::map<Snr, std::shared_ptr<const PilotFilter>> cache_;
};

namespace detail {

inline PilotEstimate column_ls(const ofdm::OfdmFrame& frame, Eigen::Index m) {
    const auto& pat = frame.pattern;
    std::vector<cd> y(pat.size());
    for (std::size_t i = 0; i < pat.size(); ++i) y[i] = frame.rx(static_cast<Eigen::Index>(pat.positions[i]), m);
    return ls_pilot_estimate(y, pat.symbols, pat.positions);
}

}  // namespace detail

/// Per-column pilot estimate (optionally filtered) followed by interpolation
/// to all N subcarriers.
inline ChannelMatrix estimate_full(const ofdm::OfdmFrame& frame, const PilotFilter* filter,
                                   Interpolation mode = Interpolation::Spline) {
    frame.pattern.validate(static_cast<std::size_t>(frame.rx.rows()));
    const Interpolator interp(frame.pattern.positions, static_cast<std::size_t>(frame.rx.rows()), mode);
    ChannelMatrix out(frame.rx.rows(), frame.rx.cols());
    for (Eigen::Index m = 0; m < frame.rx.cols(); ++m) {
        PilotEstimate e = detail::column_ls(frame, m);
        if (filter) e = filter->apply(e);
        out.col(m) = interp.apply(e.values);
    }
    return out;
}

inline ChannelMatrix estimate_ls_full(const ofdm::OfdmFrame& frame, Interpolation mode = Interpolation::Spline) {
    return estimate_full(frame, nullptr, mode);
}

inline ChannelMatrix estimate_lmmse_full(const ofdm::OfdmFrame& frame, const ChannelAutocorrelation& r,
                                         BetaConstant beta, Interpolation mode = Interpolation::Spline) {
    const PilotFilter f = lmmse_filter(r, beta, frame.snr);
    return estimate_full(frame, &f, mode);
}

inline ChannelMatrix estimate_mmse_full(const ofdm::OfdmFrame& frame, const ChannelAutocorrelation& r,
                                        Interpolation mode = Interpolation::Spline) {
    const PilotFilter f = mmse_filter(r, frame.pattern.symbols, frame.snr.noise_variance());
    return estimate_full(frame, &f, mode);
}

/// Re-filters an interpolated LS grid: samples it at the pilot rows (exact,
/// since interpolation passes through the pilots), applies F, re-interpolates.
inline ChannelMatrix refilter_ls_grid(const ChannelMatrix& ls_grid, const Interpolator& interp,
                                      const PilotFilter& filter) {
    const auto& pos = interp.positions();
    ChannelMatrix out(ls_grid.rows(), ls_grid.cols());
    Eigen::VectorXcd hp(static_cast<Eigen::Index>(pos.size()));
    for (Eigen::Index m = 0; m < ls_grid.cols(); ++m) {
        for (std::size_t i = 0; i < pos.size(); ++i) hp(static_cast<Eigen::Index>(i)) = ls_grid(static_cast<Eigen::Index>(pos[i]), m);
        out.col(m) = interp.apply(Eigen::VectorXcd(filter.matrix() * hp));
    }
    return out;
}

/// Mean over entries of |a - b|^2.
inline double mse(const ChannelMatrix& a, const ChannelMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw InputError("mse: dimension mismatch");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace srce::est
