#pragma once

// Acceptance checks. Each returns pass/fail plus the measured numbers; the
// acceptance binary prints one line per criterion and the unit tests reuse
// the cheap ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "srce/srce.hpp"

namespace checks {

using namespace srce;
namespace fs = std::filesystem;

struct Result {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back((ok ? "ok: " : "FAIL: ") + what);
    }
    std::string summary() const {
        std::string s;
        for (const auto& n : notes) s += (s.empty() ? "" : "; ") + n;
        return s;
    }
};

inline std::string fmt(double v, int prec = 3) {
    std::ostringstream o;
    o.precision(prec);
    o << v;
    return o.str();
}

inline double db(double x) { return 10.0 * std::log10(x); }

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------- gradients

constexpr double kGradTol = 1e-4;

/// Analytic vs central-difference gradients of L = <w, layer(x)> for input,
/// kernel and bias; also checks the forward pass against the direct oracle.
inline double layer_grad_error(nn::ConvLayer layer, std::size_t h, std::size_t w, std::uint64_t seed) {
    using nn::Tensor4;
    oracle::randomize(layer, seed);
    Tensor4 x = oracle::random_tensor({2, layer.in_channels(), h, w}, seed + 1);
    const Tensor4 wt = oracle::random_tensor({2, layer.out_channels(), h, w}, seed + 2);
    const Tensor4 y = nn::layer_forward(x, layer);
    const Tensor4 ref = oracle::layer_ref(x, layer);
    double fwd = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) fwd = std::max(fwd, std::abs(y[i] - ref[i]));
    if (fwd > 1e-10) return 1.0;

    const auto g = nn::layer_backward(x, layer, wt);
    const auto loss = [&] { return oracle::dot(wt, oracle::layer_ref(x, layer)); };
    std::vector<double> num, ana;
    for (auto i : oracle::sample_indices(x.size(), 60, seed + 3)) {
        num.push_back(oracle::central_diff(loss, &x[i]));
        ana.push_back(g.input[i]);
    }
    for (auto i : oracle::sample_indices(layer.kernel.size(), 60, seed + 4)) {
        num.push_back(oracle::central_diff(loss, &layer.kernel[i]));
        ana.push_back(g.kernel[i]);
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
        num.push_back(oracle::central_diff(loss, &layer.bias[i]));
        ana.push_back(g.bias[i]);
    }
    return oracle::rel_error(num, ana);
}

inline double relu_grad_error(std::uint64_t seed) {
    nn::Tensor4 x = oracle::random_tensor({2, 3, 5, 4}, seed);
    const nn::Tensor4 wt = oracle::random_tensor(x.dims(), seed + 1);
    const auto loss = [&] { return oracle::dot(wt, nn::relu_forward(x)); };
    const nn::Tensor4 g = nn::relu_backward(x, wt);
    std::vector<double> num, ana;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) < 1e-3) continue;  // kink
        num.push_back(oracle::central_diff(loss, &x[i]));
        ana.push_back(g[i]);
    }
    return oracle::rel_error(num, ana);
}

inline double mse_grad_error(std::uint64_t seed) {
    nn::Tensor4 p = oracle::random_tensor({3, 1, 4, 5}, seed);
    const nn::Tensor4 t = oracle::random_tensor(p.dims(), seed + 1);
    const auto r = nn::mse_loss(p, t);
    std::vector<double> num, ana;
    for (std::size_t i = 0; i < p.size(); ++i) {
        num.push_back(oracle::central_diff([&] { return nn::mse_loss(p, t).loss; }, &p[i]));
        ana.push_back(r.grad[i]);
    }
    return oracle::rel_error(num, ana);
}

/// Whole-network check: parameters (sampled) and input gradients of the MSE
/// loss against central differences.
inline double model_grad_error(const models::ArchitectureSpec& spec, std::uint64_t seed) {
    nn::Model m = models::build_model(spec, seed);
    nn::Tensor4 x = oracle::random_tensor({2, spec.io_channels, 10, 8}, seed + 1);
    const nn::Tensor4 t = oracle::random_tensor({2, spec.io_channels, 10, 8}, seed + 2);
    const auto loss = [&] { return nn::mse_loss(nn::model_predict(m, x), t).loss; };
    auto cache = nn::model_forward(m, x);
    auto l = nn::mse_loss(cache.output, t);
    const auto g = nn::model_backward(m, std::move(cache), l.grad);
    std::vector<double> num, ana;
    std::size_t ci = 0;
    for (auto& layer : m.layers) {
        auto* c = std::get_if<nn::ConvLayer>(&layer);
        if (!c) continue;
        const auto& lg = g.layers[ci];
        for (auto i : oracle::sample_indices(c->kernel.size(), 40, seed + 10 + ci)) {
            num.push_back(oracle::central_diff(loss, &c->kernel[i]));
            ana.push_back(lg.kernel[i]);
        }
        for (auto i : oracle::sample_indices(c->bias.size(), 8, seed + 50 + ci)) {
            num.push_back(oracle::central_diff(loss, &c->bias[i]));
            ana.push_back(lg.bias[i]);
        }
        ++ci;
    }
    for (auto i : oracle::sample_indices(x.size(), 40, seed + 99)) {
        num.push_back(oracle::central_diff(loss, &x[i]));
        ana.push_back(g.input[i]);
    }
    return oracle::rel_error(num, ana);
}

inline Result criterion1() {
    Stopwatch sw;
    Result r;
    struct Case {
        const char* name;
        nn::ConvLayer layer;
    };
    const std::vector<Case> cases{
        {"conv5x5", nn::ConvLayer::make(2, 3, 5, 5)},       {"conv1x1", nn::ConvLayer::make(4, 3, 1, 1)},
        {"conv3x3", nn::ConvLayer::make(3, 3, 3, 3)},       {"conv9x9", nn::ConvLayer::make(2, 1, 9, 9)},
        {"deconv9x9", nn::ConvLayer::make(3, 1, 9, 9, true)}, {"deconv3x3", nn::ConvLayer::make(2, 3, 3, 3, true)},
        {"deconv1x1", nn::ConvLayer::make(3, 2, 1, 1, true)}};
    double worst = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double e = layer_grad_error(cases[i].layer, 7, 6, 100 + 10 * i);
        worst = std::max(worst, e);
        if (e >= kGradTol) r.require(false, std::string(cases[i].name) + " rel err " + fmt(e));
    }
    worst = std::max({worst, relu_grad_error(7), mse_grad_error(8)});
    r.require(worst < kGradTol, "layers max rel err " + fmt(worst));
    for (const auto& spec : {models::ArchitectureSpec::fsrcnn(4), models::ArchitectureSpec::srcnn()}) {
        const double e = model_grad_error(spec, 21);
        r.require(e < kGradTol, spec.name() + " rel err " + fmt(e));
    }
    const double t = sw.seconds();
    r.require(t < 120.0, "runtime " + fmt(t) + " s");
    return r;
}

// --------------------------------------------------------------- estimators

inline Result criterion2() {
    Result r;
    ExperimentConfig cfg;
    const auto pattern = ofdm::PilotPattern::comb(cfg.n(), cfg.pilots);

    // LS exact without noise
    double ls_err = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto h = ofdm::generate_channel(cfg.channel, 1000 + s);
        const auto c = ofdm::Constellation::qam16();
        const auto bits = ofdm::random_bits(ofdm::bits_per_frame(c, pattern, cfg.n(), cfg.m()), s);
        const auto f = ofdm::transmit(ofdm::modulate_frame(bits, c, pattern, cfg.n(), cfg.m()), h, pattern,
                                      Snr::infinite(), s);
        const auto ls = est::estimate_ls_full(f);
        for (std::size_t i = 0; i < pattern.size(); ++i)
            for (Eigen::Index m = 0; m < h.cols(); ++m) {
                const auto k = static_cast<Eigen::Index>(pattern.positions[i]);
                ls_err = std::max(ls_err, std::abs(ls(k, m) - h(k, m)));
            }
    }
    r.require(ls_err < 1e-12, "LS at pilots, zero noise, max err " + fmt(ls_err));

    // LMMSE == MMSE for constant-modulus pilots (beta of the pilot symbols is 1)
    const auto hs = data::autocorrelation_channels(cfg);
    const auto rr = est::empirical_autocorrelation(hs, pattern);
    const auto beta_p = est::beta_constant(pattern.symbols);
    double diff = 0.0;
    for (double s : {0.0, 10.0, 20.0, 30.0}) {
        const auto a = est::lmmse_filter(rr, beta_p, Snr::db(s)).matrix();
        const auto b = est::mmse_filter(rr, pattern.symbols, Snr::db(s).noise_variance()).matrix();
        diff = std::max(diff, (a - b).cwiseAbs().maxCoeff());
    }
    r.require(diff < 1e-10, "LMMSE vs MMSE max diff " + fmt(diff));

    // LMMSE -> LS as SNR grows, monotonically
    const auto beta16 = est::beta_constant(ofdm::Constellation::qam16());
    std::vector<double> gap;
    for (double s : {20.0, 40.0, 60.0, 80.0}) {
        const auto f = est::lmmse_filter(rr, beta16, Snr::db(s)).matrix();
        gap.push_back((f - Eigen::MatrixXcd::Identity(f.rows(), f.cols())).norm());
    }
    const bool mono = std::is_sorted(gap.rbegin(), gap.rend()) && std::adjacent_find(gap.begin(), gap.end()) == gap.end();
    r.require(mono && gap.back() < 1e-3,
              "||F - I|| at 20/40/60/80 dB: " + fmt(gap[0]) + ", " + fmt(gap[1]) + ", " + fmt(gap[2]) + ", " + fmt(gap[3]));

    // beta(16QAM) = 17/9
    const double b = beta16.value;
    r.require(std::abs(b - 17.0 / 9.0) < 1e-14, "beta(16QAM) = " + fmt(b, 17));

    // spline reproduces cubics, 8 pilots, N = 64
    const est::Interpolator interp(pattern.positions, cfg.n());
    Eigen::VectorXd ys(static_cast<Eigen::Index>(pattern.size()));
    const auto cubic = [](double k) {
        const double t = k / 63.0;
        return 0.3 + 0.5 * t - 1.7 * t * t + 1.2 * t * t * t;
    };
    for (std::size_t i = 0; i < pattern.size(); ++i)
        ys(static_cast<Eigen::Index>(i)) = cubic(static_cast<double>(pattern.positions[i]));
    const Eigen::VectorXd out = interp.apply(ys);
    double serr = 0.0;
    for (Eigen::Index k = 0; k < out.size(); ++k) serr = std::max(serr, std::abs(out(k) - cubic(static_cast<double>(k))));
    r.require(serr < 1e-9, "spline cubic max err " + fmt(serr));
    return r;
}

// ---------------------------------------------------------------- channel

inline Result criterion3() {
    Stopwatch sw;
    Result r;
    const ofdm::ChannelParams p;
    const auto rho = ofdm::tap_autocorrelation(p, 10000, 10, 77);
    double worst = 0.0;
    for (std::size_t lag = 1; lag <= 10; ++lag) {
        const double tau = static_cast<double>(lag) * p.symbol_duration();
        worst = std::max(worst, std::abs(rho[lag] - oracle::bessel_j0(2.0 * M_PI * p.max_doppler() * tau)));
    }
    r.require(worst < 0.05, "J0 max abs dev over 10 lags " + fmt(worst));

    double power = 0.0;
    const std::size_t frames = 2000;
    for (std::size_t i = 0; i < frames; ++i) power += ofdm::generate_channel(p, 5000 + i).cwiseAbs2().mean();
    power /= static_cast<double>(frames);
    r.require(std::abs(power - 1.0) < 0.03, "mean channel power " + fmt(power, 5));

    ExperimentConfig cfg;
    cfg.modulation = ofdm::Modulation::QAM16;
    double worst_snr = 0.0;
    for (double s : {0.0, 10.0, 20.0}) {
        double sig = 0.0, noise = 0.0;
        for (std::size_t i = 0; i < 500; ++i) {
            const auto sim = data::simulate_frame(cfg, data::Stream::Test, i, Snr::db(s));
            sig += sim.frame.tx.cwiseAbs2().sum();
            noise += (sim.frame.rx - sim.channel.cwiseProduct(sim.frame.tx)).cwiseAbs2().sum();
        }
        worst_snr = std::max(worst_snr, std::abs(db(sig / noise) - s));
    }
    r.require(worst_snr < 0.2, "measured SNR max dev " + fmt(worst_snr) + " dB");
    const double t = sw.seconds();
    r.require(t < 300.0, "runtime " + fmt(t) + " s");
    return r;
}

// ------------------------------------------------------------ reproductions

/// Desk-scale base condition shared by the reproduction criteria.
inline ExperimentConfig desk_config(std::size_t pilots, ofdm::Modulation mod) {
    ExperimentConfig cfg;
    cfg.pilots = pilots;
    cfg.modulation = mod;
    cfg.train_snr_db = 20.0;
    cfg.schedule = TrainSchedule::desk_scale();
    cfg.sizes = DatasetSizes{};
    return cfg;
}

inline double mse_of(const harness::MseReport& rep, const std::string& est, double snr, std::size_t pilots = 0) {
    return harness::find_row(rep, est, snr, pilots).mse;
}

inline Result criterion4(const harness::SweepContext& ctx, std::vector<harness::MseReport>* reports = nullptr) {
    Result r;
    for (auto mod : {ofdm::Modulation::QPSK, ofdm::Modulation::QAM16}) {
        Stopwatch sw;
        auto cfg = desk_config(8, mod);
        harness::MseReport rep;
        harness::sweep_snr(cfg, {models::ArchitectureSpec::fsrcnn(4), models::ArchitectureSpec::srcnn()}, rep, ctx);
        const std::string m = ofdm::to_string(mod);
        const double f = mse_of(rep, "FSRCE-4", 20), s = mse_of(rep, "SRCE", 20), l = mse_of(rep, "LMMSE", 20),
                     ls = mse_of(rep, "LS", 20);
        r.require(f < s && s < l && l < ls, m + " @20dB FSRCE " + fmt(db(f)) + " < SRCE " + fmt(db(s)) + " < LMMSE " +
                                                fmt(db(l)) + " < LS " + fmt(db(ls)) + " dB");
        r.require(db(l) - db(f) >= 2.0, m + " FSRCE gain over LMMSE " + fmt(db(l) - db(f)) + " dB (>= 2)");
        r.notes.push_back(m + " runtime " + fmt(sw.seconds() / 60.0) + " min (target < 45, informational)");
        if (reports) reports->push_back(std::move(rep));
    }
    return r;
}

inline Result criterion5(const harness::SweepContext& ctx, std::vector<harness::MseReport>* reports = nullptr) {
    Result r;
    for (auto mod : {ofdm::Modulation::QPSK, ofdm::Modulation::QAM16}) {
        auto cfg = desk_config(8, mod);
        harness::MseReport rep;
        harness::sweep_pilots(cfg, {8, 16}, rep, ctx);
        for (double s : {15.0, 20.0}) {
            const double f8 = mse_of(rep, "FSRCE-4", s, 8), l16 = mse_of(rep, "LMMSE", s, 16);
            r.require(f8 <= l16, ofdm::to_string(mod) + " @" + fmt(s) + "dB FSRCE(8) " + fmt(db(f8)) +
                                     " <= LMMSE(16) " + fmt(db(l16)) + " dB");
        }
        if (reports) reports->push_back(std::move(rep));
    }
    return r;
}

inline Result criterion6(const harness::SweepContext& ctx, std::vector<harness::MseReport>* reports = nullptr) {
    Result r;
    auto cfg = desk_config(16, ofdm::Modulation::QAM16);
    harness::MseReport rep;
    harness::sweep_layers(cfg, {2, 4, 6}, rep, ctx);
    for (double s : cfg.test_snr_grid) {
        const double f2 = mse_of(rep, "FSRCE-2", s), f4 = mse_of(rep, "FSRCE-4", s), f6 = mse_of(rep, "FSRCE-6", s);
        if (s >= 15.0)
            r.require(f4 <= f2, "@" + fmt(s) + "dB FSRCE-4 " + fmt(db(f4)) + " <= FSRCE-2 " + fmt(db(f2)) + " dB");
        r.require(db(f4) - db(f6) <= 0.5, "@" + fmt(s) + "dB FSRCE-6 gain over FSRCE-4 " + fmt(db(f4) - db(f6)) +
                                              " dB (<= 0.5)");
    }
    if (reports) reports->push_back(std::move(rep));
    return r;
}

inline const std::vector<double> kMismatchSnrs{5, 10, 15, 20, 25};

inline Result criterion7(const harness::SweepContext& ctx, std::vector<harness::MseReport>* reports = nullptr) {
    Result r;
    auto cfg = desk_config(16, ofdm::Modulation::QAM16);
    cfg.test_snr_grid = kMismatchSnrs;
    harness::MseReport rep;
    harness::sweep_mismatch(cfg, kMismatchSnrs, rep, ctx);
    double widest = 0.0;
    for (double test : kMismatchSnrs) {
        const double matched = mse_of(rep, harness::mismatch_name(cfg, test), test);
        double best = matched, worst = matched;
        std::string best_name = harness::mismatch_name(cfg, test);
        for (double train : kMismatchSnrs) {
            const double v = mse_of(rep, harness::mismatch_name(cfg, train), test);
            if (v < best) best = v, best_name = harness::mismatch_name(cfg, train);
            worst = std::max(worst, v);
        }
        r.require(matched <= best, "test " + fmt(test) + "dB: matched " + fmt(db(matched)) + " dB, column min " +
                                       best_name + " " + fmt(db(best)) + " dB");
        widest = std::max(widest, db(worst) - db(matched));
    }
    r.require(widest >= 2.0, "worst mismatch loss " + fmt(widest) + " dB (>= 2)");
    if (reports) reports->push_back(std::move(rep));
    return r;
}

// ---------------------------------------------------------- infrastructure

inline bool same_bytes(const fs::path& a, const fs::path& b) { return io::read_text(a.string()) == io::read_text(b.string()); }

inline Result criterion8(const fs::path& scratch) {
    Result r;
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    ExperimentConfig cfg;
    cfg.sizes = {12, 4, 10, 200};
    cfg.schedule.epochs = 2;
    cfg.schedule.batch_frames = 4;
    cfg.test_snr_grid = {10, 20};

    const auto ds = data::generate_dataset(cfg, data::Split::Test, 7, Snr::db(10));
    data::write_dataset((scratch / "a.bin").string(), ds);
    const auto back = data::read_dataset((scratch / "a.bin").string());
    data::write_dataset((scratch / "b.bin").string(), back);
    r.require(back.header == ds.header && back.samples == ds.samples && same_bytes(scratch / "a.bin", scratch / "b.bin"),
              "dataset write/read/write bit-exact");

    const auto model = models::build_model(models::ArchitectureSpec::fsrcnn(4), 5);
    const auto manifest = scratch / "ck.json";
    nn::save_checkpoint(manifest.string(), model, {{"k", 1}});
    const std::string first_json = io::read_text(manifest.string());
    const std::string first_blob = io::read_text(nn::blob_path_for(manifest.string()));
    const auto ck = nn::load_checkpoint(manifest.string());
    nn::save_checkpoint(manifest.string(), ck.model, ck.metadata);
    r.require(ck.model.layers == model.layers && io::read_text(manifest.string()) == first_json &&
                  io::read_text(nn::blob_path_for(manifest.string())) == first_blob,
              "checkpoint save/load/save bit-exact");

    double worst = 0.0;
    std::vector<harness::MseReport> reps;
    for (int run = 0; run < 2; ++run) {
        const harness::Workspace ws(scratch / ("run" + std::to_string(run)));
        harness::SweepContext ctx{&ws, {}, {}};
        harness::MseReport rep;
        harness::sweep_snr(cfg, {cfg.architecture}, rep, ctx);
        reps.push_back(std::move(rep));
    }
    bool same_cells = reps[0].rows.size() == reps[1].rows.size();
    for (std::size_t i = 0; same_cells && i < reps[0].rows.size(); ++i) {
        const auto &a = reps[0].rows[i], &b = reps[1].rows[i];
        same_cells = a.estimator == b.estimator && a.snr_db == b.snr_db;
        worst = std::max(worst, std::abs(a.mse - b.mse) / std::max(std::abs(a.mse), 1e-300));
    }
    r.require(same_cells && worst <= 1e-12, "repeat run max rel diff " + fmt(worst));
    return r;
}

}  // namespace checks
