#include <cmath>

#include <gtest/gtest.h>

#include "checks.hpp"
#include "oracles.hpp"
#include "srce/nn/activation.hpp"
#include "srce/nn/adam.hpp"
#include "srce/nn/conv.hpp"
#include "srce/nn/init.hpp"
#include "srce/nn/loss.hpp"
#include "srce/nn/model.hpp"

using namespace srce;
using namespace srce::nn;

TEST(Tensor, LayoutIsRowMajorNchw) {
    Tensor4 t(2, 3, 4, 5);
    t(1, 2, 3, 4) = 7.0;
    EXPECT_EQ(t[((1 * 3 + 2) * 4 + 3) * 5 + 4], 7.0);
    EXPECT_EQ(t.sample(1), t.data() + 60);
    EXPECT_TRUE(t.all_finite());
    t[0] = std::nan("");
    EXPECT_FALSE(t.all_finite());
}

struct LayerCase {
    std::size_t in, out, k;
    bool transposed;
};

class ConvGradient : public ::testing::TestWithParam<LayerCase> {};

TEST_P(ConvGradient, MatchesFiniteDifferencesAndOracle) {
    const auto c = GetParam();
    const double e = checks::layer_grad_error(ConvLayer::make(c.in, c.out, c.k, c.k, c.transposed), 8, 7, 31);
    EXPECT_LT(e, checks::kGradTol);
}

INSTANTIATE_TEST_SUITE_P(Layers, ConvGradient,
                         ::testing::Values(LayerCase{1, 4, 5, false}, LayerCase{4, 2, 1, false}, LayerCase{3, 3, 3, false},
                                           LayerCase{2, 2, 9, false}, LayerCase{4, 1, 9, true}, LayerCase{2, 3, 3, true},
                                           LayerCase{3, 2, 1, true}, LayerCase{2, 2, 5, true}));

TEST(Conv, DeconvIsAdjointOfConv) {
    // dense matrices of both linear maps on a 6x6 grid
    ConvLayer conv = ConvLayer::make(2, 3, 3, 3);
    oracle::randomize(conv, 9);
    std::fill(conv.bias.begin(), conv.bias.end(), 0.0);
    ConvLayer de = ConvLayer::make(3, 2, 3, 3, true);
    de.kernel = conv.kernel;  // (3, 2, 3, 3): the transposed layer reads it as (in, out, kh, kw)
    const std::size_t nin = 2 * 36, nout = 3 * 36;
    Eigen::MatrixXd c(nout, nin), d(nin, nout);
    for (std::size_t j = 0; j < nin; ++j) {
        Tensor4 e(1, 2, 6, 6);
        e[j] = 1.0;
        const Tensor4 y = conv2d_forward(e, conv);
        for (std::size_t i = 0; i < nout; ++i) c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = y[i];
    }
    for (std::size_t j = 0; j < nout; ++j) {
        Tensor4 e(1, 3, 6, 6);
        e[j] = 1.0;
        const Tensor4 y = deconv2d_forward(e, de);
        for (std::size_t i = 0; i < nin; ++i) d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = y[i];
    }
    EXPECT_LT((d - c.transpose()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Conv, ChannelMismatchRejected) {
    const auto l = ConvLayer::make(2, 3, 3, 3);
    EXPECT_THROW(conv2d_forward(Tensor4(1, 3, 4, 4), l), InputError);
    EXPECT_THROW(deconv2d_forward(Tensor4(1, 2, 4, 4), l), InputError);
    EXPECT_THROW(ConvLayer::make(1, 1, 4, 4), ConfigError);
}

TEST(Conv, SkippedInputGradientLeavesParameterGradients) {
    ConvLayer l = ConvLayer::make(2, 3, 5, 5);
    oracle::randomize(l, 2);
    const Tensor4 x = oracle::random_tensor({2, 2, 6, 5}, 3), g = oracle::random_tensor({2, 3, 6, 5}, 4);
    const auto full = conv2d_backward(x, l, g, true), part = conv2d_backward(x, l, g, false);
    EXPECT_EQ(full.kernel, part.kernel);
    EXPECT_EQ(full.bias, part.bias);
    EXPECT_EQ(part.input.size(), 0u);
}

TEST(Activation, ReluGradient) { EXPECT_LT(checks::relu_grad_error(3), checks::kGradTol); }

TEST(Loss, MseValueAndNormalizer) {
    Tensor4 p(2, 1, 1, 2), t(2, 1, 1, 2);
    p[0] = 1.0;
    p[3] = -2.0;
    const auto a = mse_loss(p, t);
    EXPECT_DOUBLE_EQ(a.loss, 5.0 / 2.0);
    EXPECT_DOUBLE_EQ(a.grad[3], -2.0);
    const auto b = mse_loss(p, t, 10.0);
    EXPECT_DOUBLE_EQ(b.loss, 0.5);
    EXPECT_LT(checks::mse_grad_error(5), checks::kGradTol);
    EXPECT_THROW(mse_loss(p, Tensor4(1, 1, 1, 2)), InputError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> w{1.0, -2.0, 0.5};
    const std::vector<double> g{0.3, -4.0, 1e-3};
    AdamState st;
    st.lr = 0.01;
    const ParamSlot slot{w, g, "w"};
    adam_step(std::span<const ParamSlot>(&slot, 1), st);
    // bias-corrected: m_hat = g, v_hat = g^2
    EXPECT_NEAR(w[0], 1.0 - 0.01 * 0.3 / (0.3 + 1e-8), 1e-15);
    EXPECT_NEAR(w[1], -2.0 + 0.01 * 4.0 / (4.0 + 1e-8), 1e-15);
    EXPECT_NEAR(w[2], 0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-15);
}

TEST(Adam, ConstantGradientSteadyState) {
    std::vector<double> w{0.0};
    const std::vector<double> g{2.5};
    AdamState st;
    st.lr = 1e-3;
    const ParamSlot slot{w, g, "w"};
    double prev = 0.0;
    for (int i = 0; i < 500; ++i) {
        adam_step(std::span<const ParamSlot>(&slot, 1), st);
        EXPECT_NEAR(prev - w[0], 1e-3 * 2.5 / (2.5 + 1e-8), 1e-12);
        prev = w[0];
    }
}

TEST(Adam, NonFiniteGradientTouchesNothing) {
    std::vector<double> a{1.0}, b{2.0};
    const std::vector<double> ga{0.1}, gb{std::nan("")};
    AdamState st;
    const ParamSlot slots[] = {{a, ga, "a"}, {b, gb, "b"}};
    EXPECT_THROW(adam_step(slots, st), NumericError);
    EXPECT_EQ(a[0], 1.0);
    EXPECT_EQ(b[0], 2.0);
    EXPECT_EQ(st.step_count, 0u);
}

TEST(Init, HeVariance) {
    ConvLayer l = ConvLayer::make(56, 12, 3, 3);
    he_init(l, 8);
    double s = 0.0, s2 = 0.0;
    for (double w : l.kernel.span()) {
        s += w;
        s2 += w * w;
    }
    const double n = static_cast<double>(l.kernel.size());
    const double var = s2 / n - (s / n) * (s / n);
    EXPECT_NEAR(var / (2.0 / (56.0 * 9.0)), 1.0, 0.06);
    for (double b : l.bias) EXPECT_EQ(b, 0.0);
}

TEST(Model, MicroBatchesAccumulateToFullBatchGradient) {
    Model m;
    m.layers = {ConvLayer::make(1, 4, 3, 3), Relu{}, ConvLayer::make(4, 1, 3, 3, true)};
    for (auto& l : m.layers)
        if (auto* c = std::get_if<ConvLayer>(&l)) oracle::randomize(*c, 12);
    const Tensor4 x = oracle::random_tensor({4, 1, 6, 5}, 1), t = oracle::random_tensor({4, 1, 6, 5}, 2);
    auto cache = model_forward(m, x);
    const auto loss = mse_loss(cache.output, t);
    const auto full = model_backward(m, std::move(cache), loss.grad);
    ModelGrads acc;
    for (std::size_t b = 0; b < 4; b += 2) {
        Tensor4 xs(2, 1, 6, 5), ts(2, 1, 6, 5);
        std::copy_n(x.sample(b), 60, xs.data());
        std::copy_n(t.sample(b), 60, ts.data());
        auto c = model_forward(m, xs);
        const auto l = mse_loss(c.output, ts, 4.0);
        accumulate(acc, model_backward(m, std::move(c), l.grad, false));
    }
    ASSERT_EQ(acc.layers.size(), full.layers.size());
    for (std::size_t i = 0; i < acc.layers.size(); ++i) {
        for (std::size_t j = 0; j < acc.layers[i].kernel.size(); ++j)
            EXPECT_NEAR(acc.layers[i].kernel[j], full.layers[i].kernel[j], 1e-12);
        for (std::size_t j = 0; j < acc.layers[i].bias.size(); ++j)
            EXPECT_NEAR(acc.layers[i].bias[j], full.layers[i].bias[j], 1e-12);
    }
}

TEST(Model, PredictEqualsForwardOutput) {
    Model m;
    m.layers = {ConvLayer::make(1, 3, 5, 5), Relu{}, ConvLayer::make(3, 1, 1, 1)};
    for (auto& l : m.layers)
        if (auto* c = std::get_if<ConvLayer>(&l)) oracle::randomize(*c, 4);
    const Tensor4 x = oracle::random_tensor({2, 1, 7, 6}, 5);
    EXPECT_EQ(model_predict(m, x), model_forward(m, x).output);
}

TEST(Criterion1, GradientSuite) {
    const auto r = checks::criterion1();
    EXPECT_TRUE(r.pass) << r.summary();
}
