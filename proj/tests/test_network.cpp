#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracles.hpp"
#include "segssl/errors.hpp"
#include "segssl/losses.hpp"
#include "segssl/network.hpp"
#include "segssl/rng.hpp"

using namespace segssl;

namespace {

Image random_image(int h, int w, int c, Rng& rng) {
    Image img(h, w, c);
    for (float& v : img.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return img;
}

LabelMap random_label(int h, int w, int classes, Rng& rng) {
    LabelMap lbl(h, w);
    for (uint8_t& v : lbl.data) v = static_cast<uint8_t>(rng.uniform_int(0, classes - 1));
    return lbl;
}

NetworkSpec tiny_spec() {
    NetworkSpec spec;
    spec.input_channels = 1;
    spec.num_classes = 2;
    spec.stage_channels = {4, 8};
    return spec;
}

bool params_equal(const NetworkParams& a, const NetworkParams& b) {
    for (size_t l = 0; l < a.weights.size(); ++l) {
        if (std::memcmp(a.weights[l].data(), b.weights[l].data(),
                        a.weights[l].size() * sizeof(double)) != 0)
            return false;
        if (std::memcmp(a.biases[l].data(), b.biases[l].data(),
                        a.biases[l].size() * sizeof(double)) != 0)
            return false;
    }
    return true;
}

} // namespace

TEST_SUITE("network") {

TEST_CASE("initialization is seeded and biases start at zero") {
    NetworkSpec spec; // default 3 stages
    NetworkParams a = init_network(spec, 7);
    NetworkParams b = init_network(spec, 7);
    CHECK(params_equal(a, b));
    NetworkParams c = init_network(spec, 8);
    CHECK(!params_equal(a, c));
    for (const auto& bias : a.biases)
        for (double v : bias) CHECK(v == 0.0);
}

TEST_CASE("weight variance tracks 2/fan_in on big layers") {
    NetworkSpec spec;
    NetworkParams params = init_network(spec, 3);
    std::vector<LayerDesc> layers = layer_layout(spec);
    for (size_t l = 0; l < layers.size(); ++l) {
        if (params.weights[l].size() < 256) continue;
        double fan_in = static_cast<double>(layers[l].in_ch) * layers[l].ksize * layers[l].ksize;
        double mean = 0.0;
        for (double v : params.weights[l]) mean += v;
        mean /= params.weights[l].size();
        double var = 0.0;
        for (double v : params.weights[l]) var += (v - mean) * (v - mean);
        var /= params.weights[l].size();
        CHECK(var == doctest::Approx(2.0 / fan_in).epsilon(0.2));
    }
}

TEST_CASE("forward emits normalized probabilities of the right shape") {
    NetworkSpec spec;
    spec.num_classes = 3;
    NetworkParams params = init_network(spec, 5);
    Rng rng(6);
    Image img = random_image(16, 16, 1, rng);
    ProbMap p = forward_probs(params, img);
    CHECK(p.height == 16);
    CHECK(p.width == 16);
    CHECK(p.num_classes == 3);
    for (size_t px = 0; px < p.pixel_count(); ++px) {
        double sum = 0.0;
        for (int c = 0; c < 3; ++c) {
            CHECK(p.data[px * 3 + c] > 0.0);
            sum += p.data[px * 3 + c];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("zero weights give the uniform map") {
    NetworkSpec spec;
    spec.num_classes = 4;
    NetworkParams params = init_network(spec, 1);
    for (auto& w : params.weights) std::fill(w.begin(), w.end(), 0.0);
    Rng rng(2);
    ProbMap p = forward_probs(params, random_image(8, 8, 1, rng));
    for (double v : p.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("forward is bit-deterministic and rejects bad shapes") {
    NetworkSpec spec;
    NetworkParams params = init_network(spec, 9);
    Rng rng(10);
    Image img = random_image(16, 16, 1, rng);
    ProbMap a = forward_probs(params, img);
    ProbMap b = forward_probs(params, img);
    CHECK(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0);

    CHECK_THROWS_AS(forward_probs(params, random_image(15, 16, 1, rng)), DataError);
    CHECK_THROWS_AS(forward_probs(params, random_image(16, 16, 2, rng)), DataError);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    NetworkParams params = init_network(tiny_spec(), 11);
    Rng rng(12);
    Image img = random_image(8, 8, 1, rng);
    ForwardCache cache;
    forward(params, img, cache);
    Grid zero(8, 8, 2);
    NetworkGrads grads = backward(params, cache, zero);
    for (const auto& w : grads.weights)
        for (double v : w) CHECK(v == 0.0);
    for (const auto& b : grads.biases)
        for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("backward matches central finite differences") {
    NetworkParams params = init_network(tiny_spec(), 13);
    Rng rng(14);
    Image img = random_image(8, 8, 1, rng);
    LabelMap target = random_label(8, 8, 2, rng);

    auto loss_of = [&]() {
        ProbMap p = forward_probs(params, img);
        return cross_entropy_loss(p, target).loss + soft_dice_loss(p, target).loss;
    };

    ForwardCache cache;
    ProbMap p = forward(params, img, cache);
    LossGrad ce = cross_entropy_loss(p, target);
    LossGrad dice = soft_dice_loss(p, target);
    std::vector<double> dice_logits = softmax_chain(p, dice.grad);
    Grid g_logits(8, 8, 2);
    for (size_t i = 0; i < g_logits.v.size(); ++i) g_logits.v[i] = ce.grad[i] + dice_logits[i];

    NetworkGrads grads = backward(params, cache, g_logits);
    double worst = oracles::max_grad_rel_error(params, grads, loss_of, 1e-5);
    CHECK(worst < 1e-4);
}

TEST_CASE("backward is deterministic and validates its cache") {
    NetworkParams params = init_network(tiny_spec(), 15);
    Rng rng(16);
    Image img = random_image(8, 8, 1, rng);
    ForwardCache cache;
    forward(params, img, cache);
    Grid g(8, 8, 2);
    for (double& v : g.v) v = rng.uniform(-1.0, 1.0);

    NetworkGrads a = backward(params, cache, g);
    NetworkGrads b = backward(params, cache, g);
    for (size_t l = 0; l < a.weights.size(); ++l)
        CHECK(std::memcmp(a.weights[l].data(), b.weights[l].data(),
                          a.weights[l].size() * sizeof(double)) == 0);

    NetworkSpec other = tiny_spec();
    other.stage_channels = {4, 8, 16};
    NetworkParams params2 = init_network(other, 15);
    CHECK_THROWS_AS(backward(params2, cache, g), DataError);
}

TEST_CASE("sgd step arithmetic") {
    NetworkSpec spec = tiny_spec();
    NetworkParams params = init_network(spec, 17);
    std::fill(params.weights[0].begin(), params.weights[0].end(), 1.0);

    NetworkGrads grads;
    for (const auto& w : params.weights) grads.weights.emplace_back(w.size(), 0.0);
    for (const auto& b : params.biases) grads.biases.emplace_back(b.size(), 0.0);
    std::fill(grads.weights[0].begin(), grads.weights[0].end(), 0.5);

    // w=1, g=0.5, lr0=0.1, wd=0, mu=0, epoch=0, huge horizon -> w' = 0.95
    OptimState state(params, 0.1, 0.0, 0.0, 1000000000);
    sgd_step(params, grads, state, 0);
    for (double v : params.weights[0]) CHECK(v == doctest::Approx(0.95).epsilon(1e-12));

    // zero gradient and zero wd keep parameters fixed
    NetworkParams before = params;
    std::fill(grads.weights[0].begin(), grads.weights[0].end(), 0.0);
    OptimState state2(params, 0.1, 0.0, 0.0, 100);
    sgd_step(params, grads, state2, 3);
    CHECK(params_equal(before, params));

    // the documented default configuration
    OptimState defaults(params, 0.005, 0.003, 0.9, 300);
    CHECK(defaults.lr0 == 0.005);
    CHECK(defaults.wd == 0.003);
    CHECK(defaults.momentum == 0.9);
}

TEST_CASE("non-finite gradients abort the step") {
    NetworkParams params = init_network(tiny_spec(), 18);
    NetworkGrads grads;
    for (const auto& w : params.weights) grads.weights.emplace_back(w.size(), 0.0);
    for (const auto& b : params.biases) grads.biases.emplace_back(b.size(), 0.0);
    grads.weights[0][0] = std::numeric_limits<double>::quiet_NaN();
    OptimState state(params, 0.01, 0.0, 0.9, 10);
    CHECK_THROWS_AS(sgd_step(params, grads, state, 0), NumericError);
}

TEST_CASE("fifty steps on a fixed batch cut the loss in half") {
    NetworkSpec spec = tiny_spec();
    NetworkParams params = init_network(spec, 19);
    Rng rng(20);
    Image img = random_image(8, 8, 1, rng);
    LabelMap target(8, 8, 0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x) target.at(y, x) = 1;

    OptimState state(params, 0.05, 0.0, 0.9, 1000000);
    double initial = 0.0, final_loss = 0.0;
    for (int step = 0; step < 50; ++step) {
        ForwardCache cache;
        ProbMap p = forward(params, img, cache);
        UnifiedLossResult ul = unified_loss({&p}, {&target});
        if (step == 0) initial = ul.loss;
        final_loss = ul.loss;
        NetworkGrads grads = backward(params, cache, ul.logit_grads[0]);
        sgd_step(params, grads, state, 0);
    }
    CHECK(final_loss < 0.5 * initial);
}

TEST_CASE("checkpoints round trip parameters exactly") {
    oracles::TempDir tmp("ckpt");
    NetworkSpec spec;
    spec.num_classes = 3;
    NetworkParams params = init_network(spec, 21);
    save_checkpoint(params, tmp.path / "ckpt");
    NetworkParams back = load_checkpoint(tmp.path / "ckpt");
    CHECK(back.spec == params.spec);
    CHECK(params_equal(back, params));
}

} // TEST_SUITE
