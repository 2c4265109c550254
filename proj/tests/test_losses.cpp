#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "segssl/errors.hpp"
#include "segssl/losses.hpp"
#include "segssl/rng.hpp"

using namespace segssl;

namespace {

ProbMap softmax_of(const std::vector<double>& logits, int h, int w, int C) {
    ProbMap p(h, w, C);
    for (size_t px = 0; px < p.pixel_count(); ++px) {
        double m = logits[px * C];
        for (int c = 1; c < C; ++c) m = std::max(m, logits[px * C + c]);
        double sum = 0.0;
        for (int c = 0; c < C; ++c) sum += std::exp(logits[px * C + c] - m);
        for (int c = 0; c < C; ++c) p.data[px * C + c] = std::exp(logits[px * C + c] - m) / sum;
    }
    return p;
}

ProbMap one_hot_of(const LabelMap& y, int C) {
    ProbMap p(y.height, y.width, C);
    for (size_t px = 0; px < y.pixel_count(); ++px) p.data[px * C + y.data[px]] = 1.0;
    return p;
}

LabelMap random_label(int h, int w, int classes, Rng& rng) {
    LabelMap lbl(h, w);
    for (uint8_t& v : lbl.data) v = static_cast<uint8_t>(rng.uniform_int(0, classes - 1));
    return lbl;
}

} // namespace

TEST_SUITE("losses") {

TEST_CASE("cross entropy degenerate and symmetric cases") {
    LabelMap y(2, 2, 0);
    y.at(1, 1) = 1;
    ProbMap perfect = one_hot_of(y, 2);
    CHECK(cross_entropy_loss(perfect, y).loss <= 1e-9);

    ProbMap uniform(2, 2, 2, 0.5);
    CHECK(cross_entropy_loss(uniform, y).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy gradient matches finite differences through softmax") {
    Rng rng(31);
    int h = 3, w = 4, C = 3;
    LabelMap y = random_label(h, w, C, rng);
    std::vector<double> logits(static_cast<size_t>(h) * w * C);
    for (double& v : logits) v = rng.uniform(-2.0, 2.0);

    ProbMap p = softmax_of(logits, h, w, C);
    LossGrad result = cross_entropy_loss(p, y);

    double step = 1e-6;
    for (size_t i = 0; i < logits.size(); ++i) {
        double saved = logits[i];
        logits[i] = saved + step;
        double up = cross_entropy_loss(softmax_of(logits, h, w, C), y).loss;
        logits[i] = saved - step;
        double down = cross_entropy_loss(softmax_of(logits, h, w, C), y).loss;
        logits[i] = saved;
        double fd = (up - down) / (2.0 * step);
        CHECK(oracles::grad_close(result.grad[i], fd, 1e-6));
    }
}

TEST_CASE("soft dice perfect and disjoint predictions") {
    LabelMap y(4, 4, 0);
    for (int x = 0; x < 4; ++x) y.at(0, x) = 1;
    ProbMap perfect = one_hot_of(y, 2);
    CHECK(soft_dice_loss(perfect, y).loss < 1e-4);

    // one-hot prediction fully disjoint from the truth
    LabelMap wrong(4, 4, 0);
    for (int x = 0; x < 4; ++x) wrong.at(3, x) = 1;
    ProbMap disjoint = one_hot_of(wrong, 2);
    CHECK(soft_dice_loss(disjoint, y).loss == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("soft dice gradient matches finite differences") {
    Rng rng(32);
    int h = 3, w = 3, C = 3;
    LabelMap y = random_label(h, w, C, rng);
    ProbMap p(h, w, C);
    for (double& v : p.data) v = rng.uniform(0.05, 0.95);

    LossGrad result = soft_dice_loss(p, y);
    double step = 1e-6;
    for (size_t i = 0; i < p.data.size(); ++i) {
        double saved = p.data[i];
        p.data[i] = saved + step;
        double up = soft_dice_loss(p, y).loss;
        p.data[i] = saved - step;
        double down = soft_dice_loss(p, y).loss;
        p.data[i] = saved;
        double fd = (up - down) / (2.0 * step);
        CHECK(oracles::grad_close(result.grad[i], fd, 1e-5));
    }
}

TEST_CASE("softmax chain reproduces dice-through-logits finite differences") {
    Rng rng(33);
    int h = 2, w = 3, C = 3;
    LabelMap y = random_label(h, w, C, rng);
    std::vector<double> logits(static_cast<size_t>(h) * w * C);
    for (double& v : logits) v = rng.uniform(-1.5, 1.5);

    ProbMap p = softmax_of(logits, h, w, C);
    std::vector<double> chained = softmax_chain(p, soft_dice_loss(p, y).grad);

    double step = 1e-6;
    for (size_t i = 0; i < logits.size(); ++i) {
        double saved = logits[i];
        logits[i] = saved + step;
        double up = soft_dice_loss(softmax_of(logits, h, w, C), y).loss;
        logits[i] = saved - step;
        double down = soft_dice_loss(softmax_of(logits, h, w, C), y).loss;
        logits[i] = saved;
        double fd = (up - down) / (2.0 * step);
        CHECK(oracles::grad_close(chained[i], fd, 1e-5));
    }
}

TEST_CASE("unified loss is the mean of independent per-sample losses") {
    Rng rng(34);
    int C = 2;
    LabelMap y1 = random_label(4, 4, C, rng);
    LabelMap y2 = random_label(4, 4, C, rng);
    ProbMap p1(4, 4, C), p2(4, 4, C);
    for (size_t px = 0; px < p1.pixel_count(); ++px) {
        double a = rng.uniform(0.05, 0.95);
        p1.data[px * C] = a;
        p1.data[px * C + 1] = 1.0 - a;
        double b = rng.uniform(0.05, 0.95);
        p2.data[px * C] = b;
        p2.data[px * C + 1] = 1.0 - b;
    }

    double l1 = cross_entropy_loss(p1, y1).loss + soft_dice_loss(p1, y1).loss;
    double l2 = cross_entropy_loss(p2, y2).loss + soft_dice_loss(p2, y2).loss;

    UnifiedLossResult mixed = unified_loss({&p1, &p2}, {&y1, &y2});
    CHECK(mixed.loss == doctest::Approx(0.5 * (l1 + l2)).epsilon(1e-12));
    CHECK(mixed.per_sample_loss[0] == doctest::Approx(l1).epsilon(1e-12));
    CHECK(mixed.per_sample_loss[1] == doctest::Approx(l2).epsilon(1e-12));

    // labeled-only batch equals the supervised loss of those samples
    UnifiedLossResult sup = unified_loss({&p1}, {&y1});
    CHECK(sup.loss == doctest::Approx(l1).epsilon(1e-12));

    // duplicating every sample leaves the mean unchanged
    UnifiedLossResult dup = unified_loss({&p1, &p2, &p1, &p2}, {&y1, &y2, &y1, &y2});
    CHECK(dup.loss == doctest::Approx(mixed.loss).epsilon(1e-12));
}

TEST_CASE("unified loss rejects bad batches") {
    CHECK_THROWS_AS(unified_loss({}, {}), DataError);
    ProbMap p(2, 2, 2, 0.5);
    LabelMap y(2, 2, 0);
    CHECK_THROWS_AS(unified_loss({&p}, {}), DataError);
    LabelMap wrong(2, 3, 0);
    CHECK_THROWS_AS(unified_loss({&p}, {&wrong}), DataError);
}

} // TEST_SUITE
