#include <doctest.h>

#include <cmath>

#include "sacf/heatmap.hpp"
#include "sacf/rng.hpp"

using namespace sacf;

TEST_CASE("gaussian heatmap peak and falloff") {
    const Heatmap h = gaussian_gt_heatmap(10, 12, 2.0, 32, 32);
    CHECK(h.at(12, 10) == doctest::Approx(1.0));
    CHECK(h.at(12, 12) == doctest::Approx(std::exp(-0.5)));  // distance sigma along x
    CHECK(h.at(14, 10) == doctest::Approx(std::exp(-0.5)));
    for (double v : h.v) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("gaussian heatmap sum matches closed-form grid evaluation") {
    const double sigma = 2.0;
    const Heatmap h = gaussian_gt_heatmap(16, 16, sigma, 32, 32);
    double expected = 0.0;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j)
            expected += std::exp(-((i - 16.0) * (i - 16.0) + (j - 16.0) * (j - 16.0)) /
                                 (2.0 * sigma * sigma));
    double got = 0.0;
    for (double v : h.v) got += v;
    CHECK(got == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gaussian heatmap rejects bad inputs") {
    CHECK_THROWS(gaussian_gt_heatmap(40, 10, 2.0, 32, 32));
    CHECK_THROWS(gaussian_gt_heatmap(10, 10, 0.0, 32, 32));
}

TEST_CASE("bce_loss known values") {
    Heatmap half(4, 4, 0.5);
    CHECK(bce_loss(half, half) == doctest::Approx(std::log(2.0)));

    Heatmap ones(4, 4, 1.0);
    CHECK(bce_loss(ones, ones) <= 2.0 * kBceEps);

    CHECK_THROWS(bce_loss(Heatmap(4, 4), Heatmap(3, 4)));
}

TEST_CASE("bce_loss matches per-pixel reference") {
    SplitRng rng(3, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Heatmap pred(4, 4), gt(4, 4);
        for (auto& v : pred.v) v = rng.uniform();
        for (auto& v : gt.v) v = rng.uniform();
        double ref = 0.0;
        for (int k = 0; k < 16; ++k) {
            const double p = std::clamp(pred.v[k], kBceEps, 1.0 - kBceEps);
            ref -= gt.v[k] * std::log(p) + (1.0 - gt.v[k]) * std::log(1.0 - p);
        }
        ref /= 16.0;
        CHECK(bce_loss(pred, gt) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("bce_loss is minimized at pred == gt") {
    SplitRng rng(5, 0);
    for (int trial = 0; trial < 50; ++trial) {
        Heatmap gt(5, 5), pred(5, 5);
        for (auto& v : gt.v) v = rng.uniform();
        for (auto& v : pred.v) v = rng.uniform();
        CHECK(bce_loss(pred, gt) >= bce_loss(gt, gt));
    }
}

TEST_CASE("bce_grad_logits stationary point and single cell") {
    // sigma(z) == gt everywhere -> zero gradient
    Grid logits(3, 3);
    Heatmap gt(3, 3);
    for (int k = 0; k < 9; ++k) {
        logits.v[k] = (k - 4) * 0.3;
        gt.v[k] = sigmoid(logits.v[k]);
    }
    const Grid g = bce_grad_logits(logits, gt);
    for (double v : g.v) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));

    Grid z1(1, 1, 0.0);
    Heatmap g1(1, 1, 1.0);
    CHECK(bce_grad_logits(z1, g1).at(0, 0) == doctest::Approx(-0.5));
}

TEST_CASE("bce_grad_logits matches central finite differences") {
    SplitRng rng(9, 0);
    auto loss_of = [](const Grid& z, const Heatmap& gt) {
        Heatmap p(z.h, z.w);
        for (std::size_t k = 0; k < z.v.size(); ++k) p.v[k] = sigmoid(z.v[k]);
        return bce_loss(p, gt);
    };
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        Grid z(5, 5);
        Heatmap gt(5, 5);
        for (auto& v : z.v) v = rng.uniform(-3, 3);
        for (auto& v : gt.v) v = rng.uniform();
        const Grid g = bce_grad_logits(z, gt);
        for (int k = 0; k < 25; ++k) {
            Grid zp = z, zm = z;
            zp.v[k] += h;
            zm.v[k] -= h;
            const double fd = (loss_of(zp, gt) - loss_of(zm, gt)) / (2 * h);
            const double denom = std::max(std::abs(fd), 1e-8);
            CHECK(std::abs(g.v[k] - fd) / denom <= 1e-4);
        }
    }
}

TEST_CASE("argmax_coords tie-breaking and inversion") {
    Heatmap uniform(4, 4, 0.3);
    CHECK(argmax_coords(uniform) == CellIndex{0, 0});

    Heatmap two(12, 12, 0.0);
    two.at(3, 7) = 0.9;
    two.at(9, 1) = 0.9;
    CHECK(argmax_coords(two) == CellIndex{3, 7});

    SplitRng rng(13, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int tx = rng.uniform_int(0, 31);
        const int ty = rng.uniform_int(0, 31);
        const double sigma = rng.uniform(0.5, 4.0);
        CHECK(argmax_coords(gaussian_gt_heatmap(tx, ty, sigma, 32, 32)) == CellIndex{ty, tx});
    }
}
