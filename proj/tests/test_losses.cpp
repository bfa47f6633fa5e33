#include <doctest.h>

#include "rayalign/losses.hpp"
#include "test_support.hpp"

using namespace rayalign;
using namespace rayalign::test;

TEST_CASE("asym_angular_loss branch examples") {
    CHECK(asym_angular_loss({0.4}, {0.5}, 0.7) == doctest::Approx(0.07));
    CHECK(asym_angular_loss({0.6}, {0.5}, 0.7) == doctest::Approx(0.03));
    CHECK(asym_angular_loss({0.5}, {0.5}, 0.7) == 0.0);
    CHECK_THROWS_AS(asym_angular_loss({0.1, 0.2}, {0.1}, 0.5), LengthMismatch);
}

TEST_CASE("asym_angular_loss at alpha 0.5 is exactly half the L1 distance") {
    auto g = rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> pred(20), gt(20);
        double l1 = 0.0;
        for (int i = 0; i < 20; ++i) {
            pred[i] = u(g);
            gt[i] = u(g);
            l1 += std::abs(pred[i] - gt[i]);
        }
        CHECK(asym_angular_loss(pred, gt, 0.5) == 0.5 * l1);
    }
}

TEST_CASE("underestimation is penalized more at alpha 0.7") {
    const double eps = 0.05;
    CHECK(asym_angular_loss({1.0 - eps}, {1.0}, 0.7) >
          asym_angular_loss({1.0 + eps}, {1.0}, 0.7));
}

TEST_CASE("total_angular_loss reduces to its parts and matches brute force") {
    LossWeights w;
    auto g = rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> pt(30), gt_t(30), pp(30), gp(30);
    for (int i = 0; i < 30; ++i) {
        pt[i] = u(g);
        gt_t[i] = u(g);
        pp[i] = u(g);
        gp[i] = u(g);
    }

    w.beta = 1.0;
    CHECK(total_angular_loss(pt, gt_t, pp, gp, w) ==
          doctest::Approx(asym_angular_loss(pt, gt_t, 0.7)));
    w.beta = 0.0;
    CHECK(total_angular_loss(pt, gt_t, pp, gp, w) ==
          doctest::Approx(asym_angular_loss(pp, gp, 0.5)));

    // element-wise piecewise brute force as the oracle
    w.beta = 0.37;
    double expect = 0.0;
    for (int i = 0; i < 30; ++i) {
        const double dt = std::abs(pt[i] - gt_t[i]);
        expect += w.beta * (pt[i] < gt_t[i] ? 0.7 * dt : 0.3 * dt);
        const double dp = std::abs(pp[i] - gp[i]);
        expect += (1.0 - w.beta) * 0.5 * dp;
    }
    CHECK(total_angular_loss(pt, gt_t, pp, gp, w) == doctest::Approx(expect).epsilon(1e-12));
}

namespace {

Pointmap random_pointmap(uint64_t seed, int w = 8, int h = 6, double drop_rate = 0.1) {
    auto g = rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::bernoulli_distribution drop(drop_rate);
    Pointmap pm(w, h);
    for (size_t i = 0; i < pm.size(); ++i) {
        if (drop(g)) continue;
        pm.xyz[i] = Vec3(u(g), u(g), u(g) + 3.0);
        pm.valid[i] = 1;
    }
    return pm;
}

}  // namespace

TEST_CASE("local_regression_loss zero cases and scale invariance") {
    const Pointmap gt1 = random_pointmap(100);
    const Pointmap gt2 = random_pointmap(101);
    CHECK(local_regression_loss(gt1, gt1, gt2, gt2) <= 1e-18);

    Pointmap scaled1 = gt1, scaled2 = gt2;
    for (auto& p : scaled1.xyz) p *= 4.2;
    for (auto& p : scaled2.xyz) p *= 0.3;
    CHECK(local_regression_loss(scaled1, gt1, scaled2, gt2) <= 1e-18);

    CHECK_THROWS_AS(local_regression_loss(Pointmap(4, 4), Pointmap(4, 4), gt2, gt2),
                    EmptyPointmap);
}

TEST_CASE("local_regression_loss matches the brute-force double loop") {
    const Pointmap gt1 = random_pointmap(7);
    const Pointmap gt2 = random_pointmap(8);
    Pointmap pred1 = random_pointmap(9);
    Pointmap pred2 = random_pointmap(10);

    auto brute = [](const Pointmap& pred, const Pointmap& gt) {
        double eta_p = 0, eta_g = 0;
        size_t n = 0;
        for (size_t i = 0; i < pred.size(); ++i) {
            if (pred.valid[i] && gt.valid[i]) {
                eta_p += pred.xyz[i].norm();
                eta_g += gt.xyz[i].norm();
                ++n;
            }
        }
        eta_p /= double(n);
        eta_g /= double(n);
        double sum = 0;
        for (size_t i = 0; i < pred.size(); ++i) {
            if (pred.valid[i] && gt.valid[i]) {
                sum += (pred.xyz[i] / eta_p - gt.xyz[i] / eta_g).squaredNorm();
            }
        }
        return sum;
    };
    CHECK(local_regression_loss(pred1, gt1, pred2, gt2) ==
          doctest::Approx(brute(pred1, gt1) + brute(pred2, gt2)).epsilon(1e-12));

    // invariance to independent positive rescaling of either argument
    const double base = local_regression_loss(pred1, gt1, pred2, gt2);
    for (auto& p : pred1.xyz) p *= 2.5;
    for (auto& p : pred2.xyz) p *= 0.2;
    CHECK(local_regression_loss(pred1, gt1, pred2, gt2) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("pose_loss examples") {
    auto g = rng(3);
    const Rotation gt_rot = random_rotation(g);
    const Vec3 gt_trans = random_unit(g);
    const double s = 1.7;

    const auto exact = pose_loss(Pose(gt_rot, s * gt_trans), gt_rot, gt_trans, s, 2.0);
    CHECK(exact.rot <= 1e-9);
    CHECK(exact.trans <= 1e-18);
    CHECK(exact.total <= 1e-9);

    const auto rot90 = pose_loss(Pose(rot_z(M_PI / 2), Vec3::Zero()), Rotation::identity(),
                                 Vec3::Zero(), 1.0, 1.0);
    CHECK(rot90.rot == doctest::Approx(M_PI / 2));

    const auto shifted = pose_loss(Pose(gt_rot, s * gt_trans + Vec3(0.1, 0, 0)), gt_rot,
                                   gt_trans, s, 1.0);
    CHECK(shifted.trans == doctest::Approx(0.01));
}

TEST_CASE("total_loss weighting and linearity") {
    LossWeights w;
    CHECK(total_loss({0, 0, 0}, w) == 0.0);
    w.lambda_a = 1;
    w.lambda_regr = 2;
    w.lambda_pose_total = 3;
    CHECK(total_loss({1, 1, 1}, w) == doctest::Approx(6.0));

    auto g = rng(10);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const LossComponents a{u(g), u(g), u(g)};
        const LossComponents b{u(g), u(g), u(g)};
        const double k = u(g);
        const LossComponents sum{a.angular + k * b.angular, a.regression + k * b.regression,
                                 a.pose + k * b.pose};
        CHECK(total_loss(sum, w) ==
              doctest::Approx(total_loss(a, w) + k * total_loss(b, w)).epsilon(1e-12));
    }
}
