#include <doctest.h>

#include "rayalign/metrics.hpp"
#include "test_support.hpp"

using namespace rayalign;
using namespace rayalign::test;

namespace {

std::vector<PairErrors> make_errors(std::initializer_list<double> rot,
                                    std::initializer_list<double> trans) {
    std::vector<PairErrors> out;
    auto r = rot.begin();
    auto t = trans.begin();
    for (; r != rot.end(); ++r, ++t) out.push_back({*r, *t});
    return out;
}

}  // namespace

TEST_CASE("rra/rta examples and the strict-inequality boundary") {
    const auto errors = make_errors({5, 10, 20}, {0, 0, 0});
    CHECK(rra_at(errors, 15) == doctest::Approx(100.0 * 2 / 3));
    CHECK(rra_at(make_errors({0, 0}, {0, 0}), 15) == 100.0);
    CHECK(rra_at(make_errors({180, 180}, {0, 0}), 15) == 0.0);

    const auto tr = make_errors({0, 0, 0}, {5, 10, 20});
    CHECK(rta_at(tr, 15) == doctest::Approx(100.0 * 2 / 3));
    // rotation column is ignored by rta
    CHECK(rta_at(make_errors({120, 150}, {1, 2}), 15) == 100.0);
    // strict inequality at the threshold
    CHECK(rta_at(make_errors({0, 0}, {29, 31}), 30) == 50.0);
    CHECK(rta_at(make_errors({0, 0}, {30, 30}), 30) == 0.0);

    CHECK_THROWS_AS(rra_at({}, 15), EmptyList);
}

TEST_CASE("rra/rta are monotone in the threshold") {
    auto g = rng(3);
    std::uniform_real_distribution<double> u(0.0, 180.0);
    std::vector<PairErrors> errors;
    for (int k = 0; k < 50; ++k) errors.push_back({u(g), u(g)});
    for (double tau = 1; tau < 180; tau += 7) {
        CHECK(rra_at(errors, tau) <= rra_at(errors, tau + 7));
        CHECK(rta_at(errors, tau) <= rta_at(errors, tau + 7));
    }
}

TEST_CASE("maa examples") {
    CHECK(maa(make_errors({0, 0}, {0, 0}), 30) == 100.0);
    CHECK(maa(make_errors({0.5}, {0.5}), 30) == 100.0);
    // (15.5, 0): passes thresholds 16..30, 15 of 30
    CHECK(maa(make_errors({15.5}, {0}), 30) == doctest::Approx(50.0));
    CHECK_THROWS_AS(maa({}, 30), EmptyList);
}

TEST_CASE("maa is bounded by rra and rta at the same threshold") {
    auto g = rng(8);
    std::uniform_real_distribution<double> u(0.0, 60.0);
    std::vector<PairErrors> errors;
    for (int k = 0; k < 100; ++k) errors.push_back({u(g), u(g)});
    CHECK(maa(errors, 30) <= rra_at(errors, 30) + 1e-12);
    CHECK(maa(errors, 30) <= rta_at(errors, 30) + 1e-12);
}

TEST_CASE("ate_rmse: exactness, similarity invariance, displacement bound") {
    auto g = rng(12);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<Vec3> gt;
    for (int k = 0; k < 12; ++k) gt.emplace_back(u(g), u(g), u(g));

    CHECK(ate_rmse(gt, gt) <= 1e-12);

    SimilarityTransform sim;
    sim.scale = 2.3;
    sim.rotation = random_rotation(g);
    sim.translation = Vec3(0.4, -1.0, 2.0);
    std::vector<Vec3> est;
    for (const Vec3& p : gt) est.push_back(sim.apply(p));
    CHECK(ate_rmse(est, gt) <= 1e-9);

    // invariance: applying any similarity to est leaves the metric unchanged
    std::vector<Vec3> est2 = gt;
    est2[3] += Vec3(0.2, 0, 0);
    const double base = ate_rmse(est2, gt);
    SimilarityTransform extra;
    extra.scale = 0.7;
    extra.rotation = random_rotation(g);
    extra.translation = Vec3(5, 5, 5);
    std::vector<Vec3> est3;
    for (const Vec3& p : est2) est3.push_back(extra.apply(p));
    CHECK(ate_rmse(est3, gt) == doctest::Approx(base).epsilon(1e-9));

    // single displaced center: at most |delta|/sqrt(N) after alignment
    const Vec3 delta(0.5, -0.2, 0.1);
    std::vector<Vec3> displaced = gt;
    displaced[5] += delta;
    CHECK(ate_rmse(displaced, gt) <= delta.norm() / std::sqrt(double(gt.size())) + 1e-12);

    std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    CHECK_THROWS_AS(ate_rmse(line, line), DegenerateConfiguration);
}

TEST_CASE("pairwise_pose_errors measures relative rotation and direction") {
    auto g = rng(21);
    std::vector<Pose> gt;
    for (int k = 0; k < 5; ++k) gt.push_back(random_pose(g));

    SUBCASE("identical trajectories have zero errors") {
        for (const auto& e : pairwise_pose_errors(gt, gt)) {
            CHECK(e.rot_err_deg <= 1e-5);
            CHECK(e.trans_dir_err_deg <= 1e-5);
        }
    }
    SUBCASE("a global similarity leaves relative errors at zero") {
        SimilarityTransform sim;
        sim.scale = 3.0;
        sim.rotation = random_rotation(g);
        sim.translation = Vec3(1, 2, 3);
        std::vector<Pose> est;
        for (const auto& p : gt) {
            est.emplace_back(sim.rotation * p.rotation, sim.apply(p.translation));
        }
        for (const auto& e : pairwise_pose_errors(est, gt)) {
            CHECK(e.rot_err_deg <= 1e-5);
            CHECK(e.trans_dir_err_deg <= 1e-5);
        }
    }
    SUBCASE("a rotated view shows up in all its pairs") {
        std::vector<Pose> est = gt;
        est[2].rotation = est[2].rotation * rot_z(M_PI / 6);
        int touched = 0;
        size_t idx = 0;
        for (size_t i = 0; i < gt.size(); ++i) {
            for (size_t j = i + 1; j < gt.size(); ++j, ++idx) {
                const auto errors = pairwise_pose_errors(est, gt);
                if (i == 2 || j == 2) {
                    CHECK(errors[idx].rot_err_deg == doctest::Approx(30.0).epsilon(1e-6));
                    ++touched;
                }
            }
        }
        CHECK(touched == 4);
    }
}
