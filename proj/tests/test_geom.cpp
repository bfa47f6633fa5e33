#include <doctest.h>

#include "test_support.hpp"

using namespace rayalign;
using namespace rayalign::test;

TEST_CASE("rotation construction keeps SO(3) invariants") {
    auto g = rng(42);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int k = 0; k < 200; ++k) {
        const Rotation r = Rotation::from_axis_angle(random_unit(g) * u(g));
        const Mat3 m = r.matrix();
        CHECK((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(std::abs(m.determinant() - 1.0) <= 1e-9);
    }
    CHECK_THROWS_AS(Rotation::from_matrix(2.0 * Mat3::Identity()), Error);
    CHECK_THROWS_AS(Rotation::from_quaternion(0, 0, 0, 0), ZeroVector);
}

TEST_CASE("compose identities and the 90-degree example") {
    const Pose id = Pose::identity();
    const Pose composed = compose(id, id);
    CHECK(composed.translation.norm() == 0.0);
    CHECK((composed.rotation.matrix() - Mat3::Identity()).norm() == 0.0);

    const Pose a(rot_z(M_PI / 2), Vec3::Zero());
    const Pose b(Rotation::identity(), Vec3(1, 0, 0));
    const Vec3 t = compose(a, b).translation;
    CHECK(t.isApprox(Vec3(0, 1, 0), 1e-12));
}

TEST_CASE("pose inverse composes to identity") {
    auto g = rng(7);
    for (int k = 0; k < 1000; ++k) {
        const Pose p = random_pose(g);
        const Pose round = compose(p, p.inverse());
        CHECK((round.rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(round.translation.cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("relative_pose matches the printed formula") {
    auto g = rng(3);
    const Pose p = random_pose(g);
    const Pose rel_same = relative_pose(p, p);
    CHECK((rel_same.rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(rel_same.translation.cwiseAbs().maxCoeff() <= 1e-12);

    const Pose rel = relative_pose(Pose::identity(), Pose(Rotation::identity(), Vec3(0, 0, 1)));
    CHECK(rel.translation.isApprox(Vec3(0, 0, 1), 1e-15));
    CHECK((rel.rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("relative_pose maps frame i into frame j for world-to-camera maps") {
    auto g = rng(11);
    for (int k = 0; k < 200; ++k) {
        const Pose w2c_i = random_pose(g);
        const Pose w2c_j = random_pose(g);
        const Vec3 world_point = random_unit(g) * 3.0;
        const Vec3 in_i = w2c_i.apply(world_point);
        const Vec3 in_j = w2c_j.apply(world_point);
        CHECK(relative_pose(w2c_i, w2c_j).apply(in_i).isApprox(in_j, 1e-9));
    }
}

TEST_CASE("geodesic_angle examples and clamping") {
    CHECK(geodesic_angle(Rotation::identity(), Rotation::identity()) == 0.0);
    CHECK(geodesic_angle(rot_z(M_PI / 2), Rotation::identity()) == doctest::Approx(M_PI / 2));
    const double pi_angle = geodesic_angle(rot_x(M_PI), Rotation::identity());
    CHECK(std::isfinite(pi_angle));
    CHECK(pi_angle == doctest::Approx(M_PI));
}

TEST_CASE("geodesic_angle is symmetric, triangle-inequal, and matches the quaternion oracle") {
    auto g = rng(2024);
    for (int k = 0; k < 1000; ++k) {
        const Rotation a = random_rotation(g), b = random_rotation(g), c = random_rotation(g);
        const double ab = geodesic_angle(a, b);
        CHECK(std::abs(ab - geodesic_angle(b, a)) <= 1e-12);
        CHECK(ab <= geodesic_angle(a, c) + geodesic_angle(c, b) + 1e-7);
        CHECK(std::abs(ab - quaternion_angle_oracle(a, b)) <= 1e-9);
    }
}

TEST_CASE("direction_angle examples and the zero-vector error") {
    CHECK(direction_angle(Vec3(1, 0, 0), Vec3(1, 0, 0)) == 0.0);
    CHECK(direction_angle(Vec3(1, 0, 0), Vec3(0, 1, 0)) == doctest::Approx(M_PI / 2));
    CHECK(direction_angle(Vec3(1, 0, 0), Vec3(-2, 0, 0)) == doctest::Approx(M_PI));
    CHECK_THROWS_AS(direction_angle(Vec3::Zero(), Vec3(1, 0, 0)), ZeroVector);
}

TEST_CASE("umeyama_align trivial and constructed cases") {
    std::vector<Vec3> src{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.3, 0.2, 1.5}};
    SUBCASE("identity") {
        const SimilarityTransform s = umeyama_align(src, src, true);
        CHECK(std::abs(s.scale - 1.0) <= 1e-12);
        CHECK((s.rotation.matrix() - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(s.translation.cwiseAbs().maxCoeff() <= 1e-9);
    }
    SUBCASE("known similarity") {
        const Rotation r = rot_z(M_PI / 2);
        std::vector<Vec3> dst;
        for (const Vec3& p : src) dst.push_back(2.0 * r.apply(p) + Vec3(1, 2, 3));
        const SimilarityTransform s = umeyama_align(src, dst, true);
        CHECK(std::abs(s.scale - 2.0) <= 1e-9);
        CHECK((s.rotation.matrix() - r.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((s.translation - Vec3(1, 2, 3)).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("umeyama_align recovers random Sim(3) with tiny residual") {
    auto g = rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> us(0.2, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec3> src;
        for (int k = 0; k < 10; ++k) src.emplace_back(u(g), u(g), u(g));
        SimilarityTransform gt;
        gt.scale = us(g);
        gt.rotation = random_rotation(g);
        gt.translation = Vec3(u(g), u(g), u(g));
        std::vector<Vec3> dst;
        for (const Vec3& p : src) dst.push_back(gt.apply(p));
        const SimilarityTransform s = umeyama_align(src, dst, true);
        double sq = 0;
        for (size_t k = 0; k < src.size(); ++k) sq += (s.apply(src[k]) - dst[k]).squaredNorm();
        CHECK(std::sqrt(sq / src.size()) <= 1e-9);
    }
}

TEST_CASE("umeyama_align recovers rigid transforms with with_scale=false") {
    auto g = rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vec3> src;
    for (int k = 0; k < 8; ++k) src.emplace_back(u(g), u(g), u(g));
    const Pose a = random_pose(g);
    std::vector<Vec3> dst;
    for (const Vec3& p : src) dst.push_back(a.apply(p));
    const SimilarityTransform s = umeyama_align(src, dst, false);
    CHECK(s.scale == 1.0);
    CHECK((s.rotation.matrix() - a.rotation.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((s.translation - a.translation).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("umeyama_align rejects degenerate configurations") {
    std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    CHECK_THROWS_AS(umeyama_align(line, line, true), DegenerateConfiguration);
    std::vector<Vec3> pair{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(umeyama_align(pair, pair, true), DegenerateConfiguration);
    std::vector<Vec3> coincident(5, Vec3(1, 1, 1));
    CHECK_THROWS_AS(umeyama_align(coincident, coincident, true), DegenerateConfiguration);
}

TEST_CASE("orthonormalized projects drifted products back onto SO(3)") {
    auto g = rng(31);
    Rotation r = Rotation::identity();
    for (int k = 0; k < 5000; ++k) r = r * Rotation::from_axis_angle(random_unit(g) * 1e-3);
    const Mat3 m = r.orthonormalized().matrix();
    CHECK((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-14);
}
