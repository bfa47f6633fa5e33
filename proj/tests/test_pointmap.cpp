#include <doctest.h>

#include "rayalign/pointmap.hpp"
#include "test_support.hpp"

using namespace rayalign;
using namespace rayalign::test;

namespace {

// Random unit-ray field + positive radials with a sprinkling of invalids.
std::pair<RayField, RadialMap> random_fields(uint64_t seed, int w = 12, int h = 9) {
    auto g = rng(seed);
    std::uniform_real_distribution<double> u(0.1, 8.0);
    std::bernoulli_distribution drop(0.15);
    RayField rays(w, h);
    RadialMap radial(w, h);
    for (size_t i = 0; i < rays.size(); ++i) {
        if (drop(g)) continue;
        rays.dirs[i] = random_unit(g);
        rays.valid[i] = 1;
        radial.r[i] = drop(g) ? 0.0 : u(g);
    }
    return {std::move(rays), std::move(radial)};
}

}  // namespace

TEST_CASE("make_pointmap examples") {
    RayField rays(2, 1);
    rays.dirs[0] = Vec3(0, 0, 1);
    rays.valid[0] = 1;
    rays.dirs[1] = Vec3(1, 0, 0);
    rays.valid[1] = 1;
    RadialMap radial(2, 1);
    radial.r[0] = 2.5;
    radial.r[1] = 0.0;  // invalid

    const Pointmap pm = make_pointmap(rays, radial);
    CHECK(pm.xyz[0].isApprox(Vec3(0, 0, 2.5), 1e-15));
    CHECK(pm.valid[0] == 1);
    CHECK(pm.valid[1] == 0);

    CHECK_THROWS_AS(make_pointmap(rays, RadialMap(3, 1)), DimensionMismatch);
}

TEST_CASE("pointmap norm equals the radial on valid pixels") {
    auto [rays, radial] = random_fields(21);
    const Pointmap pm = make_pointmap(rays, radial);
    for (size_t i = 0; i < pm.size(); ++i) {
        if (pm.valid[i]) CHECK(std::abs(pm.xyz[i].norm() - radial.r[i]) <= 1e-9);
    }
}

TEST_CASE("transform_pointmap examples and rigidity") {
    auto [rays, radial] = random_fields(33);
    const Pointmap pm = make_pointmap(rays, radial);

    SUBCASE("identity") {
        const Pointmap same = transform_pointmap(pm, Pose::identity());
        for (size_t i = 0; i < pm.size(); ++i) CHECK(same.xyz[i].isApprox(pm.xyz[i], 1e-15));
    }
    SUBCASE("pure translation") {
        Pointmap single(1, 1);
        single.xyz[0] = Vec3(0, 0, 1);
        single.valid[0] = 1;
        const Pointmap moved =
            transform_pointmap(single, Pose(Rotation::identity(), Vec3(1, 0, 0)));
        CHECK(moved.xyz[0].isApprox(Vec3(1, 0, 1), 1e-15));
    }
    SUBCASE("round trip and rigidity") {
        auto g = rng(55);
        const Pose p = random_pose(g);
        const Pointmap moved = transform_pointmap(pm, p);
        const Pointmap back = transform_pointmap(moved, p.inverse());
        for (size_t i = 0; i < pm.size(); ++i) {
            if (!pm.valid[i]) continue;
            CHECK((back.xyz[i] - pm.xyz[i]).cwiseAbs().maxCoeff() <= 1e-9);
            for (size_t j = i + 1; j < pm.size(); j += 17) {
                if (!pm.valid[j]) continue;
                const double before = (pm.xyz[i] - pm.xyz[j]).norm();
                const double after = (moved.xyz[i] - moved.xyz[j]).norm();
                CHECK(std::abs(before - after) <= 1e-9);
            }
        }
    }
}

TEST_CASE("norm_factor examples and homogeneity") {
    Pointmap pm(2, 1);
    pm.xyz[0] = Vec3(0, 0, 1);
    pm.valid[0] = 1;
    pm.xyz[1] = Vec3(0, 0, 3);
    pm.valid[1] = 1;
    CHECK(norm_factor(pm) == doctest::Approx(2.0));

    Pointmap all5(3, 1);
    for (int i = 0; i < 3; ++i) {
        all5.xyz[i] = 5.0 * Vec3(0, 1, 0);
        all5.valid[i] = 1;
    }
    CHECK(norm_factor(all5) == doctest::Approx(5.0));

    auto [rays, radial] = random_fields(8);
    Pointmap random_pm = make_pointmap(rays, radial);
    const double base = norm_factor(random_pm);
    for (auto& p : random_pm.xyz) p *= 3.25;
    CHECK(norm_factor(random_pm) == doctest::Approx(3.25 * base).epsilon(1e-12));

    CHECK_THROWS_AS(norm_factor(Pointmap(4, 4)), EmptyPointmap);
}

TEST_CASE("decompose_pointmap inverts make_pointmap") {
    Pointmap pm(2, 1);
    pm.xyz[0] = Vec3(0, 0, 2.5);
    pm.valid[0] = 1;
    pm.xyz[1] = Vec3::Zero();
    pm.valid[1] = 1;  // zero point becomes invalid on decompose
    const auto [rays, radial] = decompose_pointmap(pm);
    CHECK(rays.dirs[0].isApprox(Vec3(0, 0, 1), 1e-15));
    CHECK(radial.r[0] == doctest::Approx(2.5));
    CHECK(rays.valid[1] == 0);

    auto [rf, rm] = random_fields(13);
    const Pointmap made = make_pointmap(rf, rm);
    const auto [rf2, rm2] = decompose_pointmap(made);
    const Pointmap remade = make_pointmap(rf2, rm2);
    for (size_t i = 0; i < made.size(); ++i) {
        CHECK(made.valid[i] == remade.valid[i]);
        if (made.valid[i]) CHECK((made.xyz[i] - remade.xyz[i]).cwiseAbs().maxCoeff() <= 1e-9);
    }
}
