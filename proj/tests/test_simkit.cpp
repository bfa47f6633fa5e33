#include <doctest.h>

#include "rayalign/align.hpp"
#include "rayalign/simkit.hpp"
#include "test_support.hpp"

using namespace rayalign;
using namespace rayalign::test;

TEST_CASE("render_pointmap analytic radial examples") {
    SUBCASE("unit box from the center") {
        SceneGeometry geom;
        geom.boxes.push_back({Vec3(-1, -1, -1), Vec3(1, 1, 1)});
        const Vec3 corner_dir = Vec3(1, 1, 1).normalized();
        CHECK(*cast_ray(geom, Vec3::Zero(), Vec3(0, 0, 1)) == doctest::Approx(1.0));
        CHECK(*cast_ray(geom, Vec3::Zero(), corner_dir) == doctest::Approx(std::sqrt(3.0)));
    }
    SUBCASE("sphere around the camera") {
        SceneGeometry geom;
        geom.spheres.push_back({Vec3::Zero(), 2.0});
        const EquirectSpec spec{16, 8};
        const auto [pm, radial] = render_pointmap(geom, Pose::identity(), spec);
        for (size_t i = 0; i < radial.size(); ++i) {
            CHECK(radial.r[i] == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
    SUBCASE("plane intersection") {
        SceneGeometry geom;
        geom.planes.push_back({Vec3(0, 0, 3), Vec3(0, 0, -1)});
        CHECK(*cast_ray(geom, Vec3::Zero(), Vec3(0, 0, 1)) == doctest::Approx(3.0));
        CHECK(!cast_ray(geom, Vec3::Zero(), Vec3(0, 0, -1)).has_value());
    }
    SUBCASE("escaping rays raise") {
        SceneGeometry geom;
        geom.spheres.push_back({Vec3(0, 0, 5), 1.0});  // behind most rays
        CHECK_THROWS_AS(render_pointmap(geom, Pose::identity(), CameraSpec{EquirectSpec{8, 4}}),
                        RayEscapes);
    }
}

TEST_CASE("rendered points lie on primitive surfaces") {
    const SceneGeometry geom = default_room();
    auto g = rng(5);
    const Pose pose(Rotation::from_axis_angle(Vec3(0, 0.4, 0)), Vec3(0.5, 0.1, -0.3));
    const auto [pm, radial] = render_pointmap(geom, pose, CameraSpec{EquirectSpec{32, 16}});

    auto surface_distance = [&](const Vec3& p) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& b : geom.boxes) {
            // distance to the box boundary (inside or outside)
            Vec3 d = Vec3::Zero();
            double inside = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < 3; ++a) {
                d[a] = std::max({b.min[a] - p[a], 0.0, p[a] - b.max[a]});
                inside = std::max(inside, std::max(b.min[a] - p[a], p[a] - b.max[a]));
            }
            best = std::min(best, d.norm() > 0 ? d.norm() : std::abs(inside));
        }
        for (const auto& s : geom.spheres) {
            best = std::min(best, std::abs((p - s.center).norm() - s.radius));
        }
        return best;
    };
    for (size_t i = 0; i < pm.size(); ++i) {
        REQUIRE(pm.valid[i]);
        CHECK(surface_distance(pose.apply(pm.xyz[i])) <= 1e-9);
    }
}

TEST_CASE("two overlapping renders agree on mutually visible surface points") {
    const SceneGeometry geom = default_room();
    const Pose pose_a(Rotation::identity(), Vec3(0.4, 0, 0));
    const Pose pose_b(Rotation::from_axis_angle(Vec3(0, 0.3, 0)), Vec3(-0.4, 0.1, 0));
    const auto [pm_a, ra] = render_pointmap(geom, pose_a, CameraSpec{EquirectSpec{32, 16}});

    size_t mutual = 0;
    for (size_t i = 0; i < pm_a.size(); i += 7) {
        const Vec3 world = pose_a.apply(pm_a.xyz[i]);
        const Vec3 from_b = world - pose_b.translation;
        const double expected = from_b.norm();
        const auto t = cast_ray(geom, pose_b.translation, from_b / expected);
        REQUIRE(t.has_value());
        // either the same surface point, or it is occluded from b
        if (std::abs(*t - expected) > 1e-9) {
            CHECK(*t < expected);
        } else {
            ++mutual;
        }
    }
    CHECK(mutual > 10);
}

TEST_CASE("curate_pairs baseline windows") {
    std::vector<Pose> poses;
    poses.emplace_back(Rotation::identity(), Vec3(0, 0, 0));
    poses.emplace_back(Rotation::identity(), Vec3(0.05, 0, 0));
    poses.emplace_back(Rotation::identity(), Vec3(1.05, 0, 0));

    const auto pairs = curate_pairs(poses, profile_2d3ds());
    // (0,1) at 0.05 is under d_min; (0,2) at 1.05 and (1,2) at 1.0 qualify
    CHECK(std::find(pairs.begin(), pairs.end(), std::make_pair(0, 1)) == pairs.end());
    CHECK(std::find(pairs.begin(), pairs.end(), std::make_pair(0, 2)) != pairs.end());
    CHECK(std::find(pairs.begin(), pairs.end(), std::make_pair(1, 2)) != pairs.end());
}

TEST_CASE("curate_pairs ADT viewing-angle window") {
    std::vector<Pose> poses;
    poses.emplace_back(Rotation::identity(), Vec3(0, 0, 0));
    poses.emplace_back(Rotation::from_axis_angle(Vec3(0, M_PI / 4, 0)), Vec3(1, 0, 0));
    CHECK(curate_pairs(poses, profile_adt()).size() == 1);  // 45 deg accepted

    poses[1].rotation = Rotation::from_axis_angle(Vec3(0, M_PI / 18, 0));  // 10 deg
    CHECK(curate_pairs(poses, profile_adt()).empty());
}

TEST_CASE("curate_pairs keeps only the top-K nearest partners") {
    std::vector<Pose> poses;
    for (int k = 0; k < 9; ++k) {
        poses.emplace_back(Rotation::identity(), Vec3(0.2 * k, 0, 0));
    }
    PairProfile profile = profile_2d3ds();
    profile.top_k = 2;
    const auto pairs = curate_pairs(poses, profile);
    // every anchor keeps its 2 closest; union over anchors
    for (const auto& [i, j] : pairs) {
        CHECK(std::abs(i - j) <= 2);
    }
    CHECK(std::find(pairs.begin(), pairs.end(), std::make_pair(0, 1)) != pairs.end());
}

TEST_CASE("synthesize_edges: zero noise gives exactly consistent reciprocal edges") {
    SimConfig cfg;
    cfg.seed = 9;
    cfg.n_views = 6;
    cfg.equirect_width = 16;
    cfg.equirect_height = 8;
    cfg.persp_width = 16;
    cfg.persp_height = 16;
    const SimResult sim = simulate(cfg);
    for (const auto& e : sim.graph.edges) {
        if (e.dst > e.src) continue;
        for (const auto& r : sim.graph.edges) {
            if (r.src == e.dst && r.dst == e.src) {
                const SymmetryCheck c = symmetric_pose_check(e, r, 1e-5, 1e-5);
                CHECK(c.theta_rot_deg <= 1e-5);
                if (c.translation_tested) CHECK(c.theta_tra_deg <= 1e-5);
            }
        }
    }
}

TEST_CASE("synthesize_edges with zero noise survives pruning and aligns to nothing") {
    SimConfig cfg;
    cfg.seed = 13;
    cfg.n_views = 6;
    cfg.equirect_width = 32;
    cfg.equirect_height = 16;
    cfg.persp_width = 32;
    cfg.persp_height = 32;
    cfg.noise.edge_scale_range = {0.5, 2.0};
    const SimResult sim = simulate(cfg);
    const auto [pruned, report] = prune(sim.graph, PruneConfig{.quantile = 0.0});
    CHECK(pruned.edges.size() == sim.graph.edges.size());

    AlignConfig acfg;
    acfg.joint_iters = 600;
    acfg.joint_restarts = 2;
    acfg.convergence_tol = 0.0;
    const AlignmentResult result = optimize(pruned, acfg);
    CHECK(result.final_objective <= 1e-10 * result.initial_objective);
}

TEST_CASE("edge pair_scale is recoverable from the radials") {
    SimConfig cfg;
    cfg.seed = 23;
    cfg.n_views = 4;
    cfg.equirect_width = 16;
    cfg.equirect_height = 8;
    cfg.persp_width = 16;
    cfg.persp_height = 16;
    cfg.noise.edge_scale_range = {0.5, 2.0};
    const SimResult sim = simulate(cfg);

    std::vector<RadialMap> gt(sim.graph.views.size());
    for (size_t v = 0; v < sim.graph.views.size(); ++v) {
        gt[v] = render_pointmap(sim.scene.geometry, sim.gt_poses[v],
                                sim.graph.views[v].camera)
                    .second;
    }
    for (const auto& e : sim.graph.edges) {
        const int vd = sim.graph.view_index(e.dst);
        for (size_t i = 0; i < e.radial_dst.size(); ++i) {
            if (e.radial_dst.r[i] > 0) {
                CHECK(e.radial_dst.r[i] / gt[vd].r[i] ==
                      doctest::Approx(e.pair_scale).epsilon(1e-9));
            }
        }
        // translation carries the same scale so the edge stays coherent
        const Pose gt_rel = relative_pose(sim.gt_poses[sim.graph.view_index(e.src)].inverse(),
                                          sim.gt_poses[vd].inverse());
        CHECK(e.pose.translation.norm() ==
              doctest::Approx(e.pair_scale * gt_rel.translation.norm()).epsilon(1e-9));
    }
}

TEST_CASE("outlier injection count is exact and seeded") {
    SimConfig cfg;
    cfg.seed = 40;
    cfg.n_views = 10;
    cfg.loop_radius = 1.5;  // ring +-1 +-2 only: 20 pairs
    cfg.equirect_width = 16;
    cfg.equirect_height = 8;
    cfg.persp_width = 16;
    cfg.persp_height = 16;
    cfg.noise.outlier_fraction = 0.2;
    const SimResult sim = simulate(cfg);
    REQUIRE(sim.pairs.size() == 20);

    size_t corrupted = 0;
    for (const auto& e : sim.graph.edges) {
        const Pose gt_rel = relative_pose(sim.gt_poses[sim.graph.view_index(e.src)].inverse(),
                                          sim.gt_poses[sim.graph.view_index(e.dst)].inverse());
        if (geodesic_angle(e.pose.rotation, gt_rel.rotation) >= 30.0 * M_PI / 180.0 - 1e-9) {
            ++corrupted;
        }
    }
    CHECK(corrupted == 4);  // floor(0.2 * 20), one direction each
}

TEST_CASE("confidence anti-correlates with injected radial error") {
    SimConfig cfg;
    cfg.seed = 31;
    cfg.n_views = 4;
    cfg.equirect_width = 16;
    cfg.equirect_height = 8;
    cfg.persp_width = 16;
    cfg.persp_height = 16;
    cfg.noise.radial_rel_sigma = 0.05;
    cfg.noise.conf_k = 100.0;
    const SimResult sim = simulate(cfg);

    std::vector<RadialMap> gt(sim.graph.views.size());
    for (size_t v = 0; v < sim.graph.views.size(); ++v) {
        gt[v] = render_pointmap(sim.scene.geometry, sim.gt_poses[v],
                                sim.graph.views[v].camera)
                    .second;
    }
    const auto& e = sim.graph.edges[0];
    const int vd = sim.graph.view_index(e.dst);
    for (size_t i = 0; i < e.radial_dst.size(); ++i) {
        if (e.radial_dst.r[i] <= 0) continue;
        const double rel_err = std::abs(e.radial_dst.r[i] / (gt[vd].r[i] * e.pair_scale) - 1.0);
        CHECK(e.conf_dst.sigma[i] == doctest::Approx(1.0 / (1.0 + 100.0 * rel_err)).epsilon(1e-9));
    }
}

TEST_CASE("simulate is bit-deterministic for a fixed seed") {
    SimConfig cfg;
    cfg.seed = 99;
    cfg.n_views = 6;
    cfg.equirect_width = 16;
    cfg.equirect_height = 8;
    cfg.persp_width = 16;
    cfg.persp_height = 16;
    cfg.noise.radial_rel_sigma = 0.02;
    cfg.noise.rot_sigma_deg = 1.0;
    cfg.noise.edge_scale_range = {0.5, 2.0};
    cfg.noise.outlier_fraction = 0.25;

    const SimResult a = simulate(cfg);
    const SimResult b = simulate(cfg);
    REQUIRE(a.graph.edges.size() == b.graph.edges.size());
    for (size_t e = 0; e < a.graph.edges.size(); ++e) {
        CHECK(a.graph.edges[e].pair_scale == b.graph.edges[e].pair_scale);
        CHECK((a.graph.edges[e].pose.matrix() - b.graph.edges[e].pose.matrix())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK(a.graph.edges[e].radial_dst.r == b.graph.edges[e].radial_dst.r);
        CHECK(a.graph.edges[e].conf_src.sigma == b.graph.edges[e].conf_src.sigma);
    }
}
