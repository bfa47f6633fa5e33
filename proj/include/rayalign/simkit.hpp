#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rayalign/scenegraph.hpp"

namespace rayalign {

// Analytic stand-in for the two-view network: renders ground-truth
// geometry, curates pairs, and emits pairwise edges with a controllable
// noise/outlier model and known ground truth.

struct AxisAlignedBox {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
};

struct SpherePrim {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
};

struct PlanePrim {
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::UnitY();
};

struct SceneGeometry {
    std::vector<AxisAlignedBox> boxes;
    std::vector<SpherePrim> spheres;
    std::vector<PlanePrim> planes;
};

/// 6 x 3 x 4 room with two interior boxes and a sphere; cameras near the
/// center stay in free space.
SceneGeometry default_room();

/// Distance to the nearest primitive surface along a ray, if any.
std::optional<double> cast_ray(const SceneGeometry& geom, const Vec3& origin, const Vec3& dir);

/// Renders per-pixel radial distances (and the pointmap) for a camera with
/// the given camera-to-world pose. Throws RayEscapes when a valid pixel's
/// ray misses every primitive.
std::pair<Pointmap, RadialMap> render_pointmap(const SceneGeometry& geom, const Pose& pose,
                                               const CameraSpec& spec);

struct PairProfile {
    std::string name;
    double d_min = 0;
    double d_max = 0;
    int top_k = 5;
    bool use_view_angle = false;
    double angle_min_deg = 0;
    double angle_max_deg = 180;
};

PairProfile profile_2d3ds();   // 0.1 .. 2.2 baseline
PairProfile profile_360loc();  // 1.5 .. 10.0 baseline
PairProfile profile_adt();     // 0.35 .. 1.75 baseline, 25..65 deg view angle
PairProfile profile_by_name(const std::string& name);

/// Undirected pairs whose baseline (and, for angle-gated profiles, forward-
/// axis angle) falls in the profile's window, truncated to the top_k closest
/// partners per anchor. Poses are camera-to-world.
std::vector<std::pair<int, int>> curate_pairs(const std::vector<Pose>& poses,
                                              const PairProfile& profile);

struct NoiseModel {
    double radial_rel_sigma = 0.0;      // lognormal sigma of multiplicative radial noise
    double rot_sigma_deg = 0.0;         // edge rotation perturbation
    double trans_dir_sigma_deg = 0.0;   // edge translation direction perturbation
    std::array<double, 2> edge_scale_range{1.0, 1.0};  // per directed edge
    double outlier_fraction = 0.0;      // fraction of pairs with one corrupted direction
    double min_outlier_rot_deg = 30.0;  // corrupted rotations deviate at least this much
    double conf_k = 100.0;              // confidence = 1 / (1 + k * injected rel. error)
    uint64_t seed = 0;
};

struct SimView {
    ViewId id = 0;
    CameraSpec camera;
    Pose gt_pose;             // camera-to-world
    double rogue_range = 0;   // > 0: render a private sphere of this radius
                              // instead of the scene (disjoint content)
};

struct SimScene {
    SceneGeometry geometry;
    std::vector<SimView> views;
};

/// Both directions per curated pair. Per-edge randomness is derived from
/// (seed, src, dst) so results do not depend on processing order; an exact
/// floor(outlier_fraction * pairs) pairs get one direction replaced by a
/// random pose.
std::vector<EdgeObservation> synthesize_edges(const SimScene& scene,
                                              const std::vector<std::pair<int, int>>& pairs,
                                              const NoiseModel& noise);

struct SimConfig {
    uint64_t seed = 1;
    std::string profile = "2d3ds";
    int n_views = 8;
    double loop_radius = 1.2;
    int equirect_width = 64, equirect_height = 32;
    int persp_width = 64, persp_height = 64;
    std::vector<std::string> camera_cycle{"equirect", "pinhole", "fisheye"};
    NoiseModel noise;
    SceneGeometry geometry = default_room();
    int rogue_view = -1;       // -1 = none
    double rogue_range = 100.0;
};

struct SimResult {
    SimScene scene;
    SceneGraph graph;  // views + both-direction edges for every curated pair
    std::vector<std::pair<int, int>> pairs;
    std::vector<Pose> gt_poses;  // aligned with graph.views
};

/// Deterministic end-to-end scene synthesis: camera loop, curation,
/// rendering, edge synthesis.
SimResult simulate(const SimConfig& cfg);

}  // namespace rayalign
