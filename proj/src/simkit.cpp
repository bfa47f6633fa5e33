#include "rayalign/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace rayalign {

namespace {

constexpr double kRayEps = 1e-9;

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

uint64_t edge_seed(uint64_t master, int64_t a, int64_t b) {
    return splitmix64(splitmix64(master ^ uint64_t(a + 1)) ^ (uint64_t(b + 1) << 20));
}

std::optional<double> hit_box(const AxisAlignedBox& box, const Vec3& o, const Vec3& d) {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
            continue;
        }
        double t0 = (box.min[a] - o[a]) / d[a];
        double t1 = (box.max[a] - o[a]) / d[a];
        if (t0 > t1) std::swap(t0, t1);
        t_near = std::max(t_near, t0);
        t_far = std::min(t_far, t1);
    }
    if (t_near > t_far) return std::nullopt;
    if (t_near > kRayEps) return t_near;  // outside, entering
    if (t_far > kRayEps) return t_far;    // inside, exiting
    return std::nullopt;
}

std::optional<double> hit_sphere(const SpherePrim& s, const Vec3& o, const Vec3& d) {
    const Vec3 oc = o - s.center;
    const double b = oc.dot(d);
    const double c = oc.squaredNorm() - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double t0 = -b - root;
    if (t0 > kRayEps) return t0;
    const double t1 = -b + root;
    if (t1 > kRayEps) return t1;
    return std::nullopt;
}

std::optional<double> hit_plane(const PlanePrim& p, const Vec3& o, const Vec3& d) {
    const double denom = d.dot(p.normal);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = (p.point - o).dot(p.normal) / denom;
    if (t > kRayEps) return t;
    return std::nullopt;
}

}  // namespace

SceneGeometry default_room() {
    SceneGeometry g;
    g.boxes.push_back({Vec3(-3.0, -1.5, -2.0), Vec3(3.0, 1.5, 2.0)});  // the room shell
    g.boxes.push_back({Vec3(1.4, 0.3, -1.0), Vec3(2.4, 1.5, 0.0)});
    g.boxes.push_back({Vec3(-2.4, 0.6, 0.8), Vec3(-1.6, 1.5, 1.6)});
    g.spheres.push_back({Vec3(0.5, 0.9, 1.3), 0.35});
    return g;
}

std::optional<double> cast_ray(const SceneGeometry& geom, const Vec3& origin, const Vec3& dir) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : geom.boxes) {
        if (auto t = hit_box(b, origin, dir)) best = std::min(best, *t);
    }
    for (const auto& s : geom.spheres) {
        if (auto t = hit_sphere(s, origin, dir)) best = std::min(best, *t);
    }
    for (const auto& p : geom.planes) {
        if (auto t = hit_plane(p, origin, dir)) best = std::min(best, *t);
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

std::pair<Pointmap, RadialMap> render_pointmap(const SceneGeometry& geom, const Pose& pose,
                                               const CameraSpec& spec) {
    const RayField rays = make_rays(spec);
    RadialMap radial(rays.width, rays.height);
    for (size_t i = 0; i < rays.size(); ++i) {
        if (!rays.valid[i]) continue;
        const Vec3 world_dir = pose.rotation.apply(rays.dirs[i]);
        const auto t = cast_ray(geom, pose.translation, world_dir);
        if (!t) {
            throw RayEscapes("render_pointmap: pixel " + std::to_string(i) +
                             " misses all primitives");
        }
        radial.r[i] = *t;
    }
    return {make_pointmap(rays, radial), std::move(radial)};
}

PairProfile profile_2d3ds() { return {"2d3ds", 0.1, 2.2, 5, false, 0, 180}; }
PairProfile profile_360loc() { return {"360loc", 1.5, 10.0, 5, false, 0, 180}; }
PairProfile profile_adt() { return {"adt", 0.35, 1.75, 5, true, 25.0, 65.0}; }

PairProfile profile_by_name(const std::string& name) {
    if (name == "2d3ds") return profile_2d3ds();
    if (name == "360loc") return profile_360loc();
    if (name == "adt") return profile_adt();
    throw ConfigError("unknown pair profile: " + name);
}

std::vector<std::pair<int, int>> curate_pairs(const std::vector<Pose>& poses,
                                              const PairProfile& profile) {
    const int n = static_cast<int>(poses.size());
    auto admissible = [&](int i, int j) {
        const double baseline = (poses[i].translation - poses[j].translation).norm();
        if (baseline < profile.d_min || baseline > profile.d_max) return false;
        if (profile.use_view_angle) {
            const Vec3 fi = poses[i].rotation.apply(Vec3::UnitZ());
            const Vec3 fj = poses[j].rotation.apply(Vec3::UnitZ());
            const double angle = direction_angle(fi, fj) * 180.0 / M_PI;
            if (angle < profile.angle_min_deg || angle > profile.angle_max_deg) return false;
        }
        return true;
    };

    std::set<std::pair<int, int>> selected;
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> partners;  // (baseline, j)
        for (int j = 0; j < n; ++j) {
            if (j == i || !admissible(i, j)) continue;
            partners.emplace_back((poses[i].translation - poses[j].translation).norm(), j);
        }
        std::sort(partners.begin(), partners.end());
        const int k = std::min<int>(profile.top_k, static_cast<int>(partners.size()));
        for (int p = 0; p < k; ++p) {
            const int j = partners[p].second;
            selected.insert({std::min(i, j), std::max(i, j)});
        }
    }
    return {selected.begin(), selected.end()};
}

namespace {

Rotation random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    return Rotation::from_quaternion(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
}

Rotation small_rotation(std::mt19937_64& rng, double sigma_deg) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
    if (axis.norm() < 1e-12) axis = Vec3::UnitX();
    axis.normalize();
    const double angle = gauss(rng) * sigma_deg * M_PI / 180.0;
    return Rotation::from_axis_angle(axis * angle);
}

}  // namespace

std::vector<EdgeObservation> synthesize_edges(const SimScene& scene,
                                              const std::vector<std::pair<int, int>>& pairs,
                                              const NoiseModel& noise) {
    const auto& views = scene.views;

    // GT radials per view, rendered once. A rogue view renders a private
    // sphere around its camera: self-consistent geometry that lands far from
    // the shared scene once placed at the reported pose.
    std::vector<RadialMap> gt_radial(views.size());
    std::vector<RayField> gt_rays(views.size());
    for (size_t v = 0; v < views.size(); ++v) {
        if (views[v].rogue_range > 0.0) {
            SceneGeometry private_geom;
            private_geom.spheres.push_back(
                {views[v].gt_pose.translation, views[v].rogue_range});
            gt_radial[v] =
                render_pointmap(private_geom, views[v].gt_pose, views[v].camera).second;
        } else {
            gt_radial[v] =
                render_pointmap(scene.geometry, views[v].gt_pose, views[v].camera).second;
        }
        gt_rays[v] = make_rays(views[v].camera);
    }

    // Exact outlier count: floor(fraction * pairs), chosen by a seeded shuffle.
    std::vector<int> corrupted_direction(pairs.size(), -1);  // -1 none, 0 fwd, 1 rev
    const size_t n_outliers =
        static_cast<size_t>(std::floor(noise.outlier_fraction * double(pairs.size())));
    {
        std::mt19937_64 rng(edge_seed(noise.seed, -7, -7));
        std::vector<size_t> order(pairs.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t k = 0; k < n_outliers && k < order.size(); ++k) {
            corrupted_direction[order[k]] = static_cast<int>(rng() & 1ull);
        }
    }

    std::vector<EdgeObservation> edges;
    edges.reserve(2 * pairs.size());
    for (size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        for (int direction = 0; direction < 2; ++direction) {
            const int dst = direction == 0 ? i : j;
            const int src = direction == 0 ? j : i;
            std::mt19937_64 rng(edge_seed(noise.seed, views[src].id, views[dst].id));
            std::uniform_real_distribution<double> uni(noise.edge_scale_range[0],
                                                       noise.edge_scale_range[1]);
            std::normal_distribution<double> gauss(0.0, 1.0);

            EdgeObservation e;
            e.src = views[src].id;
            e.dst = views[dst].id;
            e.pair_scale = uni(rng);

            // Relative pose src frame -> dst frame from world-to-camera maps.
            const Pose gt_rel =
                relative_pose(views[src].gt_pose.inverse(), views[dst].gt_pose.inverse());
            Pose pred = gt_rel;
            pred.translation *= e.pair_scale;
            double pose_err = 0.0;  // injected pose error in radians
            if (noise.rot_sigma_deg > 0.0) {
                const Rotation perturb = small_rotation(rng, noise.rot_sigma_deg);
                pose_err += geodesic_angle(perturb, Rotation::identity());
                pred.rotation = perturb * pred.rotation;
            }
            if (noise.trans_dir_sigma_deg > 0.0 && pred.translation.norm() > 1e-12) {
                const Rotation perturb = small_rotation(rng, noise.trans_dir_sigma_deg);
                const Vec3 before = pred.translation;
                pred.translation = perturb.apply(pred.translation);
                pose_err += direction_angle(before, pred.translation);
            }

            if (corrupted_direction[p] == direction) {
                Rotation r = random_rotation(rng);
                while (geodesic_angle(r, gt_rel.rotation) <
                       noise.min_outlier_rot_deg * M_PI / 180.0) {
                    r = random_rotation(rng);
                }
                pred.rotation = r;
                pose_err += geodesic_angle(r, gt_rel.rotation);
                Vec3 t(gauss(rng), gauss(rng), gauss(rng));
                while (t.norm() < 1e-9) t = Vec3(gauss(rng), gauss(rng), gauss(rng));
                pred.translation = t.normalized();
            }
            e.pose = pred;

            // Confidence is anti-correlated with the edge's total injected
            // error at that pixel: multiplicative radial error plus the
            // edge-level pose perturbation.
            auto noisy_radial = [&](int view) {
                const RadialMap& gt = gt_radial[view];
                RadialMap r(gt.width, gt.height);
                ConfidenceMap c(gt.width, gt.height, 0.0);
                for (size_t px = 0; px < gt.size(); ++px) {
                    if (gt.r[px] <= 0.0) continue;
                    double mult = 1.0;
                    if (noise.radial_rel_sigma > 0.0) {
                        mult = std::exp(gauss(rng) * noise.radial_rel_sigma);
                    }
                    r.r[px] = gt.r[px] * e.pair_scale * mult;
                    const double err = std::abs(mult - 1.0) + pose_err;
                    c.sigma[px] = 1.0 / (1.0 + noise.conf_k * err);
                }
                return std::make_pair(std::move(r), std::move(c));
            };
            std::tie(e.radial_dst, e.conf_dst) = noisy_radial(dst);
            std::tie(e.radial_src, e.conf_src) = noisy_radial(src);
            edges.push_back(std::move(e));
        }
    }
    return edges;
}

SimResult simulate(const SimConfig& cfg) {
    SimResult result;
    result.scene.geometry = cfg.geometry;

    for (int k = 0; k < cfg.n_views; ++k) {
        const double a = 2.0 * M_PI * k / cfg.n_views;
        SimView view;
        view.id = k;
        // Tangent-facing camera on a gently bobbing loop.
        Mat3 r;
        r.col(0) = Vec3(std::cos(a), 0.0, std::sin(a));
        r.col(1) = Vec3(0.0, 1.0, 0.0);
        r.col(2) = Vec3(-std::sin(a), 0.0, std::cos(a));
        view.gt_pose = Pose(Rotation::from_matrix(r),
                            Vec3(cfg.loop_radius * std::cos(a), 0.15 * std::sin(2.0 * a),
                                 cfg.loop_radius * std::sin(a)));

        const std::string& kind = cfg.camera_cycle[k % cfg.camera_cycle.size()];
        if (kind == "equirect") {
            view.camera = EquirectSpec{cfg.equirect_width, cfg.equirect_height};
        } else if (kind == "pinhole") {
            const double f = 0.8 * cfg.persp_width;
            view.camera = PinholeSpec{cfg.persp_width, cfg.persp_height, f, f,
                                      cfg.persp_width / 2.0, cfg.persp_height / 2.0};
        } else if (kind == "fisheye") {
            const double theta_max = 1.6;  // a bit beyond 90 deg half angle
            const double f = (cfg.persp_width / 2.0) / theta_max;
            view.camera = FisheyeSpec{cfg.persp_width,      cfg.persp_height,
                                      f,                    cfg.persp_width / 2.0,
                                      cfg.persp_height / 2.0, theta_max};
        } else {
            throw ConfigError("simulate: unknown camera kind '" + kind + "'");
        }
        if (k == cfg.rogue_view) view.rogue_range = cfg.rogue_range;
        result.scene.views.push_back(std::move(view));
    }

    std::vector<Pose> poses;
    for (const auto& v : result.scene.views) poses.push_back(v.gt_pose);
    result.pairs = curate_pairs(poses, profile_by_name(cfg.profile));

    NoiseModel noise = cfg.noise;
    noise.seed = noise.seed == 0 ? cfg.seed : noise.seed;
    auto edges = synthesize_edges(result.scene, result.pairs, noise);

    for (const auto& v : result.scene.views) {
        View gv;
        gv.id = v.id;
        gv.camera = v.camera;
        gv.rays = make_rays(v.camera);
        result.graph.views.push_back(std::move(gv));
        result.gt_poses.push_back(v.gt_pose);
    }
    result.graph.edges = std::move(edges);
    result.graph.validate();
    return result;
}

}  // namespace rayalign
