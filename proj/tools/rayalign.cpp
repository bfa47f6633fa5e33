#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "rayalign/align.hpp"
#include "rayalign/camt.hpp"
#include "rayalign/metrics.hpp"
#include "rayalign/scene_io.hpp"
#include "rayalign/simkit.hpp"

namespace fs = std::filesystem;
using namespace rayalign;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDisconnected = 3;
constexpr int kExitNonFinite = 4;

Vec3 vec3_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected a 3-vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

SceneGeometry geometry_from_json(const Json& j) {
    SceneGeometry g;
    for (const auto& jb : j.value("boxes", Json::array())) {
        g.boxes.push_back({vec3_from_json(jb.at("min"), "geometry.boxes.min"),
                           vec3_from_json(jb.at("max"), "geometry.boxes.max")});
    }
    for (const auto& js : j.value("spheres", Json::array())) {
        g.spheres.push_back({vec3_from_json(js.at("center"), "geometry.spheres.center"),
                             js.at("radius").get<double>()});
    }
    for (const auto& jp : j.value("planes", Json::array())) {
        g.planes.push_back({vec3_from_json(jp.at("point"), "geometry.planes.point"),
                            vec3_from_json(jp.at("normal"), "geometry.planes.normal")});
    }
    return g;
}

SimConfig sim_config_from_json(const Json& j) {
    SimConfig cfg;
    cfg.seed = j.value("seed", cfg.seed);
    cfg.profile = j.value("profile", cfg.profile);
    cfg.n_views = j.value("n_views", cfg.n_views);
    cfg.loop_radius = j.value("loop_radius", cfg.loop_radius);
    if (j.contains("equirect")) {
        cfg.equirect_width = j["equirect"].value("width", cfg.equirect_width);
        cfg.equirect_height = j["equirect"].value("height", cfg.equirect_height);
    }
    if (j.contains("perspective")) {
        cfg.persp_width = j["perspective"].value("width", cfg.persp_width);
        cfg.persp_height = j["perspective"].value("height", cfg.persp_height);
    }
    if (j.contains("camera_cycle")) {
        cfg.camera_cycle = j["camera_cycle"].get<std::vector<std::string>>();
        if (cfg.camera_cycle.empty()) throw ConfigError("camera_cycle: must not be empty");
    }
    if (j.contains("noise")) {
        const Json& n = j["noise"];
        cfg.noise.radial_rel_sigma = n.value("radial_rel_sigma", 0.0);
        cfg.noise.rot_sigma_deg = n.value("rot_sigma_deg", 0.0);
        cfg.noise.trans_dir_sigma_deg = n.value("trans_dir_sigma_deg", 0.0);
        if (n.contains("edge_scale_range")) {
            const auto& r = n["edge_scale_range"];
            if (!r.is_array() || r.size() != 2) {
                throw ConfigError("noise.edge_scale_range: expected [lo, hi]");
            }
            cfg.noise.edge_scale_range = {r[0].get<double>(), r[1].get<double>()};
        }
        cfg.noise.outlier_fraction = n.value("outlier_fraction", 0.0);
        cfg.noise.min_outlier_rot_deg = n.value("min_outlier_rot_deg", 30.0);
        cfg.noise.conf_k = n.value("conf_k", 100.0);
    }
    if (j.contains("geometry")) cfg.geometry = geometry_from_json(j["geometry"]);
    cfg.rogue_view = j.value("rogue_view", -1);
    cfg.rogue_range = j.value("rogue_range", 100.0);
    if (cfg.rogue_range <= 0) throw ConfigError("rogue_range: must be positive");

    if (cfg.n_views < 2) throw ConfigError("n_views: need at least 2 views");
    if (cfg.noise.radial_rel_sigma < 0 || cfg.noise.rot_sigma_deg < 0 ||
        cfg.noise.trans_dir_sigma_deg < 0) {
        throw ConfigError("noise: sigmas must be non-negative");
    }
    if (cfg.noise.edge_scale_range[0] > cfg.noise.edge_scale_range[1] ||
        cfg.noise.edge_scale_range[0] <= 0) {
        throw ConfigError("noise.edge_scale_range: need 0 < lo <= hi");
    }
    if (cfg.noise.outlier_fraction < 0 || cfg.noise.outlier_fraction > 1) {
        throw ConfigError("noise.outlier_fraction: must be in [0, 1]");
    }
    return cfg;
}

void check_thread_cap() {
    // Processing is single threaded; the cap is accepted for compatibility
    // and validated so typos do not pass silently.
    if (const char* env = std::getenv("RAYALIGN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw ConfigError("RAYALIGN_THREADS must be a positive integer");
        }
    }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int64_t seed) {
    SimConfig cfg;
    if (!config_path.empty()) cfg = sim_config_from_json(load_json_file(config_path));
    if (seed >= 0) cfg.seed = uint64_t(seed);

    const SimResult sim = simulate(cfg);
    fs::create_directories(out_dir);
    SceneMeta meta{cfg.seed, cfg.profile};
    save_scene(fs::path(out_dir) / "scene.json", sim.graph, meta);

    GtSidecar gt;
    for (size_t v = 0; v < sim.graph.views.size(); ++v) {
        gt.ids.push_back(sim.graph.views[v].id);
        gt.poses.push_back(sim.gt_poses[v]);
    }
    for (const auto& e : sim.graph.edges) gt.pair_scales.emplace_back(e.src, e.dst, e.pair_scale);
    save_gt(fs::path(out_dir) / "gt.json", gt);

    std::cout << "simulate: " << sim.graph.views.size() << " views, " << sim.graph.edges.size()
              << " directed edges (" << sim.pairs.size() << " pairs) -> " << out_dir << "\n";
    return 0;
}

int cmd_prune(const std::string& scene_path, const std::string& out_dir,
              const PruneConfig& cfg) {
    SceneMeta meta;
    const SceneGraph graph = load_scene(scene_path, &meta);
    auto [pruned, report] = prune(graph, cfg);

    fs::create_directories(out_dir);
    save_scene(fs::path(out_dir) / "scene.json", pruned, meta);
    save_prune_report(fs::path(out_dir) / "prune_report.json", report);

    size_t kept = 0;
    for (const auto& e : report.edges) kept += e.verdict == EdgeVerdict::kept;
    std::cout << "prune: kept " << kept << "/" << report.edges.size() << " edges, "
              << report.kept_views.size() << "/" << graph.views.size() << " views -> "
              << out_dir << "\n";
    return 0;
}

int cmd_align(const std::string& scene_path, const std::string& out_dir,
              const AlignConfig& cfg) {
    const SceneGraph graph = load_scene(scene_path);
    const AlignmentResult result = optimize(graph, cfg);
    fs::create_directories(out_dir);
    save_align_result(fs::path(out_dir) / "result.json", graph, result);
    std::cout << "align: objective " << result.initial_objective << " -> "
              << result.final_objective << " over " << graph.views.size() << " views -> "
              << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& result_path, const std::string& gt_path,
             const std::string& out_path) {
    const AlignResultData result = load_align_result(result_path);
    const GtSidecar gt = load_gt(gt_path);

    std::vector<Pose> est, ref;
    for (size_t i = 0; i < result.ids.size(); ++i) {
        for (size_t k = 0; k < gt.ids.size(); ++k) {
            if (gt.ids[k] == result.ids[i]) {
                est.push_back(result.poses[i]);
                ref.push_back(gt.poses[k]);
                break;
            }
        }
    }
    if (est.size() < 3) throw ConfigError("eval: need at least 3 common views");

    const auto errors = pairwise_pose_errors(est, ref);
    std::vector<Vec3> est_centers, gt_centers;
    for (size_t i = 0; i < est.size(); ++i) {
        est_centers.push_back(est[i].translation);
        gt_centers.push_back(ref[i].translation);
    }

    Json j;
    j["rra@15"] = rra_at(errors, 15.0);
    j["rta@15"] = rta_at(errors, 15.0);
    j["rra@30"] = rra_at(errors, 30.0);
    j["rta@30"] = rta_at(errors, 30.0);
    j["maa@30"] = maa(errors, 30);
    j["ate_rmse"] = ate_rmse(est_centers, gt_centers);
    j["n_pairs"] = errors.size();
    save_json_file(out_path, j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_export_ply(const std::string& result_path, const std::string& out_path) {
    const AlignResultData result = load_align_result(result_path);
    write_ply(out_path, result.cloud, result.cloud_conf);
    std::cout << "export-ply: " << result.cloud.size() << " vertices -> " << out_path << "\n";
    return 0;
}

int cmd_rays(const std::string& camera_path, const std::string& out_path) {
    const CameraSpec spec = camera_from_json(load_json_file(camera_path));
    write_camt(out_path, tensor_from_rays(make_rays(spec)));
    std::cout << "rays: " << spec_height(spec) << "x" << spec_width(spec) << "x3 -> "
              << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rayalign: camera-agnostic multi-view alignment pipeline"};
    app.require_subcommand(1);

    std::string config_path, scene_path, out_path, result_path, gt_path, camera_path;
    int64_t seed = -1;

    auto* sim = app.add_subcommand("simulate", "synthesize a scene with known ground truth");
    sim->add_option("--config", config_path, "simulation config JSON");
    sim->add_option("--out", out_path, "output directory")->required();
    sim->add_option("--seed", seed, "override the config seed");

    PruneConfig prune_cfg;
    auto* prn = app.add_subcommand("prune", "filter inconsistent edges from a scene graph");
    prn->add_option("--scene", scene_path, "scene JSON")->required();
    prn->add_option("--out", out_path, "output directory")->required();
    prn->add_option("--tau-rot", prune_cfg.tau_rot_deg, "rotation residual gate (deg)");
    prn->add_option("--tau-tra", prune_cfg.tau_tra_deg, "translation direction gate (deg)");
    prn->add_option("--quantile", prune_cfg.quantile, "match-count quantile gate");
    prn->add_option("--stride", prune_cfg.stride, "pixel stride for MNN");
    prn->add_option("--min-matches", prune_cfg.min_matches, "absolute match-count floor");
    prn->add_flag("--absolute-floor", prune_cfg.absolute_floor,
                  "also require matches >= 20% of the smaller view's pixels");

    AlignConfig align_cfg;
    bool no_depths = false, uniform_sigma = false;
    auto* aln = app.add_subcommand("align", "globally align a pruned scene graph");
    aln->add_option("--scene", scene_path, "pruned scene JSON")->required();
    aln->add_option("--out", out_path, "output directory")->required();
    aln->add_option("--lr", align_cfg.lr_init, "initial step size");
    aln->add_option("--iters", align_cfg.iters_per_stage, "iterations per alternating stage");
    aln->add_option("--cycles", align_cfg.cycles, "alternating pose/scale cycles");
    aln->add_option("--joint-iters", align_cfg.joint_iters, "iterations per joint stage");
    aln->add_option("--joint-restarts", align_cfg.joint_restarts, "joint stages (lr decayed)");
    aln->add_option("--restart-decay", align_cfg.restart_decay, "lr decay between joint stages");
    aln->add_option("--stride", align_cfg.stride, "pixel stride when rebuilding matches");
    aln->add_option("--rho", align_cfg.depth_prior_rho, "log-depth prior weight");
    aln->add_option("--tol", align_cfg.convergence_tol, "early-stop relative decrease");
    aln->add_flag("--no-depths", no_depths, "freeze log-depths");
    aln->add_flag("--uniform-sigma", uniform_sigma, "ignore confidence weights");

    auto* evl = app.add_subcommand("eval", "pose metrics against the ground-truth sidecar");
    evl->add_option("--result", result_path, "align result JSON")->required();
    evl->add_option("--gt", gt_path, "ground-truth sidecar JSON")->required();
    evl->add_option("--out", out_path, "metrics report JSON")->required();

    auto* ply = app.add_subcommand("export-ply", "fused cloud to binary PLY");
    ply->add_option("--result", result_path, "align result JSON")->required();
    ply->add_option("--out", out_path, "output .ply")->required();

    auto* ray = app.add_subcommand("rays", "dump a camera's ray field as a CAMT tensor");
    ray->add_option("--camera", camera_path, "camera spec JSON")->required();
    ray->add_option("--out", out_path, "output .camt")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        check_thread_cap();
        if (*sim) return cmd_simulate(config_path, out_path, seed);
        if (*prn) return cmd_prune(scene_path, out_path, prune_cfg);
        if (*aln) {
            align_cfg.optimize_log_depths = !no_depths;
            align_cfg.use_confidence_weights = !uniform_sigma;
            return cmd_align(scene_path, out_path, align_cfg);
        }
        if (*evl) return cmd_eval(result_path, gt_path, out_path);
        if (*ply) return cmd_export_ply(result_path, out_path);
        if (*ray) return cmd_rays(camera_path, out_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Disconnected& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDisconnected;
    } catch (const IsolatedView& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDisconnected;
    } catch (const EmptyGraph& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDisconnected;
    } catch (const NonFiniteObjective& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonFinite;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
