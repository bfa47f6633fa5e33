#include "rayalign/align.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <set>

namespace rayalign {

RayField fuse_rays(const std::vector<const RayField*>& fields,
                   const std::vector<const ConfidenceMap*>& weights) {
    if (fields.empty() || fields.size() != weights.size()) {
        throw Error("fuse_rays: field/weight list mismatch");
    }
    const int w = fields[0]->width, h = fields[0]->height;
    RayField out(w, h);
    for (size_t i = 0; i < out.size(); ++i) {
        Vec3 sum = Vec3::Zero();
        for (size_t f = 0; f < fields.size(); ++f) {
            if (fields[f]->valid[i]) sum += weights[f]->sigma[i] * fields[f]->dirs[i];
        }
        const double n = sum.norm();
        if (n < 1e-9) continue;
        out.dirs[i] = sum / n;
        out.valid[i] = 1;
    }
    return out;
}

namespace {

// Incident edges of a view in graph order, with that view's side of the
// edge's radial/confidence maps.
struct IncidentSide {
    const RadialMap* radial;
    const ConfidenceMap* conf;
};

std::vector<IncidentSide> incident_sides(const SceneGraph& graph, ViewId id) {
    std::vector<IncidentSide> out;
    for (const auto& e : graph.edges) {
        if (e.dst == id) out.push_back({&e.radial_dst, &e.conf_dst});
        else if (e.src == id) out.push_back({&e.radial_src, &e.conf_src});
    }
    return out;
}

}  // namespace

std::vector<RayField> consensus_rays(const SceneGraph& graph) {
    std::vector<RayField> out;
    out.reserve(graph.views.size());
    for (const auto& view : graph.views) {
        const auto sides = incident_sides(graph, view.id);
        if (sides.empty()) {
            throw IsolatedView("consensus_rays: view " + std::to_string(view.id) +
                               " has no incident edges");
        }
        RayField fused(view.rays.width, view.rays.height);
        for (size_t i = 0; i < fused.size(); ++i) {
            if (!view.rays.valid[i]) continue;
            Vec3 sum = Vec3::Zero();
            for (const auto& s : sides) {
                if (s.radial->r[i] > 0.0) sum += s.conf->sigma[i] * view.rays.dirs[i];
            }
            const double n = sum.norm();
            if (n < 1e-9) continue;
            fused.dirs[i] = sum / n;
            fused.valid[i] = 1;
        }
        out.push_back(std::move(fused));
    }
    return out;
}

std::vector<RadialMap> init_radial(const SceneGraph& graph, const std::vector<RayField>& rays) {
    std::vector<RadialMap> out;
    out.reserve(graph.views.size());
    for (size_t vi = 0; vi < graph.views.size(); ++vi) {
        const auto& view = graph.views[vi];
        const auto sides = incident_sides(graph, view.id);
        if (sides.empty()) {
            throw IsolatedView("init_radial: view " + std::to_string(view.id) +
                               " has no incident edges");
        }
        const RadialMap& ref = *sides[0].radial;

        // Median-ratio alignment of every edge to the reference edge's scale.
        std::vector<double> scale(sides.size(), 1.0);
        for (size_t s = 1; s < sides.size(); ++s) {
            std::vector<double> ratios;
            for (size_t i = 0; i < ref.size(); ++i) {
                if (ref.r[i] > 0.0 && sides[s].radial->r[i] > 0.0) {
                    ratios.push_back(ref.r[i] / sides[s].radial->r[i]);
                }
            }
            if (ratios.empty()) continue;  // no overlap with the reference, keep 1
            auto mid = ratios.begin() + ratios.size() / 2;
            std::nth_element(ratios.begin(), mid, ratios.end());
            if (ratios.size() % 2 == 1) {
                scale[s] = *mid;
            } else {
                const double hi = *mid;
                scale[s] = (hi + *std::max_element(ratios.begin(), mid)) / 2.0;
            }
        }

        RadialMap fused(view.rays.width, view.rays.height);
        size_t n_valid = 0;
        for (size_t i = 0; i < fused.size(); ++i) {
            if (!rays[vi].valid[i]) continue;
            double num = 0.0, den = 0.0;
            for (size_t s = 0; s < sides.size(); ++s) {
                const double r = sides[s].radial->r[i];
                if (r <= 0.0) continue;
                const double w = sides[s].conf->sigma[i];
                num += w * scale[s] * r;
                den += w;
            }
            if (den <= 0.0) continue;
            fused.r[i] = num / den;
            ++n_valid;
        }
        if (n_valid == 0) {
            throw NoValidPixels("init_radial: view " + std::to_string(view.id) +
                                " has no valid pixels");
        }
        out.push_back(std::move(fused));
    }
    return out;
}

ViewId select_anchor(const SceneGraph& graph) {
    if (graph.views.empty()) throw EmptyGraph("select_anchor: empty graph");
    std::map<ViewId, std::set<ViewId>> neighbors;
    for (const auto& v : graph.views) neighbors[v.id];
    for (const auto& e : graph.edges) {
        neighbors[e.src].insert(e.dst);
        neighbors[e.dst].insert(e.src);
    }
    ViewId best = graph.views.front().id;
    size_t best_deg = 0;
    for (const auto& [id, ns] : neighbors) {  // ascending id, ties keep the smaller
        if (ns.size() > best_deg) {
            best = id;
            best_deg = ns.size();
        }
    }
    return best;
}

std::vector<Pose> init_poses(const SceneGraph& graph, ViewId anchor) {
    const int anchor_idx = graph.view_index(anchor);
    if (anchor_idx < 0) throw EmptyGraph("init_poses: anchor not in graph");

    // Edge lookup by (dst, src): pose maps src frame -> dst frame.
    std::map<std::pair<ViewId, ViewId>, const EdgeObservation*> by_key;
    for (const auto& e : graph.edges) by_key[{e.dst, e.src}] = &e;
    std::map<ViewId, std::set<ViewId>> neighbors;
    for (const auto& e : graph.edges) {
        neighbors[e.src].insert(e.dst);
        neighbors[e.dst].insert(e.src);
    }

    std::map<ViewId, Pose> pose_of;
    pose_of[anchor] = Pose::identity();
    std::queue<ViewId> frontier;
    frontier.push(anchor);
    while (!frontier.empty()) {
        const ViewId i = frontier.front();
        frontier.pop();
        for (ViewId j : neighbors[i]) {  // ascending id: deterministic tree
            if (pose_of.count(j)) continue;
            // T_j = T_i ∘ P_{j->i}; prefer the edge predicting j in i's frame.
            const auto it = by_key.find({i, j});
            const Pose p_ji =
                it != by_key.end() ? it->second->pose : by_key.at({j, i})->pose.inverse();
            pose_of[j] = compose(pose_of.at(i), p_ji);
            frontier.push(j);
        }
    }
    if (pose_of.size() != graph.views.size()) {
        throw Disconnected("init_poses: graph is not connected");
    }
    std::vector<Pose> out;
    out.reserve(graph.views.size());
    for (const auto& v : graph.views) out.push_back(pose_of.at(v.id));
    return out;
}

namespace {

AlignmentProblem build_problem(const SceneGraph& graph, const AlignConfig& cfg) {
    AlignmentProblem p;
    p.graph = &graph;
    p.consensus.rays = consensus_rays(graph);
    p.consensus.radial = init_radial(graph, p.consensus.rays);
    p.anchor = graph.view_index(select_anchor(graph));

    const size_t n_views = graph.views.size();
    // Diagnostic fused confidence (average over incident edges).
    p.consensus.conf.reserve(n_views);
    for (size_t vi = 0; vi < n_views; ++vi) {
        const auto sides = incident_sides(graph, graph.views[vi].id);
        ConfidenceMap c(p.consensus.rays[vi].width, p.consensus.rays[vi].height, 0.0);
        for (size_t i = 0; i < c.size(); ++i) {
            double sum = 0.0;
            int n = 0;
            for (const auto& s : sides) {
                if (s.radial->r[i] > 0.0) {
                    sum += s.conf->sigma[i];
                    ++n;
                }
            }
            c.sigma[i] = n > 0 ? sum / n : 0.0;
        }
        p.consensus.conf.push_back(std::move(c));
    }

    p.pixel_slot.resize(n_views);
    p.slot_pixel.resize(n_views);
    p.slot_dir.resize(n_views);
    p.log_depth_init.resize(n_views);
    for (size_t vi = 0; vi < n_views; ++vi) {
        const RayField& rays = p.consensus.rays[vi];
        const RadialMap& radial = p.consensus.radial[vi];
        p.pixel_slot[vi].assign(rays.size(), -1);
        for (size_t i = 0; i < rays.size(); ++i) {
            if (rays.valid[i] && radial.r[i] > 0.0) {
                p.pixel_slot[vi][i] = static_cast<int>(p.slot_pixel[vi].size());
                p.slot_pixel[vi].push_back(static_cast<int>(i));
                p.slot_dir[vi].push_back(rays.dirs[i]);
                p.log_depth_init[vi].push_back(std::log(radial.r[i]));
            }
        }
    }

    // One residual per directed edge and stride-grid source pixel: the
    // pixel's consensus point in the src frame against the edge's own
    // prediction of it in the dst frame. The edge prediction lives at the
    // edge's arbitrary scale; the median ratio against the dst view's
    // consensus radials rescales it once, up front.
    for (const auto& e : graph.edges) {
        const int vi = graph.view_index(e.dst);
        const int vj = graph.view_index(e.src);
        const View& src_view = graph.views[vj];

        std::vector<double> ratios;
        const RadialMap& cons_dst = p.consensus.radial[vi];
        for (size_t px = 0; px < cons_dst.size(); ++px) {
            if (cons_dst.r[px] > 0.0 && e.radial_dst.r[px] > 0.0) {
                ratios.push_back(cons_dst.r[px] / e.radial_dst.r[px]);
            }
        }
        double kappa = 1.0;
        if (!ratios.empty()) {
            auto mid = ratios.begin() + ratios.size() / 2;
            std::nth_element(ratios.begin(), mid, ratios.end());
            kappa = ratios.size() % 2 == 1
                        ? *mid
                        : (*mid + *std::max_element(ratios.begin(), mid)) / 2.0;
        }
        p.edge_scale_to_dst.push_back(kappa);

        for (int v = 0; v < src_view.rays.height; v += cfg.stride) {
            for (int u = 0; u < src_view.rays.width; u += cfg.stride) {
                const int px = src_view.rays.index(u, v);
                if (!src_view.rays.valid[px] || e.radial_src.r[px] <= 0.0) continue;
                const int slot = p.pixel_slot[vj][px];
                if (slot < 0) continue;  // consensus-invalid pixel
                ResidualTerm t;
                t.view_src = vj;
                t.view_dst = vi;
                t.slot_src = slot;
                t.dst_local =
                    kappa * e.pose.apply(e.radial_src.r[px] * src_view.rays.dirs[px]);
                t.weight = cfg.use_confidence_weights ? e.conf_src.sigma[px] : 1.0;
                p.terms.push_back(std::move(t));
            }
        }
    }
    return p;
}

}  // namespace

ObjectiveEval objective(const AlignmentProblem& problem, const AlignmentState& state,
                        bool with_gradients) {
    const size_t n_views = problem.graph->views.size();
    ObjectiveEval eval;
    if (with_gradients) {
        eval.grad_rot.assign(n_views, Vec3::Zero());
        eval.grad_trans.assign(n_views, Vec3::Zero());
        eval.grad_log_scale.assign(n_views, 0.0);
        eval.grad_log_depth.resize(n_views);
        for (size_t v = 0; v < n_views; ++v) {
            eval.grad_log_depth[v].assign(state.log_depth[v].size(), 0.0);
        }
    }

    // Per-view local scaled consensus points and their world images.
    std::vector<std::vector<Vec3>> local(n_views), world(n_views);
    std::vector<double> scale(n_views);
    for (size_t v = 0; v < n_views; ++v) {
        scale[v] = std::exp(state.log_scale[v]);
        const auto& dirs = problem.slot_dir[v];
        local[v].resize(dirs.size());
        world[v].resize(dirs.size());
        for (size_t k = 0; k < dirs.size(); ++k) {
            local[v][k] = std::exp(state.log_depth[v][k]) * scale[v] * dirs[k];
            world[v][k] = state.poses[v].apply(local[v][k]);
        }
    }

    for (const ResidualTerm& t : problem.terms) {
        const Vec3 z_local = scale[t.view_dst] * t.dst_local;
        const Vec3 z_world = state.poses[t.view_dst].apply(z_local);
        const Vec3 r = world[t.view_src][t.slot_src] - z_world;
        eval.value += t.weight * r.squaredNorm();
        if (!with_gradients) continue;
        const Vec3 wr = 2.0 * t.weight * r;
        eval.grad_trans[t.view_src] += wr;
        eval.grad_trans[t.view_dst] -= wr;
        const Vec3 body_src = state.poses[t.view_src].rotation.matrix().transpose() * wr;
        const Vec3 body_dst = state.poses[t.view_dst].rotation.matrix().transpose() * wr;
        eval.grad_rot[t.view_src] += local[t.view_src][t.slot_src].cross(body_src);
        eval.grad_rot[t.view_dst] -= z_local.cross(body_dst);
        const double g_src =
            wr.dot(world[t.view_src][t.slot_src] - state.poses[t.view_src].translation);
        eval.grad_log_scale[t.view_src] += g_src;
        eval.grad_log_scale[t.view_dst] -= wr.dot(z_world - state.poses[t.view_dst].translation);
        eval.grad_log_depth[t.view_src][t.slot_src] += g_src;
    }
    return eval;
}

namespace {

struct StageSpec {
    bool poses = false;
    bool scales = false;
    bool depths = false;
    int iters = 0;
    double lr = 0;
};

// Adam moments for every variable, flat per class.
struct AdamBuffers {
    std::vector<Vec3> m_rot, v_rot, m_tr, v_tr;
    std::vector<double> m_ls, v_ls;
    std::vector<std::vector<double>> m_ld, v_ld;

    explicit AdamBuffers(const AlignmentState& state) {
        const size_t n = state.poses.size();
        m_rot.assign(n, Vec3::Zero());
        v_rot.assign(n, Vec3::Zero());
        m_tr.assign(n, Vec3::Zero());
        v_tr.assign(n, Vec3::Zero());
        m_ls.assign(n, 0.0);
        v_ls.assign(n, 0.0);
        m_ld.resize(n);
        v_ld.resize(n);
        for (size_t v = 0; v < n; ++v) {
            m_ld[v].assign(state.log_depth[v].size(), 0.0);
            v_ld[v].assign(state.log_depth[v].size(), 0.0);
        }
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

inline double adam_step(double g, double& m, double& v, double bc1, double bc2, double lr) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g * g;
    return lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
}

struct StageOutcome {
    double best_total = 0;
    double best_data = 0;
};

// Runs one stage, leaves `state` at the best iterate seen.
StageOutcome run_stage(const AlignmentProblem& problem, AlignmentState& state,
                       const StageSpec& stage, const AlignConfig& cfg) {
    const size_t n_views = state.poses.size();
    AdamBuffers adam(state);
    AlignmentState best = state;
    double best_total = -1.0, best_data = -1.0;
    std::deque<double> window;

    for (int it = 0; it < stage.iters; ++it) {
        ObjectiveEval eval = objective(problem, state, true);
        double total = eval.value;
        if (stage.depths && cfg.depth_prior_rho > 0.0) {
            for (size_t v = 0; v < n_views; ++v) {
                for (size_t k = 0; k < state.log_depth[v].size(); ++k) {
                    const double d = state.log_depth[v][k] - problem.log_depth_init[v][k];
                    total += cfg.depth_prior_rho * d * d;
                    eval.grad_log_depth[v][k] += 2.0 * cfg.depth_prior_rho * d;
                }
            }
        }
        if (!std::isfinite(total)) {
            throw NonFiniteObjective("optimize: non-finite objective at iteration " +
                                     std::to_string(it));
        }
        if (best_total < 0.0 || total < best_total) {
            best_total = total;
            best_data = eval.value;
            best = state;
        }

        window.push_back(total);
        if (static_cast<int>(window.size()) > 10) {
            const double before = window.front();
            window.pop_front();
            if (cfg.convergence_tol > 0.0 &&
                before - total < cfg.convergence_tol * std::max(before, 1e-300)) {
                break;
            }
        }

        const double cosine =
            stage.iters > 1 ? 0.5 * (1.0 + std::cos(M_PI * it / (stage.iters - 1))) : 1.0;
        const double lr = stage.lr * (cfg.cosine_floor + (1.0 - cfg.cosine_floor) * cosine);
        const double bc1 = 1.0 - std::pow(kBeta1, it + 1);
        const double bc2 = 1.0 - std::pow(kBeta2, it + 1);

        for (size_t v = 0; v < n_views; ++v) {
            const bool pinned = static_cast<int>(v) == problem.anchor;
            if (stage.poses && !pinned) {
                Vec3 delta;
                for (int a = 0; a < 3; ++a) {
                    delta[a] = adam_step(eval.grad_rot[v][a], adam.m_rot[v][a], adam.v_rot[v][a],
                                         bc1, bc2, lr);
                }
                state.poses[v].rotation =
                    state.poses[v].rotation * Rotation::from_axis_angle(-delta);
                for (int a = 0; a < 3; ++a) {
                    state.poses[v].translation[a] -= adam_step(
                        eval.grad_trans[v][a], adam.m_tr[v][a], adam.v_tr[v][a], bc1, bc2, lr);
                }
            }
            if (stage.scales && !pinned) {
                state.log_scale[v] -=
                    adam_step(eval.grad_log_scale[v], adam.m_ls[v], adam.v_ls[v], bc1, bc2, lr);
            }
            if (stage.depths) {
                for (size_t k = 0; k < state.log_depth[v].size(); ++k) {
                    state.log_depth[v][k] -= adam_step(eval.grad_log_depth[v][k],
                                                       adam.m_ld[v][k], adam.v_ld[v][k], bc1,
                                                       bc2, lr);
                }
            }
        }
    }

    state = std::move(best);
    // Retraction products drift off SO(3) very slowly; square up at stage ends.
    for (size_t v = 0; v < n_views; ++v) {
        if (static_cast<int>(v) == problem.anchor) continue;  // stays bit-exact
        state.poses[v].rotation = state.poses[v].rotation.orthonormalized();
    }
    StageOutcome out;
    out.best_total = best_total;
    out.best_data = best_data;
    return out;
}

double prior_value(const AlignmentProblem& problem, const AlignmentState& state, double rho) {
    double p = 0.0;
    for (size_t v = 0; v < state.log_depth.size(); ++v) {
        for (size_t k = 0; k < state.log_depth[v].size(); ++k) {
            const double d = state.log_depth[v][k] - problem.log_depth_init[v][k];
            p += rho * d * d;
        }
    }
    return p;
}

}  // namespace

AlignmentResult optimize(const SceneGraph& graph, const AlignConfig& cfg) {
    AlignmentResult result;
    result.problem = build_problem(graph, cfg);
    const AlignmentProblem& problem = result.problem;

    AlignmentState state;
    state.poses = init_poses(graph, graph.views[problem.anchor].id);
    state.log_scale.assign(graph.views.size(), 0.0);
    state.log_depth = problem.log_depth_init;
    result.init_poses = state.poses;

    auto record = [&](AlignmentState& s) {
        const double data = objective(problem, s, false).value;
        result.trace_data.push_back(data);
        result.trace_total.push_back(data + prior_value(problem, s, cfg.depth_prior_rho));
    };
    record(state);
    result.initial_objective = result.trace_data.front();

    for (int cycle = 0; cycle < cfg.cycles; ++cycle) {
        StageSpec pose_stage{true, false, false, cfg.iters_per_stage, cfg.lr_init};
        run_stage(problem, state, pose_stage, cfg);
        record(state);
        StageSpec scale_stage{false, true, cfg.stage_b_depths, cfg.iters_per_stage, cfg.lr_init};
        run_stage(problem, state, scale_stage, cfg);
        record(state);
    }

    double lr = cfg.lr_init;
    for (int restart = 0; restart < cfg.joint_restarts; ++restart) {
        StageSpec joint{true, true, cfg.optimize_log_depths, cfg.joint_iters, lr};
        run_stage(problem, state, joint, cfg);
        record(state);
        lr *= cfg.restart_decay;
    }

    result.final_objective = result.trace_data.back();
    result.poses = state.poses;
    result.scales.resize(state.log_scale.size());
    for (size_t v = 0; v < state.log_scale.size(); ++v) {
        result.scales[v] = std::exp(state.log_scale[v]);
    }
    result.state = std::move(state);
    return result;
}

Pointmap effective_points(const AlignmentProblem& problem, const AlignmentState& state,
                          int view_index) {
    const RayField& rays = problem.consensus.rays[view_index];
    Pointmap pm(rays.width, rays.height);
    const double s = std::exp(state.log_scale[view_index]);
    for (size_t k = 0; k < problem.slot_pixel[view_index].size(); ++k) {
        const int px = problem.slot_pixel[view_index][k];
        pm.xyz[px] = std::exp(state.log_depth[view_index][k]) * s *
                     problem.slot_dir[view_index][k];
        pm.valid[px] = 1;
    }
    return pm;
}

FusedCloud fused_cloud(const AlignmentProblem& problem, const AlignmentState& state) {
    FusedCloud cloud;
    for (size_t v = 0; v < problem.graph->views.size(); ++v) {
        const Pointmap local = effective_points(problem, state, static_cast<int>(v));
        for (size_t i = 0; i < local.size(); ++i) {
            if (!local.valid[i]) continue;
            cloud.points.push_back(state.poses[v].apply(local.xyz[i]));
            cloud.conf.push_back(problem.consensus.conf[v].sigma[i]);
        }
    }
    return cloud;
}

}  // namespace rayalign
