#include "rayalign/scenegraph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "rayalign/kdtree.hpp"

namespace rayalign {

int SceneGraph::view_index(ViewId id) const {
    for (size_t i = 0; i < views.size(); ++i) {
        if (views[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

void SceneGraph::validate() const {
    std::set<std::pair<ViewId, ViewId>> seen;
    for (const auto& e : edges) {
        if (e.src == e.dst) throw Error("scene graph: self edge " + std::to_string(e.src));
        const int si = view_index(e.src);
        const int di = view_index(e.dst);
        if (si < 0 || di < 0) throw Error("scene graph: edge references a missing view");
        if (!seen.insert({e.src, e.dst}).second) {
            throw Error("scene graph: duplicate directed edge");
        }
        const View& dst = views[di];
        const View& src = views[si];
        if (e.radial_dst.width != dst.rays.width || e.radial_dst.height != dst.rays.height ||
            e.radial_src.width != src.rays.width || e.radial_src.height != src.rays.height) {
            throw DimensionMismatch("scene graph: edge map dimensions do not match views");
        }
    }
}

std::string to_string(EdgeVerdict v) {
    switch (v) {
        case EdgeVerdict::kept: return "kept";
        case EdgeVerdict::failed_symmetry_rot: return "failed_symmetry_rot";
        case EdgeVerdict::failed_symmetry_trans: return "failed_symmetry_trans";
        case EdgeVerdict::failed_overlap: return "failed_overlap";
        case EdgeVerdict::dropped_by_symmetric_partner: return "dropped_by_symmetric_partner";
        case EdgeVerdict::outside_largest_component: return "outside_largest_component";
    }
    return "unknown";
}

SymmetryCheck symmetric_pose_check(const EdgeObservation& e_ij, const EdgeObservation& e_ji,
                                   double tau_rot_deg, double tau_tra_deg) {
    if (e_ij.src != e_ji.dst || e_ij.dst != e_ji.src) {
        throw NotReciprocal("symmetric_pose_check: edges are not a reciprocal pair");
    }
    const Mat3& r_ij = e_ij.pose.rotation.matrix();
    const Mat3& r_ji = e_ji.pose.rotation.matrix();
    const Vec3& t_ij = e_ij.pose.translation;
    const Vec3& t_ji = e_ji.pose.translation;

    SymmetryCheck out;
    // For a consistent pair R_ji R_ij = I; the angle of the product is the
    // rotation residual.
    const double tr = (r_ji * r_ij).trace();
    out.theta_rot_deg = std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0)) * 180.0 / M_PI;

    if (t_ij.norm() < 1e-9 || t_ji.norm() < 1e-9) {
        out.translation_tested = false;
        out.theta_tra_deg = 0.0;
    } else {
        const Vec3 t_expected = -(r_ij.transpose() * t_ij);
        out.theta_tra_deg = direction_angle(t_ji, t_expected) * 180.0 / M_PI;
    }
    out.pass = out.theta_rot_deg <= tau_rot_deg &&
               (!out.translation_tested || out.theta_tra_deg <= tau_tra_deg);
    return out;
}

std::vector<Match> mnn_matches(const Pointmap& a, const Pointmap& b) {
    std::vector<int> ia, ib;
    std::vector<Vec3> pa, pb;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a.valid[i]) {
            ia.push_back(static_cast<int>(i));
            pa.push_back(a.xyz[i]);
        }
    }
    for (size_t i = 0; i < b.size(); ++i) {
        if (b.valid[i]) {
            ib.push_back(static_cast<int>(i));
            pb.push_back(b.xyz[i]);
        }
    }
    if (pa.empty() || pb.empty()) throw EmptyPointmap("mnn_matches: empty point set");

    KdTree3 tree_a(pa), tree_b(pb);
    std::vector<int> nn_ab(pa.size());
    for (size_t i = 0; i < pa.size(); ++i) nn_ab[i] = tree_b.nearest(pa[i]);
    std::vector<int> nn_ba(pb.size());
    for (size_t j = 0; j < pb.size(); ++j) nn_ba[j] = tree_a.nearest(pb[j]);

    std::vector<Match> out;
    for (size_t i = 0; i < pa.size(); ++i) {
        const int j = nn_ab[i];
        if (nn_ba[j] == static_cast<int>(i)) {
            out.push_back({ia[i], ib[j], (pa[i] - pb[j]).norm()});
        }
    }
    return out;
}

std::vector<uint8_t> overlap_gate(const std::vector<std::pair<ViewId, ViewId>>& pairs,
                                  const std::vector<int>& counts,
                                  const std::vector<int>& pixel_counts, const PruneConfig& cfg,
                                  double* threshold_out) {
    const size_t n = counts.size();
    std::vector<uint8_t> pass(n, 1);
    if (n == 0) return pass;

    double t_scene = 0.0;
    const int rank = static_cast<int>(std::ceil(cfg.quantile * double(n)));
    if (rank >= 1) {
        std::vector<int> sorted(counts);
        std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
        t_scene = sorted[rank - 1];
    }
    if (threshold_out) *threshold_out = t_scene;

    for (size_t e = 0; e < n; ++e) {
        double t = std::max(t_scene, double(cfg.min_matches));
        if (cfg.absolute_floor) t = std::max(t, cfg.floor_frac * pixel_counts[e]);
        pass[e] = counts[e] >= t;
    }

    // Strict symmetry: a surviving direction is discarded with its partner.
    std::map<std::pair<ViewId, ViewId>, size_t> index;
    for (size_t e = 0; e < n; ++e) index[pairs[e]] = e;
    std::vector<uint8_t> out(pass);
    for (size_t e = 0; e < n; ++e) {
        auto it = index.find({pairs[e].second, pairs[e].first});
        if (it != index.end() && !pass[it->second]) out[e] = 0;
    }
    return out;
}

std::vector<ViewId> largest_component(const SceneGraph& graph) {
    if (graph.views.empty()) return {};
    std::map<ViewId, ViewId> parent;
    for (const auto& v : graph.views) parent[v.id] = v.id;
    std::function<ViewId(ViewId)> find = [&](ViewId x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : graph.edges) {
        const ViewId a = find(e.src), b = find(e.dst);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<ViewId, std::vector<ViewId>> components;
    for (const auto& v : graph.views) components[find(v.id)].push_back(v.id);

    const std::vector<ViewId>* best = nullptr;
    for (const auto& [root, members] : components) {
        if (!best || members.size() > best->size()) best = &members;
        // map iteration is by ascending root = ascending minimum id, so the
        // size tie naturally keeps the smaller-minimum component
    }
    std::vector<ViewId> out = *best;
    std::sort(out.begin(), out.end());
    return out;
}

std::pair<Pointmap, Pointmap> edge_pointmaps(const SceneGraph& graph,
                                             const EdgeObservation& edge, int stride) {
    const View& dst = graph.views[graph.view_index(edge.dst)];
    const View& src = graph.views[graph.view_index(edge.src)];

    auto strided = [stride](const RayField& rays, const RadialMap& radial) {
        Pointmap pm(rays.width, rays.height);
        for (int v = 0; v < rays.height; v += stride) {
            for (int u = 0; u < rays.width; u += stride) {
                const int i = pm.index(u, v);
                if (rays.valid[i] && radial.r[i] > 0.0) {
                    pm.xyz[i] = rays.dirs[i] * radial.r[i];
                    pm.valid[i] = 1;
                }
            }
        }
        return pm;
    };

    Pointmap a = strided(dst.rays, edge.radial_dst);
    Pointmap b = transform_pointmap(strided(src.rays, edge.radial_src), edge.pose);
    return {std::move(a), std::move(b)};
}

std::pair<SceneGraph, PruneReport> prune(const SceneGraph& graph, const PruneConfig& cfg) {
    graph.validate();

    PruneReport report;
    report.config = cfg;
    report.edges.resize(graph.edges.size());
    for (size_t e = 0; e < graph.edges.size(); ++e) {
        report.edges[e].src = graph.edges[e].src;
        report.edges[e].dst = graph.edges[e].dst;
    }

    std::map<std::pair<ViewId, ViewId>, size_t> by_key;
    for (size_t e = 0; e < graph.edges.size(); ++e) {
        by_key[{graph.edges[e].src, graph.edges[e].dst}] = e;
    }
    auto reverse_of = [&](size_t e) -> size_t {
        const auto it = by_key.find({graph.edges[e].dst, graph.edges[e].src});
        if (it == by_key.end()) {
            throw NotReciprocal("prune: edge (" + std::to_string(graph.edges[e].src) + "->" +
                                std::to_string(graph.edges[e].dst) + ") has no reverse");
        }
        return it->second;
    };

    std::vector<uint8_t> alive(graph.edges.size(), 1);

    // Stage 1: symmetric pose consistency, evaluated once per unordered pair
    // with the lower-id view in the "i" role.
    for (size_t e = 0; e < graph.edges.size(); ++e) {
        const auto& edge = graph.edges[e];
        if (edge.dst > edge.src) continue;  // handled from the (dst < src) direction
        const size_t rev = reverse_of(e);
        const SymmetryCheck check =
            symmetric_pose_check(edge, graph.edges[rev], cfg.tau_rot_deg, cfg.tau_tra_deg);
        for (size_t idx : {e, rev}) {
            report.edges[idx].theta_rot_deg = check.theta_rot_deg;
            report.edges[idx].theta_tra_deg = check.theta_tra_deg;
        }
        if (!check.pass) {
            const EdgeVerdict verdict = check.theta_rot_deg > cfg.tau_rot_deg
                                            ? EdgeVerdict::failed_symmetry_rot
                                            : EdgeVerdict::failed_symmetry_trans;
            alive[e] = alive[rev] = 0;
            report.edges[e].verdict = report.edges[rev].verdict = verdict;
        }
    }

    // Stage 2: MNN overlap gate over the survivors.
    std::vector<size_t> survivors;
    std::vector<std::pair<ViewId, ViewId>> keys;
    std::vector<int> counts, pixel_counts;
    std::vector<std::vector<Match>> matches(graph.edges.size());
    for (size_t e = 0; e < graph.edges.size(); ++e) {
        if (!alive[e]) continue;
        const auto& edge = graph.edges[e];
        auto [a, b] = edge_pointmaps(graph, edge, cfg.stride);
        matches[e] = mnn_matches(a, b);
        survivors.push_back(e);
        keys.emplace_back(edge.src, edge.dst);
        counts.push_back(static_cast<int>(matches[e].size()));
        pixel_counts.push_back(static_cast<int>(std::min(a.valid_count(), b.valid_count())));
        report.edges[e].n_matches = static_cast<int>(matches[e].size());
    }
    const std::vector<uint8_t> gate =
        overlap_gate(keys, counts, pixel_counts, cfg, &report.overlap_threshold);
    for (size_t k = 0; k < survivors.size(); ++k) {
        if (gate[k]) continue;
        const size_t e = survivors[k];
        alive[e] = 0;
        // Distinguish an own-count failure from a symmetric-partner drop.
        double own_t = std::max(report.overlap_threshold, double(cfg.min_matches));
        if (cfg.absolute_floor) own_t = std::max(own_t, cfg.floor_frac * pixel_counts[k]);
        report.edges[e].verdict = counts[k] >= own_t ? EdgeVerdict::dropped_by_symmetric_partner
                                                     : EdgeVerdict::failed_overlap;
    }

    // Stage 3: largest connected component of what survived.
    SceneGraph gated;
    gated.views = graph.views;
    for (size_t e = 0; e < graph.edges.size(); ++e) {
        if (alive[e]) gated.edges.push_back(graph.edges[e]);
    }
    report.kept_views = largest_component(gated);
    const std::set<ViewId> keep(report.kept_views.begin(), report.kept_views.end());

    SceneGraph out;
    for (const auto& v : graph.views) {
        if (keep.count(v.id)) out.views.push_back(v);
    }
    for (size_t e = 0; e < graph.edges.size(); ++e) {
        if (!alive[e]) continue;
        const auto& edge = graph.edges[e];
        if (!keep.count(edge.src) || !keep.count(edge.dst)) {
            report.edges[e].verdict = EdgeVerdict::outside_largest_component;
            continue;
        }
        out.edges.push_back(edge);
        out.edges.back().matches = std::move(matches[e]);
    }
    return {std::move(out), std::move(report)};
}

}  // namespace rayalign
