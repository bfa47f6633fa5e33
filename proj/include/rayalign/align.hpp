#pragma once

#include <cstdint>
#include <vector>

#include "rayalign/scenegraph.hpp"

namespace rayalign {

/// Per-view fused fields built from all incident edges of the pruned graph.
struct ConsensusFields {
    std::vector<RayField> rays;      // aligned with graph.views
    std::vector<RadialMap> radial;
    std::vector<ConfidenceMap> conf;
};

/// Confidence-weighted average of unit ray fields: per pixel
/// normalize(sum_e sigma_e(u) d_e(u)); near-zero sums are invalid.
RayField fuse_rays(const std::vector<const RayField*>& fields,
                   const std::vector<const ConfidenceMap*>& weights);

/// Consensus ray field per view over its incident edges. Throws
/// IsolatedView when a view has no incident edge.
std::vector<RayField> consensus_rays(const SceneGraph& graph);

/// Fused radial field per view: every incident edge's radials are brought
/// to the first incident edge's scale by the median ratio, then averaged
/// with confidence weights. Throws NoValidPixels.
std::vector<RadialMap> init_radial(const SceneGraph& graph, const std::vector<RayField>& rays);

/// Highest-degree view of the pruned graph; ties to the smallest id.
ViewId select_anchor(const SceneGraph& graph);

/// Breadth-first chaining of edge relative poses from the anchor (identity).
/// Neighbors are visited in ascending ViewId; the tree edge wins on cycles.
/// Returns camera-to-world poses aligned with graph.views. Throws
/// Disconnected.
std::vector<Pose> init_poses(const SceneGraph& graph, ViewId anchor);

/// One residual of the global objective, from a directed edge (src -> dst)
/// and one source-view pixel: the pixel's consensus effective point in the
/// source frame against its frozen edge-predicted position in the dst
/// frame (edge radial through the edge pose, rescaled onto the dst view's
/// consensus scale).
struct ResidualTerm {
    int view_src = 0;   // index into graph.views; carries the depth variable
    int view_dst = 0;
    int slot_src = 0;   // depth slot of the source pixel
    Vec3 dst_local = Vec3::Zero();  // frozen point in the dst camera frame
    double weight = 1.0;            // sigma_{i,j}(u)
};

/// Frozen part of the alignment problem: consensus fields, depth-slot
/// layout, residual terms.
struct AlignmentProblem {
    const SceneGraph* graph = nullptr;
    ConsensusFields consensus;
    std::vector<std::vector<int>> pixel_slot;  // per view: pixel -> slot or -1
    std::vector<std::vector<int>> slot_pixel;  // per view: slot -> pixel
    std::vector<std::vector<Vec3>> slot_dir;   // per view: frozen consensus ray
    std::vector<std::vector<double>> log_depth_init;
    std::vector<ResidualTerm> terms;
    std::vector<double> edge_scale_to_dst;  // per edge: median consensus/edge radial ratio
    int anchor = 0;  // index into graph->views
};

/// Optimization variables.
struct AlignmentState {
    std::vector<Pose> poses;        // camera-to-world per view
    std::vector<double> log_scale;  // per view
    std::vector<std::vector<double>> log_depth;  // per view, slot layout
};

struct ObjectiveEval {
    double value = 0;                      // Eq.-12 data term
    std::vector<Vec3> grad_rot;            // tangent-space gradient per view
    std::vector<Vec3> grad_trans;
    std::vector<double> grad_log_scale;
    std::vector<std::vector<double>> grad_log_depth;
};

/// Confidence-weighted 3D alignment error over the cached correspondences,
/// with analytic gradients for every variable class. Rotation gradients are
/// for right-multiplied tangent updates R <- R exp([delta]x).
ObjectiveEval objective(const AlignmentProblem& problem, const AlignmentState& state,
                        bool with_gradients = true);

struct AlignConfig {
    double lr_init = 1e-2;
    int iters_per_stage = 100;
    int cycles = 3;
    int joint_iters = 300;
    int joint_restarts = 1;        // joint stages, lr decayed between them
    double restart_decay = 0.1;
    double cosine_floor = 1e-4;    // floor as a fraction of the stage lr
    double convergence_tol = 1e-8; // relative decrease over 10 iters; <= 0 disables
    double depth_prior_rho = 1e-3;
    bool optimize_log_depths = true;  // joint stage
    bool stage_b_depths = false;      // also move depths in stage B
    bool use_confidence_weights = true;
    int stride = 4;  // used only if matches are missing and must be rebuilt
    uint64_t seed = 0;  // carried through for provenance; descent is deterministic
};

struct AlignmentResult {
    std::vector<Pose> poses;       // optimized camera-to-world, graph order
    std::vector<Pose> init_poses;  // BFS chaining baseline
    std::vector<double> scales;    // exp(log_scale)
    AlignmentProblem problem;
    AlignmentState state;
    std::vector<double> trace_data;   // objective at stage boundaries
    std::vector<double> trace_total;  // objective + depth prior at boundaries
    double initial_objective = 0;
    double final_objective = 0;
};

/// Builds consensus fields, anchors and initializes the state, then runs the
/// alternating schedule: pose stages and scale stages for `cycles` rounds,
/// then joint stages over all variables. Adam-style per-variable steps with
/// a cosine-decayed rate; the anchor pose and log-scale stay pinned; rays
/// are never touched. Throws Disconnected and NonFiniteObjective.
AlignmentResult optimize(const SceneGraph& graph, const AlignConfig& cfg);

/// Local-frame effective points exp(log_depth + log_scale) * ray for one
/// view of the problem/state pair.
Pointmap effective_points(const AlignmentProblem& problem, const AlignmentState& state,
                          int view_index);

/// World-frame fused cloud with per-point consensus confidence.
struct FusedCloud {
    std::vector<Vec3> points;
    std::vector<double> conf;
};
FusedCloud fused_cloud(const AlignmentProblem& problem, const AlignmentState& state);

}  // namespace rayalign
