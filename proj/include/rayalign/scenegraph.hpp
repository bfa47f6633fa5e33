#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rayalign/camera.hpp"
#include "rayalign/pointmap.hpp"

namespace rayalign {

using ViewId = int;

struct View {
    ViewId id = 0;
    CameraSpec camera;
    RayField rays;
};

/// A 3D mutual-nearest-neighbor correspondence between two pixel grids.
struct Match {
    int idx_a = 0;  // pixel index in the first (dst-view) map
    int idx_b = 0;  // pixel index in the second (transformed src-view) map
    double dist = 0;
};

/// One directed pairwise prediction: pose maps points from the src frame
/// into the dst frame; radial/confidence maps are carried for both views.
struct EdgeObservation {
    ViewId src = 0;
    ViewId dst = 0;
    Pose pose;
    RadialMap radial_dst;
    RadialMap radial_src;
    ConfidenceMap conf_dst;
    ConfidenceMap conf_src;
    double pair_scale = 1.0;     // simulator diagnostic only
    std::vector<Match> matches;  // cached by prune() on the stride grid
};

struct SceneGraph {
    std::vector<View> views;
    std::vector<EdgeObservation> edges;

    int view_index(ViewId id) const;

    /// Checks edge endpoints exist, no self edges, at most one edge per
    /// direction, per-view map dimensions match the camera.
    void validate() const;
};

enum class EdgeVerdict {
    kept,
    failed_symmetry_rot,
    failed_symmetry_trans,
    failed_overlap,
    dropped_by_symmetric_partner,
    outside_largest_component,
};

std::string to_string(EdgeVerdict v);

struct EdgeReport {
    ViewId src = 0;
    ViewId dst = 0;
    EdgeVerdict verdict = EdgeVerdict::kept;
    int n_matches = -1;  // -1 when never measured (removed earlier)
    double theta_rot_deg = 0;
    double theta_tra_deg = 0;
};

struct PruneConfig {
    double tau_rot_deg = 5.0;
    double tau_tra_deg = 10.0;
    double quantile = 0.20;        // nearest-rank quantile of match counts; <= 0 disables
    int stride = 4;                // pixel subsampling for MNN
    bool absolute_floor = false;   // also require n_e >= floor_frac * pixel count
    double floor_frac = 0.20;
    int min_matches = 0;           // fixed absolute floor, 0 = off
};

struct PruneReport {
    std::vector<EdgeReport> edges;  // one entry per input edge, input order
    double overlap_threshold = 0;   // scene-wide quantile value actually used
    PruneConfig config;
    std::vector<ViewId> kept_views;
};

struct SymmetryCheck {
    double theta_rot_deg = 0;
    double theta_tra_deg = 0;
    bool translation_tested = true;
    bool pass = false;
};

/// Bidirectional consistency of a reciprocal edge pair. e_ij must be the
/// (dst=i, src=j) edge and e_ji its reverse, else NotReciprocal. The
/// translation test is skipped when either translation is below 1e-9.
SymmetryCheck symmetric_pose_check(const EdgeObservation& e_ij, const EdgeObservation& e_ji,
                                   double tau_rot_deg, double tau_tra_deg);

/// Mutual nearest neighbors between the valid points of two pointmaps,
/// ordered by the index in `a`. Exactly equal to the brute-force mutual-NN
/// set (ties toward smaller index). Throws EmptyPointmap.
std::vector<Match> mnn_matches(const Pointmap& a, const Pointmap& b);

/// Per-edge pass flags for the match-count gate. The scene-wide threshold is
/// the nearest-rank `quantile` of `counts`; with absolute_floor each edge
/// additionally requires floor_frac * pixel_counts[e]. If one direction of a
/// pair fails, both fail. `pairs` carries (src, dst) keys for pairing.
std::vector<uint8_t> overlap_gate(const std::vector<std::pair<ViewId, ViewId>>& pairs,
                                  const std::vector<int>& counts,
                                  const std::vector<int>& pixel_counts, const PruneConfig& cfg,
                                  double* threshold_out = nullptr);

/// Vertex set of the largest connected component of the undirected support;
/// ties go to the component containing the smallest ViewId. With no edges,
/// the singleton of the lowest ViewId.
std::vector<ViewId> largest_component(const SceneGraph& graph);

/// Full cascade: symmetric pose consistency, MNN overlap gate, largest
/// component. Kept edges come back with their matches cached.
std::pair<SceneGraph, PruneReport> prune(const SceneGraph& graph, const PruneConfig& cfg);

/// The dst-frame pointmaps an edge is gated on: (dst view's own points,
/// src view's points transformed by the edge pose), subsampled on the
/// stride grid; match indices refer to full-resolution pixels.
std::pair<Pointmap, Pointmap> edge_pointmaps(const SceneGraph& graph,
                                             const EdgeObservation& edge, int stride);

}  // namespace rayalign
