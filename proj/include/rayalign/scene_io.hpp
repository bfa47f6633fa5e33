#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>

#include "rayalign/align.hpp"
#include "rayalign/scenegraph.hpp"

namespace rayalign {

using Json = nlohmann::json;

// Scene files are JSON for structure plus CAMT tensors for dense fields;
// tensor paths inside the JSON are relative to the scene file's directory.
// Formats are documented in docs/formats.md.

Json camera_to_json(const CameraSpec& spec);
CameraSpec camera_from_json(const Json& j);

Json pose_to_json(const Pose& pose);       // 16 row-major values
Pose pose_from_json(const Json& j);

/// Parses a JSON file; parse errors surface as ConfigError with
/// "file:line:column:" anchoring.
Json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const Json& j);

struct SceneMeta {
    uint64_t seed = 0;
    std::string profile;
};

/// Writes scene.json plus tensors/ under the scene file's directory.
void save_scene(const std::filesystem::path& scene_file, const SceneGraph& graph,
                const SceneMeta& meta);
/// Loads the scene, regenerates per-view ray fields from the camera specs,
/// and validates the graph.
SceneGraph load_scene(const std::filesystem::path& scene_file, SceneMeta* meta = nullptr);

struct GtSidecar {
    std::vector<ViewId> ids;
    std::vector<Pose> poses;  // camera-to-world
    std::vector<std::tuple<ViewId, ViewId, double>> pair_scales;  // per directed edge
};

void save_gt(const std::filesystem::path& path, const GtSidecar& gt);
GtSidecar load_gt(const std::filesystem::path& path);

void save_prune_report(const std::filesystem::path& path, const PruneReport& report);

/// result.json plus cloud.camt / cloud_conf.camt next to it.
void save_align_result(const std::filesystem::path& result_file, const SceneGraph& graph,
                       const AlignmentResult& result);

struct AlignResultData {
    std::vector<ViewId> ids;
    std::vector<Pose> poses;
    std::vector<Pose> init_poses;
    std::vector<double> scales;
    double initial_objective = 0;
    double final_objective = 0;
    std::vector<Vec3> cloud;
    std::vector<double> cloud_conf;
};

AlignResultData load_align_result(const std::filesystem::path& result_file);

/// Binary little-endian PLY with float32 x y z and uchar red green blue
/// mapped from per-point confidence.
void write_ply(const std::filesystem::path& path, const std::vector<Vec3>& points,
               const std::vector<double>& conf);

}  // namespace rayalign
