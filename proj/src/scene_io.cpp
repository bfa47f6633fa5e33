#include "rayalign/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rayalign/camt.hpp"

namespace rayalign {

namespace fs = std::filesystem;

Json camera_to_json(const CameraSpec& spec) {
    Json j;
    if (const auto* e = std::get_if<EquirectSpec>(&spec)) {
        j["type"] = "equirect";
        j["width"] = e->width;
        j["height"] = e->height;
    } else if (const auto* p = std::get_if<PinholeSpec>(&spec)) {
        j["type"] = "pinhole";
        j["width"] = p->width;
        j["height"] = p->height;
        j["fx"] = p->fx;
        j["fy"] = p->fy;
        j["cx"] = p->cx;
        j["cy"] = p->cy;
    } else if (const auto* f = std::get_if<FisheyeSpec>(&spec)) {
        j["type"] = "fisheye_equidistant";
        j["width"] = f->width;
        j["height"] = f->height;
        j["f"] = f->f;
        j["cx"] = f->cx;
        j["cy"] = f->cy;
        j["theta_max"] = f->theta_max;
    } else if (const auto* s = std::get_if<ShSpec>(&spec)) {
        j["type"] = "spherical_harmonic";
        j["width"] = s->width;
        j["height"] = s->height;
        j["degree"] = s->degree;
        j["theta_max"] = s->theta_max;
        Json coeffs = Json::array();
        for (const Vec3& c : s->coeffs) coeffs.push_back({c.x(), c.y(), c.z()});
        j["coeffs"] = std::move(coeffs);
    }
    return j;
}

namespace {

template <typename T>
T require(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(where + ": field '" + key + "': " + e.what());
    }
}

}  // namespace

CameraSpec camera_from_json(const Json& j) {
    const std::string where = "camera";
    const std::string type = require<std::string>(j, "type", where);
    CameraSpec spec;
    if (type == "equirect") {
        spec = EquirectSpec{require<int>(j, "width", where), require<int>(j, "height", where)};
    } else if (type == "pinhole") {
        spec = PinholeSpec{require<int>(j, "width", where),  require<int>(j, "height", where),
                           require<double>(j, "fx", where),  require<double>(j, "fy", where),
                           require<double>(j, "cx", where),  require<double>(j, "cy", where)};
    } else if (type == "fisheye_equidistant") {
        spec = FisheyeSpec{require<int>(j, "width", where), require<int>(j, "height", where),
                           require<double>(j, "f", where),  require<double>(j, "cx", where),
                           require<double>(j, "cy", where),
                           require<double>(j, "theta_max", where)};
    } else if (type == "spherical_harmonic") {
        ShSpec s;
        s.width = require<int>(j, "width", where);
        s.height = require<int>(j, "height", where);
        s.degree = require<int>(j, "degree", where);
        s.theta_max = j.value("theta_max", M_PI);
        if (!j.contains("coeffs") || !j["coeffs"].is_array()) {
            throw ConfigError("camera: spherical_harmonic needs a coeffs array");
        }
        for (const auto& c : j["coeffs"]) {
            if (!c.is_array() || c.size() != 3) {
                throw ConfigError("camera: each SH coefficient must be a 3-vector");
            }
            s.coeffs.emplace_back(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
        }
        spec = std::move(s);
    } else {
        throw ConfigError("camera: unknown type '" + type + "'");
    }
    validate_spec(spec);
    return spec;
}

Json pose_to_json(const Pose& pose) {
    const Mat4 m = pose.matrix();
    Json j = Json::array();
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) j.push_back(m(r, c));
    }
    return j;
}

Pose pose_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 16) {
        throw ConfigError("pose: expected 16 row-major values");
    }
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) m(r, c) = j[r * 4 + c].get<double>();
    }
    try {
        return Pose::from_matrix(m);
    } catch (const Error& e) {
        throw ConfigError(std::string("pose: ") + e.what());
    }
}

Json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        // Convert the byte offset into a line:column anchor.
        size_t line = 1, col = 1;
        for (size_t i = 0; i < std::min(e.byte, text.size()); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ":" +
                          std::to_string(col) + ": " + e.what());
    }
}

void save_json_file(const fs::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

namespace {

std::string edge_tensor_name(const EdgeObservation& e, const char* kind) {
    return "tensors/edge_" + std::to_string(e.src) + "_" + std::to_string(e.dst) + "_" + kind +
           ".camt";
}

}  // namespace

void save_scene(const fs::path& scene_file, const SceneGraph& graph, const SceneMeta& meta) {
    const fs::path dir = scene_file.parent_path();
    fs::create_directories(dir / "tensors");

    Json j;
    j["version"] = 1;
    j["meta"] = {{"seed", meta.seed}, {"profile", meta.profile}};
    Json views = Json::array();
    for (const auto& v : graph.views) {
        views.push_back({{"id", v.id}, {"camera", camera_to_json(v.camera)}});
    }
    j["views"] = std::move(views);

    Json edges = Json::array();
    for (const auto& e : graph.edges) {
        Json je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["pose"] = pose_to_json(e.pose);
        je["pair_scale"] = e.pair_scale;
        je["radial_dst"] = edge_tensor_name(e, "radial_dst");
        je["radial_src"] = edge_tensor_name(e, "radial_src");
        je["conf_dst"] = edge_tensor_name(e, "conf_dst");
        je["conf_src"] = edge_tensor_name(e, "conf_src");
        write_camt(dir / edge_tensor_name(e, "radial_dst"), tensor_from_radial(e.radial_dst));
        write_camt(dir / edge_tensor_name(e, "radial_src"), tensor_from_radial(e.radial_src));
        write_camt(dir / edge_tensor_name(e, "conf_dst"), tensor_from_conf(e.conf_dst));
        write_camt(dir / edge_tensor_name(e, "conf_src"), tensor_from_conf(e.conf_src));
        edges.push_back(std::move(je));
    }
    j["edges"] = std::move(edges);
    save_json_file(scene_file, j);
}

SceneGraph load_scene(const fs::path& scene_file, SceneMeta* meta) {
    const Json j = load_json_file(scene_file);
    const fs::path dir = scene_file.parent_path();
    if (meta && j.contains("meta")) {
        meta->seed = j["meta"].value("seed", uint64_t(0));
        meta->profile = j["meta"].value("profile", std::string());
    }

    SceneGraph graph;
    if (!j.contains("views") || !j["views"].is_array()) {
        throw ConfigError(scene_file.string() + ": missing views array");
    }
    for (const auto& jv : j["views"]) {
        View v;
        v.id = require<int>(jv, "id", "view");
        if (!jv.contains("camera")) throw ConfigError("view: missing camera");
        v.camera = camera_from_json(jv["camera"]);
        v.rays = make_rays(v.camera);
        graph.views.push_back(std::move(v));
    }
    for (const auto& je : j.value("edges", Json::array())) {
        EdgeObservation e;
        e.src = require<int>(je, "src", "edge");
        e.dst = require<int>(je, "dst", "edge");
        if (!je.contains("pose")) throw ConfigError("edge: missing pose");
        e.pose = pose_from_json(je["pose"]);
        e.pair_scale = je.value("pair_scale", 1.0);
        e.radial_dst = radial_from_tensor(read_camt(dir / je.at("radial_dst").get<std::string>()));
        e.radial_src = radial_from_tensor(read_camt(dir / je.at("radial_src").get<std::string>()));
        e.conf_dst = conf_from_tensor(read_camt(dir / je.at("conf_dst").get<std::string>()));
        e.conf_src = conf_from_tensor(read_camt(dir / je.at("conf_src").get<std::string>()));
        graph.edges.push_back(std::move(e));
    }
    try {
        graph.validate();
    } catch (const Error& e) {
        throw ConfigError(scene_file.string() + ": " + e.what());
    }
    return graph;
}

void save_gt(const fs::path& path, const GtSidecar& gt) {
    Json j;
    Json views = Json::array();
    for (size_t i = 0; i < gt.ids.size(); ++i) {
        views.push_back({{"id", gt.ids[i]}, {"pose", pose_to_json(gt.poses[i])}});
    }
    j["views"] = std::move(views);
    Json scales = Json::array();
    for (const auto& [src, dst, s] : gt.pair_scales) {
        scales.push_back({{"src", src}, {"dst", dst}, {"scale", s}});
    }
    j["pair_scales"] = std::move(scales);
    save_json_file(path, j);
}

GtSidecar load_gt(const fs::path& path) {
    const Json j = load_json_file(path);
    GtSidecar gt;
    for (const auto& jv : j.value("views", Json::array())) {
        gt.ids.push_back(require<int>(jv, "id", "gt view"));
        gt.poses.push_back(pose_from_json(jv.at("pose")));
    }
    for (const auto& js : j.value("pair_scales", Json::array())) {
        gt.pair_scales.emplace_back(require<int>(js, "src", "gt scale"),
                                    require<int>(js, "dst", "gt scale"),
                                    require<double>(js, "scale", "gt scale"));
    }
    return gt;
}

void save_prune_report(const fs::path& path, const PruneReport& report) {
    Json j;
    j["thresholds"] = {{"tau_rot_deg", report.config.tau_rot_deg},
                       {"tau_tra_deg", report.config.tau_tra_deg},
                       {"quantile", report.config.quantile},
                       {"stride", report.config.stride},
                       {"absolute_floor", report.config.absolute_floor},
                       {"floor_frac", report.config.floor_frac},
                       {"min_matches", report.config.min_matches},
                       {"overlap_threshold", report.overlap_threshold}};
    Json edges = Json::array();
    for (const auto& e : report.edges) {
        edges.push_back({{"src", e.src},
                         {"dst", e.dst},
                         {"verdict", to_string(e.verdict)},
                         {"n_matches", e.n_matches},
                         {"theta_rot_deg", e.theta_rot_deg},
                         {"theta_tra_deg", e.theta_tra_deg}});
    }
    j["edges"] = std::move(edges);
    j["kept_views"] = report.kept_views;
    save_json_file(path, j);
}

void save_align_result(const fs::path& result_file, const SceneGraph& graph,
                       const AlignmentResult& result) {
    const fs::path dir = result_file.parent_path();
    fs::create_directories(dir);

    Json j;
    Json poses = Json::array(), init_poses = Json::array(), scales = Json::array();
    for (size_t v = 0; v < graph.views.size(); ++v) {
        poses.push_back({{"id", graph.views[v].id}, {"pose", pose_to_json(result.poses[v])}});
        init_poses.push_back(
            {{"id", graph.views[v].id}, {"pose", pose_to_json(result.init_poses[v])}});
        scales.push_back({{"id", graph.views[v].id}, {"scale", result.scales[v]}});
    }
    j["poses"] = std::move(poses);
    j["init_poses"] = std::move(init_poses);
    j["scales"] = std::move(scales);
    j["objective"] = {{"initial", result.initial_objective},
                      {"final", result.final_objective},
                      {"trace_data", result.trace_data},
                      {"trace_total", result.trace_total}};
    j["cloud"] = "cloud.camt";
    j["cloud_conf"] = "cloud_conf.camt";

    const FusedCloud cloud = fused_cloud(result.problem, result.state);
    write_camt(dir / "cloud.camt", tensor_from_points(cloud.points));
    write_camt(dir / "cloud_conf.camt", tensor_from_scalars(cloud.conf));
    save_json_file(result_file, j);
}

AlignResultData load_align_result(const fs::path& result_file) {
    const Json j = load_json_file(result_file);
    const fs::path dir = result_file.parent_path();
    AlignResultData out;
    for (const auto& jp : j.value("poses", Json::array())) {
        out.ids.push_back(require<int>(jp, "id", "result pose"));
        out.poses.push_back(pose_from_json(jp.at("pose")));
    }
    for (const auto& jp : j.value("init_poses", Json::array())) {
        out.init_poses.push_back(pose_from_json(jp.at("pose")));
    }
    for (const auto& js : j.value("scales", Json::array())) {
        out.scales.push_back(require<double>(js, "scale", "result scale"));
    }
    if (j.contains("objective")) {
        out.initial_objective = j["objective"].value("initial", 0.0);
        out.final_objective = j["objective"].value("final", 0.0);
    }
    if (j.contains("cloud")) {
        const CamtTensor t = read_camt(dir / j["cloud"].get<std::string>());
        if (t.dims.size() != 2 || t.dims[1] != 3) {
            throw FormatError("result cloud: expected (n, 3) tensor");
        }
        for (size_t i = 0; i < t.dims[0]; ++i) {
            out.cloud.emplace_back(t.data[3 * i], t.data[3 * i + 1], t.data[3 * i + 2]);
        }
    }
    if (j.contains("cloud_conf")) {
        const CamtTensor t = read_camt(dir / j["cloud_conf"].get<std::string>());
        out.cloud_conf.assign(t.data.begin(), t.data.end());
    }
    return out;
}

void write_ply(const fs::path& path, const std::vector<Vec3>& points,
               const std::vector<double>& conf) {
    double lo = 0.0, hi = 1.0;
    if (!conf.empty()) {
        lo = *std::min_element(conf.begin(), conf.end());
        hi = *std::max_element(conf.begin(), conf.end());
    }
    const double span = hi - lo;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("write_ply: cannot open " + path.string());
    out << "ply\n"
        << "format binary_little_endian 1.0\n"
        << "element vertex " << points.size() << "\n"
        << "property float x\n"
        << "property float y\n"
        << "property float z\n"
        << "property uchar red\n"
        << "property uchar green\n"
        << "property uchar blue\n"
        << "end_header\n";
    for (size_t i = 0; i < points.size(); ++i) {
        const float xyz[3] = {float(points[i].x()), float(points[i].y()), float(points[i].z())};
        out.write(reinterpret_cast<const char*>(xyz), 12);
        const double x = (i < conf.size() && span > 0.0) ? (conf[i] - lo) / span : 0.5;
        // cold blue (low confidence) to warm red (high)
        const uint8_t rgb[3] = {uint8_t(255.0 * x),
                                uint8_t(255.0 * (1.0 - std::abs(2.0 * x - 1.0))),
                                uint8_t(255.0 * (1.0 - x))};
        out.write(reinterpret_cast<const char*>(rgb), 3);
    }
    if (!out) throw FormatError("write_ply: write failed");
}

}  // namespace rayalign
