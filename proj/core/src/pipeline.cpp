#include "strokemap/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "strokemap/lscm.hpp"
#include "strokemap/mesh_io.hpp"
#include "strokemap/metrics.hpp"
#include "strokemap/shapes.hpp"
#include "strokemap/stroke_io.hpp"
#include "strokemap/surface.hpp"
#include "strokemap/trajectory.hpp"
#include "strokemap/version.hpp"

namespace strokemap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path + " (open failed)");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// All output lands via temp-file + rename, so readers never see partial files.
void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write file: " + tmp);
        out << content;
        if (!out) throw Error("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec2 vec2_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(what + " must be a [x, y] number pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 vec3_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3)
        throw Error(what + " must be a [x, y, z] number triple");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Box2 box2_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) throw Error(what + " must be [[minx,miny],[maxx,maxy]]");
    Box2 b;
    b.min = vec2_from(j[0], what + " min");
    b.max = vec2_from(j[1], what + " max");
    if (!(b.max.x() > b.min.x()) || !(b.max.y() > b.min.y()))
        throw Error(what + " must have positive extent");
    return b;
}

json json_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string sanitize_tag(const std::string& s) {
    if (s.empty()) return "default";
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

// ---------------------------------------------------------------------------
// Config

constexpr double kDegToRad = 0.017453292519943295;

void apply_mapping_keys(PipelineConfig& cfg, const json& doc) {
    if (doc.contains("samples")) cfg.samples = doc.at("samples").get<std::size_t>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("k_neighbors")) cfg.k_neighbors = doc.at("k_neighbors").get<int>();
    if (doc.contains("scale")) cfg.explicit_scale = doc.at("scale").get<double>();
    if (doc.contains("direction")) cfg.direction = vec3_from(doc.at("direction"), "direction");
    if (doc.contains("start_point"))
        cfg.start_point = vec3_from(doc.at("start_point"), "start_point");
    if (doc.contains("start_normal"))
        cfg.start_normal = vec3_from(doc.at("start_normal"), "start_normal");
    if (doc.contains("anchor")) cfg.anchor = vec3_from(doc.at("anchor"), "anchor");
    if (doc.contains("pins")) {
        const json& p = doc.at("pins");
        if (!p.is_array() || p.size() != 2) throw Error("pins must be two vertex indices");
        cfg.pins = std::make_pair(p[0].get<int>(), p[1].get<int>());
    }
    if (doc.contains("cloud_viewpoint"))
        cfg.cloud_viewpoint = vec3_from(doc.at("cloud_viewpoint"), "cloud_viewpoint");
    if (doc.contains("workspace")) cfg.workspace = box2_from(doc.at("workspace"), "workspace");
    if (doc.contains("methods")) {
        cfg.methods.clear();
        for (const auto& m : doc.at("methods"))
            cfg.methods.push_back(method_from_name(m.get<std::string>()));
        if (cfg.methods.empty()) throw Error("methods must not be empty");
    }
}

}  // namespace

PipelineConfig default_config() {
    PipelineConfig cfg;
    if (const char* env = std::getenv("STROKEMAP_OUT_DIR"); env && *env) cfg.out_dir = env;
    if (cfg.out_dir.empty()) cfg.out_dir = "out";
    return cfg;
}

PipelineConfig config_from_json(const json& doc, const std::string& origin) {
    if (!doc.is_object()) throw Error(origin + ": config must be a JSON object");
    PipelineConfig cfg = default_config();
    cfg.raw = doc;

    if (doc.contains("surface")) {
        const json& s = doc.at("surface");
        if (s.contains("path")) cfg.surface_path = s.at("path").get<std::string>();
        if (s.contains("shape")) cfg.surface_shape = s.at("shape");
        if (cfg.surface_path.empty() && cfg.surface_shape.empty())
            throw Error(origin + ": surface needs a path or a shape");
    }
    if (doc.contains("strokes")) {
        const json& s = doc.at("strokes");
        if (s.contains("path"))
            cfg.strokes_path = s.at("path").get<std::string>();
        else
            cfg.strokes_builtin = s;
    }
    apply_mapping_keys(cfg, doc);
    if (doc.contains("trajectory")) {
        const json& t = doc.at("trajectory");
        if (t.contains("standoff")) cfg.standoff = t.at("standoff").get<double>();
        if (t.contains("max_step_angle_deg"))
            cfg.max_step_angle = t.at("max_step_angle_deg").get<double>() * kDegToRad;
        if (t.contains("max_step_dist")) cfg.max_step_dist = t.at("max_step_dist").get<double>();
    }
    if (doc.contains("recovery")) {
        const json& r = doc.at("recovery");
        if (r.contains("threshold")) cfg.threshold = r.at("threshold").get<double>();
        if (r.contains("lift")) cfg.lift = r.at("lift").get<double>();
    }
    if (doc.contains("template")) {
        const json& t = doc.at("template");
        if (t.contains("sensor")) cfg.sensor_pos = vec3_from(t.at("sensor"), "template sensor");
        if (t.contains("count")) cfg.template_count = t.at("count").get<std::size_t>();
    }
    if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    const std::string text = read_file(path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw Error("cannot read file: " + path + " (invalid JSON: " + e.what() + ")");
    }
    return config_from_json(doc, path);
}

std::string version_string() {
    std::string s = "strokemap ";
    s += kToolVersion;
    s += " (stroke format " + std::to_string(kStrokeFormatVersion);
    s += ", trajectory format " + std::to_string(kTrajectoryFormatVersion);
    s += ", report format " + std::to_string(kReportFormatVersion) + ")";
    return s;
}

namespace {

// ---------------------------------------------------------------------------
// Surface and stroke resolution

struct ResolvedSurface {
    std::string label;
    TriangleMesh mesh;  // empty when the input is a point cloud
    PointCloud cloud;
    bool is_cloud = false;
    std::optional<std::pair<int, int>> default_pins;
};

ResolvedSurface resolve_surface(const PipelineConfig& cfg) {
    ResolvedSurface out;
    if (!cfg.surface_path.empty()) {
        const std::string ext = fs::path(cfg.surface_path).extension().string();
        out.label = fs::path(cfg.surface_path).stem().string();
        if (ext == ".obj" || ext == ".ply") {
            if (ext == ".ply") {
                // A PLY with no faces is a point cloud.
                try {
                    out.mesh = load_mesh_ply(cfg.surface_path);
                } catch (const Error&) {
                    out.cloud = load_cloud_ply(cfg.surface_path);
                    out.is_cloud = true;
                }
            } else {
                out.mesh = load_mesh_obj(cfg.surface_path);
            }
        } else if (ext == ".xyz") {
            out.cloud = load_cloud_xyz(cfg.surface_path);
            out.is_cloud = true;
        } else {
            throw Error("cannot read file: " + cfg.surface_path +
                        " (unknown surface extension '" + ext + "')");
        }
        if (!out.is_cloud) out.mesh = clean_mesh(out.mesh);
        return out;
    }
    if (cfg.surface_shape.empty()) throw Error("no surface configured");
    const json& s = cfg.surface_shape;
    const std::string name = s.value("name", "");
    out.label = name;
    if (name == "plane") {
        out.mesh = shapes::plane(s.value("size_x", 100.0), s.value("size_y", 100.0),
                                 s.value("pitch", 1.0));
    } else if (name == "box") {
        out.mesh = shapes::box(s.value("size_x", 100.0), s.value("size_y", 100.0),
                               s.value("height", 50.0));
    } else if (name == "half-cylinder") {
        const auto hc = shapes::half_cylinder(s.value("radius", 50.0), s.value("length", 100.0),
                                              s.value("pitch", 0.73));
        out.mesh = hc.mesh;
        out.default_pins = hc.chart_pins();
    } else if (name == "dome") {
        out.mesh = shapes::dome(s.value("radius", 50.0), s.value("rings", 32),
                                s.value("segments", 64));
    } else if (name == "sphere") {
        out.mesh = shapes::sphere(s.value("radius", 50.0), s.value("rings", 32),
                                  s.value("segments", 64));
    } else {
        throw Error("unknown built-in surface: '" + name + "'");
    }
    return out;
}

StrokeSet2D resolve_strokes(const PipelineConfig& cfg) {
    if (!cfg.strokes_path.empty()) return load_strokes_json(cfg.strokes_path);
    if (!cfg.strokes_builtin.empty()) {
        const json& b = cfg.strokes_builtin;
        if (b.contains("lattice")) {
            const json& l = b.at("lattice");
            const Box2 box = l.contains("box") ? box2_from(l.at("box"), "lattice box")
                                               : cfg.workspace;
            return shapes::lattice(box, l.value("lines_x", 9), l.value("lines_y", 9),
                                   l.value("points", 81));
        }
        if (b.contains("circle")) {
            const json& c = b.at("circle");
            return shapes::circle(c.value("radius", 30.0), c.value("points", 72));
        }
        throw Error("strokes config needs a path, a lattice, or a circle");
    }
    return shapes::lattice(cfg.workspace, 9, 9, 81);
}

SnapSurface vertex_snap(const TriangleMesh& m) {
    const auto vn = vertex_normals(m);
    std::vector<SurfaceSample> samples;
    samples.reserve(m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        samples.push_back({m.vertices[i], vn[i], int(i)});
    return make_snap_surface(std::move(samples));
}

SnapSurface build_snap(const ResolvedSurface& surf, const PipelineConfig& cfg) {
    if (surf.is_cloud) {
        std::vector<Vec3> normals = surf.cloud.normals;
        if (normals.empty())
            normals = estimate_normals(surf.cloud.points, 20, cfg.cloud_viewpoint);
        return snap_surface_from_cloud(surf.cloud.points, normals);
    }
    return snap_surface_from_mesh(surf.mesh, cfg.samples, cfg.seed);
}

MappingConfig mapping_config(const PipelineConfig& cfg) {
    MappingConfig m;
    m.workspace = cfg.workspace;
    m.explicit_scale = cfg.explicit_scale;
    m.direction = cfg.direction;
    m.sample_count = cfg.samples;
    m.seed = cfg.seed;
    m.k_neighbors = cfg.k_neighbors;
    m.start_point = cfg.start_point;
    m.start_normal = cfg.start_normal;
    return m;
}

bool uses_samples(Method m) {
    return m == Method::Project || m == Method::TransportSnap || m == Method::TransportFit;
}

bool uses_chart(Method m) { return m == Method::ChartSnap || m == Method::ChartInterp; }

// Lazily built per-surface state shared by the mapping methods.
struct MapContext {
    const ResolvedSurface& surf;
    const PipelineConfig& cfg;
    StrokeSet2D scaled;
    std::optional<SnapSurface> snap;
    std::optional<ParamChart> chart;
    Vec3 anchor = Vec3::Zero();
    double sampling_seconds = 0.0;
    double unfold_seconds = 0.0;

    MapContext(const ResolvedSurface& s, const PipelineConfig& c) : surf(s), cfg(c) {}

    const SnapSurface& ensure_snap() {
        if (!snap) {
            const auto t0 = std::chrono::steady_clock::now();
            snap = build_snap(surf, cfg);
            sampling_seconds = seconds_since(t0);
        }
        return *snap;
    }

    const ParamChart& ensure_chart() {
        if (!chart) {
            if (surf.is_cloud) throw Error("chart mapping requires a mesh surface");
            const auto pins = cfg.pins ? cfg.pins : surf.default_pins;
            const auto t0 = std::chrono::steady_clock::now();
            chart = lscm_unfold(surf.mesh, pins);
            unfold_seconds = seconds_since(t0);
            if (cfg.anchor) {
                anchor = *cfg.anchor;
            } else {
                // Default anchor: where the first point would project onto
                // the mesh, probed against the vertex set.
                const SnapSurface vs = vertex_snap(surf.mesh);
                anchor =
                    project_probe(scaled.strokes.front().points.front(), vs, cfg.direction).p;
            }
        }
        return *chart;
    }

    MappedStrokes run(Method m, MappingDiagnostics* diag) {
        if (uses_chart(m)) {
            const ParamChart& ch = ensure_chart();
            const StrokeSet2D uv = register_strokes_to_chart(scaled, ch, anchor);
            return map_parameterized(uv, ch, m, diag);
        }
        const SnapSurface& sn = ensure_snap();
        const MappingConfig mc = mapping_config(cfg);
        if (m == Method::Project) return map_projected(scaled, sn, mc, diag);
        return map_transport(scaled, sn, mc, m, diag);
    }
};

// ---------------------------------------------------------------------------
// Manifest

class ManifestWriter {
  public:
    explicit ManifestWriter(const PipelineConfig& cfg) {
        j_["tool"] = "strokemap";
        j_["version"] = kToolVersion;
        j_["format"] = kReportFormatVersion;
        j_["created"] = utc_now();
        j_["config"] = cfg.raw;
        j_["inputs"] = json::array();
        j_["outputs"] = json::array();
        j_["durations"] = json::object();
        j_["failures"] = json::array();
    }

    void add_input(const std::string& path) {
        j_["inputs"].push_back({{"path", path}, {"fnv64", hex64(fnv1a64(read_file(path)))}});
    }
    void add_output(const std::string& path) {
        j_["outputs"].push_back({{"path", path}, {"fnv64", hex64(fnv1a64(read_file(path)))}});
    }
    void add_duration(const std::string& name, double seconds) {
        j_["durations"][name] = seconds;
    }
    void add_failure(const std::string& stage, const std::string& message) {
        j_["failures"].push_back({{"stage", stage}, {"message", message}});
    }
    bool has_failures() const { return !j_["failures"].empty(); }

    void write(const std::string& out_dir) {
        write_atomic((fs::path(out_dir) / "manifest.json").string(), j_.dump(2) + "\n");
    }

  private:
    json j_;
};

void emit(ManifestWriter& man, const std::string& path, const std::string& content) {
    write_atomic(path, content);
    man.add_output(path);
}

// ---------------------------------------------------------------------------
// Report serialization

json report_json(const DeformationReport& rep) {
    json r;
    r["method"] = rep.method;
    r["strokes"] = rep.stroke_count;
    r["points"] = rep.point_count;
    r["local_mean_signed"] = rep.local_mean_signed;
    r["local_mean_abs"] = rep.local_mean_abs;
    r["local_max_abs"] = rep.local_max_abs;
    r["global_mean_signed"] = rep.global_mean_signed;
    r["global_mean_abs"] = rep.global_mean_abs;
    r["global_max_abs"] = rep.global_max_abs;
    r["global_pairs"] = rep.global.size();
    r["flagged_points"] = rep.flagged_points;
    r["plane_fit_fallbacks"] = rep.plane_fit_fallbacks;
    r["bridge_misses"] = rep.bridge_misses;
    return r;
}

std::string local_errors_csv(const DeformationReport& rep) {
    std::string out = "stroke,segment,error\n";
    for (const auto& series : rep.local)
        for (std::size_t i = 0; i < series.errors.size(); ++i)
            out += series.id + "," + std::to_string(i) + "," + fmt17(series.errors[i]) + "\n";
    return out;
}

std::string global_errors_csv(const DeformationReport& rep) {
    std::string out = "stroke_a,point_a,stroke_b,point_b,dist2d,error\n";
    for (const auto& g : rep.global) {
        out += std::to_string(g.pair.stroke_a) + "," + std::to_string(g.pair.point_a) + ",";
        out += std::to_string(g.pair.stroke_b) + "," + std::to_string(g.pair.point_b) + ",";
        out += fmt17(g.pair.dist2d) + "," + fmt17(g.error) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory serialization

const char* status_name(PoseStatus s) {
    switch (s) {
        case PoseStatus::Executed: return "executed";
        case PoseStatus::Skipped: return "skipped";
        case PoseStatus::LiftUp: return "lift-up";
        case PoseStatus::LiftTravel: return "lift-travel";
    }
    return "unknown";
}

json pose_json(const PenPose& p) {
    json o;
    o["p"] = json_vec3(p.p);
    o["q"] = json::array({p.q.w, p.q.x, p.q.y, p.q.z});
    o["n"] = json_vec3(p.n);
    o["pen_down"] = p.pen_down;
    o["stroke"] = p.stroke;
    return o;
}

PenPose pose_from_json(const json& o) {
    PenPose p;
    p.p = vec3_from(o.at("p"), "pose p");
    const json& q = o.at("q");
    if (!q.is_array() || q.size() != 4) throw Error("pose q must be [w,x,y,z]");
    p.q = UnitQuat{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                   q[3].get<double>()}
              .normalized();
    p.n = vec3_from(o.at("n"), "pose n");
    p.pen_down = o.value("pen_down", true);
    p.stroke = o.value("stroke", -1);
    return p;
}

std::string trajectory_csv(const PoseTrajectory& traj) {
    std::string out = "px,py,pz,qw,qx,qy,qz,nx,ny,nz,pen_down,stroke\n";
    for (const auto& p : traj) {
        out += fmt17(p.p.x()) + "," + fmt17(p.p.y()) + "," + fmt17(p.p.z()) + ",";
        out += fmt17(p.q.w) + "," + fmt17(p.q.x) + "," + fmt17(p.q.y) + "," + fmt17(p.q.z) + ",";
        out += fmt17(p.n.x()) + "," + fmt17(p.n.y()) + "," + fmt17(p.n.z()) + ",";
        out += std::string(p.pen_down ? "1" : "0") + "," + std::to_string(p.stroke) + "\n";
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// map

int cmd_map(const PipelineConfig& cfg) {
    ResolvedSurface surf{};
    StrokeSet2D strokes;
    try {
        surf = resolve_surface(cfg);
        strokes = resolve_strokes(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }

    try {
        ManifestWriter man(cfg);
        if (!cfg.surface_path.empty()) man.add_input(cfg.surface_path);
        if (!cfg.strokes_path.empty()) man.add_input(cfg.strokes_path);

        MapContext ctx(surf, cfg);
        ctx.scaled = scale_to_workspace(strokes, cfg.workspace, cfg.explicit_scale);

        const fs::path root = fs::path(cfg.out_dir) / "map";
        bool any_failed = false;
        for (Method m : cfg.methods) {
            const std::string name = method_name(m);
            try {
                MappingDiagnostics diag;
                const auto t0 = std::chrono::steady_clock::now();
                const MappedStrokes mapped = ctx.run(m, &diag);
                const double dt = seconds_since(t0);
                const DeformationReport rep =
                    compute_report(m, ctx.scaled, mapped, dt, &diag);

                const fs::path dir = root / name;
                fs::create_directories(dir);
                save_mapped_json((dir / "strokes3d.json").string(), mapped);
                man.add_output((dir / "strokes3d.json").string());
                emit(man, (dir / "local_errors.csv").string(), local_errors_csv(rep));
                emit(man, (dir / "global_errors.csv").string(), global_errors_csv(rep));
                json summary = report_json(rep);
                summary["format"] = kReportFormatVersion;
                summary["duration_seconds"] = rep.duration_seconds;
                emit(man, (dir / "summary.json").string(), summary.dump(2) + "\n");
                man.add_duration("map." + name, dt);
            } catch (const Error& e) {
                any_failed = true;
                man.add_failure("map." + name, e.what());
                std::cerr << "method " << name << " failed: " << e.what() << "\n";
            }
        }
        if (ctx.sampling_seconds > 0) man.add_duration("sampling", ctx.sampling_seconds);
        if (ctx.unfold_seconds > 0) man.add_duration("unfold", ctx.unfold_seconds);
        fs::create_directories(cfg.out_dir);
        man.write(cfg.out_dir);
        return any_failed ? kExitFailure : kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
}

// ---------------------------------------------------------------------------
// trajectory

int cmd_trajectory(const PipelineConfig& cfg) {
    ResolvedSurface surf{};
    StrokeSet2D strokes;
    try {
        surf = resolve_surface(cfg);
        strokes = resolve_strokes(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }

    try {
        ManifestWriter man(cfg);
        if (!cfg.surface_path.empty()) man.add_input(cfg.surface_path);
        if (!cfg.strokes_path.empty()) man.add_input(cfg.strokes_path);
        const Method method = cfg.methods.front();

        // One pen per color: each group is mapped as its own chain and gets
        // its own trajectory file.
        std::vector<std::string> order;
        std::map<std::string, StrokeSet2D> groups;
        for (const auto& s : strokes.strokes) {
            if (!groups.count(s.color)) order.push_back(s.color);
            groups[s.color].strokes.push_back(s);
        }

        const fs::path dir = fs::path(cfg.out_dir) / "trajectory";
        fs::create_directories(dir);
        json summary;
        summary["format"] = kTrajectoryFormatVersion;
        summary["method"] = method_name(method);
        summary["colors"] = json::array();
        std::string disc_csv = "color,index,angle\n";
        bool any_failed = false;

        for (const std::string& color : order) {
            const std::string tag = sanitize_tag(color);
            try {
                MapContext ctx(surf, cfg);
                ctx.scaled =
                    scale_to_workspace(groups[color], cfg.workspace, cfg.explicit_scale);
                const auto t0 = std::chrono::steady_clock::now();
                const MappedStrokes mapped = ctx.run(method, nullptr);
                const SurfacePath path = sequence_strokes(mapped);
                const PoseTrajectory raw = attach_poses(path, cfg.standoff);
                const PoseTrajectory dense =
                    densify_slerp(raw, cfg.max_step_angle, cfg.max_step_dist);
                const double dt = seconds_since(t0);

                const auto jumps = discontinuity_report(dense, cfg.max_step_angle);
                for (const auto& jump : jumps)
                    disc_csv += tag + "," + std::to_string(jump.index) + "," +
                                fmt17(jump.angle) + "\n";

                json doc;
                doc["format"] = kTrajectoryFormatVersion;
                doc["tool"] = kToolVersion;
                doc["color"] = color;
                doc["method"] = method_name(method);
                doc["poses"] = json::array();
                for (const auto& p : dense) doc["poses"].push_back(pose_json(p));
                emit(man, (dir / ("trajectory_" + tag + ".json")).string(),
                     doc.dump(2) + "\n");
                emit(man, (dir / ("trajectory_" + tag + ".csv")).string(),
                     trajectory_csv(dense));
                man.add_duration("trajectory." + tag, dt);

                json c;
                c["color"] = color;
                c["poses_raw"] = raw.size();
                c["poses_densified"] = dense.size();
                c["discontinuities"] = jumps.size();
                summary["colors"].push_back(c);
            } catch (const Error& e) {
                any_failed = true;
                man.add_failure("trajectory." + tag, e.what());
                std::cerr << "color '" << color << "' failed: " << e.what() << "\n";
            }
        }
        emit(man, (dir / "discontinuities.csv").string(), disc_csv);
        emit(man, (dir / "summary.json").string(), summary.dump(2) + "\n");
        fs::create_directories(cfg.out_dir);
        man.write(cfg.out_dir);
        return any_failed ? kExitFailure : kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
}

// ---------------------------------------------------------------------------
// recover

namespace {

PoseTrajectory load_trajectory_json(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("cannot read file: " + path + " (invalid JSON: " + e.what() + ")");
    }
    if (!doc.contains("poses") || !doc.at("poses").is_array())
        throw Error("cannot read file: " + path + " (no poses array)");
    PoseTrajectory traj;
    for (const auto& o : doc.at("poses")) traj.push_back(pose_from_json(o));
    return traj;
}

std::vector<Vec3> load_measured(const std::string& path) {
    std::vector<Vec3> out;
    if (fs::path(path).extension() == ".json") {
        json doc;
        try {
            doc = json::parse(read_file(path));
        } catch (const std::exception& e) {
            throw Error("cannot read file: " + path + " (invalid JSON: " + e.what() + ")");
        }
        const json& arr = doc.is_array() ? doc : doc.at("points");
        for (const auto& p : arr) out.push_back(vec3_from(p, "measured point"));
        return out;
    }
    const PointCloud pc = load_cloud_xyz(path);
    return pc.points;
}

}  // namespace

int cmd_recover(const PipelineConfig& cfg, const std::string& planned_path,
                const std::string& measured_path) {
    try {
        if (!(cfg.threshold > 0.0)) {
            std::cerr << "error: threshold must be positive\n";
            return kExitBadInput;
        }
        const PoseTrajectory planned = load_trajectory_json(planned_path);
        const std::vector<Vec3> measured = load_measured(measured_path);

        RecoveryPlan plan;
        try {
            plan = detect_and_recover(planned, measured, cfg.threshold, cfg.lift);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitBadInput;  // length mismatch is an input-shape problem
        }

        ManifestWriter man(cfg);
        man.add_input(planned_path);
        man.add_input(measured_path);
        const fs::path dir = fs::path(cfg.out_dir) / "recover";
        fs::create_directories(dir);

        json doc;
        doc["format"] = kTrajectoryFormatVersion;
        doc["tool"] = kToolVersion;
        doc["threshold"] = cfg.threshold;
        doc["lift"] = cfg.lift;
        doc["skip_events"] = plan.skip_events;
        doc["lift_segments"] = plan.lift_segments;
        doc["poses"] = json::array();
        for (const auto& ap : plan.poses) {
            json o = pose_json(ap.pose);
            o["status"] = status_name(ap.status);
            doc["poses"].push_back(o);
        }
        emit(man, (dir / "recovery.json").string(), doc.dump(2) + "\n");

        std::string csv = "index,deviation,above_threshold\n";
        for (std::size_t i = 0; i < plan.deviations.size(); ++i)
            csv += std::to_string(i) + "," + fmt17(plan.deviations[i]) + "," +
                   (plan.deviations[i] > cfg.threshold ? "1" : "0") + "\n";
        emit(man, (dir / "deviations.csv").string(), csv);

        fs::create_directories(cfg.out_dir);
        man.write(cfg.out_dir);
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
}

// ---------------------------------------------------------------------------
// template

int cmd_template(const PipelineConfig& cfg) {
    ResolvedSurface surf{};
    try {
        surf = resolve_surface(cfg);
        if (surf.is_cloud) throw Error("template sampling requires a mesh surface");
        if (mesh_bbox(surf.mesh).contains(cfg.sensor_pos))
            throw Error("sensor position lies inside the surface bounding box");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }

    try {
        ManifestWriter man(cfg);
        if (!cfg.surface_path.empty()) man.add_input(cfg.surface_path);
        const fs::path dir = fs::path(cfg.out_dir) / "template";
        fs::create_directories(dir);
        try {
            const auto t0 = std::chrono::steady_clock::now();
            const auto samples =
                sample_partial_view(surf.mesh, cfg.sensor_pos, cfg.template_count, cfg.seed);
            man.add_duration("template", seconds_since(t0));
            const std::string ply = (dir / "template.ply").string();
            save_samples_ply(ply, samples);
            man.add_output(ply);
        } catch (const Error& e) {
            man.add_failure("template", e.what());
            std::cerr << "template failed: " << e.what() << "\n";
            fs::create_directories(cfg.out_dir);
            man.write(cfg.out_dir);
            return kExitFailure;
        }
        fs::create_directories(cfg.out_dir);
        man.write(cfg.out_dir);
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
}

// ---------------------------------------------------------------------------
// bench

namespace {

struct BenchCell {
    std::string surface_label;
    PipelineConfig cfg;  // per-cell settings derived from the base config
};

// The in-repo analytic suite. Chart cells run on a stroke-pitch-aligned
// tessellation so chart vertices coincide with drawn points; sample-snapping
// cells run on an unaligned pitch so snap error reflects sample density
// rather than grid coincidence. Closed surfaces keep the chart methods in
// the table as recorded failures.
std::vector<BenchCell> builtin_suite(const PipelineConfig& base) {
    std::vector<BenchCell> cells;
    auto with = [&](const std::string& label, json shape, std::vector<Method> methods,
                    std::size_t samples) {
        BenchCell c;
        c.surface_label = label;
        c.cfg = base;
        c.cfg.surface_path.clear();
        c.cfg.surface_shape = std::move(shape);
        c.cfg.strokes_builtin = json::object();
        c.cfg.strokes_path.clear();
        c.cfg.methods = std::move(methods);
        c.cfg.samples = samples;
        c.cfg.workspace = Box2{{-40.0, -40.0}, {40.0, 40.0}};
        c.cfg.start_point.reset();
        c.cfg.start_normal.reset();
        c.cfg.anchor.reset();
        c.cfg.pins.reset();
        return c;
    };
    const std::vector<Method> all = {Method::Project, Method::TransportSnap,
                                     Method::TransportFit, Method::ChartSnap,
                                     Method::ChartInterp};
    const std::vector<Method> transport = {Method::TransportSnap, Method::TransportFit};
    const std::vector<Method> charts = {Method::ChartSnap, Method::ChartInterp};

    {
        BenchCell c = with("plane", {{"name", "plane"}, {"size_x", 100.0},
                                     {"size_y", 100.0}, {"pitch", 1.0}},
                           all, 20'000);
        // Pins on one edge keep the unfolded chart axis-aligned with the
        // drawing so the chart methods see the same lattice the others do.
        c.cfg.pins = std::make_pair(0, 100 * 101);  // (-50,-50) and (50,-50)
        cells.push_back(std::move(c));
    }
    // The box needs denser sampling than the plane: a snap-transport step
    // advancing about one nearest-neighbor spacing can otherwise stall on
    // the sample it just left.
    cells.push_back(with("box", {{"name", "box"}, {"size_x", 100.0}, {"size_y", 100.0},
                                 {"height", 50.0}},
                         all, 200'000));
    {
        BenchCell c = with("cylinder", {{"name", "half-cylinder"}, {"radius", 50.0},
                                        {"length", 100.0}, {"pitch", 0.73}},
                           {Method::Project, Method::TransportSnap, Method::TransportFit},
                           1'000'000);
        cells.push_back(c);
        c.cfg.samples = 100'000;
        c.cfg.methods = transport;
        cells.push_back(std::move(c));
    }
    cells.push_back(with("cylinder", {{"name", "half-cylinder"}, {"radius", 50.0},
                                      {"length", 100.0}, {"pitch", 0.5}},
                         charts, 0));
    {
        BenchCell c = with("sphere", {{"name", "sphere"}, {"radius", 50.0}, {"rings", 48},
                                      {"segments", 96}},
                           all, 200'000);
        c.cfg.workspace = Box2{{-30.0, -30.0}, {30.0, 30.0}};
        cells.push_back(std::move(c));
    }
    return cells;
}

std::vector<BenchCell> cells_from_manifest(const PipelineConfig& base,
                                           const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error("cannot read file: " + path + " (invalid JSON: " + e.what() + ")");
    }
    const json cells_json = doc.is_array() ? doc : doc.value("cells", json::array());
    if (!cells_json.is_array() || cells_json.empty())
        throw Error("benchmark manifest is empty: " + path);
    std::vector<BenchCell> cells;
    for (const auto& cj : cells_json) {
        json merged = base.raw.is_object() ? base.raw : json::object();
        for (auto it = cj.begin(); it != cj.end(); ++it) merged[it.key()] = it.value();
        BenchCell c;
        c.cfg = config_from_json(merged, path);
        c.cfg.out_dir = base.out_dir;
        c.cfg.seed = base.seed;  // the run's seed governs every cell
        c.surface_label = cj.value("label", std::string());
        if (c.surface_label.empty()) {
            c.surface_label = !c.cfg.surface_path.empty()
                                  ? fs::path(c.cfg.surface_path).stem().string()
                                  : c.cfg.surface_shape.value("name", "surface");
        }
        cells.push_back(std::move(c));
    }
    return cells;
}

struct BenchRow {
    std::string surface, method, status, error;
    std::size_t samples = 0;
    DeformationReport rep;
    double prep_seconds = 0.0, map_seconds = 0.0;
};

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out =
        "surface,method,samples,status,strokes,points,local_mean_signed,local_mean_abs,"
        "local_max_abs,global_mean_signed,global_mean_abs,global_max_abs,global_pairs,"
        "flagged,fallbacks,bridge_misses,error\n";
    for (const auto& r : rows) {
        out += r.surface + "," + r.method + "," + std::to_string(r.samples) + "," + r.status +
               ",";
        if (r.status == "ok") {
            out += std::to_string(r.rep.stroke_count) + "," +
                   std::to_string(r.rep.point_count) + ",";
            out += fmt17(r.rep.local_mean_signed) + "," + fmt17(r.rep.local_mean_abs) + "," +
                   fmt17(r.rep.local_max_abs) + ",";
            out += fmt17(r.rep.global_mean_signed) + "," + fmt17(r.rep.global_mean_abs) + "," +
                   fmt17(r.rep.global_max_abs) + ",";
            out += std::to_string(r.rep.global.size()) + "," +
                   std::to_string(r.rep.flagged_points) + "," +
                   std::to_string(r.rep.plane_fit_fallbacks) + "," +
                   std::to_string(r.rep.bridge_misses) + ",";
        } else {
            out += ",,,,,,,,,,,,";
        }
        out += "\"" + r.error + "\"\n";
    }
    return out;
}

}  // namespace

int cmd_bench(const PipelineConfig& cfg, const std::string& manifest_path) {
    std::vector<BenchCell> cells;
    try {
        cells = manifest_path.empty() ? builtin_suite(cfg)
                                      : cells_from_manifest(cfg, manifest_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }

    try {
        ManifestWriter man(cfg);
        if (!manifest_path.empty()) man.add_input(manifest_path);
        std::vector<BenchRow> rows;

        for (const auto& cell : cells) {
            ResolvedSurface surf{};
            StrokeSet2D strokes;
            std::string cell_error;
            try {
                surf = resolve_surface(cell.cfg);
                strokes = resolve_strokes(cell.cfg);
            } catch (const Error& e) {
                cell_error = e.what();
            }
            MapContext ctx(surf, cell.cfg);
            if (cell_error.empty()) {
                try {
                    ctx.scaled =
                        scale_to_workspace(strokes, cell.cfg.workspace,
                                           cell.cfg.explicit_scale);
                } catch (const Error& e) {
                    cell_error = e.what();
                }
            }
            for (Method m : cell.cfg.methods) {
                BenchRow row;
                row.surface = cell.surface_label;
                row.method = method_name(m);
                row.samples = uses_samples(m) ? cell.cfg.samples : 0;
                if (!cell_error.empty()) {
                    row.status = "failed";
                    row.error = cell_error;
                    rows.push_back(std::move(row));
                    continue;
                }
                try {
                    MappingDiagnostics diag;
                    const auto t0 = std::chrono::steady_clock::now();
                    const MappedStrokes mapped = ctx.run(m, &diag);
                    row.map_seconds = seconds_since(t0);
                    row.rep = compute_report(m, ctx.scaled, mapped, row.map_seconds, &diag);
                    row.status = "ok";
                } catch (const Error& e) {
                    row.status = "failed";
                    row.error = e.what();
                }
                row.prep_seconds = ctx.sampling_seconds + ctx.unfold_seconds;
                rows.push_back(std::move(row));
            }
        }

        const fs::path dir = fs::path(cfg.out_dir) / "bench";
        fs::create_directories(dir);
        emit(man, (dir / "report.csv").string(), bench_csv(rows));

        json doc;
        doc["format"] = kReportFormatVersion;
        doc["seed"] = cfg.seed;
        doc["rows"] = json::array();
        for (const auto& r : rows) {
            json o;
            o["surface"] = r.surface;
            o["method"] = r.method;
            o["samples"] = r.samples;
            o["status"] = r.status;
            if (r.status == "ok")
                o["metrics"] = report_json(r.rep);
            else
                o["error"] = r.error;
            doc["rows"].push_back(o);
        }
        emit(man, (dir / "report.json").string(), doc.dump(2) + "\n");

        // Timings live apart from the report so repeat runs byte-match.
        std::string timings = "surface,method,samples,prep_seconds,map_seconds\n";
        for (const auto& r : rows)
            timings += r.surface + "," + r.method + "," + std::to_string(r.samples) + "," +
                       fmt17(r.prep_seconds) + "," + fmt17(r.map_seconds) + "\n";
        write_atomic((dir / "timings.csv").string(), timings);

        for (const auto& r : rows)
            if (r.status != "ok") man.add_failure("bench." + r.surface + "." + r.method,
                                                  r.error);
        fs::create_directories(cfg.out_dir);
        man.write(cfg.out_dir);
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
}

}  // namespace strokemap
