#include "strokemap/stroke_io.hpp"

#include <fstream>

#include <json.hpp>

namespace strokemap {
namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read file: " + path + " (not found or unreadable)");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("cannot read file: " + path + " (" + e.what() + ")");
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write file: " + path);
}

json stroke3d_to_json(const Stroke3D& s) {
    json pts = json::array();
    for (const auto& pt : s.points)
        pts.push_back({{"p", {pt.p.x(), pt.p.y(), pt.p.z()}},
                       {"n", {pt.n.x(), pt.n.y(), pt.n.z()}},
                       {"pen_down", pt.pen_down}});
    return {{"id", s.id}, {"color", s.color}, {"points", std::move(pts)}};
}

Stroke3D stroke3d_from_json(const json& j) {
    Stroke3D s;
    s.id = j.value("id", "");
    s.color = j.value("color", "");
    for (const auto& pt : j.at("points")) {
        StrokePoint3D p;
        const auto& pp = pt.at("p");
        const auto& nn = pt.at("n");
        p.p = Vec3(pp.at(0).get<double>(), pp.at(1).get<double>(), pp.at(2).get<double>());
        p.n = Vec3(nn.at(0).get<double>(), nn.at(1).get<double>(), nn.at(2).get<double>());
        p.pen_down = pt.value("pen_down", true);
        s.points.push_back(p);
    }
    return s;
}

}  // namespace

StrokeSet2D parse_strokes_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error("cannot read file: " + origin + " (" + e.what() + ")");
    }
    if (!j.contains("strokes") || !j["strokes"].is_array())
        throw Error("cannot read file: " + origin + " (missing \"strokes\" array)");
    StrokeSet2D set;
    int idx = 0;
    for (const auto& js : j["strokes"]) {
        Stroke2D s;
        s.id = js.value("id", "s" + std::to_string(idx));
        s.color = js.value("color", "");
        if (!js.contains("points") || !js["points"].is_array())
            throw Error("cannot read file: " + origin + " (stroke without points)");
        for (const auto& p : js["points"]) {
            if (!p.is_array() || p.size() < 2)
                throw Error("cannot read file: " + origin + " (point is not [x, y])");
            s.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        }
        if (s.points.empty())
            throw Error("cannot read file: " + origin + " (empty stroke)");
        set.strokes.push_back(std::move(s));
        ++idx;
    }
    if (set.strokes.empty()) throw Error("cannot read file: " + origin + " (no strokes)");
    return set;
}

StrokeSet2D load_strokes_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read file: " + path + " (not found or unreadable)");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_strokes_json(text, path);
}

void save_strokes_json(const std::string& path, const StrokeSet2D& set) {
    json strokes = json::array();
    for (const auto& s : set.strokes) {
        json pts = json::array();
        for (const auto& p : s.points) pts.push_back({p.x(), p.y()});
        json js = {{"id", s.id}, {"points", std::move(pts)}};
        if (!s.color.empty()) js["color"] = s.color;
        strokes.push_back(std::move(js));
    }
    write_json_file(path, json{{"strokes", std::move(strokes)}});
}

void save_mapped_json(const std::string& path, const MappedStrokes& mapped) {
    json strokes = json::array(), bridges = json::array();
    for (const auto& s : mapped.strokes) strokes.push_back(stroke3d_to_json(s));
    for (const auto& b : mapped.bridges) bridges.push_back(stroke3d_to_json(b));
    write_json_file(path, json{{"strokes", std::move(strokes)}, {"bridges", std::move(bridges)}});
}

MappedStrokes load_mapped_json(const std::string& path) {
    const json j = read_json_file(path);
    MappedStrokes m;
    for (const auto& js : j.at("strokes")) m.strokes.push_back(stroke3d_from_json(js));
    if (j.contains("bridges"))
        for (const auto& jb : j["bridges"]) m.bridges.push_back(stroke3d_from_json(jb));
    return m;
}

}  // namespace strokemap
