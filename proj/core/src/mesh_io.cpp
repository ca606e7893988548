#include "strokemap/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

namespace strokemap {
namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw Error("cannot read file: " + path + " (" + why + ")");
}

// --- PLY ---------------------------------------------------------------

struct PlyProperty {
    std::string name;
    std::string type;       // scalar type, or element type for lists
    std::string count_type;  // non-empty marks a list property
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

struct PlyHeader {
    bool binary = false;
    std::vector<PlyElement> elements;
};

std::size_t scalar_size(const std::string& t, const std::string& path) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64") return 8;
    fail(path, "unknown ply scalar type '" + t + "'");
}

PlyHeader read_ply_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply") fail(path, "missing ply magic");
    PlyHeader h;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment" || tok == "obj_info" || tok.empty()) continue;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") h.binary = false;
            else if (fmt == "binary_little_endian") h.binary = true;
            else fail(path, "unsupported ply format '" + fmt + "'");
        } else if (tok == "element") {
            PlyElement e;
            ls >> e.name >> e.count;
            h.elements.push_back(e);
        } else if (tok == "property") {
            if (h.elements.empty()) fail(path, "property before element");
            std::string t;
            ls >> t;
            PlyProperty p;
            if (t == "list") {
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = t;
                ls >> p.name;
            }
            h.elements.back().props.push_back(p);
        } else if (tok == "end_header") {
            return h;
        } else {
            fail(path, "unexpected header token '" + tok + "'");
        }
    }
    fail(path, "unterminated ply header");
}

double read_binary_scalar(std::istream& in, const std::string& type, const std::string& path) {
    unsigned char buf[8];
    const std::size_t sz = scalar_size(type, path);
    if (!in.read(reinterpret_cast<char*>(buf), std::streamsize(sz)))
        fail(path, "truncated binary data");
    if (type == "float" || type == "float32") {
        float f;
        std::memcpy(&f, buf, 4);
        return double(f);
    }
    if (type == "double" || type == "float64") {
        double d;
        std::memcpy(&d, buf, 8);
        return d;
    }
    long long v = 0;  // little-endian integer assemble, sign-extend as needed
    for (std::size_t i = 0; i < sz; ++i) v |= (long long)(buf[i]) << (8 * i);
    const bool is_signed = type[0] != 'u';
    if (is_signed && sz < 8 && (buf[sz - 1] & 0x80)) v -= 1LL << (8 * sz);
    return double(v);
}

struct PlyData {
    std::vector<Vec3> positions;
    std::vector<Vec3> normals;
    bool has_normals = false;
    std::vector<std::vector<int>> polys;
};

PlyData read_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "not found or unreadable");
    const PlyHeader h = read_ply_header(in, path);
    PlyData d;
    for (const PlyElement& e : h.elements) {
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        if (is_vertex) {
            d.positions.reserve(e.count);
            for (const auto& p : e.props)
                if (p.name == "nx") d.has_normals = true;
        }
        for (std::size_t i = 0; i < e.count; ++i) {
            double x = 0, y = 0, z = 0, nx = 0, ny = 0, nz = 0;
            std::vector<int> poly;
            std::istringstream ascii_line;
            if (!h.binary) {
                std::string line;
                do {
                    if (!std::getline(in, line)) fail(path, "truncated ascii data");
                } while (line.find_first_not_of(" \t\r") == std::string::npos);
                ascii_line.str(line);
            }
            auto next_scalar = [&](const std::string& type) -> double {
                if (h.binary) return read_binary_scalar(in, type, path);
                double v;
                if (!(ascii_line >> v)) fail(path, "short ascii row");
                return v;
            };
            for (const PlyProperty& p : e.props) {
                if (!p.count_type.empty()) {
                    const int n = int(next_scalar(p.count_type));
                    for (int j = 0; j < n; ++j) {
                        const double v = next_scalar(p.type);
                        if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index"))
                            poly.push_back(int(v));
                    }
                } else {
                    const double v = next_scalar(p.type);
                    if (!is_vertex) continue;
                    if (p.name == "x") x = v;
                    else if (p.name == "y") y = v;
                    else if (p.name == "z") z = v;
                    else if (p.name == "nx") nx = v;
                    else if (p.name == "ny") ny = v;
                    else if (p.name == "nz") nz = v;
                }
            }
            if (is_vertex) {
                d.positions.emplace_back(x, y, z);
                if (d.has_normals) d.normals.emplace_back(nx, ny, nz);
            } else if (is_face && !poly.empty()) {
                d.polys.push_back(std::move(poly));
            }
        }
    }
    return d;
}

void fan_triangulate(const std::vector<std::vector<int>>& polys, std::size_t nverts,
                     const std::string& path, TriangleMesh& out) {
    for (const auto& poly : polys) {
        if (poly.size() < 3) continue;
        for (int v : poly)
            if (v < 0 || std::size_t(v) >= nverts) fail(path, "face index out of range");
        for (std::size_t i = 1; i + 1 < poly.size(); ++i)
            out.faces.push_back({poly[0], poly[i], poly[i + 1]});
    }
}

}  // namespace

TriangleMesh load_mesh_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "not found or unreadable");
    TriangleMesh m;
    std::vector<std::vector<int>> polys;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) fail(path, "malformed vertex line");
            m.vertices.emplace_back(x, y, z);
        } else if (tok == "f") {
            std::vector<int> poly;
            std::string ref;
            while (ls >> ref) {
                // "i", "i/t", "i/t/n", "i//n"; negative refs count from the end
                int idx = std::stoi(ref.substr(0, ref.find('/')));
                if (idx < 0) idx = int(m.vertices.size()) + idx; else idx -= 1;
                poly.push_back(idx);
            }
            if (poly.size() >= 3) polys.push_back(std::move(poly));
        }
    }
    fan_triangulate(polys, m.vertices.size(), path, m);
    if (m.empty()) fail(path, "no triangles");
    return m;
}

TriangleMesh load_mesh_ply(const std::string& path) {
    const PlyData d = read_ply(path);
    TriangleMesh m;
    m.vertices = d.positions;
    fan_triangulate(d.polys, m.vertices.size(), path, m);
    if (m.empty()) fail(path, "no triangles");
    return m;
}

TriangleMesh load_mesh(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "obj") return load_mesh_obj(path);
    if (ext == "ply") return load_mesh_ply(path);
    fail(path, "unsupported mesh format '." + ext + "'");
}

PointCloud load_cloud_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "not found or unreadable");
    PointCloud c;
    std::string line;
    bool normals_consistent = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[line.find_first_not_of(" \t")] == '#') continue;
        std::istringstream ls(line);
        double x, y, z, nx, ny, nz;
        if (!(ls >> x >> y >> z)) fail(path, "malformed xyz line");
        c.points.emplace_back(x, y, z);
        if (ls >> nx >> ny >> nz) c.normals.emplace_back(nx, ny, nz);
        else if (!c.normals.empty()) normals_consistent = false;
    }
    if (c.points.empty()) fail(path, "no points");
    if (!normals_consistent || (c.has_normals() && c.normals.size() != c.points.size()))
        fail(path, "normals present on some lines only");
    return c;
}

PointCloud load_cloud_ply(const std::string& path) {
    const PlyData d = read_ply(path);
    PointCloud c;
    c.points = d.positions;
    if (d.has_normals) c.normals = d.normals;
    if (c.points.empty()) fail(path, "no points");
    return c;
}

PointCloud load_cloud(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "xyz" || ext == "txt") return load_cloud_xyz(path);
    if (ext == "ply") return load_cloud_ply(path);
    fail(path, "unsupported point cloud format '." + ext + "'");
}

void save_samples_ply(const std::string& path, const std::vector<SurfaceSample>& samples) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << "ply\nformat ascii 1.0\nelement vertex " << samples.size()
        << "\nproperty double x\nproperty double y\nproperty double z\n"
           "property double nx\nproperty double ny\nproperty double nz\nend_header\n";
    char buf[256];
    for (const SurfaceSample& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g\n", s.p.x(), s.p.y(),
                      s.p.z(), s.n.x(), s.n.y(), s.n.z());
        out << buf;
    }
    if (!out) throw Error("cannot write file: " + path);
}

}  // namespace strokemap
