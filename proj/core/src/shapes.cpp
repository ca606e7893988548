#include "strokemap/shapes.hpp"

#include <cmath>
#include <numbers>

namespace strokemap::shapes {
namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TriangleMesh plane(double size_x, double size_y, double pitch) {
    if (pitch <= 0) throw Error("plane pitch must be positive");
    const int nx = int(std::floor(size_x / pitch + 1e-9));
    const int ny = int(std::floor(size_y / pitch + 1e-9));
    if (nx < 1 || ny < 1) throw Error("plane is smaller than one grid cell");
    TriangleMesh m;
    m.vertices.reserve(std::size_t(nx + 1) * (ny + 1));
    const double x0 = -size_x / 2.0, y0 = -size_y / 2.0;
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j)
            m.vertices.emplace_back(x0 + i * pitch, y0 + j * pitch, 0.0);
    auto v = [&](int i, int j) { return i * (ny + 1) + j; };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            m.faces.push_back({v(i, j), v(i + 1, j), v(i + 1, j + 1)});
            m.faces.push_back({v(i, j), v(i + 1, j + 1), v(i, j + 1)});
        }
    return m;
}

TriangleMesh box(double size_x, double size_y, double height) {
    const double hx = size_x / 2.0, hy = size_y / 2.0;
    TriangleMesh m;
    m.vertices = {
        {-hx, -hy, 0},      {hx, -hy, 0},      {hx, hy, 0},      {-hx, hy, 0},
        {-hx, -hy, height}, {hx, -hy, height}, {hx, hy, height}, {-hx, hy, height},
    };
    m.faces = {
        {0, 2, 1}, {0, 3, 2},  // bottom, normal -z
        {4, 5, 6}, {4, 6, 7},  // top, normal +z
        {0, 1, 5}, {0, 5, 4},  // y = -hy
        {1, 2, 6}, {1, 6, 5},  // x = +hx
        {2, 3, 7}, {2, 7, 6},  // y = +hy
        {3, 0, 4}, {3, 4, 7},  // x = -hx
    };
    return m;
}

Vec3 HalfCylinder::point(double x, double arc) const {
    const double phi = arc / radius;
    return {x, radius * std::cos(phi), radius * std::sin(phi)};
}

Vec3 HalfCylinder::normal(double arc) const {
    const double phi = arc / radius;
    return {0.0, std::cos(phi), std::sin(phi)};
}

std::pair<int, int> HalfCylinder::chart_pins() const {
    return {vertex_index(0, 0), vertex_index(cols - 1, 0)};
}

HalfCylinder half_cylinder(double radius, double length, double pitch) {
    if (radius <= 0 || length <= 0 || pitch <= 0)
        throw Error("half_cylinder dimensions must be positive");
    HalfCylinder c;
    c.radius = radius;
    c.length = length;
    c.pitch = pitch;
    const int ncol = int(std::floor(length / pitch + 1e-9));
    const int nrow = int(std::floor(kPi * radius / pitch + 1e-9));
    if (ncol < 1 || nrow < 1) throw Error("half_cylinder smaller than one grid cell");
    c.cols = ncol + 1;
    c.rows = nrow + 1;
    TriangleMesh& m = c.mesh;
    m.vertices.reserve(std::size_t(c.cols) * c.rows);
    const double x0 = -length / 2.0;
    for (int i = 0; i < c.cols; ++i)
        for (int k = 0; k < c.rows; ++k)
            m.vertices.push_back(c.point(x0 + i * pitch, k * pitch));
    for (int i = 0; i < ncol; ++i)
        for (int k = 0; k < nrow; ++k) {
            const int a = c.vertex_index(i, k), b = c.vertex_index(i + 1, k);
            const int d = c.vertex_index(i, k + 1), e = c.vertex_index(i + 1, k + 1);
            m.faces.push_back({a, d, b});  // outward (radial) winding
            m.faces.push_back({b, d, e});
        }
    return c;
}

TriangleMesh dome(double radius, int rings, int segments) {
    if (rings < 1 || segments < 3) throw Error("dome needs rings >= 1 and segments >= 3");
    TriangleMesh m;
    m.vertices.emplace_back(0, 0, radius);  // pole
    for (int r = 1; r <= rings; ++r) {
        const double phi = (kPi / 2.0) * double(r) / double(rings);
        for (int s = 0; s < segments; ++s) {
            const double th = 2.0 * kPi * double(s) / double(segments);
            m.vertices.emplace_back(radius * std::sin(phi) * std::cos(th),
                                    radius * std::sin(phi) * std::sin(th),
                                    radius * std::cos(phi));
        }
    }
    auto v = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
    for (int s = 0; s < segments; ++s) m.faces.push_back({0, v(1, s), v(1, s + 1)});
    for (int r = 1; r < rings; ++r)
        for (int s = 0; s < segments; ++s) {
            m.faces.push_back({v(r, s), v(r + 1, s), v(r + 1, s + 1)});
            m.faces.push_back({v(r, s), v(r + 1, s + 1), v(r, s + 1)});
        }
    return m;
}

TriangleMesh sphere(double radius, int rings, int segments) {
    if (rings < 2 || segments < 3) throw Error("sphere needs rings >= 2 and segments >= 3");
    TriangleMesh m;
    m.vertices.emplace_back(0, 0, radius);
    for (int r = 1; r < rings; ++r) {
        const double phi = kPi * double(r) / double(rings);
        for (int s = 0; s < segments; ++s) {
            const double th = 2.0 * kPi * double(s) / double(segments);
            m.vertices.emplace_back(radius * std::sin(phi) * std::cos(th),
                                    radius * std::sin(phi) * std::sin(th),
                                    radius * std::cos(phi));
        }
    }
    m.vertices.emplace_back(0, 0, -radius);
    const int south = int(m.vertices.size()) - 1;
    auto v = [&](int r, int s) { return 1 + (r - 1) * segments + (s % segments); };
    for (int s = 0; s < segments; ++s) m.faces.push_back({0, v(1, s), v(1, s + 1)});
    for (int r = 1; r + 1 < rings; ++r)
        for (int s = 0; s < segments; ++s) {
            m.faces.push_back({v(r, s), v(r + 1, s), v(r + 1, s + 1)});
            m.faces.push_back({v(r, s), v(r + 1, s + 1), v(r, s + 1)});
        }
    for (int s = 0; s < segments; ++s)
        m.faces.push_back({v(rings - 1, s + 1), v(rings - 1, s), south});
    return m;
}

StrokeSet2D lattice(const Box2& box, int lines_x, int lines_y, int points_per_stroke) {
    if (lines_x < 0 || lines_y < 0 || points_per_stroke < 2)
        throw Error("lattice needs at least two points per stroke");
    StrokeSet2D set;
    const Vec2 ext = box.extent();
    const double dx = ext.x() / double(points_per_stroke - 1);
    const double dy = ext.y() / double(points_per_stroke - 1);
    for (int i = 0; i < lines_y; ++i) {
        Stroke2D s;
        s.id = "h" + std::to_string(i);
        const double y = lines_y == 1 ? box.center().y()
                                      : box.min.y() + ext.y() * double(i) / double(lines_y - 1);
        for (int j = 0; j < points_per_stroke; ++j)
            s.points.emplace_back(box.min.x() + j * dx, y);
        set.strokes.push_back(std::move(s));
    }
    for (int i = 0; i < lines_x; ++i) {
        Stroke2D s;
        s.id = "v" + std::to_string(i);
        const double x = lines_x == 1 ? box.center().x()
                                      : box.min.x() + ext.x() * double(i) / double(lines_x - 1);
        for (int j = 0; j < points_per_stroke; ++j)
            s.points.emplace_back(x, box.min.y() + j * dy);
        set.strokes.push_back(std::move(s));
    }
    return set;
}

StrokeSet2D circle(double radius, int points) {
    if (points < 3) throw Error("circle needs at least 3 points");
    StrokeSet2D set;
    Stroke2D s;
    s.id = "circle";
    for (int j = 0; j < points; ++j) {
        const double th = 2.0 * kPi * double(j) / double(points);
        s.points.emplace_back(radius * std::cos(th), radius * std::sin(th));
    }
    set.strokes.push_back(std::move(s));
    return set;
}

}  // namespace strokemap::shapes
