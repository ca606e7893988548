#include <doctest.h>

#include <cmath>
#include <set>
#include <utility>

#include "strokemap/shapes.hpp"
#include "strokemap/surface.hpp"

using namespace strokemap;

TEST_CASE("plane grid puts vertices on exact pitch multiples") {
    const TriangleMesh m = shapes::plane(100, 100, 1.0);
    REQUIRE(m.vertices.size() == 101 * 101);
    CHECK(m.faces.size() == 100 * 100 * 2);
    // x-major layout: v(i,j) = i*(ny+1)+j.
    CHECK(m.vertices[0] == Vec3(-50.0, -50.0, 0.0));
    CHECK(m.vertices[100 * 101] == Vec3(50.0, -50.0, 0.0));
    CHECK(m.vertices[100] == Vec3(-50.0, 50.0, 0.0));
    CHECK(m.vertices[52 * 101 + 37] == Vec3(2.0, -13.0, 0.0));
}

TEST_CASE("box is closed with outward faces") {
    const TriangleMesh m = shapes::box(100, 100, 50);
    REQUIRE(m.vertices.size() == 8);
    REQUIRE(m.faces.size() == 12);
    const Vec3 center(0, 0, 25);
    for (int f = 0; f < 12; ++f)
        CHECK(face_normal(m, f).dot(face_centroid(m, f) - center) > 0.0);
    CHECK(boundary_loops(m).empty());
}

TEST_CASE("half-cylinder rows sit at exact arc multiples") {
    const auto hc = shapes::half_cylinder(50.0, 100.0, 0.5);
    CHECK(hc.rows == 315);
    CHECK(hc.cols == 201);
    CHECK(hc.arc_max() == 157.0);
    // Generator vertices and the analytic point() agree bit-for-bit.
    for (int col : {0, 20, 200})
        for (int row : {0, 77, 314}) {
            const Vec3 v = hc.mesh.vertices[std::size_t(hc.vertex_index(col, row))];
            const double x = -50.0 + col * 0.5, arc = row * 0.5;
            CHECK(v == hc.point(x, arc));
        }
    // Outward radial normals, unit length.
    for (double arc : {0.0, 38.5, 78.5, 157.0}) {
        const Vec3 n = hc.normal(arc);
        CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(n.x() == 0.0);
        const Vec3 p = hc.point(0.0, arc);
        CHECK((Vec3(0.0, p.y(), p.z()) - 50.0 * n).norm() < 1e-12);
    }
    // Pins span the straight rim at arc 0.
    const auto pins = hc.chart_pins();
    CHECK(hc.mesh.vertices[std::size_t(pins.first)] == hc.point(-50.0, 0.0));
    CHECK(hc.mesh.vertices[std::size_t(pins.second)] == hc.point(50.0, 0.0));
}

TEST_CASE("half-cylinder points lie on the radius") {
    const auto hc = shapes::half_cylinder(50.0, 100.0, 0.73);
    for (const auto& v : hc.mesh.vertices) {
        CHECK(Vec3(0, v.y(), v.z()).norm() == doctest::Approx(50.0).epsilon(1e-12));
        CHECK(v.z() >= -1e-12);
    }
    CHECK(boundary_loops(hc.mesh).size() == 1);
}

TEST_CASE("dome is an open cap, sphere a closed surface") {
    const TriangleMesh dome = shapes::dome(50, 16, 32);
    CHECK(boundary_loops(dome).size() == 1);
    for (const auto& v : dome.vertices) CHECK(v.z() >= -1e-12);

    const TriangleMesh sph = shapes::sphere(50, 16, 32);
    CHECK(boundary_loops(sph).empty());
    // Euler characteristic of a closed genus-0 surface.
    std::set<std::pair<int, int>> edges;
    for (const auto& f : sph.faces)
        for (int a = 0; a < 3; ++a) {
            int u = f[std::size_t(a)], v = f[std::size_t((a + 1) % 3)];
            edges.insert({std::min(u, v), std::max(u, v)});
        }
    CHECK(int(sph.vertices.size()) - int(edges.size()) + int(sph.faces.size()) == 2);
}

TEST_CASE("lattice strokes interleave on a shared exact grid") {
    const Box2 box{{-40, -40}, {40, 40}};
    const StrokeSet2D set = shapes::lattice(box, 9, 9, 81);
    REQUIRE(set.strokes.size() == 18);
    CHECK(set.strokes[0].id == "h0");
    CHECK(set.strokes[8].id == "h8");
    CHECK(set.strokes[9].id == "v0");
    CHECK(set.strokes[17].id == "v8");
    for (const auto& s : set.strokes) REQUIRE(s.points.size() == 81);
    CHECK(set.strokes[0].points[0] == box.min);

    // Crossing coordinates must be bit-identical between the horizontal and
    // vertical stroke that share them; every downstream exact-zero
    // guarantee rides on this.
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) {
            const Vec2 h = set.strokes[std::size_t(j)].points[std::size_t(10 * i)];
            const Vec2 v = set.strokes[std::size_t(9 + i)].points[std::size_t(10 * j)];
            CHECK(h.x() == v.x());
            CHECK(h.y() == v.y());
        }
}

TEST_CASE("circle drawing has the requested point count on the radius") {
    const StrokeSet2D set = shapes::circle(30.0, 72);
    REQUIRE(set.strokes.size() == 1);
    REQUIRE(set.strokes[0].points.size() == 72);
    for (const auto& p : set.strokes[0].points)
        CHECK(p.norm() == doctest::Approx(30.0).epsilon(1e-12));
}
