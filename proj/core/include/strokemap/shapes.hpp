#pragma once

#include "strokemap/stroke.hpp"
#include "strokemap/surface.hpp"

// Built-in analytic benchmark surfaces and drawings. All generators are
// deterministic; grid vertices land on exact pitch multiples so strokes laid
// out on the same pitch coincide with vertices bit-for-bit.
namespace strokemap::shapes {

// Rectangle [-size_x/2, size_x/2] x [-size_y/2, size_y/2] at z = 0.
// Trailing slivers are dropped when pitch does not divide the size.
TriangleMesh plane(double size_x, double size_y, double pitch);

// Closed axis-aligned box, x/y centered on the origin, z in [0, height].
TriangleMesh box(double size_x, double size_y, double height);

// Half-pipe shell: axis along x in [-length/2, length/2], arc phi in [0, pi],
// (y, z) = radius * (cos phi, sin phi). Rows sit at exact arc-length
// multiples of `pitch` measured from the phi = 0 rim.
struct HalfCylinder {
    TriangleMesh mesh;
    double radius = 0, length = 0, pitch = 0;
    int cols = 0, rows = 0;  // vertex grid: cols along the axis, rows along the arc

    int vertex_index(int col, int row) const { return col * rows + row; }
    double arc_max() const { return pitch * double(rows - 1); }
    Vec3 point(double x, double arc) const;    // analytic surface point
    Vec3 normal(double arc) const;             // outward radial
    // Chart pins across the straight phi = 0 rim. The unrolled chart runs
    // u along +x from the first pin and v = -arc, so the shell occupies
    // v in [-arc_max, 0] below the rim.
    std::pair<int, int> chart_pins() const;
};

HalfCylinder half_cylinder(double radius, double length, double pitch);

// Spherical cap from the top pole down to polar angle pi/2 (a dome).
TriangleMesh dome(double radius, int rings, int segments);

// Closed sphere (no boundary).
TriangleMesh sphere(double radius, int rings, int segments);

// Grid drawing: lines_y horizontal strokes bottom-up (ids h0..), then lines_x
// vertical strokes left-to-right (ids v0..), each with points_per_stroke
// points. The first stroke starts at box.min.
StrokeSet2D lattice(const Box2& box, int lines_x, int lines_y, int points_per_stroke);

StrokeSet2D circle(double radius, int points);

}  // namespace strokemap::shapes
