#pragma once

#include <optional>
#include <utility>

#include "strokemap/mapping.hpp"
#include "strokemap/stroke.hpp"
#include "strokemap/surface.hpp"

namespace strokemap {

// A mesh flattened to the uv plane by a least-squares conformal map.
struct ParamChart {
    TriangleMesh mesh;      // chart geometry, compacted to referenced vertices
    std::vector<Vec2> uv;   // one uv position per vertex
    double energy = 0.0;    // area-weighted conformal residual of the solution
    double scale = 1.0;     // median ratio of 3D to uv edge length
    double median_edge = 0.0;  // median 3D edge length
    int pin_a = -1, pin_b = -1;
};

// Flattens a disc-topology mesh: two pinned vertices fix translation,
// rotation and scale, every other vertex minimizes the conformal residual.
// Default pins are the two most distant boundary vertices. Non-disc input
// (closed, multiple boundaries, disconnected) is rejected with
// "requires disc segment"; non-manifold edges are rejected outright.
ParamChart lscm_unfold(const TriangleMesh& mesh,
                       std::optional<std::pair<int, int>> pins = std::nullopt);

// Places 2D strokes into chart uv space: the first stroke point lands on the
// chart vertex nearest `anchor` (which must lie within five median edge
// lengths of the chart), and millimeters convert to uv units through the
// chart's edge-length ratio unless an explicit ratio is given.
StrokeSet2D register_strokes_to_chart(const StrokeSet2D& set, const ParamChart& chart,
                                      const Vec3& anchor, double explicit_ratio = 0.0);

// Maps uv-space strokes through the chart: ChartSnap takes the 3D position
// of the nearest chart vertex, ChartInterp interpolates the containing
// face's corners barycentrically. Normals come from the containing face.
// A pen-down point outside every chart face raises "stroke exceeds chart";
// bridge travel points outside are skipped and counted.
MappedStrokes map_parameterized(const StrokeSet2D& uv_set, const ParamChart& chart,
                                Method which, MappingDiagnostics* diag = nullptr);

}  // namespace strokemap
