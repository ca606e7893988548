#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strokemap/stroke.hpp"
#include "strokemap/surface.hpp"

namespace strokemap {

// How a 2D stroke point becomes a 3D surface point.
//   Project       ray-cast along a fixed direction, snap within first contact
//   TransportSnap rotate each step onto the local tangent, snap to a sample
//   TransportFit  like TransportSnap but re-attach via a local plane fit
//   ChartSnap     position in an unfolded uv chart, snap to nearest vertex
//   ChartInterp   position in an unfolded uv chart, interpolate in a face
enum class Method { Project, TransportSnap, TransportFit, ChartSnap, ChartInterp };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct MappingConfig {
    Box2 workspace{{-40.0, -40.0}, {40.0, 40.0}};
    double explicit_scale = 0.0;       // <= 0 means fit-to-workspace
    Vec3 direction{0.0, 0.0, -1.0};    // projection direction
    std::size_t sample_count = 1'000'000;
    std::uint64_t seed = 0;
    int k_neighbors = 10;              // plane-fit neighborhood
    std::optional<Vec3> start_point;   // transport chain start on the surface
    std::optional<Vec3> start_normal;
};

struct MappingDiagnostics {
    std::vector<std::pair<int, int>> flagged;  // (stroke, point): grazing or back-facing
    int plane_fit_fallbacks = 0;               // degenerate fits snapped directly instead
    int bridge_misses = 0;                     // pen-up travel points off the surface
};

// Uniform scale + translation placing the stroke bounding box centered and
// inscribed in the workspace. Strokes already filling the workspace pass
// through bit-identically. An explicit scale factor skips the fit.
StrokeSet2D scale_to_workspace(const StrokeSet2D& set, const Box2& workspace,
                               double explicit_scale = 0.0);

// Projects every 2D point along cfg.direction and snaps to the surface sample
// nearest the ray within the first-contact window, so a two-sided solid maps
// to the side facing the pen. Points whose snapped normal does not face the
// ray origin are flagged (the projection's known failure mode on walls).
// Throws "projection miss" when a stroke ray finds nothing within gating.
MappedStrokes map_projected(const StrokeSet2D& set, const SnapSurface& snap,
                            const MappingConfig& cfg, MappingDiagnostics* diag = nullptr);

// Single-point projection with the same first-contact rule; returns the
// snapped sample. Throws "projection miss" when the ray finds nothing.
SurfaceSample project_probe(const Vec2& p, const SnapSurface& snap, const Vec3& direction);

// Frame-transport mapping: each 2D step is rotated onto the tangent plane of
// the current surface point and advanced, then re-attached to the surface —
// TransportSnap snaps to the nearest sample, TransportFit projects onto a
// total-least-squares plane through the k nearest samples. Stroke gaps are
// bridged by transport over the interpolated 2D segment (pen up). Throws
// "left surface" when a point ends farther than gating from every sample.
MappedStrokes map_transport(const StrokeSet2D& set, const SnapSurface& snap,
                            const MappingConfig& cfg, Method which,
                            MappingDiagnostics* diag = nullptr);

// One path point of a sequenced drawing; `stroke` indexes the source stroke,
// -1 marks bridge travel.
struct PathPoint {
    Vec3 p = Vec3::Zero();
    Vec3 n = Vec3::Zero();
    bool pen_down = true;
    int stroke = -1;
};

using SurfacePath = std::vector<PathPoint>;

// Flattens mapped strokes and their bridges into one ordered path.
SurfacePath sequence_strokes(const MappedStrokes& mapped);

// 2D bridge between consecutive strokes, interpolated at the mean pen-down
// segment length of the preceding stroke. Interior points only.
std::vector<Vec2> bridge_points_2d(const Stroke2D& prev, const Stroke2D& next);

}  // namespace strokemap
