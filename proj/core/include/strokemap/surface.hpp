#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "strokemap/geom.hpp"
#include "strokemap/kdtree.hpp"

namespace strokemap {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    bool empty() const { return vertices.empty() || faces.empty(); }
};

struct Box3 {
    Vec3 min = Vec3::Zero(), max = Vec3::Zero();
    bool contains(const Vec3& p, double tol = 0.0) const {
        return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
    }
};

Box3 mesh_bbox(const TriangleMesh& m);
double face_area(const TriangleMesh& m, int f);
Vec3 face_normal(const TriangleMesh& m, int f);          // unit, winding order
Vec3 face_centroid(const TriangleMesh& m, int f);
double total_area(const TriangleMesh& m);

// Area-weighted mean of face centroids; the reference point for visibility.
Vec3 geometric_center(const TriangleMesh& m);

// Unit vertex normals, area-weighted average of incident face normals.
std::vector<Vec3> vertex_normals(const TriangleMesh& m);

// Merges vertices closer than `tol` and drops zero-area faces.
TriangleMesh clean_mesh(const TriangleMesh& m, double tol = 1e-9);

// Boundary loops as ordered vertex cycles. Throws on non-manifold edges.
std::vector<std::vector<int>> boundary_loops(const TriangleMesh& m);

// One surface point with its normal; `source` is the face index the point was
// drawn from (meshes) or the point index (clouds).
struct SurfaceSample {
    Vec3 p = Vec3::Zero();
    Vec3 n = Vec3::Zero();
    int source = -1;
};

// Area-uniform random samples, `count` draws with replacement over faces.
// Deterministic for a fixed seed. Normals are face normals.
std::vector<SurfaceSample> sample_mesh(const TriangleMesh& m, std::size_t count,
                                       std::uint64_t seed);

// Sensor-facing sampling weight for a face whose normal makes angle `theta`
// with the direction from the object center to the sensor. Sigmoid falloff,
// exactly 0 at theta = pi/2, clamped to 0 beyond.
double viewpoint_density(double theta);

// Samples allocated per face proportional to area * viewpoint_density, counts
// reconciled to exactly `count` by largest remainder. Back-facing faces get
// zero samples. Throws "no visible surface" when every weight is zero and
// rejects a sensor inside the mesh bounding box.
std::vector<SurfaceSample> sample_partial_view(const TriangleMesh& m, const Vec3& sensor_pos,
                                               std::size_t count, std::uint64_t seed);

// PCA normals from the k-nearest neighborhood of each point, oriented toward
// the viewpoint. A rank-deficient (collinear) neighborhood doubles k until it
// resolves; an unresolvable one throws "degenerate neighborhood".
std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, int k, const Vec3& viewpoint);

// Snap target for mapping: sample points (mesh vertices first, then random
// surface samples) behind an exact nearest-neighbor index. `gating` is the
// leave-surface radius, 5x the mean sample spacing.
struct SnapSurface {
    std::vector<SurfaceSample> samples;
    SpatialIndex index;
    double mean_spacing = 0.0;
    double gating = 0.0;

    const SurfaceSample& nearest(const Vec3& q) const { return samples[index.nearest(q)]; }
};

SnapSurface make_snap_surface(std::vector<SurfaceSample> samples);
SnapSurface snap_surface_from_mesh(const TriangleMesh& m, std::size_t sample_count,
                                   std::uint64_t seed);
SnapSurface snap_surface_from_cloud(const std::vector<Vec3>& points,
                                    const std::vector<Vec3>& normals);

}  // namespace strokemap
