#pragma once

#include <string>
#include <vector>

#include "strokemap/surface.hpp"

namespace strokemap {

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty when the file carries none

    bool has_normals() const { return !normals.empty(); }
};

// Triangulates quads and larger polygons as fans. Throws Error with the
// offending path on unreadable or malformed input.
TriangleMesh load_mesh_obj(const std::string& path);
TriangleMesh load_mesh_ply(const std::string& path);
TriangleMesh load_mesh(const std::string& path);  // dispatch on extension

PointCloud load_cloud_xyz(const std::string& path);  // "x y z [nx ny nz]" per line
PointCloud load_cloud_ply(const std::string& path);
PointCloud load_cloud(const std::string& path);

// ASCII PLY with per-vertex normals.
void save_samples_ply(const std::string& path, const std::vector<SurfaceSample>& samples);

}  // namespace strokemap
