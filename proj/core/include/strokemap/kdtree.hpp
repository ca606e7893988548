#pragma once

#include <cstddef>
#include <vector>

#include "strokemap/geom.hpp"

namespace strokemap {

// Exact nearest-neighbor index over 3D points. Results are identical to a
// linear scan with lexicographic (distance^2, insertion index) ordering:
// distance ties always resolve to the earlier-inserted point.
class SpatialIndex {
public:
    SpatialIndex() = default;
    explicit SpatialIndex(std::vector<Vec3> points) { build(std::move(points)); }

    void build(std::vector<Vec3> points);

    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }
    const Vec3& point(std::size_t i) const { return pts_[i]; }

    // Index of the exact nearest point.
    std::size_t nearest(const Vec3& q) const;

    // k nearest indices, ascending by (distance^2, index). k > size() returns all.
    std::vector<std::size_t> k_nearest(const Vec3& q, std::size_t k) const;

    // All indices within radius r (inclusive), ascending by (distance^2, index).
    std::vector<std::size_t> radius(const Vec3& q, double r) const;

private:
    struct Node {
        int axis = -1;          // -1 marks a leaf
        double split = 0.0;
        std::size_t begin = 0, end = 0;  // leaf range into order_
        int left = -1, right = -1;
    };

    int build_range(std::size_t begin, std::size_t end);

    std::vector<Vec3> pts_;
    std::vector<std::size_t> order_;  // permutation, leaves index into this
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr std::size_t kLeafSize = 16;
};

}  // namespace strokemap
