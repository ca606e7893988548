#include "strokemap/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace strokemap {
namespace {

struct Hit {
    double d2;
    std::size_t idx;
    bool operator<(const Hit& o) const {
        return d2 != o.d2 ? d2 < o.d2 : idx < o.idx;
    }
};

}  // namespace

void SpatialIndex::build(std::vector<Vec3> points) {
    if (points.empty()) throw Error("empty surface: spatial index needs at least one point");
    pts_ = std::move(points);
    order_.resize(pts_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.clear();
    nodes_.reserve(2 * pts_.size() / kLeafSize + 8);
    root_ = build_range(0, pts_.size());
}

int SpatialIndex::build_range(std::size_t begin, std::size_t end) {
    Node n;
    n.begin = begin;
    n.end = end;
    if (end - begin <= kLeafSize) {
        nodes_.push_back(n);
        return int(nodes_.size()) - 1;
    }
    Vec3 lo = pts_[order_[begin]], hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(pts_[order_[i]]);
        hi = hi.cwiseMax(pts_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) {  // all points coincide on every axis
        nodes_.push_back(n);
        return int(nodes_.size()) - 1;
    }
    const std::size_t mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return pts_[a][axis] < pts_[b][axis]; });
    n.axis = axis;
    n.split = pts_[order_[mid]][axis];
    const int self = int(nodes_.size());
    nodes_.push_back(n);
    const int l = build_range(begin, mid);
    const int r = build_range(mid, end);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
}

std::size_t SpatialIndex::nearest(const Vec3& q) const {
    auto best = k_nearest(q, 1);
    return best.front();
}

std::vector<std::size_t> SpatialIndex::k_nearest(const Vec3& q, std::size_t k) const {
    if (empty()) throw Error("empty surface: spatial index needs at least one point");
    k = std::min(k, pts_.size());
    if (k == 0) return {};
    std::vector<Hit> heap;  // max-heap on (d2, idx); top is the current worst
    heap.reserve(k + 1);
    auto consider = [&](std::size_t idx) {
        Hit h{(pts_[idx] - q).squaredNorm(), idx};
        if (heap.size() < k) {
            heap.push_back(h);
            std::push_heap(heap.begin(), heap.end());
        } else if (h < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = h;
            std::push_heap(heap.begin(), heap.end());
        }
    };
    // Near side first; prune on the worst kept distance. The far side is kept
    // when plane distance ties the bound: it can hide an equal-distance
    // earlier-inserted point.
    auto visit = [&](auto&& self, int ni) -> void {
        if (ni < 0) return;
        const Node& n = nodes_[ni];
        if (n.axis < 0) {
            for (std::size_t i = n.begin; i < n.end; ++i) consider(order_[i]);
            return;
        }
        const double delta = q[n.axis] - n.split;
        const int near = delta < 0 ? n.left : n.right;
        const int far = delta < 0 ? n.right : n.left;
        self(self, near);
        if (heap.size() < k || delta * delta <= heap.front().d2) self(self, far);
    };
    visit(visit, root_);
    std::sort(heap.begin(), heap.end());
    std::vector<std::size_t> out(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].idx;
    return out;
}

std::vector<std::size_t> SpatialIndex::radius(const Vec3& q, double r) const {
    if (empty()) throw Error("empty surface: spatial index needs at least one point");
    const double r2 = r * r;
    std::vector<Hit> hits;
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        const int ni = stack.back();
        stack.pop_back();
        if (ni < 0) continue;
        const Node& n = nodes_[ni];
        if (n.axis < 0) {
            for (std::size_t i = n.begin; i < n.end; ++i) {
                const std::size_t idx = order_[i];
                const double d2 = (pts_[idx] - q).squaredNorm();
                if (d2 <= r2) hits.push_back({d2, idx});
            }
            continue;
        }
        const double delta = q[n.axis] - n.split;
        if (delta <= r) stack.push_back(n.left);
        if (-delta <= r) stack.push_back(n.right);
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::size_t> out(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) out[i] = hits[i].idx;
    return out;
}

}  // namespace strokemap
