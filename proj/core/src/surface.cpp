#include "strokemap/surface.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace strokemap {
namespace {

double unit_double(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace

Box3 mesh_bbox(const TriangleMesh& m) {
    if (m.vertices.empty()) throw Error("empty surface: mesh has no vertices");
    Box3 b{m.vertices.front(), m.vertices.front()};
    for (const Vec3& v : m.vertices) {
        b.min = b.min.cwiseMin(v);
        b.max = b.max.cwiseMax(v);
    }
    return b;
}

double face_area(const TriangleMesh& m, int f) {
    const auto& [a, b, c] = m.faces[f];
    return 0.5 * (m.vertices[b] - m.vertices[a]).cross(m.vertices[c] - m.vertices[a]).norm();
}

Vec3 face_normal(const TriangleMesh& m, int f) {
    const auto& [a, b, c] = m.faces[f];
    const Vec3 n = (m.vertices[b] - m.vertices[a]).cross(m.vertices[c] - m.vertices[a]);
    const double len = n.norm();
    if (len == 0.0) throw Error("zero-area face has no normal");
    return n / len;
}

Vec3 face_centroid(const TriangleMesh& m, int f) {
    const auto& [a, b, c] = m.faces[f];
    return (m.vertices[a] + m.vertices[b] + m.vertices[c]) / 3.0;
}

double total_area(const TriangleMesh& m) {
    double s = 0.0;
    for (int f = 0; f < int(m.faces.size()); ++f) s += face_area(m, f);
    return s;
}

Vec3 geometric_center(const TriangleMesh& m) {
    if (m.empty()) throw Error("empty surface: mesh has no faces");
    Vec3 acc = Vec3::Zero();
    double area = 0.0;
    for (int f = 0; f < int(m.faces.size()); ++f) {
        const double a = face_area(m, f);
        acc += a * face_centroid(m, f);
        area += a;
    }
    if (area == 0.0) throw Error("empty surface: mesh has zero total area");
    return acc / area;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& m) {
    std::vector<Vec3> acc(m.vertices.size(), Vec3::Zero());
    for (int f = 0; f < int(m.faces.size()); ++f) {
        const auto& [a, b, c] = m.faces[f];
        const Vec3 n = (m.vertices[b] - m.vertices[a]).cross(m.vertices[c] - m.vertices[a]);
        acc[a] += n;  // cross product length already carries 2*area weighting
        acc[b] += n;
        acc[c] += n;
    }
    for (Vec3& n : acc) {
        const double len = n.norm();
        if (len > 0.0) n /= len;
    }
    return acc;
}

TriangleMesh clean_mesh(const TriangleMesh& m, double tol) {
    // Quantized grid keyed dedup: vertices within tol collapse to the first seen.
    TriangleMesh out;
    std::vector<int> remap(m.vertices.size(), -1);
    std::map<std::tuple<long long, long long, long long>, int> grid;
    const double inv = 1.0 / std::max(tol, 1e-300);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const Vec3& v = m.vertices[i];
        const auto key = std::make_tuple(llround(v.x() * inv), llround(v.y() * inv),
                                         llround(v.z() * inv));
        auto [it, inserted] = grid.emplace(key, int(out.vertices.size()));
        if (inserted) out.vertices.push_back(v);
        remap[i] = it->second;
    }
    for (const auto& f : m.faces) {
        std::array<int, 3> g{remap[f[0]], remap[f[1]], remap[f[2]]};
        if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) continue;
        const Vec3 n = (out.vertices[g[1]] - out.vertices[g[0]])
                           .cross(out.vertices[g[2]] - out.vertices[g[0]]);
        if (0.5 * n.norm() <= 0.0) continue;  // zero-area sliver
        out.faces.push_back(g);
    }
    return out;
}

std::vector<std::vector<int>> boundary_loops(const TriangleMesh& m) {
    // Directed edge census: a boundary edge appears in exactly one face.
    std::map<std::pair<int, int>, int> count;
    for (const auto& f : m.faces) {
        for (int e = 0; e < 3; ++e) {
            const int a = f[e], b = f[(e + 1) % 3];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    for (const auto& [edge, c] : count)
        if (c > 2) throw Error("non-manifold edge in mesh");
    std::map<int, int> next;  // boundary half-edge successor, oriented with faces
    for (const auto& f : m.faces) {
        for (int e = 0; e < 3; ++e) {
            const int a = f[e], b = f[(e + 1) % 3];
            if (count[{std::min(a, b), std::max(a, b)}] == 1) {
                if (next.contains(b)) throw Error("non-manifold boundary vertex in mesh");
                next[b] = a;  // boundary traversal runs opposite the face winding
            }
        }
    }
    std::vector<std::vector<int>> loops;
    std::map<int, bool> used;
    for (const auto& [start, _] : next) {
        if (used[start]) continue;
        std::vector<int> loop;
        int v = start;
        do {
            loop.push_back(v);
            used[v] = true;
            auto it = next.find(v);
            if (it == next.end()) throw Error("open boundary chain in mesh");
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }
    return loops;
}

std::vector<SurfaceSample> sample_mesh(const TriangleMesh& m, std::size_t count,
                                       std::uint64_t seed) {
    if (m.empty()) throw Error("empty surface: mesh has no faces");
    std::vector<double> cdf(m.faces.size());
    double acc = 0.0;
    for (int f = 0; f < int(m.faces.size()); ++f) {
        acc += face_area(m, f);
        cdf[f] = acc;
    }
    if (acc == 0.0) throw Error("empty surface: mesh has zero total area");
    std::mt19937_64 rng(seed);
    std::vector<SurfaceSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = unit_double(rng) * acc;
        const int f = std::min<int>(
            int(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
            int(m.faces.size()) - 1);
        const auto& [a, b, c] = m.faces[f];
        double r1 = std::sqrt(unit_double(rng)), r2 = unit_double(rng);
        const Vec3 p = (1.0 - r1) * m.vertices[a] + r1 * (1.0 - r2) * m.vertices[b] +
                       r1 * r2 * m.vertices[c];
        out.push_back({p, face_normal(m, f), f});
    }
    return out;
}

double viewpoint_density(double theta) {
    const double rho = 1.0 / (1.0 + std::exp(theta - std::numbers::pi / 2.0)) - 0.5;
    return std::max(0.0, rho);
}

std::vector<SurfaceSample> sample_partial_view(const TriangleMesh& m, const Vec3& sensor_pos,
                                               std::size_t count, std::uint64_t seed) {
    if (m.empty()) throw Error("empty surface: mesh has no faces");
    if (mesh_bbox(m).contains(sensor_pos))
        throw Error("sensor position lies inside the mesh bounding box");
    const Vec3 center = geometric_center(m);
    const Vec3 view = (sensor_pos - center).normalized();

    const std::size_t nf = m.faces.size();
    std::vector<double> w(nf);
    double total = 0.0;
    for (std::size_t f = 0; f < nf; ++f) {
        const double cosang = std::clamp(face_normal(m, int(f)).dot(view), -1.0, 1.0);
        w[f] = face_area(m, int(f)) * viewpoint_density(std::acos(cosang));
        total += w[f];
    }
    if (total == 0.0) throw Error("no visible surface from the sensor position");

    // Largest-remainder allocation so the counts sum to exactly `count`.
    std::vector<std::size_t> alloc(nf);
    std::vector<std::pair<double, std::size_t>> frac;
    std::size_t assigned = 0;
    for (std::size_t f = 0; f < nf; ++f) {
        const double share = double(count) * w[f] / total;
        alloc[f] = std::size_t(std::floor(share));
        assigned += alloc[f];
        if (w[f] > 0.0) frac.push_back({share - double(alloc[f]), f});
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; assigned < count && i < frac.size(); ++i, ++assigned)
        alloc[frac[i].second]++;

    std::mt19937_64 rng(seed);
    std::vector<SurfaceSample> out;
    out.reserve(count);
    for (std::size_t f = 0; f < nf; ++f) {
        const auto& [a, b, c] = m.faces[f];
        const Vec3 n = face_normal(m, int(f));
        for (std::size_t i = 0; i < alloc[f]; ++i) {
            double r1 = std::sqrt(unit_double(rng)), r2 = unit_double(rng);
            const Vec3 p = (1.0 - r1) * m.vertices[a] + r1 * (1.0 - r2) * m.vertices[b] +
                           r1 * r2 * m.vertices[c];
            out.push_back({p, n, int(f)});
        }
    }
    return out;
}

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points, int k, const Vec3& viewpoint) {
    const int n = int(points.size());
    if (n < 3) throw Error("degenerate neighborhood: normal estimation needs at least 3 points");
    SpatialIndex index(points);
    std::vector<Vec3> normals(points.size());
    for (int i = 0; i < n; ++i) {
        int kk = std::max(3, k);
        Vec3 normal = Vec3::Zero();
        for (;;) {
            const auto nbrs = index.k_nearest(points[i], std::size_t(std::min(kk, n)));
            Vec3 mean = Vec3::Zero();
            for (std::size_t j : nbrs) mean += points[j];
            mean /= double(nbrs.size());
            Mat3 cov = Mat3::Zero();
            for (std::size_t j : nbrs) {
                const Vec3 d = points[j] - mean;
                cov += d * d.transpose();
            }
            Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
            const Vec3 ev = eig.eigenvalues();  // ascending
            // Collinear neighborhoods leave the normal direction unconstrained.
            const bool degenerate = ev[2] <= 0.0 || ev[1] <= 1e-12 * ev[2];
            if (!degenerate) {
                normal = eig.eigenvectors().col(0);
                break;
            }
            if (kk >= n) throw Error("degenerate neighborhood: collinear points");
            kk = std::min(n, 2 * kk);
        }
        if (normal.dot(viewpoint - points[i]) < 0.0) normal = -normal;
        normals[i] = normal;
    }
    return normals;
}

SnapSurface make_snap_surface(std::vector<SurfaceSample> samples) {
    if (samples.empty()) throw Error("empty surface: no samples");
    SnapSurface s;
    s.samples = std::move(samples);
    std::vector<Vec3> pts(s.samples.size());
    for (std::size_t i = 0; i < s.samples.size(); ++i) pts[i] = s.samples[i].p;
    s.index.build(std::move(pts));
    // Mean nearest-neighbor spacing over a deterministic subsample.
    const std::size_t n = s.samples.size();
    if (n >= 2) {
        const std::size_t probes = std::min<std::size_t>(n, 1024);
        const std::size_t stride = std::max<std::size_t>(1, n / probes);
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < n && cnt < probes; i += stride, ++cnt) {
            const auto two = s.index.k_nearest(s.samples[i].p, 2);
            acc += (s.samples[two.back()].p - s.samples[i].p).norm();
        }
        s.mean_spacing = acc / double(cnt);
    }
    s.gating = 5.0 * s.mean_spacing;
    return s;
}

SnapSurface snap_surface_from_mesh(const TriangleMesh& m, std::size_t sample_count,
                                   std::uint64_t seed) {
    // Vertices go in first: exact hits tie-break to them ahead of any sample.
    std::vector<SurfaceSample> all;
    all.reserve(m.vertices.size() + sample_count);
    const auto vnorms = vertex_normals(m);
    std::vector<int> vface(m.vertices.size(), -1);
    for (int f = 0; f < int(m.faces.size()); ++f)
        for (int c : m.faces[f])
            if (vface[c] < 0) vface[c] = f;
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        all.push_back({m.vertices[v], vnorms[v], vface[v]});
    auto rnd = sample_mesh(m, sample_count, seed);
    all.insert(all.end(), rnd.begin(), rnd.end());
    return make_snap_surface(std::move(all));
}

SnapSurface snap_surface_from_cloud(const std::vector<Vec3>& points,
                                    const std::vector<Vec3>& normals) {
    if (points.size() != normals.size())
        throw Error("point cloud and normal counts differ");
    std::vector<SurfaceSample> all(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) all[i] = {points[i], normals[i], int(i)};
    return make_snap_surface(std::move(all));
}

}  // namespace strokemap
