#include "strokemap/lscm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "strokemap/geom.hpp"
#include "strokemap/kdtree.hpp"

namespace strokemap {

namespace {

TriangleMesh compact(const TriangleMesh& mesh, std::vector<int>& remap) {
    remap.assign(mesh.vertices.size(), -1);
    TriangleMesh out;
    out.faces.reserve(mesh.faces.size());
    for (const auto& f : mesh.faces) {
        std::array<int, 3> nf{};
        for (int a = 0; a < 3; ++a) {
            int& slot = remap[std::size_t(f[std::size_t(a)])];
            if (slot < 0) {
                slot = int(out.vertices.size());
                out.vertices.push_back(mesh.vertices[std::size_t(f[std::size_t(a)])]);
            }
            nf[std::size_t(a)] = slot;
        }
        out.faces.push_back(nf);
    }
    return out;
}

std::vector<std::pair<int, int>> unique_edges(const TriangleMesh& mesh) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(mesh.faces.size() * 3);
    for (const auto& f : mesh.faces)
        for (int a = 0; a < 3; ++a) {
            int i = f[std::size_t(a)], j = f[std::size_t((a + 1) % 3)];
            edges.emplace_back(std::min(i, j), std::max(i, j));
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + long(mid), v.end());
    return v[mid];
}

// Linear shape-function gradients in the face's local 2D frame; rows of the
// conformal residual follow from requiring grad v to be grad u rotated 90°.
struct FaceBasis {
    Vec2 g[3];
    double area = 0.0;
};

FaceBasis face_basis(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    FaceBasis fb;
    const Vec3 e1 = p1 - p0;
    const Vec3 nr = e1.cross(p2 - p0);
    const double nlen = nr.norm();
    fb.area = 0.5 * nlen;
    if (!(fb.area > 0.0)) return fb;
    const Vec3 ex = e1.normalized();
    const Vec3 ey = (nr / nlen).cross(ex);
    const Vec2 q0(0.0, 0.0);
    const Vec2 q1(e1.norm(), 0.0);
    const Vec2 q2((p2 - p0).dot(ex), (p2 - p0).dot(ey));
    const Vec2 q[3] = {q0, q1, q2};
    const double inv2a = 1.0 / (2.0 * fb.area);
    for (int a = 0; a < 3; ++a) {
        const Vec2 opp = q[(a + 2) % 3] - q[(a + 1) % 3];
        fb.g[a] = Vec2(-opp.y(), opp.x()) * inv2a;
    }
    return fb;
}

}  // namespace

ParamChart lscm_unfold(const TriangleMesh& mesh,
                       std::optional<std::pair<int, int>> pins) {
    if (mesh.faces.empty()) throw Error("empty surface: no faces to unfold");

    std::vector<int> remap;
    ParamChart chart;
    chart.mesh = compact(mesh, remap);
    const auto& m = chart.mesh;
    const int n = int(m.vertices.size());

    const auto loops = boundary_loops(m);  // throws on non-manifold edges
    const auto edges = unique_edges(m);
    const long euler = long(n) - long(edges.size()) + long(m.faces.size());
    if (loops.size() != 1 || euler != 1)
        throw Error("requires disc segment: mesh must be one sheet with one boundary");

    int pa = -1, pb = -1;
    if (pins) {
        if (pins->first < 0 || pins->first >= int(remap.size()) || pins->second < 0 ||
            pins->second >= int(remap.size()) || pins->first == pins->second)
            throw Error("pin vertices out of range");
        pa = remap[std::size_t(pins->first)];
        pb = remap[std::size_t(pins->second)];
        if (pa < 0 || pb < 0) throw Error("pin vertex not part of any face");
    } else {
        // Default: the boundary's diameter, the most distant vertex pair.
        const auto& loop = loops.front();
        double best = -1.0;
        for (std::size_t i = 0; i < loop.size(); ++i)
            for (std::size_t j = i + 1; j < loop.size(); ++j) {
                const double d2 =
                    (m.vertices[std::size_t(loop[i])] - m.vertices[std::size_t(loop[j])])
                        .squaredNorm();
                if (d2 > best) {
                    best = d2;
                    pa = loop[i];
                    pb = loop[j];
                }
            }
    }
    chart.pin_a = pa;
    chart.pin_b = pb;
    const double pin_dist = (m.vertices[std::size_t(pb)] - m.vertices[std::size_t(pa)]).norm();
    if (!(pin_dist > 0.0)) throw Error("pin vertices coincide");

    // Unknown layout: u of free vertices first, then v. Pins contribute to b.
    std::vector<int> col_u(std::size_t(n), -1), col_v(std::size_t(n), -1);
    int ncols = 0;
    for (int i = 0; i < n; ++i) {
        if (i == pa || i == pb) continue;
        col_u[std::size_t(i)] = ncols++;
    }
    for (int i = 0; i < n; ++i) {
        if (i == pa || i == pb) continue;
        col_v[std::size_t(i)] = ncols++;
    }
    std::vector<double> pin_u(std::size_t(n), 0.0), pin_v(std::size_t(n), 0.0);
    pin_u[std::size_t(pb)] = pin_dist;  // pa stays at the origin

    const int rows = 2 * int(m.faces.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(std::size_t(rows) * 6);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);

    std::vector<FaceBasis> basis(m.faces.size());
    for (std::size_t t = 0; t < m.faces.size(); ++t) {
        const auto& f = m.faces[t];
        const FaceBasis fb = face_basis(m.vertices[std::size_t(f[0])],
                                        m.vertices[std::size_t(f[1])],
                                        m.vertices[std::size_t(f[2])]);
        basis[t] = fb;
        if (!(fb.area > 0.0)) throw Error("degenerate face in chart mesh");
        const double w = std::sqrt(fb.area);
        const int r0 = 2 * int(t), r1 = r0 + 1;
        for (int a = 0; a < 3; ++a) {
            const int vi = f[std::size_t(a)];
            const double gx = fb.g[a].x(), gy = fb.g[a].y();
            // row r0:  sum gy*u + gx*v = 0      row r1:  sum -gx*u + gy*v = 0
            const double cu0 = w * gy, cv0 = w * gx;
            const double cu1 = -w * gx, cv1 = w * gy;
            if (col_u[std::size_t(vi)] >= 0) {
                trips.emplace_back(r0, col_u[std::size_t(vi)], cu0);
                trips.emplace_back(r1, col_u[std::size_t(vi)], cu1);
            } else {
                b[r0] -= cu0 * pin_u[std::size_t(vi)];
                b[r1] -= cu1 * pin_u[std::size_t(vi)];
            }
            if (col_v[std::size_t(vi)] >= 0) {
                trips.emplace_back(r0, col_v[std::size_t(vi)], cv0);
                trips.emplace_back(r1, col_v[std::size_t(vi)], cv1);
            } else {
                b[r0] -= cv0 * pin_v[std::size_t(vi)];
                b[r1] -= cv1 * pin_v[std::size_t(vi)];
            }
        }
    }

    Eigen::SparseMatrix<double> A(rows, ncols);
    A.setFromTriplets(trips.begin(), trips.end());
    const Eigen::SparseMatrix<double> At = A.transpose();
    const Eigen::SparseMatrix<double> AtA = At * A;
    const Eigen::VectorXd Atb = At * b;

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(AtA);
    if (solver.info() != Eigen::Success)
        throw Error("parameterization solve failed: system not factorizable");
    Eigen::VectorXd x = solver.solve(Atb);
    if (solver.info() != Eigen::Success)
        throw Error("parameterization solve failed");
    // Two rounds of iterative refinement against the rectangular system pull
    // the squared-condition-number noise of the normal equations down to the
    // level of the residual itself.
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd r = At * (b - A * x);
        x += solver.solve(r);
    }

    chart.uv.assign(std::size_t(n), Vec2::Zero());
    for (int i = 0; i < n; ++i) {
        if (col_u[std::size_t(i)] >= 0)
            chart.uv[std::size_t(i)] = Vec2(x[col_u[std::size_t(i)]], x[col_v[std::size_t(i)]]);
        else
            chart.uv[std::size_t(i)] = Vec2(pin_u[std::size_t(i)], pin_v[std::size_t(i)]);
    }

    // Energy of the final map, and the edge-length ratio for registration.
    double energy = 0.0;
    for (std::size_t t = 0; t < m.faces.size(); ++t) {
        const auto& f = m.faces[t];
        Vec2 gu = Vec2::Zero(), gv = Vec2::Zero();
        for (int a = 0; a < 3; ++a) {
            const Vec2& uvp = chart.uv[std::size_t(f[std::size_t(a)])];
            gu += basis[t].g[a] * uvp.x();
            gv += basis[t].g[a] * uvp.y();
        }
        const Vec2 r(gv.x() + gu.y(), gv.y() - gu.x());
        energy += basis[t].area * r.squaredNorm();
    }
    chart.energy = energy;

    std::vector<double> ratios, lens3;
    ratios.reserve(edges.size());
    lens3.reserve(edges.size());
    for (const auto& [i, j] : edges) {
        const double l3 = (m.vertices[std::size_t(j)] - m.vertices[std::size_t(i)]).norm();
        const double luv = (chart.uv[std::size_t(j)] - chart.uv[std::size_t(i)]).norm();
        lens3.push_back(l3);
        if (luv > 0.0) ratios.push_back(l3 / luv);
    }
    chart.median_edge = median_of(std::move(lens3));
    chart.scale = ratios.empty() ? 1.0 : median_of(std::move(ratios));
    return chart;
}

StrokeSet2D register_strokes_to_chart(const StrokeSet2D& set, const ParamChart& chart,
                                      const Vec3& anchor, double explicit_ratio) {
    if (set.strokes.empty() || set.strokes.front().points.empty())
        throw Error("no stroke points to place");
    int best = -1;
    double best_d2 = std::numeric_limits<double>::max();
    for (int i = 0; i < int(chart.mesh.vertices.size()); ++i) {
        const double d2 = (chart.mesh.vertices[std::size_t(i)] - anchor).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    if (best < 0 || std::sqrt(best_d2) > 5.0 * chart.median_edge)
        throw Error("anchor too far from chart: no vertex within tolerance");

    const double ratio = explicit_ratio > 0.0 ? explicit_ratio : chart.scale;
    if (!(ratio > 0.0)) throw Error("chart scale ratio must be positive");
    const Vec2 origin2 = set.strokes.front().points.front();
    const Vec2 anchor_uv = chart.uv[std::size_t(best)];

    StrokeSet2D out = set;
    for (auto& st : out.strokes)
        for (auto& p : st.points) p = (p - origin2) / ratio + anchor_uv;
    return out;
}

namespace {

// Uniform uv grid over face bounding boxes; lookups scan candidate faces in
// index order so ties resolve the same way every run.
class FaceLocator {
  public:
    explicit FaceLocator(const ParamChart& chart) : chart_(chart) {
        lo_ = Vec2(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
        Vec2 hi = -lo_;
        for (const auto& p : chart.uv) {
            lo_ = lo_.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        std::vector<double> lens;
        lens.reserve(chart.mesh.faces.size());
        for (const auto& f : chart.mesh.faces)
            lens.push_back((chart.uv[std::size_t(f[1])] - chart.uv[std::size_t(f[0])]).norm());
        const double med = median_of(std::move(lens));
        const Vec2 ext = hi - lo_;
        cell_ = std::max({2.0 * med, ext.x() / 512.0, ext.y() / 512.0});
        if (!(cell_ > 0.0)) cell_ = 1.0;
        nx_ = std::max(1, int(ext.x() / cell_) + 1);
        ny_ = std::max(1, int(ext.y() / cell_) + 1);
        bins_.resize(std::size_t(nx_) * std::size_t(ny_));
        for (int t = 0; t < int(chart.mesh.faces.size()); ++t) {
            const auto& f = chart.mesh.faces[std::size_t(t)];
            Vec2 flo = chart.uv[std::size_t(f[0])], fhi = flo;
            for (int a = 1; a < 3; ++a) {
                flo = flo.cwiseMin(chart.uv[std::size_t(f[std::size_t(a)])]);
                fhi = fhi.cwiseMax(chart.uv[std::size_t(f[std::size_t(a)])]);
            }
            const auto [ix0, iy0] = cell_of(flo);
            const auto [ix1, iy1] = cell_of(fhi);
            for (int iy = iy0; iy <= iy1; ++iy)
                for (int ix = ix0; ix <= ix1; ++ix)
                    bins_[std::size_t(iy) * std::size_t(nx_) + std::size_t(ix)].push_back(t);
        }
    }

    // Containing face and barycentric coordinates, or face == -1.
    struct Located {
        int face = -1;
        double bary[3] = {0.0, 0.0, 0.0};
    };

    Located locate(const Vec2& p) const {
        Located out;
        const auto [ix, iy] = cell_of(p);
        for (int t : bins_[std::size_t(iy) * std::size_t(nx_) + std::size_t(ix)]) {
            const auto& f = chart_.mesh.faces[std::size_t(t)];
            const Vec2& a = chart_.uv[std::size_t(f[0])];
            const Vec2& b = chart_.uv[std::size_t(f[1])];
            const Vec2& c = chart_.uv[std::size_t(f[2])];
            const double den = cross2(b - a, c - a);
            if (std::abs(den) < 1e-18) continue;
            const double w0 = cross2(b - p, c - p) / den;
            const double w1 = cross2(c - p, a - p) / den;
            const double w2 = 1.0 - w0 - w1;
            if (w0 >= -1e-9 && w1 >= -1e-9 && w2 >= -1e-9) {
                out.face = t;
                out.bary[0] = w0;
                out.bary[1] = w1;
                out.bary[2] = w2;
                return out;
            }
        }
        return out;
    }

  private:
    static double cross2(const Vec2& a, const Vec2& b) {
        return a.x() * b.y() - a.y() * b.x();
    }
    std::pair<int, int> cell_of(const Vec2& p) const {
        int ix = int(std::floor((p.x() - lo_.x()) / cell_));
        int iy = int(std::floor((p.y() - lo_.y()) / cell_));
        ix = std::clamp(ix, 0, nx_ - 1);
        iy = std::clamp(iy, 0, ny_ - 1);
        return {ix, iy};
    }

    const ParamChart& chart_;
    Vec2 lo_ = Vec2::Zero();
    double cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;
};

}  // namespace

MappedStrokes map_parameterized(const StrokeSet2D& uv_set, const ParamChart& chart,
                                Method which, MappingDiagnostics* diag) {
    if (which != Method::ChartSnap && which != Method::ChartInterp)
        throw Error("map_parameterized handles chart-snap and chart-interp only");
    if (chart.uv.empty()) throw Error("empty surface: chart has no vertices");

    const FaceLocator locator(chart);
    SpatialIndex uv_index;
    {
        std::vector<Vec3> pts;
        pts.reserve(chart.uv.size());
        for (const auto& p : chart.uv) pts.emplace_back(p.x(), p.y(), 0.0);
        uv_index.build(std::move(pts));
    }

    auto map_point = [&](const Vec2& p, bool pen_down,
                         const std::string& where) -> std::optional<StrokePoint3D> {
        const auto loc = locator.locate(p);
        if (loc.face < 0) {
            if (!pen_down) {
                if (diag) ++diag->bridge_misses;
                return std::nullopt;
            }
            throw Error("stroke exceeds chart at " + where);
        }
        const auto& f = chart.mesh.faces[std::size_t(loc.face)];
        StrokePoint3D sp;
        sp.pen_down = pen_down;
        sp.n = face_normal(chart.mesh, loc.face);
        if (which == Method::ChartSnap) {
            const std::size_t near = uv_index.nearest(Vec3(p.x(), p.y(), 0.0));
            sp.p = chart.mesh.vertices[near];
        } else {
            sp.p = loc.bary[0] * chart.mesh.vertices[std::size_t(f[0])] +
                   loc.bary[1] * chart.mesh.vertices[std::size_t(f[1])] +
                   loc.bary[2] * chart.mesh.vertices[std::size_t(f[2])];
        }
        return sp;
    };

    MappedStrokes out;
    out.strokes.reserve(uv_set.strokes.size());
    for (int si = 0; si < int(uv_set.strokes.size()); ++si) {
        const auto& st = uv_set.strokes[std::size_t(si)];
        Stroke3D m3;
        m3.id = st.id;
        m3.color = st.color;
        m3.points.reserve(st.points.size());
        for (int pi = 0; pi < int(st.points.size()); ++pi) {
            auto sp = map_point(st.points[std::size_t(pi)], true,
                                "stroke " + st.id + " point " + std::to_string(pi));
            m3.points.push_back(*sp);
        }
        out.strokes.push_back(std::move(m3));

        if (si + 1 < int(uv_set.strokes.size())) {
            const auto& next = uv_set.strokes[std::size_t(si + 1)];
            Stroke3D br;
            br.id = st.id + "~" + next.id;
            br.color = next.color;
            for (const Vec2& b2 : bridge_points_2d(st, next))
                if (auto sp = map_point(b2, false, br.id)) br.points.push_back(*sp);
            out.bridges.push_back(std::move(br));
        }
    }
    return out;
}

}  // namespace strokemap
