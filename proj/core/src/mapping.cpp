#include "strokemap/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "strokemap/geom.hpp"

namespace strokemap {

std::string method_name(Method m) {
    switch (m) {
        case Method::Project: return "project";
        case Method::TransportSnap: return "transport-snap";
        case Method::TransportFit: return "transport-fit";
        case Method::ChartSnap: return "chart-snap";
        case Method::ChartInterp: return "chart-interp";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "project") return Method::Project;
    if (name == "transport-snap") return Method::TransportSnap;
    if (name == "transport-fit") return Method::TransportFit;
    if (name == "chart-snap") return Method::ChartSnap;
    if (name == "chart-interp") return Method::ChartInterp;
    throw Error("unknown method: " + name);
}

StrokeSet2D scale_to_workspace(const StrokeSet2D& set, const Box2& workspace,
                               double explicit_scale) {
    Vec2 lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    Vec2 hi = -lo;
    std::size_t count = 0;
    for (const auto& s : set.strokes)
        for (const auto& p : s.points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
            ++count;
        }
    if (count == 0) throw Error("no stroke points to place");

    const Vec2 ext = hi - lo;
    double s;
    if (explicit_scale > 0.0) {
        s = explicit_scale;
    } else {
        const Vec2 wext = workspace.extent();
        s = std::numeric_limits<double>::max();
        if (ext.x() > 0.0) s = std::min(s, wext.x() / ext.x());
        if (ext.y() > 0.0) s = std::min(s, wext.y() / ext.y());
        if (s == std::numeric_limits<double>::max())
            throw Error("degenerate stroke extent: all points coincide");
    }

    const Vec2 cs = 0.5 * (lo + hi);
    const Vec2 cw = workspace.center();
    StrokeSet2D out = set;
    for (auto& st : out.strokes)
        for (auto& p : st.points) p = (p - cs) * s + cw;
    return out;
}

std::vector<Vec2> bridge_points_2d(const Stroke2D& prev, const Stroke2D& next) {
    std::vector<Vec2> out;
    if (prev.points.empty() || next.points.empty()) return out;
    const Vec2 a = prev.points.back();
    const Vec2 b = next.points.front();
    const double gap = (b - a).norm();
    if (gap == 0.0) return out;

    double step = 0.0;
    if (prev.points.size() > 1) {
        double sum = 0.0;
        for (std::size_t i = 1; i < prev.points.size(); ++i)
            sum += (prev.points[i] - prev.points[i - 1]).norm();
        step = sum / double(prev.points.size() - 1);
    }
    const int n = step > 0.0 ? std::max(1, int(std::ceil(gap / step))) : 1;
    out.reserve(std::size_t(n - 1));
    for (int i = 1; i < n; ++i) out.push_back(a + (b - a) * (double(i) / double(n)));
    return out;
}

namespace {

struct Frame2D {
    Vec3 u, v, d;  // workspace axes and ray direction, d unit
};

Frame2D make_frame(const Vec3& direction) {
    Frame2D f;
    const double len = direction.norm();
    if (!(len > 0.0)) throw Error("projection direction must be nonzero");
    f.d = direction / len;
    const Mat3 r = rotation_between(Vec3(0.0, 0.0, -1.0), f.d);
    f.u = r * Vec3(1.0, 0.0, 0.0);
    f.v = r * Vec3(0.0, 1.0, 0.0);
    return f;
}

struct ProjectHit {
    int idx = -1;
    bool ok = false;
};

// First-contact snap along the ray through `p2`: candidates are samples whose
// perpendicular distance to the ray is at most the gating radius; among those
// inside the window [t_first, t_first + 2*gating] the smallest perpendicular
// wins, earliest sample on ties.
ProjectHit project_point(const Vec2& p2, const SnapSurface& snap, const Frame2D& f,
                         double t_lo, double t_hi) {
    const double g = snap.gating;
    const Vec3 w = f.u * p2.x() + f.v * p2.y();
    std::vector<int> cand;
    double t_first = std::numeric_limits<double>::max();
    for (double t = t_lo; t <= t_hi; t += g) {
        if (t > t_first + 3.5 * g) break;
        const Vec3 o = w + f.d * t;
        for (std::size_t sidx : snap.index.radius(o, 1.5 * g)) {
            const Vec3 rel = snap.samples[sidx].p - w;
            const double ts = rel.dot(f.d);
            const double perp2 = rel.squaredNorm() - ts * ts;
            if (perp2 <= g * g) {
                cand.push_back(int(sidx));
                t_first = std::min(t_first, ts);
            }
        }
    }
    ProjectHit best;
    if (cand.empty()) return best;
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    double best_perp2 = std::numeric_limits<double>::max();
    for (int idx : cand) {
        const Vec3 rel = snap.samples[std::size_t(idx)].p - w;
        const double ts = rel.dot(f.d);
        if (ts > t_first + 2.0 * g) continue;
        const double perp2 = rel.squaredNorm() - ts * ts;
        if (perp2 < best_perp2) {
            best_perp2 = perp2;
            best.idx = idx;
            best.ok = true;
        }
    }
    return best;
}

// Ray parameter interval covering every sample, for any workspace point.
void sample_t_range(const SnapSurface& snap, const Frame2D& f, double& lo, double& hi) {
    lo = std::numeric_limits<double>::max();
    hi = -lo;
    for (const auto& s : snap.samples) {
        const double t = s.p.dot(f.d);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
}

}  // namespace

SurfaceSample project_probe(const Vec2& p, const SnapSurface& snap, const Vec3& direction) {
    if (snap.samples.empty()) throw Error("empty surface: no samples to map onto");
    const Frame2D f = make_frame(direction);
    double s_lo, s_hi;
    sample_t_range(snap, f, s_lo, s_hi);
    const double wd = std::abs(p.x()) + std::abs(p.y());
    const ProjectHit hit =
        project_point(p, snap, f, s_lo - wd - 2.0 * snap.gating, s_hi + wd + 2.0 * snap.gating);
    if (!hit.ok)
        throw Error("projection miss: no surface under (" + std::to_string(p.x()) + ", " +
                    std::to_string(p.y()) + ")");
    return snap.samples[std::size_t(hit.idx)];
}

MappedStrokes map_projected(const StrokeSet2D& set, const SnapSurface& snap,
                            const MappingConfig& cfg, MappingDiagnostics* diag) {
    if (snap.samples.empty()) throw Error("empty surface: no samples to map onto");
    const Frame2D f = make_frame(cfg.direction);
    const double g = snap.gating;
    double s_lo, s_hi;
    sample_t_range(snap, f, s_lo, s_hi);

    MappedStrokes out;
    out.strokes.reserve(set.strokes.size());
    for (int si = 0; si < int(set.strokes.size()); ++si) {
        const auto& st = set.strokes[std::size_t(si)];
        Stroke3D m3;
        m3.id = st.id;
        m3.color = st.color;
        m3.points.reserve(st.points.size());
        for (int pi = 0; pi < int(st.points.size()); ++pi) {
            const Vec2& p2 = st.points[std::size_t(pi)];
            const double wd = (f.u * p2.x() + f.v * p2.y()).dot(f.d);
            const ProjectHit hit = project_point(p2, snap, f, s_lo - wd - 2.0 * g,
                                                s_hi - wd + 2.0 * g);
            if (!hit.ok)
                throw Error("projection miss: stroke " + st.id + " point " +
                            std::to_string(pi) + " finds no sample within gating");
            const auto& smp = snap.samples[std::size_t(hit.idx)];
            if (diag && smp.n.dot(-f.d) <= 1e-9) diag->flagged.emplace_back(si, pi);
            m3.points.push_back({smp.p, smp.n, true});
        }
        out.strokes.push_back(std::move(m3));

        if (si + 1 < int(set.strokes.size())) {
            const auto& next = set.strokes[std::size_t(si + 1)];
            Stroke3D br;
            br.id = st.id + "~" + next.id;
            br.color = next.color;
            for (const Vec2& b2 : bridge_points_2d(st, next)) {
                const double wd = (f.u * b2.x() + f.v * b2.y()).dot(f.d);
                const ProjectHit hit = project_point(b2, snap, f, s_lo - wd - 2.0 * g,
                                                     s_hi - wd + 2.0 * g);
                if (!hit.ok) {
                    if (diag) ++diag->bridge_misses;
                    continue;  // travel may cross gaps the pen never touches
                }
                const auto& smp = snap.samples[std::size_t(hit.idx)];
                br.points.push_back({smp.p, smp.n, false});
            }
            out.bridges.push_back(std::move(br));
        }
    }
    return out;
}

namespace {

struct FitResult {
    Vec3 n = Vec3::Zero();
    Vec3 c = Vec3::Zero();
    bool ok = false;
};

// Total-least-squares plane through the k samples nearest q; the smallest
// principal direction is the normal. Nearly collinear or coincident
// neighborhoods are reported as degenerate.
FitResult fit_plane(const SnapSurface& snap, const Vec3& q, int k) {
    FitResult r;
    const auto nn = snap.index.k_nearest(q, std::size_t(std::max(3, k)));
    if (nn.size() < 3) return r;
    Vec3 c = Vec3::Zero();
    for (std::size_t idx : nn) c += snap.samples[idx].p;
    c /= double(nn.size());
    Mat3 cov = Mat3::Zero();
    for (std::size_t idx : nn) {
        const Vec3 d = snap.samples[idx].p - c;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 ev = eig.eigenvalues();  // ascending
    if (ev[2] <= 0.0 || ev[1] <= 1e-12 * ev[2]) return r;
    r.n = eig.eigenvectors().col(0).normalized();
    r.c = c;
    r.ok = true;
    return r;
}

struct Chain {
    Vec3 q = Vec3::Zero();
    Vec3 n = Vec3(0.0, 0.0, 1.0);
};

// One transport step: rotate the 2D displacement onto the tangent plane at
// the current point and advance. Re-attachment is up to the caller.
Vec3 transport_step(const Chain& ch, const Vec2& delta) {
    const Mat3 t = rotation_between(Vec3(0.0, 0.0, 1.0), ch.n);
    return ch.q + t * Vec3(delta.x(), delta.y(), 0.0);
}

}  // namespace

MappedStrokes map_transport(const StrokeSet2D& set, const SnapSurface& snap,
                            const MappingConfig& cfg, Method which,
                            MappingDiagnostics* diag) {
    if (which != Method::TransportSnap && which != Method::TransportFit)
        throw Error("map_transport handles transport-snap and transport-fit only");
    if (snap.samples.empty()) throw Error("empty surface: no samples to map onto");
    if (set.strokes.empty() || set.strokes.front().points.empty())
        throw Error("no stroke points to map");

    Chain ch;
    if (cfg.start_point) {
        const std::size_t ni = snap.index.nearest(*cfg.start_point);
        const double d = (snap.samples[ni].p - *cfg.start_point).norm();
        if (d > snap.gating)
            throw Error("start point off surface: nearest sample " + std::to_string(d) +
                        " away exceeds gating");
        ch.q = *cfg.start_point;
        ch.n = cfg.start_normal ? cfg.start_normal->normalized() : snap.samples[ni].n;
    } else {
        // Default start: where the first point would project straight down.
        const Frame2D f = make_frame(cfg.direction);
        double s_lo, s_hi;
        sample_t_range(snap, f, s_lo, s_hi);
        const Vec2& p0 = set.strokes.front().points.front();
        const double wd = (f.u * p0.x() + f.v * p0.y()).dot(f.d);
        const ProjectHit hit = project_point(p0, snap, f, s_lo - wd - 2.0 * snap.gating,
                                             s_hi - wd + 2.0 * snap.gating);
        if (!hit.ok) throw Error("projection miss: no start point on the surface");
        ch.q = snap.samples[std::size_t(hit.idx)].p;
        ch.n = snap.samples[std::size_t(hit.idx)].n;
    }

    const int k = std::max(3, cfg.k_neighbors);
    MappedStrokes out;
    out.strokes.reserve(set.strokes.size());
    Vec2 prev2 = set.strokes.front().points.front();
    bool first_point = true;

    // Advance the chain to 2D position `to`, re-attach if pen is down, emit.
    auto advance = [&](const Vec2& to, bool pen_down, Stroke3D& dst,
                       const std::string& where) {
        if (!first_point) {
            const Vec3 q_free = transport_step(ch, to - prev2);
            const std::size_t ni = snap.index.nearest(q_free);
            const auto& smp = snap.samples[ni];
            const double d = (smp.p - q_free).norm();
            if (d > snap.gating)
                throw Error("left surface at " + where + ": transported point " +
                            std::to_string(d) + " from nearest sample");
            if (!pen_down) {
                // Travel points keep their transported tangential position but
                // shed the height picked up over curvature, so long bridges
                // neither quantize to samples nor drift off the surface.
                ch.q = q_free - (q_free - smp.p).dot(smp.n) * smp.n;
                ch.n = smp.n;
            } else if (which == Method::TransportSnap) {
                ch.q = smp.p;
                ch.n = smp.n;
            } else {
                const FitResult fit = fit_plane(snap, q_free, k);
                if (!fit.ok) {
                    if (diag) ++diag->plane_fit_fallbacks;
                    ch.q = smp.p;
                    ch.n = smp.n;
                } else {
                    Vec3 n = fit.n;
                    if (n.dot(ch.n) < 0.0) n = -n;
                    ch.q = q_free - (q_free - fit.c).dot(n) * n;
                    ch.n = n;
                }
            }
        }
        first_point = false;
        prev2 = to;
        dst.points.push_back({ch.q, ch.n, pen_down});
    };

    for (int si = 0; si < int(set.strokes.size()); ++si) {
        const auto& st = set.strokes[std::size_t(si)];
        Stroke3D m3;
        m3.id = st.id;
        m3.color = st.color;
        m3.points.reserve(st.points.size());
        for (int pi = 0; pi < int(st.points.size()); ++pi)
            advance(st.points[std::size_t(pi)], true, m3,
                    "stroke " + st.id + " point " + std::to_string(pi));
        out.strokes.push_back(std::move(m3));

        if (si + 1 < int(set.strokes.size())) {
            const auto& next = set.strokes[std::size_t(si + 1)];
            Stroke3D br;
            br.id = st.id + "~" + next.id;
            br.color = next.color;
            const auto pts = bridge_points_2d(st, next);
            for (std::size_t bi = 0; bi < pts.size(); ++bi)
                advance(pts[bi], false, br,
                        "bridge " + br.id + " point " + std::to_string(bi));
            out.bridges.push_back(std::move(br));
        }
    }
    return out;
}

SurfacePath sequence_strokes(const MappedStrokes& mapped) {
    SurfacePath path;
    std::size_t total = 0;
    for (const auto& s : mapped.strokes) total += s.points.size();
    for (const auto& b : mapped.bridges) total += b.points.size();
    path.reserve(total);
    for (int si = 0; si < int(mapped.strokes.size()); ++si) {
        for (const auto& p : mapped.strokes[std::size_t(si)].points)
            path.push_back({p.p, p.n, p.pen_down, si});
        if (std::size_t(si) < mapped.bridges.size())
            for (const auto& p : mapped.bridges[std::size_t(si)].points)
                path.push_back({p.p, p.n, p.pen_down, -1});
    }
    return path;
}

}  // namespace strokemap
