#include "strokemap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "strokemap/geom.hpp"

namespace strokemap {

std::vector<double> local_error_series(const Stroke2D& flat, const Stroke3D& mapped) {
    if (flat.points.size() != mapped.points.size())
        throw Error("stroke size mismatch: " + flat.id);
    std::vector<double> out;
    if (flat.points.size() < 2) return out;
    out.reserve(flat.points.size() - 1);
    for (std::size_t i = 1; i < flat.points.size(); ++i) {
        const double l2 = (flat.points[i] - flat.points[i - 1]).norm();
        if (l2 <= 0.0)
            throw Error("zero-length 2D segment in stroke " + flat.id + " at " +
                        std::to_string(i - 1));
        const double l3 = (mapped.points[i].p - mapped.points[i - 1].p).norm();
        out.push_back((l3 - l2) / l2);
    }
    return out;
}

std::vector<CrossPair> cross_pairs(const StrokeSet2D& flat) {
    constexpr double kCoincident = 1e-6;
    std::vector<CrossPair> coincident, nearest;
    for (int sa = 0; sa < int(flat.strokes.size()); ++sa)
        for (int sb = sa + 1; sb < int(flat.strokes.size()); ++sb) {
            const auto& a = flat.strokes[std::size_t(sa)].points;
            const auto& b = flat.strokes[std::size_t(sb)].points;
            if (a.empty() || b.empty()) continue;
            CrossPair best;
            double best_d = std::numeric_limits<double>::max();
            for (int ia = 0; ia < int(a.size()); ++ia)
                for (int ib = 0; ib < int(b.size()); ++ib) {
                    const double d = (a[std::size_t(ia)] - b[std::size_t(ib)]).norm();
                    if (d < kCoincident)
                        coincident.push_back({sa, ia, sb, ib, d});
                    if (d < best_d) {
                        best_d = d;
                        best = {sa, ia, sb, ib, d};
                    }
                }
            nearest.push_back(best);
        }
    return coincident.empty() ? nearest : coincident;
}

DeformationReport compute_report(Method method, const StrokeSet2D& flat,
                                 const MappedStrokes& mapped, double duration_seconds,
                                 const MappingDiagnostics* diag) {
    if (flat.strokes.size() != mapped.strokes.size())
        throw Error("stroke count mismatch between drawing and mapping");

    DeformationReport rep;
    rep.method = method_name(method);
    rep.stroke_count = flat.strokes.size();
    rep.duration_seconds = duration_seconds;

    double sum = 0.0, sum_abs = 0.0;
    std::size_t nseg = 0;
    for (std::size_t s = 0; s < flat.strokes.size(); ++s) {
        rep.point_count += flat.strokes[s].points.size();
        StrokeErrorSeries series;
        series.id = flat.strokes[s].id;
        series.errors = local_error_series(flat.strokes[s], mapped.strokes[s]);
        for (double e : series.errors) {
            sum += e;
            sum_abs += std::abs(e);
            rep.local_max_abs = std::max(rep.local_max_abs, std::abs(e));
            ++nseg;
        }
        rep.local.push_back(std::move(series));
    }
    if (nseg > 0) {
        rep.local_mean_signed = sum / double(nseg);
        rep.local_mean_abs = sum_abs / double(nseg);
    }

    double gsum = 0.0, gsum_abs = 0.0;
    for (const CrossPair& cp : cross_pairs(flat)) {
        const Vec3& qa =
            mapped.strokes[std::size_t(cp.stroke_a)].points[std::size_t(cp.point_a)].p;
        const Vec3& qb =
            mapped.strokes[std::size_t(cp.stroke_b)].points[std::size_t(cp.point_b)].p;
        GlobalErrorSample g;
        g.pair = cp;
        g.error = (qa - qb).norm() - cp.dist2d;
        gsum += g.error;
        gsum_abs += std::abs(g.error);
        rep.global_max_abs = std::max(rep.global_max_abs, std::abs(g.error));
        rep.global.push_back(g);
    }
    if (!rep.global.empty()) {
        rep.global_mean_signed = gsum / double(rep.global.size());
        rep.global_mean_abs = gsum_abs / double(rep.global.size());
    }

    if (diag) {
        rep.flagged_points = int(diag->flagged.size());
        rep.plane_fit_fallbacks = diag->plane_fit_fallbacks;
        rep.bridge_misses = diag->bridge_misses;
    }
    return rep;
}

}  // namespace strokemap
