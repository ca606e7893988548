#pragma once

#include <string>
#include <vector>

#include "strokemap/mapping.hpp"
#include "strokemap/stroke.hpp"

namespace strokemap {

// Relative length distortion per drawn segment: (|3D| - |2D|) / |2D|.
// Preconditions: matching point counts, no zero-length 2D segments.
std::vector<double> local_error_series(const Stroke2D& flat, const Stroke3D& mapped);

// A 2D crossing or near-crossing between two strokes.
struct CrossPair {
    int stroke_a = 0, point_a = 0;
    int stroke_b = 0, point_b = 0;
    double dist2d = 0.0;
};

// Cross-stroke probe pairs: every coincident pair (2D distance below 1e-6)
// when any stroke pair has one, otherwise the single closest pair from each
// stroke pair. Self pairs are never produced.
std::vector<CrossPair> cross_pairs(const StrokeSet2D& flat);

// Absolute spread between mapped pair distance and flat pair distance.
struct GlobalErrorSample {
    CrossPair pair;
    double error = 0.0;  // |q_a - q_b| - |p_a - p_b|
};

struct StrokeErrorSeries {
    std::string id;
    std::vector<double> errors;  // one per segment
};

// Length-distortion summary of one mapped drawing. Signed means expose
// systematic bias; absolute means and maxima expose spread.
struct DeformationReport {
    std::string method;
    std::size_t stroke_count = 0;
    std::size_t point_count = 0;
    std::vector<StrokeErrorSeries> local;
    std::vector<GlobalErrorSample> global;
    double local_mean_signed = 0.0, local_mean_abs = 0.0, local_max_abs = 0.0;
    double global_mean_signed = 0.0, global_mean_abs = 0.0, global_max_abs = 0.0;
    double duration_seconds = 0.0;
    int flagged_points = 0;
    int plane_fit_fallbacks = 0;
    int bridge_misses = 0;
};

DeformationReport compute_report(Method method, const StrokeSet2D& flat,
                                 const MappedStrokes& mapped, double duration_seconds,
                                 const MappingDiagnostics* diag = nullptr);

}  // namespace strokemap
