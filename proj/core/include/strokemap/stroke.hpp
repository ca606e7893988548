#pragma once

#include <string>
#include <vector>

#include "strokemap/geom.hpp"

namespace strokemap {

// A drawing is an ordered list of polyline strokes in a 2D workspace (mm).
struct Stroke2D {
    std::string id;
    std::string color;  // empty means the default pen
    std::vector<Vec2> points;
};

struct StrokeSet2D {
    std::vector<Stroke2D> strokes;

    std::size_t total_points() const {
        std::size_t n = 0;
        for (const auto& s : strokes) n += s.points.size();
        return n;
    }
};

struct StrokePoint3D {
    Vec3 p = Vec3::Zero();
    Vec3 n = Vec3::Zero();  // unit surface normal at p
    bool pen_down = true;
};

struct Stroke3D {
    std::string id;
    std::string color;
    std::vector<StrokePoint3D> points;
};

// Mapping output: one 3D stroke per input stroke, plus pen-up travel bridges;
// bridges[i] connects strokes[i] to strokes[i+1].
struct MappedStrokes {
    std::vector<Stroke3D> strokes;
    std::vector<Stroke3D> bridges;
};

struct Box2 {
    Vec2 min = Vec2::Zero(), max = Vec2::Zero();
    Vec2 center() const { return 0.5 * (min + max); }
    Vec2 extent() const { return max - min; }
};

}  // namespace strokemap
