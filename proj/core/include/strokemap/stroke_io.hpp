#pragma once

#include <string>

#include "strokemap/stroke.hpp"

namespace strokemap {

// Stroke files are JSON:
//   {"strokes": [{"id": "s0", "color": "black", "points": [[x, y], ...]}, ...]}
// "id" defaults to "s<index>", "color" to "".
StrokeSet2D load_strokes_json(const std::string& path);
StrokeSet2D parse_strokes_json(const std::string& text, const std::string& origin);
void save_strokes_json(const std::string& path, const StrokeSet2D& set);

// Mapped strokes:
//   {"strokes": [{"id", "color", "points": [{"p": [x,y,z], "n": [x,y,z],
//    "pen_down": bool}, ...]}], "bridges": [...]}
void save_mapped_json(const std::string& path, const MappedStrokes& mapped);
MappedStrokes load_mapped_json(const std::string& path);

}  // namespace strokemap
