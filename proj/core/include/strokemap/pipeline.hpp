#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "strokemap/mapping.hpp"
#include "strokemap/stroke.hpp"

namespace strokemap {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // a requested stage failed
inline constexpr int kExitBadInput = 2;  // unreadable input or invalid arguments

// One JSON document drives every subcommand; CLI flags override single fields.
struct PipelineConfig {
    nlohmann::json raw = nlohmann::json::object();  // echoed into the manifest

    // surface: either a file (mesh/cloud by extension) or a built-in shape
    std::string surface_path;
    nlohmann::json surface_shape;  // {"name": ..., params}; empty = none

    // strokes: file, built-in generator, or the default lattice
    std::string strokes_path;
    nlohmann::json strokes_builtin;

    Box2 workspace{{-40.0, -40.0}, {40.0, 40.0}};
    std::vector<Method> methods{Method::TransportSnap};

    std::size_t samples = 1'000'000;
    std::uint64_t seed = 0;
    int k_neighbors = 10;
    double explicit_scale = 0.0;
    Vec3 direction{0.0, 0.0, -1.0};
    std::optional<Vec3> start_point, start_normal, anchor;
    std::optional<std::pair<int, int>> pins;
    Vec3 cloud_viewpoint{0.0, 0.0, 500.0};

    double standoff = 5.0;
    double max_step_angle = 5.0 * 0.017453292519943295;  // radians
    double max_step_dist = 2.0;

    double threshold = 2.0;
    double lift = 10.0;

    Vec3 sensor_pos{0.0, 0.0, 500.0};
    std::size_t template_count = 100'000;

    std::string out_dir;  // resolved: flag > config > $STROKEMAP_OUT_DIR > "out"
};

PipelineConfig default_config();
PipelineConfig load_config(const std::string& path);
// Merges a parsed JSON document over the defaults; `origin` names it in errors.
PipelineConfig config_from_json(const nlohmann::json& doc, const std::string& origin);

int cmd_map(const PipelineConfig& cfg);
int cmd_trajectory(const PipelineConfig& cfg);
int cmd_recover(const PipelineConfig& cfg, const std::string& planned_path,
                const std::string& measured_path);
int cmd_template(const PipelineConfig& cfg);
// Empty manifest path runs the built-in analytic suite.
int cmd_bench(const PipelineConfig& cfg, const std::string& manifest_path);

std::string version_string();

}  // namespace strokemap
