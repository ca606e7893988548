#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strokemap/pipeline.hpp"

using strokemap::Error;
using strokemap::PipelineConfig;

namespace {

// Flags shared by the mapping-driven subcommands. A flag given on the
// command line overrides the same field from --config.
struct CommonFlags {
    std::string config_path, out_dir, surface, strokes;
    std::vector<std::string> methods;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    double scale = 0.0, threshold = 0.0, lift = 0.0;
    CLI::Option *seed_opt = nullptr, *samples_opt = nullptr, *scale_opt = nullptr,
                *threshold_opt = nullptr, *lift_opt = nullptr;

    void attach(CLI::App* cmd, bool mapping, bool recovery) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--out", out_dir, "output directory");
        if (mapping) {
            cmd->add_option("--surface", surface, "surface mesh or point cloud file");
            cmd->add_option("--strokes", strokes, "stroke drawing JSON file");
            cmd->add_option("--method", methods,
                            "mapping method (repeatable): project, transport-snap, "
                            "transport-fit, chart-snap, chart-interp");
            seed_opt = cmd->add_option("--seed", seed, "sampling seed");
            samples_opt = cmd->add_option("--samples", samples, "surface sample count");
            scale_opt = cmd->add_option("--scale", scale,
                                        "explicit drawing scale (default: fit workspace)");
        }
        if (recovery) {
            threshold_opt =
                cmd->add_option("--threshold", threshold, "deviation threshold (mm)");
            lift_opt = cmd->add_option("--lift", lift, "recovery lift height (mm)");
        }
    }

    PipelineConfig build() const {
        PipelineConfig cfg = config_path.empty() ? strokemap::default_config()
                                                 : strokemap::load_config(config_path);
        if (!surface.empty()) {
            cfg.surface_path = surface;
            cfg.surface_shape = nlohmann::json();
        }
        if (!strokes.empty()) {
            cfg.strokes_path = strokes;
            cfg.strokes_builtin = nlohmann::json();
        }
        if (!methods.empty()) {
            cfg.methods.clear();
            for (const auto& m : methods) cfg.methods.push_back(strokemap::method_from_name(m));
        }
        if (seed_opt && seed_opt->count()) cfg.seed = seed;
        if (samples_opt && samples_opt->count()) cfg.samples = samples;
        if (scale_opt && scale_opt->count()) cfg.explicit_scale = scale;
        if (threshold_opt && threshold_opt->count()) cfg.threshold = threshold;
        if (lift_opt && lift_opt->count()) cfg.lift = lift;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"strokemap: maps 2D pen drawings onto 3D surfaces"};
    app.require_subcommand(0, 1);
    bool show_version = false;
    app.add_flag("--version", show_version, "print version and exit");

    CommonFlags map_flags, traj_flags, rec_flags, tpl_flags, bench_flags;

    CLI::App* cmd_map = app.add_subcommand("map", "map strokes and report deformation");
    map_flags.attach(cmd_map, true, false);

    CLI::App* cmd_traj =
        app.add_subcommand("trajectory", "build densified pen-pose trajectories");
    traj_flags.attach(cmd_traj, true, false);

    CLI::App* cmd_rec =
        app.add_subcommand("recover", "plan skip/re-entry around execution deviations");
    rec_flags.attach(cmd_rec, false, true);
    std::string planned_path, measured_path;
    cmd_rec->add_option("planned", planned_path, "planned trajectory JSON")->required();
    cmd_rec->add_option("measured", measured_path, "measured tip trace (.json or .xyz)")
        ->required();

    CLI::App* cmd_tpl =
        app.add_subcommand("template", "sensor-view surface sampling to a PLY template");
    tpl_flags.attach(cmd_tpl, true, false);
    std::vector<double> sensor;
    CLI::Option* sensor_opt =
        cmd_tpl->add_option("--sensor", sensor, "sensor position x y z")->expected(3);
    std::size_t tpl_count = 0;
    CLI::Option* tpl_count_opt =
        cmd_tpl->add_option("--count", tpl_count, "template sample count");

    CLI::App* cmd_bench = app.add_subcommand("bench", "run the deformation benchmark table");
    bench_flags.attach(cmd_bench, true, false);
    std::string bench_manifest;
    cmd_bench->add_option("--manifest", bench_manifest,
                          "benchmark cell list JSON (default: built-in suite)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return strokemap::kExitBadInput;
    }

    if (show_version) {
        std::cout << strokemap::version_string() << "\n";
        return strokemap::kExitOk;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return strokemap::kExitBadInput;
    }

    try {
        if (cmd_map->parsed()) return strokemap::cmd_map(map_flags.build());
        if (cmd_traj->parsed()) return strokemap::cmd_trajectory(traj_flags.build());
        if (cmd_rec->parsed())
            return strokemap::cmd_recover(rec_flags.build(), planned_path, measured_path);
        if (cmd_tpl->parsed()) {
            PipelineConfig cfg = tpl_flags.build();
            if (sensor_opt->count()) cfg.sensor_pos = strokemap::Vec3(sensor[0], sensor[1], sensor[2]);
            if (tpl_count_opt->count()) cfg.template_count = tpl_count;
            return strokemap::cmd_template(cfg);
        }
        if (cmd_bench->parsed()) return strokemap::cmd_bench(bench_flags.build(), bench_manifest);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return strokemap::kExitBadInput;
    }
    return strokemap::kExitBadInput;
}
