#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "strokemap/kdtree.hpp"
#include "strokemap/lscm.hpp"
#include "strokemap/mapping.hpp"
#include "strokemap/shapes.hpp"
#include "strokemap/surface.hpp"
#include "strokemap/trajectory.hpp"

using namespace strokemap;

namespace {

const Box2 kWorkspace{{-40.0, -40.0}, {40.0, 40.0}};

StrokeSet2D drawing() { return shapes::lattice(kWorkspace, 9, 9, 81); }

}  // namespace

static void BM_SampleMesh(benchmark::State& state) {
    const shapes::HalfCylinder hc = shapes::half_cylinder(50.0, 100.0, 0.73);
    const auto count = std::size_t(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_mesh(hc.mesh, count, 0));
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(count));
}
BENCHMARK(BM_SampleMesh)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

static void BM_NearestQuery(benchmark::State& state) {
    std::mt19937_64 rng(1);
    auto u = [&] { return (rng() >> 11) * 0x1.0p-53; };
    std::vector<Vec3> pts;
    pts.reserve(std::size_t(state.range(0)));
    for (int64_t i = 0; i < state.range(0); ++i)
        pts.push_back(Vec3(u() * 100, u() * 100, u() * 100));
    const SpatialIndex index(pts);
    std::size_t i = 0;
    for (auto _ : state) {
        const Vec3 q(u() * 100, u() * 100, u() * 100);
        benchmark::DoNotOptimize(i += index.nearest(q));
    }
    state.SetItemsProcessed(int64_t(state.iterations()));
}
BENCHMARK(BM_NearestQuery)->Arg(100'000)->Arg(1'000'000);

static void BM_TransportMap(benchmark::State& state) {
    const shapes::HalfCylinder hc = shapes::half_cylinder(50.0, 100.0, 0.73);
    const SnapSurface snap =
        snap_surface_from_mesh(hc.mesh, std::size_t(state.range(0)), 0);
    const StrokeSet2D scaled = scale_to_workspace(drawing(), kWorkspace);
    MappingConfig cfg;
    const Method m = state.range(1) == 0 ? Method::TransportSnap : Method::TransportFit;
    for (auto _ : state)
        benchmark::DoNotOptimize(map_transport(scaled, snap, cfg, m));
    state.SetItemsProcessed(int64_t(state.iterations()) * 18 * 81);
}
BENCHMARK(BM_TransportMap)
    ->Args({1'000'000, 0})
    ->Args({1'000'000, 1})
    ->Unit(benchmark::kMillisecond);

static void BM_ProjectMap(benchmark::State& state) {
    const shapes::HalfCylinder hc = shapes::half_cylinder(50.0, 100.0, 0.73);
    const SnapSurface snap = snap_surface_from_mesh(hc.mesh, 1'000'000, 0);
    const StrokeSet2D scaled = scale_to_workspace(drawing(), kWorkspace);
    MappingConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(map_projected(scaled, snap, cfg));
    state.SetItemsProcessed(int64_t(state.iterations()) * 18 * 81);
}
BENCHMARK(BM_ProjectMap)->Unit(benchmark::kMillisecond);

static void BM_Unfold(benchmark::State& state) {
    const shapes::HalfCylinder hc =
        shapes::half_cylinder(50.0, 100.0, double(state.range(0)) / 100.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(lscm_unfold(hc.mesh, hc.chart_pins()));
    state.SetLabel(std::to_string(hc.mesh.vertices.size()) + " vertices");
}
BENCHMARK(BM_Unfold)->Arg(100)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_Densify(benchmark::State& state) {
    SurfacePath path;
    for (int i = 0; i <= 1000; ++i) {
        const double phi = M_PI * double(i) / 1000.0;
        path.push_back({Vec3(0.1 * i, 50 * std::cos(phi), 50 * std::sin(phi)),
                        Vec3(0, std::cos(phi), std::sin(phi)), true, 0});
    }
    const PoseTrajectory raw = attach_poses(path, 5.0);
    const double bound = 0.5 * M_PI / 180.0;
    for (auto _ : state)
        benchmark::DoNotOptimize(densify_slerp(raw, bound, 0.05));
    state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(raw.size()));
}
BENCHMARK(BM_Densify);

BENCHMARK_MAIN();
