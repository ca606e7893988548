#include <doctest.h>

#include <cmath>
#include <random>

#include "strokemap/trajectory.hpp"

using namespace strokemap;

namespace {

std::mt19937_64 rng(1234);
double unit_double() { return (rng() >> 11) * 0x1.0p-53; }

Vec3 random_unit() {
    while (true) {
        Vec3 v(2 * unit_double() - 1, 2 * unit_double() - 1, 2 * unit_double() - 1);
        const double n = v.norm();
        if (n > 1e-3 && n <= 1.0) return v / n;
    }
}

RigidTransform random_rigid(double tmax) {
    return {UnitQuat::from_axis_angle(random_unit(), (2 * unit_double() - 1) * 3.0)
                .to_matrix(),
            Vec3(unit_double(), unit_double(), unit_double()) * tmax};
}

SurfacePath flat_path(int n) {
    SurfacePath p;
    for (int i = 0; i < n; ++i)
        p.push_back({Vec3(double(i), 0, 0), Vec3(0, 0, 1), true, 0});
    return p;
}

// A path walking across the sharp edge between a box top and its side wall.
SurfacePath edge_path() {
    SurfacePath p;
    for (int i = 0; i < 5; ++i)
        p.push_back({Vec3(double(i), 0, 50), Vec3(0, 0, 1), true, 0});
    for (int i = 1; i < 5; ++i)
        p.push_back({Vec3(5, 0, 50 - double(i)), Vec3(1, 0, 0), true, 0});
    return p;
}

}  // namespace

TEST_CASE("poses oppose the surface normal and hover when pen is up") {
    SurfacePath path = flat_path(3);
    path[1].pen_down = false;
    const PoseTrajectory traj = attach_poses(path, 5.0);
    REQUIRE(traj.size() == 3);
    for (const auto& pose : traj) {
        // Pen axis (local +z) points into the surface.
        const Vec3 axis = pose.q.rotate(Vec3(0, 0, 1));
        CHECK((axis + pose.n).norm() < 1e-12);
        const Mat3 r = pose.q.to_matrix();
        CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-12);
    }
    CHECK(traj[0].p == Vec3(0, 0, 0));
    CHECK((traj[1].p - Vec3(1, 0, 5)).norm() < 1e-12);  // standoff along the normal
    CHECK(!traj[1].pen_down);
}

TEST_CASE("roll is carried continuously along a bending path") {
    SurfacePath path;
    for (int i = 0; i <= 90; ++i) {
        const double phi = M_PI * double(i) / 180.0;
        path.push_back({Vec3(0, 50 * std::cos(phi), 50 * std::sin(phi)),
                        Vec3(0, std::cos(phi), std::sin(phi)), true, 0});
    }
    const PoseTrajectory traj = attach_poses(path, 5.0);
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double step = quat_angle(traj[i - 1].q, traj[i].q);
        CHECK(step < 0.03);  // 1 degree of normal change plus rounding
    }
    // Orientation never flips even after a quarter turn of the normal.
    const Vec3 axis_last = traj.back().q.rotate(Vec3(0, 0, 1));
    CHECK((axis_last + traj.back().n).norm() < 1e-9);
}

TEST_CASE("densification bounds both step angle and step distance") {
    PoseTrajectory traj;
    traj.push_back({Vec3(0, 0, 0), UnitQuat::identity(), Vec3(0, 0, 1), true, 0});
    traj.push_back({Vec3(10, 0, 0),
                    UnitQuat::from_axis_angle(Vec3(1, 0, 0), M_PI / 2), Vec3(0, -1, 0),
                    true, 0});
    const double max_ang = 5.0 * M_PI / 180.0, max_dist = 2.0;
    const PoseTrajectory dense = densify_slerp(traj, max_ang, max_dist);
    REQUIRE(dense.size() > 2);
    CHECK(dense.front().p == traj.front().p);
    CHECK(dense.back().p == traj.back().p);
    for (std::size_t i = 1; i < dense.size(); ++i) {
        CHECK(quat_angle(dense[i - 1].q, dense[i].q) <= max_ang + 1e-9);
        CHECK((dense[i].p - dense[i - 1].p).norm() <= max_dist + 1e-9);
    }
    // pi/2 at 5 degrees per step: 18 intervals, 17 inserted poses.
    CHECK(dense.size() == 19);
}

TEST_CASE("densification midpoint matches the closed-form interpolant") {
    PoseTrajectory traj;
    const UnitQuat qa = UnitQuat::from_axis_angle(Vec3(0, 1, 0), 0.3);
    const UnitQuat qb = UnitQuat::from_axis_angle(Vec3(0, 1, 0), 1.1);
    traj.push_back({Vec3(0, 0, 0), qa, Vec3(0, 0, 1), true, 0});
    traj.push_back({Vec3(1, 0, 0), qb, Vec3(0, 0, 1), true, 0});
    // One inserted pose: force exactly two intervals. For a shared axis the
    // midpoint is the closed-form rotation at the mean angle.
    const PoseTrajectory dense = densify_slerp(traj, 0.5, 10.0);
    REQUIRE(dense.size() == 3);
    CHECK(quat_angle(dense[1].q, UnitQuat::from_axis_angle(Vec3(0, 1, 0), 0.7)) < 1e-7);
    CHECK((dense[1].p - Vec3(0.5, 0, 0)).norm() < 1e-7);
    // Endpoints are the originals, bit for bit.
    CHECK(dense[0].q.w == qa.w);
    CHECK(dense[2].q.w == qb.w);
    CHECK(dense[0].p == traj[0].p);
    CHECK(dense[2].p == traj[1].p);
}

TEST_CASE("inserted poses draw only between pen-down neighbors") {
    PoseTrajectory traj;
    traj.push_back({Vec3(0, 0, 0), UnitQuat::identity(), Vec3(0, 0, 1), true, 0});
    traj.push_back({Vec3(5, 0, 0), UnitQuat::identity(), Vec3(0, 0, 1), false, -1});
    traj.push_back({Vec3(10, 0, 0), UnitQuat::identity(), Vec3(0, 0, 1), true, 1});
    const PoseTrajectory dense = densify_slerp(traj, 1.0, 2.0);
    int down = 0, up = 0;
    for (const auto& p : dense) (p.pen_down ? down : up)++;
    CHECK(down == 2);  // only the original pen-down poses
    CHECK(up == int(dense.size()) - 2);
}

TEST_CASE("an edge crossing is one orientation jump that densification removes") {
    const PoseTrajectory raw = attach_poses(edge_path(), 5.0);
    const double bound = M_PI / 4.0;
    const auto jumps = discontinuity_report(raw, bound);
    REQUIRE(jumps.size() == 1);
    CHECK(jumps[0].angle == doctest::Approx(M_PI / 2.0).epsilon(1e-9));

    const PoseTrajectory dense = densify_slerp(raw, 5.0 * M_PI / 180.0, 2.0);
    CHECK(discontinuity_report(dense, 5.0 * M_PI / 180.0 + 1e-9).empty());
}

TEST_CASE("grasp correction reproduces the simulated tool flange target") {
    for (int i = 0; i < 1000; ++i) {
        GraspFrames f;
        f.pen_in_world_sim = random_rigid(100.0);
        f.pen_in_world_real = random_rigid(100.0);
        f.hand_in_pen_sim = random_rigid(10.0);
        const RigidTransform corrected = correct_grasp(f);
        const RigidTransform left = f.pen_in_world_real.compose(corrected);
        const RigidTransform right = f.pen_in_world_sim.compose(f.hand_in_pen_sim);
        CHECK((left.R - right.R).norm() < 1e-9);
        CHECK((left.t - right.t).norm() < 1e-9);
    }
}

TEST_CASE("corrected trajectories restore the planned tip path") {
    for (int trial = 0; trial < 50; ++trial) {
        GraspFrames f;
        f.pen_in_world_sim = random_rigid(50.0);
        // The regrasp disturbs the pen pose rigidly.
        const RigidTransform disturb = random_rigid(5.0);
        f.pen_in_world_real = f.pen_in_world_sim.compose(disturb);
        f.hand_in_pen_sim = random_rigid(10.0);

        PoseTrajectory planned;
        for (int i = 0; i < 20; ++i) {
            const RigidTransform pose = random_rigid(30.0);
            planned.push_back({pose.t, UnitQuat::from_matrix(pose.R), Vec3(0, 0, 1),
                               true, 0});
        }
        const PoseTrajectory corrected = apply_correction(planned, f);
        REQUIRE(corrected.size() == planned.size());
        // Executing a corrected pose with the disturbed tool reproduces the
        // planned tip frame: corrected ∘ disturb == planned.
        for (std::size_t i = 0; i < planned.size(); ++i) {
            const Mat3 rp = planned[i].q.to_matrix();
            const Mat3 rc = corrected[i].q.to_matrix();
            const RigidTransform real_exec =
                RigidTransform{rc, corrected[i].p}.compose(disturb);
            CHECK((real_exec.R - rp).norm() < 1e-9);
            CHECK((real_exec.t - planned[i].p).norm() < 1e-9);
        }
    }
}

TEST_CASE("four deviation spikes cause four skips and four lift segments") {
    PoseTrajectory planned;
    for (int i = 0; i < 100; ++i)
        planned.push_back({Vec3(double(i), 0, 0), UnitQuat::identity(), Vec3(0, 0, 1),
                           true, 0});
    std::vector<Vec3> measured;
    for (int i = 0; i < 100; ++i) {
        Vec3 p(double(i), 0, 0);
        for (int s : {20, 40, 60, 80})
            if (i >= s && i < s + 3) p.z() += 5.0;
        measured.push_back(p);
    }
    const RecoveryPlan plan = detect_and_recover(planned, measured, 2.0, 10.0);
    CHECK(plan.skip_events == 4);
    CHECK(plan.lift_segments == 4);
    int skipped = 0, lifts = 0, travels = 0;
    for (const auto& ap : plan.poses) {
        if (ap.status == PoseStatus::Skipped) ++skipped;
        if (ap.status == PoseStatus::LiftUp) ++lifts;
        if (ap.status == PoseStatus::LiftTravel) ++travels;
    }
    CHECK(skipped == 12);
    CHECK(lifts == 4);
    CHECK(travels == 4);
    CHECK(plan.poses.size() == planned.size() + 8);
    CHECK(plan.deviations.size() == 100);
}

TEST_CASE("a clean trace passes through untouched") {
    PoseTrajectory planned;
    for (int i = 0; i < 30; ++i)
        planned.push_back({Vec3(double(i), 0, 0), UnitQuat::identity(), Vec3(0, 0, 1),
                           true, 0});
    std::vector<Vec3> measured;
    for (const auto& p : planned) measured.push_back(p.p + Vec3(0, 0, 0.5));
    const RecoveryPlan plan = detect_and_recover(planned, measured, 2.0, 10.0);
    CHECK(plan.skip_events == 0);
    CHECK(plan.lift_segments == 0);
    REQUIRE(plan.poses.size() == planned.size());
    for (const auto& ap : plan.poses) CHECK(ap.status == PoseStatus::Executed);
}

TEST_CASE("lift segments climb along the normal and re-enter before the next pose") {
    PoseTrajectory planned;
    for (int i = 0; i < 10; ++i)
        planned.push_back({Vec3(double(i), 0, 0), UnitQuat::identity(), Vec3(0, 0, 1),
                           true, 0});
    std::vector<Vec3> measured;
    for (int i = 0; i < 10; ++i)
        measured.push_back(Vec3(double(i), 0, i == 4 ? 9.0 : 0.0));
    const RecoveryPlan plan = detect_and_recover(planned, measured, 2.0, 10.0);
    REQUIRE(plan.skip_events == 1);
    // Expected sequence: 0..3 executed, lift-up, skipped 4, lift-travel, 5..9.
    CHECK(plan.poses[4].status == PoseStatus::LiftUp);
    CHECK((plan.poses[4].pose.p - Vec3(3, 0, 10)).norm() < 1e-12);
    CHECK(!plan.poses[4].pose.pen_down);
    CHECK(plan.poses[5].status == PoseStatus::Skipped);
    CHECK(plan.poses[6].status == PoseStatus::LiftTravel);
    CHECK((plan.poses[6].pose.p - Vec3(5, 0, 10)).norm() < 1e-12);
    CHECK(plan.poses[7].status == PoseStatus::Executed);
    CHECK(plan.poses[7].pose.p == Vec3(5, 0, 0));
}

TEST_CASE("a deviation running to the end lifts without re-entry") {
    PoseTrajectory planned;
    for (int i = 0; i < 6; ++i)
        planned.push_back({Vec3(double(i), 0, 0), UnitQuat::identity(), Vec3(0, 0, 1),
                           true, 0});
    std::vector<Vec3> measured;
    for (int i = 0; i < 6; ++i)
        measured.push_back(Vec3(double(i), 0, i >= 4 ? 8.0 : 0.0));
    const RecoveryPlan plan = detect_and_recover(planned, measured, 2.0, 10.0);
    CHECK(plan.skip_events == 1);
    int travels = 0;
    for (const auto& ap : plan.poses)
        if (ap.status == PoseStatus::LiftTravel) ++travels;
    CHECK(travels == 0);
    CHECK(plan.poses.back().status == PoseStatus::Skipped);
}

TEST_CASE("pen-up poses inside a skipped run are skipped with it") {
    PoseTrajectory planned;
    for (int i = 0; i < 8; ++i) {
        const bool down = (i != 3);  // one travel pose mid-run
        planned.push_back({Vec3(double(i), 0, down ? 0.0 : 5.0), UnitQuat::identity(),
                           Vec3(0, 0, 1), down, 0});
    }
    std::vector<Vec3> measured;
    for (int i = 0; i < 8; ++i)
        if (i != 3) measured.push_back(Vec3(double(i), 0, (i == 2 || i == 4) ? 9.0 : 0.0));
    const RecoveryPlan plan = detect_and_recover(planned, measured, 2.0, 10.0);
    CHECK(plan.skip_events == 1);  // one run: poses 2..4 including the travel pose
    int skipped = 0;
    bool travel_pose_skipped = false;
    for (const auto& ap : plan.poses)
        if (ap.status == PoseStatus::Skipped) {
            ++skipped;
            if (!ap.pose.pen_down && ap.pose.p.z() == 5.0) travel_pose_skipped = true;
        }
    CHECK(skipped == 3);
    CHECK(travel_pose_skipped);
}

TEST_CASE("recovery validates threshold and trace length") {
    PoseTrajectory planned;
    planned.push_back({Vec3(0, 0, 0), UnitQuat::identity(), Vec3(0, 0, 1), true, 0});
    CHECK_THROWS_AS(detect_and_recover(planned, {Vec3(0, 0, 0)}, 0.0, 10.0), Error);
    CHECK_THROWS_WITH_AS(detect_and_recover(planned, {}, 2.0, 10.0),
                         doctest::Contains("length mismatch"), Error);
}
