#pragma once

#include <string>
#include <vector>

#include "strokemap/geom.hpp"
#include "strokemap/mapping.hpp"

namespace strokemap {

// One pen pose: tip position, orientation (local +z is the pen axis, which
// points into the surface), and the surface normal it was built from.
struct PenPose {
    Vec3 p = Vec3::Zero();
    UnitQuat q;
    Vec3 n = Vec3(0.0, 0.0, 1.0);
    bool pen_down = true;
    int stroke = -1;  // source stroke, -1 for travel
};

using PoseTrajectory = std::vector<PenPose>;

// Orients a pose at every path point. The pen axis opposes the normal; roll
// is carried along the path by rotating each frame with the normal change,
// seeded from world x (or world y at a degenerate start) projected into the
// first tangent plane. Pen-up points hover `standoff` above the surface.
PoseTrajectory attach_poses(const SurfacePath& path, double standoff = 5.0);

// Inserts interpolated poses so consecutive steps stay within both bounds:
// orientations travel the shortest arc, positions travel straight. Original
// poses are preserved bit-for-bit; inserted poses are pen-down only when
// both neighbors are. Angles in radians.
PoseTrajectory densify_slerp(const PoseTrajectory& traj, double max_step_angle,
                             double max_step_dist);

struct OrientationJump {
    std::size_t index = 0;  // pose following the jump
    double angle = 0.0;
};

// Consecutive pen-down pose pairs whose orientation step exceeds the bound.
std::vector<OrientationJump> discontinuity_report(const PoseTrajectory& traj,
                                                  double angle_bound);

// Hand-frame correction for a regrasped tool: where simulation assumed the
// hand held the pen, reality holds it elsewhere; the corrected hand target
// keeps the pen tip where simulation put it.
struct GraspFrames {
    RigidTransform pen_in_world_sim;   // simulated pen pose
    RigidTransform pen_in_world_real;  // measured pen pose after regrasp
    RigidTransform hand_in_pen_sim;    // hand relative to pen, simulated
};

RigidTransform correct_grasp(const GraspFrames& frames);

// Right-composes every pose with the sim-to-real pen offset so the executed
// tip path matches the planned one.
PoseTrajectory apply_correction(const PoseTrajectory& traj, const GraspFrames& frames);

enum class PoseStatus { Executed, Skipped, LiftUp, LiftTravel };

struct AnnotatedPose {
    PenPose pose;
    PoseStatus status = PoseStatus::Executed;
};

// Deviation-triggered skip/re-entry plan. One skip event opens each run of
// measured points beyond the threshold; its lift segment climbs `lift` along
// the local normal, travels high, and descends onto the next pose.
struct RecoveryPlan {
    std::vector<AnnotatedPose> poses;
    std::vector<double> deviations;  // one per pen-down pose, planned vs measured
    int skip_events = 0;
    int lift_segments = 0;
};

// `measured` holds one tip position per pen-down pose, in order; a length
// mismatch is an error, as is a non-positive threshold.
RecoveryPlan detect_and_recover(const PoseTrajectory& planned,
                                const std::vector<Vec3>& measured, double threshold = 2.0,
                                double lift = 10.0);

}  // namespace strokemap
