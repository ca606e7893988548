#include "strokemap/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace strokemap {

namespace {

Vec3 unit_or_throw(const Vec3& v, const char* what) {
    const double len = v.norm();
    if (!(len > 1e-12)) throw Error(std::string(what) + " must be nonzero");
    return v / len;
}

UnitQuat frame_quat(const Vec3& x, const Vec3& z) {
    Mat3 r;
    r.col(0) = x;
    r.col(1) = z.cross(x);
    r.col(2) = z;
    return UnitQuat::from_matrix(r);
}

}  // namespace

PoseTrajectory attach_poses(const SurfacePath& path, double standoff) {
    PoseTrajectory traj;
    traj.reserve(path.size());
    Vec3 prev_z = Vec3::Zero(), prev_x = Vec3::Zero();
    for (const auto& pt : path) {
        const Vec3 n = unit_or_throw(pt.n, "path normal");
        const Vec3 z = -n;  // pen axis points into the surface
        Vec3 x;
        if (traj.empty()) {
            x = Vec3(1.0, 0.0, 0.0);
            x -= x.dot(z) * z;
            if (x.norm() < 1e-9) {
                x = Vec3(0.0, 1.0, 0.0);
                x -= x.dot(z) * z;
            }
            x.normalize();
        } else {
            x = rotation_between(prev_z, z) * prev_x;
            x -= x.dot(z) * z;  // keep the frame orthonormal as error accrues
            x.normalize();
        }
        PenPose pose;
        pose.n = n;
        pose.pen_down = pt.pen_down;
        pose.stroke = pt.stroke;
        pose.p = pt.pen_down ? pt.p : Vec3(pt.p + n * standoff);
        pose.q = frame_quat(x, z);
        traj.push_back(pose);
        prev_z = z;
        prev_x = x;
    }
    return traj;
}

PoseTrajectory densify_slerp(const PoseTrajectory& traj, double max_step_angle,
                             double max_step_dist) {
    if (!(max_step_angle > 0.0) || !(max_step_dist > 0.0))
        throw Error("step bounds must be positive");
    PoseTrajectory out;
    if (traj.empty()) return out;
    out.reserve(traj.size());
    out.push_back(traj.front());
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const PenPose& a = traj[i - 1];
        const PenPose& b = traj[i];
        const double ang = quat_angle(a.q, b.q);
        const double dist = (b.p - a.p).norm();
        const int steps =
            std::max(1, int(std::ceil(std::max(ang / max_step_angle, dist / max_step_dist))));
        for (int j = 1; j < steps; ++j) {
            const double t = double(j) / double(steps);
            PenPose mid;
            mid.q = slerp(a.q, b.q, t);
            mid.p = a.p + (b.p - a.p) * t;
            Vec3 n = a.n + (b.n - a.n) * t;
            mid.n = n.norm() > 1e-12 ? Vec3(n.normalized()) : a.n;
            mid.pen_down = a.pen_down && b.pen_down;
            mid.stroke = a.stroke == b.stroke ? a.stroke : -1;
            out.push_back(mid);
        }
        out.push_back(b);
    }
    return out;
}

std::vector<OrientationJump> discontinuity_report(const PoseTrajectory& traj,
                                                  double angle_bound) {
    std::vector<OrientationJump> out;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (!traj[i - 1].pen_down || !traj[i].pen_down) continue;
        const double ang = quat_angle(traj[i - 1].q, traj[i].q);
        if (ang > angle_bound) out.push_back({i, ang});
    }
    return out;
}

RigidTransform correct_grasp(const GraspFrames& frames) {
    return frames.pen_in_world_real.invert()
        .compose(frames.pen_in_world_sim)
        .compose(frames.hand_in_pen_sim);
}

PoseTrajectory apply_correction(const PoseTrajectory& traj, const GraspFrames& frames) {
    const RigidTransform delta =
        frames.pen_in_world_real.invert().compose(frames.pen_in_world_sim);
    PoseTrajectory out;
    out.reserve(traj.size());
    for (const PenPose& pose : traj) {
        const Mat3 r = pose.q.to_matrix();
        PenPose c = pose;
        c.p = pose.p + r * delta.t;
        c.q = UnitQuat::from_matrix(r * delta.R);
        out.push_back(c);
    }
    return out;
}

RecoveryPlan detect_and_recover(const PoseTrajectory& planned,
                                const std::vector<Vec3>& measured, double threshold,
                                double lift) {
    if (!(threshold > 0.0)) throw Error("threshold must be positive");
    std::size_t down_count = 0;
    for (const auto& p : planned)
        if (p.pen_down) ++down_count;
    if (down_count != measured.size())
        throw Error("measured trace length mismatch: expected " +
                    std::to_string(down_count) + " points, got " +
                    std::to_string(measured.size()));

    RecoveryPlan plan;
    plan.deviations.reserve(down_count);
    std::vector<bool> above(planned.size(), false);
    {
        std::size_t mi = 0;
        for (std::size_t i = 0; i < planned.size(); ++i) {
            if (!planned[i].pen_down) continue;
            const double d = (measured[mi] - planned[i].p).norm();
            plan.deviations.push_back(d);
            above[i] = d > threshold;
            ++mi;
        }
    }

    auto hover = [&](const PenPose& base, PoseStatus status) {
        AnnotatedPose ap;
        ap.pose = base;
        ap.pose.p = base.p + base.n * lift;
        ap.pose.pen_down = false;
        ap.status = status;
        return ap;
    };

    std::size_t i = 0;
    while (i < planned.size()) {
        if (!planned[i].pen_down || !above[i]) {
            plan.poses.push_back({planned[i], PoseStatus::Executed});
            ++i;
            continue;
        }
        // Maximal run of off-track pen-down poses starting here; one skip
        // event covers the run and everything up to the re-entry pose.
        ++plan.skip_events;
        ++plan.lift_segments;
        std::size_t j = i;
        std::size_t reentry = planned.size();
        while (j < planned.size()) {
            if (planned[j].pen_down && !above[j]) {
                reentry = j;
                break;
            }
            ++j;
        }
        const PenPose& base = plan.poses.empty() ? planned[i] : plan.poses.back().pose;
        plan.poses.push_back(hover(base, PoseStatus::LiftUp));
        for (std::size_t k = i; k < j; ++k)
            plan.poses.push_back({planned[k], PoseStatus::Skipped});
        if (reentry < planned.size())
            plan.poses.push_back(hover(planned[reentry], PoseStatus::LiftTravel));
        i = j;
    }
    return plan;
}

}  // namespace strokemap
