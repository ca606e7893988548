#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace strokemap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Every length in this library is millimeters.

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Rotation matrix taking unit vector `from` onto unit vector `to`.
// Parallel inputs give the exact identity. Antiparallel inputs rotate pi
// about a deterministic axis orthogonal to `from`: the coordinate axis
// least aligned with `from` (smallest index on ties), projected and
// normalized. rotation_between((0,0,1), (0,0,-1)) is a pi turn about x.
Mat3 rotation_between(const Vec3& from, const Vec3& to);

// Unit quaternion, scalar-first. Canonical form: w > 0, or w == 0 and the
// first nonzero of (x,y,z) positive, so equal rotations compare equal.
struct UnitQuat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static UnitQuat identity() { return {}; }
    static UnitQuat from_axis_angle(const Vec3& axis, double angle);
    static UnitQuat from_matrix(const Mat3& R);

    Mat3 to_matrix() const;
    UnitQuat canonical() const;
    UnitQuat normalized() const;
    double dot(const UnitQuat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
    Vec3 rotate(const Vec3& v) const { return to_matrix() * v; }
};

// Geodesic angle between the two rotations, in [0, pi].
double quat_angle(const UnitQuat& a, const UnitQuat& b);

// Shortest-arc spherical interpolation; t in [0,1] sweeps a to b at
// constant angular velocity. Falls back to normalized lerp below 1e-9 arc.
UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double t);

// SE(3) element, R orthonormal.
struct RigidTransform {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    static RigidTransform identity() { return {}; }
    Vec3 apply(const Vec3& p) const { return R * p + t; }
    RigidTransform compose(const RigidTransform& o) const {  // this * o
        return {R * o.R, R * o.t + t};
    }
    RigidTransform invert() const {
        Mat3 Rt = R.transpose();
        return {Rt, -(Rt * t)};
    }
};

}  // namespace strokemap
