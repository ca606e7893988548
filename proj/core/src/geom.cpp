#include "strokemap/geom.hpp"

#include <cmath>

namespace strokemap {

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
    const Vec3 axis = from.cross(to);
    const double c = from.dot(to);
    const double s2 = axis.squaredNorm();
    if (s2 == 0.0 && c > 0.0) return Mat3::Identity();
    if (c < -1.0 + 1e-12) {
        // Antiparallel: pi about the coordinate axis least aligned with `from`.
        int least = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(from[i]) < std::abs(from[least])) least = i;
        Vec3 a = Vec3::Unit(least);
        a = (a - from * from.dot(a)).normalized();
        return 2.0 * a * a.transpose() - Mat3::Identity();
    }
    Mat3 K;
    K << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
    return Mat3::Identity() + K + K * K * (1.0 / (1.0 + c));
}

UnitQuat UnitQuat::from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 a = axis.normalized();
    const double h = 0.5 * angle, s = std::sin(h);
    return UnitQuat{std::cos(h), a.x() * s, a.y() * s, a.z() * s}.canonical();
}

UnitQuat UnitQuat::from_matrix(const Mat3& R) {
    // Shepperd's method: branch on the largest diagonal combination.
    UnitQuat q;
    const double tr = R.trace();
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q.w = 0.25 * s;
        q.x = (R(2, 1) - R(1, 2)) / s;
        q.y = (R(0, 2) - R(2, 0)) / s;
        q.z = (R(1, 0) - R(0, 1)) / s;
    } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
        double s = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2)) * 2.0;
        q.w = (R(2, 1) - R(1, 2)) / s;
        q.x = 0.25 * s;
        q.y = (R(0, 1) + R(1, 0)) / s;
        q.z = (R(0, 2) + R(2, 0)) / s;
    } else if (R(1, 1) > R(2, 2)) {
        double s = std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2)) * 2.0;
        q.w = (R(0, 2) - R(2, 0)) / s;
        q.x = (R(0, 1) + R(1, 0)) / s;
        q.y = 0.25 * s;
        q.z = (R(1, 2) + R(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1)) * 2.0;
        q.w = (R(1, 0) - R(0, 1)) / s;
        q.x = (R(0, 2) + R(2, 0)) / s;
        q.y = (R(1, 2) + R(2, 1)) / s;
        q.z = 0.25 * s;
    }
    return q.normalized().canonical();
}

Mat3 UnitQuat::to_matrix() const {
    Mat3 R;
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, xz = x * z, yz = y * z;
    const double wx = w * x, wy = w * y, wz = w * z;
    R << 1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy),
         2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx),
         2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy);
    return R;
}

UnitQuat UnitQuat::canonical() const {
    const double* c[4] = {&w, &x, &y, &z};
    for (const double* v : c) {
        if (*v > 0.0) return *this;
        if (*v < 0.0) return {-w, -x, -y, -z};
    }
    return *this;  // all zero: caller holds an invalid quat anyway
}

UnitQuat UnitQuat::normalized() const {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n == 0.0) throw Error("cannot normalize zero quaternion");
    return {w / n, x / n, y / n, z / n};
}

double quat_angle(const UnitQuat& a, const UnitQuat& b) {
    const double d = std::min(1.0, std::abs(a.dot(b)));
    return 2.0 * std::acos(d);
}

UnitQuat slerp(const UnitQuat& a, const UnitQuat& b, double t) {
    UnitQuat e = b;
    double d = a.dot(b);
    if (d < 0.0) {  // take the short arc
        e = {-b.w, -b.x, -b.y, -b.z};
        d = -d;
    }
    d = std::min(1.0, d);
    const double ang = std::acos(d);
    double ca, cb;
    if (ang < 1e-9) {
        ca = 1.0 - t;
        cb = t;
    } else {
        const double s = std::sin(ang);
        ca = std::sin((1.0 - t) * ang) / s;
        cb = std::sin(t * ang) / s;
    }
    UnitQuat r{ca * a.w + cb * e.w, ca * a.x + cb * e.x, ca * a.y + cb * e.y, ca * a.z + cb * e.z};
    return r.normalized().canonical();
}

}  // namespace strokemap
