#pragma once

// Vector math, mirror poses and the image-source construction used for
// specular paths. All functions are pure.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace irsvlc {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

    constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(b - a); }

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Cosine of an angle in degrees, exact at multiples of 60 and 90.
inline double cos_deg(double deg) {
    const double r = std::fmod(std::abs(deg), 360.0);
    if (r == 0.0) return 1.0;
    if (r == 60.0 || r == 300.0) return 0.5;
    if (r == 90.0 || r == 270.0) return 0.0;
    if (r == 120.0 || r == 240.0) return -0.5;
    if (r == 180.0) return -1.0;
    return std::cos(deg_to_rad(r));
}
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Rotation about the room x-axis followed by rotation about the room z-axis,
/// both right-handed.
inline Vec3 rotate_roll_yaw(const Vec3& v, double roll_deg, double yaw_deg) {
    const double cr = std::cos(deg_to_rad(roll_deg));
    const double sr = std::sin(deg_to_rad(roll_deg));
    const double cy = std::cos(deg_to_rad(yaw_deg));
    const double sy = std::sin(deg_to_rad(yaw_deg));
    const Vec3 r{v.x, cr * v.y - sr * v.z, sr * v.y + cr * v.z};
    return {cy * r.x - sy * r.y, sy * r.x + cy * r.y, r.z};
}

inline Vec3 rotate_normal(const Vec3& base_normal, double roll_deg, double yaw_deg) {
    return rotate_roll_yaw(base_normal, roll_deg, yaw_deg);
}

/// A flat rectangular mirror. `base_normal` is the unrotated wall-inward
/// normal; `base_width_axis` is the unrotated in-plane axis along which
/// `half_width` is measured (the height axis completes the frame).
struct MirrorPose {
    Vec3 center;
    Vec3 base_normal{0.0, 1.0, 0.0};
    Vec3 base_width_axis{1.0, 0.0, 0.0};
    double roll_deg = 0.0;
    double yaw_deg = 0.0;
    double half_width = 0.0;
    double half_height = 0.0;

    Vec3 normal() const { return rotate_normal(base_normal, roll_deg, yaw_deg); }
    Vec3 width_axis() const { return rotate_roll_yaw(base_width_axis, roll_deg, yaw_deg); }
    Vec3 height_axis() const { return cross(normal(), width_axis()); }

    bool operator==(const MirrorPose&) const = default;
};

/// One photodiode of an angle-diversity receiver. Elevation is measured up
/// from the horizontal plane; fov_deg is the acceptance half-angle.
struct BranchOrientation {
    double azimuth_deg = 0.0;
    double elevation_deg = 90.0;
    double fov_deg = 90.0;

    Vec3 normal() const {
        const double el = deg_to_rad(elevation_deg);
        const double az = deg_to_rad(azimuth_deg);
        return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
    }

    bool operator==(const BranchOrientation&) const = default;
};

struct IncidenceCosines {
    double cos_irradiance = 0.0;
    double cos_incidence = 0.0;
    double distance_m = 0.0;
};

/// Emission cosine at `src`, arrival cosine at `dst` and their separation.
/// Back-facing cosines clamp to zero.
inline IncidenceCosines incidence_cosines(const Vec3& src, const Vec3& src_normal, const Vec3& dst,
                                          const Vec3& dst_normal) {
    const Vec3 d = dst - src;
    const double dist = norm(d);
    if (!(dist > 0.0)) throw std::invalid_argument("incidence_cosines: source and destination coincide");
    const Vec3 u = d / dist;
    return {std::max(0.0, dot(src_normal, u)), std::max(0.0, -dot(dst_normal, u)), dist};
}

/// Inclusive at the boundary.
inline bool within_fov(double cos_incidence, double fov_deg) {
    // Exact for the boundary case cos_incidence == cos(fov).
    return cos_incidence >= std::cos(deg_to_rad(fov_deg));
}

/// Mirror image of `p` across the infinite plane of `mirror`.
inline Vec3 image_point(const Vec3& p, const MirrorPose& mirror) {
    const Vec3 n = mirror.normal();
    return p - n * (2.0 * dot(p - mirror.center, n));
}

/// Reflection point on the finite mirror for the path src -> mirror -> dst,
/// or nothing when either endpoint is behind the plane or the hit point
/// falls outside the mirror rectangle.
inline std::optional<Vec3> specular_point(const Vec3& src, const Vec3& dst, const MirrorPose& mirror) {
    const Vec3 n = mirror.normal();
    const double hs = dot(src - mirror.center, n);
    const double hd = dot(dst - mirror.center, n);
    if (!(hs > 0.0) || !(hd > 0.0)) return std::nullopt;

    // Along the segment image->dst the signed height goes from -hs to hd.
    const Vec3 img = src - n * (2.0 * hs);
    const double t = hs / (hs + hd);
    const Vec3 q = img + (dst - img) * t;

    const Vec3 local = q - mirror.center;
    if (std::abs(dot(local, mirror.width_axis())) > mirror.half_width) return std::nullopt;
    if (std::abs(dot(local, mirror.height_axis())) > mirror.half_height) return std::nullopt;
    return q;
}

}  // namespace irsvlc
