#pragma once

// Independent reference computations used by the unit tests and the
// acceptance run. Nothing here calls into the library's channel or solver
// code; geometry is recomputed from first principles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "irsvlc/geometry.hpp"
#include "irsvlc/random.hpp"

namespace oracle {

using irsvlc::Rng;
using irsvlc::Vec3;

inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline Vec3 unit(const Vec3& v) {
    const double n = std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
    return {v.x / n, v.y / n, v.z / n};
}

inline double len(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

inline Vec3 random_unit(Rng& rng) {
    while (true) {
        const Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double n = len(v);
        if (n > 0.1 && n <= 1.0) return v / n;
    }
}

// Mirror frame built independently: yaw about z after roll about x, applied
// to an explicit basis.
struct Frame {
    Vec3 center, n, u, v;
    double hu, hv;
};

inline Vec3 roll_yaw(const Vec3& p, double roll_deg, double yaw_deg) {
    const double r = rad(roll_deg), y = rad(yaw_deg);
    const Vec3 a{p.x, p.y * std::cos(r) - p.z * std::sin(r), p.y * std::sin(r) + p.z * std::cos(r)};
    return {a.x * std::cos(y) - a.y * std::sin(y), a.x * std::sin(y) + a.y * std::cos(y), a.z};
}

inline Frame frame_of(const irsvlc::MirrorPose& p) {
    Frame f;
    f.center = p.center;
    f.n = roll_yaw(p.base_normal, p.roll_deg, p.yaw_deg);
    f.u = roll_yaw(p.base_width_axis, p.roll_deg, p.yaw_deg);
    f.v = irsvlc::cross(f.n, f.u);
    f.hu = p.half_width;
    f.hv = p.half_height;
    return f;
}

// A source/destination pair that reflects through a known interior point of
// a randomly posed mirror.
struct SpecularCase {
    Vec3 src, dst;
    irsvlc::MirrorPose pose;
    Vec3 hit;
};

inline SpecularCase random_specular_case(Rng& rng) {
    SpecularCase c;
    c.pose.center = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    c.pose.base_normal = {0, 1, 0};
    c.pose.base_width_axis = {1, 0, 0};
    c.pose.roll_deg = rng.uniform(-45, 45);
    c.pose.yaw_deg = rng.uniform(-45, 45);
    c.pose.half_width = rng.uniform(0.1, 0.6);
    c.pose.half_height = rng.uniform(0.1, 0.6);
    const Frame f = frame_of(c.pose);
    c.hit = f.center + f.u * (0.9 * f.hu * rng.uniform(-1, 1)) + f.v * (0.9 * f.hv * rng.uniform(-1, 1));
    Vec3 in;
    do in = random_unit(rng);
    while (irsvlc::dot(in, f.n) < 0.2);
    // Mirror `in` about the normal for the outgoing direction.
    const Vec3 out = f.n * (2.0 * irsvlc::dot(in, f.n)) - in;
    c.src = c.hit + in * rng.uniform(0.5, 3.0);
    c.dst = c.hit + out * rng.uniform(0.5, 3.0);
    return c;
}

struct GridMinimum {
    double u = 0.0, v = 0.0;
    double step_u = 0.0, step_v = 0.0;
};

// Fermat's principle by brute force: the point of an n x n lattice spanning
// the mirror that minimizes |src - p| + |p - dst|.
inline GridMinimum fermat_grid(const Vec3& src, const Vec3& dst, const irsvlc::MirrorPose& pose, int n = 400) {
    const Frame f = frame_of(pose);
    GridMinimum g;
    g.step_u = 2.0 * f.hu / (n - 1);
    g.step_v = 2.0 * f.hv / (n - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double u = -f.hu + i * g.step_u;
        for (int j = 0; j < n; ++j) {
            const double v = -f.hv + j * g.step_v;
            const Vec3 p = f.center + f.u * u + f.v * v;
            const double l = len(p - src) + len(dst - p);
            if (l < best) {
                best = l;
                g.u = u;
                g.v = v;
            }
        }
    }
    return g;
}

// Local mirror coordinates of a point.
inline std::pair<double, double> local_uv(const Vec3& p, const irsvlc::MirrorPose& pose) {
    const Frame f = frame_of(pose);
    return {irsvlc::dot(p - f.center, f.u), irsvlc::dot(p - f.center, f.v)};
}

// Generalized Lambertian emitter of order m into a small flat collector.
inline double kernel(const Vec3& p, const Vec3& pn, double m, const Vec3& q, const Vec3& qn, double area,
                     double fov_deg) {
    const Vec3 d = q - p;
    const double r = len(d);
    const double ce = irsvlc::dot(pn, d) / r;
    const double ci = -irsvlc::dot(qn, d) / r;
    if (ce <= 0 || ci <= 0 || ci < std::cos(rad(fov_deg))) return 0.0;
    return (m + 1) * area / (2 * std::numbers::pi * r * r) * std::pow(ce, m) * ci;
}

// Monte-Carlo estimate of the first-order diffuse gain through one wall
// rectangle: integrate over wall points the AP irradiance density times the
// reflectivity times the Lambertian re-emission into the receiver.
struct WallRect {
    Vec3 origin, a, b, normal;  // points origin + s*a + t*b, s,t in [0,1]
    double reflectivity;
};

inline double monte_carlo_wall(const Vec3& ap, const Vec3& ap_n, double m, const Vec3& rx, const Vec3& rx_n,
                               double rx_area, double rx_fov_deg, const WallRect& w, std::size_t samples,
                               std::uint64_t seed) {
    Rng rng(seed);
    const double wall_area = len(irsvlc::cross(w.a, w.b));
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const Vec3 p = w.origin + w.a * rng.uniform() + w.b * rng.uniform();
        const double in = kernel(ap, ap_n, m, p, w.normal, 1.0, 90.0);
        if (in <= 0) continue;
        acc += in * w.reflectivity * kernel(p, w.normal, 1.0, rx, rx_n, rx_area, rx_fov_deg);
    }
    return acc / static_cast<double>(samples) * wall_area;
}

// Utility of an AP map given per-(user, AP) spectral efficiencies, with equal
// airtime among co-served users.
inline double ap_map_utility(const std::vector<int>& map, const std::vector<std::vector<double>>& se, double eps) {
    std::vector<int> count(se.empty() ? 0 : se[0].size(), 0);
    for (int l : map) ++count[static_cast<std::size_t>(l)];
    double u = 0;
    for (std::size_t k = 0; k < map.size(); ++k) {
        const auto l = static_cast<std::size_t>(map[k]);
        u += std::log(se[k][l] / count[l] + eps);
    }
    return u;
}

// Recursive enumeration of every AP map; returns the best utility.
inline double best_ap_utility(const std::vector<std::vector<double>>& se, double eps) {
    const std::size_t K = se.size(), L = K ? se[0].size() : 0;
    std::vector<int> map(K);
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == K) {
            best = std::max(best, ap_map_utility(map, se, eps));
            return;
        }
        for (std::size_t l = 0; l < L; ++l) {
            map[k] = static_cast<int>(l);
            rec(k + 1);
        }
    };
    rec(0);
    return best;
}

// Best sum_i ln(tau_i r_i) over the simplex grid with spacing 1/steps and
// every tau_i > 0.
inline double best_simplex_utility(const std::vector<double>& rate, int steps = 100) {
    const std::size_t n = rate.size();
    std::vector<int> parts(n);
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == n) {
            if (left < 1) return;
            parts[i] = left;
            double u = 0;
            for (std::size_t j = 0; j < n; ++j) u += std::log(parts[j] / static_cast<double>(steps) * rate[j]);
            best = std::max(best, u);
            return;
        }
        for (int p = 1; p <= left - static_cast<int>(n - 1 - i); ++p) {
            parts[i] = p;
            rec(i + 1, left - p);
        }
    };
    rec(0, steps);
    return best;
}

}  // namespace oracle
