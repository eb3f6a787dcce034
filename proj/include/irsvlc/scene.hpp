#pragma once

// Scenario description: room, access points, mirror arrays, users and
// receiver. Also the surface tiling used by the diffuse engines and the
// seeded generators for mirror poses and user positions.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "irsvlc/error.hpp"
#include "irsvlc/geometry.hpp"
#include "irsvlc/random.hpp"

namespace irsvlc {

struct Reflectivity {
    double walls = 0.8;
    double floor = 0.3;
    double ceiling = 0.8;

    bool operator==(const Reflectivity&) const = default;
};

/// Axis-aligned room spanning [0,length] x [0,width] x [0,height].
struct Room {
    double length = 5.0;
    double width = 5.0;
    double height = 3.0;
    Reflectivity reflectivity;

    bool operator==(const Room&) const = default;
};

struct ApConfig {
    Vec3 position;
    double transmit_power_w = 2.0;
    double half_power_semiangle_deg = 60.0;
    Vec3 normal{0.0, 0.0, -1.0};

    bool operator==(const ApConfig&) const = default;
};

struct AdrConfig {
    std::vector<BranchOrientation> branches;
    double pd_area_m2 = 20e-6;
    double responsivity_a_per_w = 0.4;
    double mount_height_m = 1.0;

    bool operator==(const AdrConfig&) const = default;
};

enum class Wall { XMin, XMax, YMin, YMax };

inline std::string_view wall_name(Wall w) {
    switch (w) {
        case Wall::XMin: return "x0";
        case Wall::XMax: return "x1";
        case Wall::YMin: return "y0";
        case Wall::YMax: return "y1";
    }
    return "?";
}

struct WallFrame {
    Vec3 origin;      // point on the wall at along = 0, height = 0
    Vec3 normal;      // into the room
    Vec3 along_axis;  // horizontal in-plane axis
    double length;    // extent along `along_axis`
};

inline WallFrame wall_frame(const Room& room, Wall w) {
    switch (w) {
        case Wall::XMin: return {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, room.width};
        case Wall::XMax: return {{room.length, 0.0, 0.0}, {-1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, room.width};
        case Wall::YMin: return {{0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, room.length};
        case Wall::YMax: return {{0.0, room.width, 0.0}, {0.0, -1.0, 0.0}, {1.0, 0.0, 0.0}, room.length};
    }
    throw std::invalid_argument("wall_frame: unknown wall");
}

struct AngleRange {
    double lo = -45.0;
    double hi = 45.0;

    bool operator==(const AngleRange&) const = default;
};

inline constexpr double kDefaultMirrorArrayHeight = 2.6;
inline constexpr AngleRange kDefaultMirrorRollRange{-45.0, 45.0};
inline constexpr AngleRange kDefaultMirrorYawRange{-45.0, 45.0};

/// A rows x cols grid of flat mirrors mounted on one wall. `center_along` and
/// `center_height` locate the grid center in wall coordinates. Poses are
/// stored row-major, row 0 lowest.
struct MirrorArrayConfig {
    Wall wall = Wall::YMin;
    double center_along = 2.5;
    double center_height = kDefaultMirrorArrayHeight;
    int rows = 5;
    int cols = 5;
    double element_width_m = 0.25;
    double element_height_m = 0.15;
    double reflectivity = 0.95;
    std::uint64_t rng_seed = 1;
    AngleRange roll_range_deg;
    AngleRange yaw_range_deg;
    std::vector<MirrorPose> poses;

    std::size_t mirror_count() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }

    bool operator==(const MirrorArrayConfig&) const = default;
};

struct DiffuseGrid {
    double first_order_element_m = 0.05;
    double second_order_element_m = 0.20;

    bool operator==(const DiffuseGrid&) const = default;
};

/// Receiver noise: variance N0 * B on the photocurrent.
struct NoiseModel {
    double noise_psd_a2_per_hz = 1e-21;
    double bandwidth_hz = 20e6;

    double variance() const { return noise_psd_a2_per_hz * bandwidth_hz; }

    bool operator==(const NoiseModel&) const = default;
};

enum class MirrorStage { Auto, Greedy, Exhaustive };

struct SolverOptions {
    MirrorStage mirror_stage = MirrorStage::Auto;
    double max_search_space = 1e7;
    double utility_epsilon = 1e-12;
    int max_greedy_passes = 1000;

    bool operator==(const SolverOptions&) const = default;
};

struct RandomUsers {
    int count = 4;
    std::uint64_t rng_seed = 7;

    bool operator==(const RandomUsers&) const = default;
};

using UserSpec = std::variant<std::vector<Vec3>, RandomUsers>;

struct ScenarioConfig {
    Room room;
    std::vector<ApConfig> aps;
    std::vector<MirrorArrayConfig> mirror_arrays;
    UserSpec users = RandomUsers{};
    AdrConfig adr;
    DiffuseGrid diffuse_grid;
    NoiseModel noise;
    SolverOptions solver;
    double time_bin_ns = 0.5;

    std::size_t mirror_count() const {
        std::size_t n = 0;
        for (const auto& a : mirror_arrays) n += a.mirror_count();
        return n;
    }

    bool operator==(const ScenarioConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Generators

inline std::vector<MirrorPose> generate_mirror_poses(const MirrorArrayConfig& array, const Room& room,
                                                     std::uint64_t rng_seed) {
    const WallFrame frame = wall_frame(room, array.wall);
    Rng rng(derive_seed(rng_seed, "mirror-poses"));
    std::vector<MirrorPose> poses;
    poses.reserve(array.mirror_count());
    for (int r = 0; r < array.rows; ++r) {
        for (int c = 0; c < array.cols; ++c) {
            const double along = array.center_along + (c - 0.5 * (array.cols - 1)) * array.element_width_m;
            const double height = array.center_height + (r - 0.5 * (array.rows - 1)) * array.element_height_m;
            MirrorPose pose;
            pose.center = frame.origin + frame.along_axis * along + Vec3{0.0, 0.0, height};
            pose.base_normal = frame.normal;
            pose.base_width_axis = frame.along_axis;
            pose.roll_deg = rng.uniform(array.roll_range_deg.lo, array.roll_range_deg.hi);
            pose.yaw_deg = rng.uniform(array.yaw_range_deg.lo, array.yaw_range_deg.hi);
            pose.half_width = 0.5 * array.element_width_m;
            pose.half_height = 0.5 * array.element_height_m;
            poses.push_back(pose);
        }
    }
    return poses;
}

inline std::vector<Vec3> place_users(const UserSpec& spec, const Room& room, double mount_height_m) {
    if (!(mount_height_m >= 0.0 && mount_height_m < room.height))
        throw ValidationError("adr.mount_height_m", "mount height must lie in [0, room height)");
    if (const auto* explicit_users = std::get_if<std::vector<Vec3>>(&spec)) {
        for (std::size_t i = 0; i < explicit_users->size(); ++i) {
            const Vec3& p = (*explicit_users)[i];
            if (!(p.x >= 0.0 && p.x <= room.length && p.y >= 0.0 && p.y <= room.width && p.z >= 0.0 &&
                  p.z <= room.height))
                throw ValidationError("users[" + std::to_string(i) + "]", "position outside the room");
        }
        return *explicit_users;
    }
    const auto& random_users = std::get<RandomUsers>(spec);
    if (random_users.count < 0) throw ValidationError("users.count", "must be non-negative");
    Rng rng(derive_seed(random_users.rng_seed, "users"));
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(random_users.count));
    for (int i = 0; i < random_users.count; ++i) {
        const double x = rng.uniform(0.0, room.length);
        const double y = rng.uniform(0.0, room.width);
        out.push_back({x, y, mount_height_m});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Surface tiling

enum class Surface { Floor, Ceiling, WallXMin, WallXMax, WallYMin, WallYMax };

struct SurfaceElement {
    Vec3 center;
    Vec3 normal;
    double area_m2 = 0.0;
    double reflectivity = 0.0;
    Surface surface = Surface::Floor;
    // Side lengths: along the wall and vertical for walls, x and y otherwise.
    double width_m = 0.0;
    double height_m = 0.0;
};

namespace detail {

/// Cell boundaries of [0, extent] at pitch `step`; the last cell may be partial.
inline std::vector<double> tile_edges(double extent, double step) {
    const auto n = static_cast<std::size_t>(std::ceil(extent / step - 1e-9));
    std::vector<double> edges(n + 1);
    for (std::size_t i = 0; i < n; ++i) edges[i] = static_cast<double>(i) * step;
    edges[n] = extent;
    return edges;
}

}  // namespace detail

/// Tiles all six faces of the room with square elements of side `element_m`
/// (partial elements at the far edges). Normals point into the room.
inline std::vector<SurfaceElement> discretize_surfaces(const Room& room, double element_m) {
    if (!(element_m > 0.0)) throw ValidationError("element_m", "must be positive");
    const double smallest = std::min({room.length, room.width, room.height});
    if (element_m > smallest) throw ValidationError("element_m", "larger than the smallest room dimension");

    const auto ex = detail::tile_edges(room.length, element_m);
    const auto ey = detail::tile_edges(room.width, element_m);
    const auto ez = detail::tile_edges(room.height, element_m);

    std::vector<SurfaceElement> out;
    out.reserve(2 * (ex.size() * ey.size() + ex.size() * ez.size() + ey.size() * ez.size()));

    // Horizontal faces.
    for (std::size_t i = 0; i + 1 < ex.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ey.size(); ++j) {
            const double cx = 0.5 * (ex[i] + ex[i + 1]);
            const double cy = 0.5 * (ey[j] + ey[j + 1]);
            const double w = ex[i + 1] - ex[i], h = ey[j + 1] - ey[j];
            out.push_back({{cx, cy, 0.0}, {0.0, 0.0, 1.0}, w * h, room.reflectivity.floor, Surface::Floor, w, h});
            out.push_back({{cx, cy, room.height}, {0.0, 0.0, -1.0}, w * h, room.reflectivity.ceiling,
                           Surface::Ceiling, w, h});
        }
    }
    // Walls normal to y.
    for (std::size_t i = 0; i + 1 < ex.size(); ++i) {
        for (std::size_t k = 0; k + 1 < ez.size(); ++k) {
            const double cx = 0.5 * (ex[i] + ex[i + 1]);
            const double cz = 0.5 * (ez[k] + ez[k + 1]);
            const double w = ex[i + 1] - ex[i], h = ez[k + 1] - ez[k];
            out.push_back({{cx, 0.0, cz}, {0.0, 1.0, 0.0}, w * h, room.reflectivity.walls, Surface::WallYMin, w, h});
            out.push_back({{cx, room.width, cz}, {0.0, -1.0, 0.0}, w * h, room.reflectivity.walls,
                           Surface::WallYMax, w, h});
        }
    }
    // Walls normal to x.
    for (std::size_t j = 0; j + 1 < ey.size(); ++j) {
        for (std::size_t k = 0; k + 1 < ez.size(); ++k) {
            const double cy = 0.5 * (ey[j] + ey[j + 1]);
            const double cz = 0.5 * (ez[k] + ez[k + 1]);
            const double w = ey[j + 1] - ey[j], h = ez[k + 1] - ez[k];
            out.push_back({{0.0, cy, cz}, {1.0, 0.0, 0.0}, w * h, room.reflectivity.walls, Surface::WallXMin, w, h});
            out.push_back({{room.length, cy, cz}, {-1.0, 0.0, 0.0}, w * h, room.reflectivity.walls,
                           Surface::WallXMax, w, h});
        }
    }
    return out;
}

inline Surface wall_surface(Wall w) {
    switch (w) {
        case Wall::XMin: return Surface::WallXMin;
        case Wall::XMax: return Surface::WallXMax;
        case Wall::YMin: return Surface::WallYMin;
        case Wall::YMax: return Surface::WallYMax;
    }
    return Surface::Floor;
}

/// Removes each mirror array's footprint from the wall elements. Elements cut
/// by a footprint edge keep the uncovered part of their area; fully covered
/// elements are dropped, so the excluded area is exact at any grid pitch.
inline std::vector<SurfaceElement> exclude_mirror_footprints(std::vector<SurfaceElement> elements,
                                                             const Room& room,
                                                             const std::vector<MirrorArrayConfig>& arrays) {
    if (arrays.empty()) return elements;
    auto overlap = [](double c1, double h1, double c2, double h2) {
        return std::max(0.0, std::min(c1 + h1, c2 + h2) - std::max(c1 - h1, c2 - h2));
    };
    for (auto& e : elements) {
        for (const auto& a : arrays) {
            if (e.surface != wall_surface(a.wall)) continue;
            const WallFrame f = wall_frame(room, a.wall);
            const double along = dot(e.center - f.origin, f.along_axis);
            const double ou = overlap(along, 0.5 * e.width_m, a.center_along, 0.5 * a.cols * a.element_width_m);
            const double ov = overlap(e.center.z, 0.5 * e.height_m, a.center_height, 0.5 * a.rows * a.element_height_m);
            e.area_m2 -= ou * ov;
        }
    }
    std::erase_if(elements, [](const SurfaceElement& e) { return e.area_m2 <= 1e-12 * e.width_m * e.height_m; });
    return elements;
}

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& constraint) {
    if (!ok) throw ValidationError(field, constraint);
}

inline bool unit_norm(const Vec3& v) { return std::abs(norm(v) - 1.0) <= 1e-9; }

inline bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace detail

/// Enforces every scenario invariant; throws ValidationError naming the field.
inline void validate(const ScenarioConfig& s) {
    using detail::require;
    const Room& room = s.room;
    require(room.length > 0.0, "room.length", "must be positive");
    require(room.width > 0.0, "room.width", "must be positive");
    require(room.height > 0.0, "room.height", "must be positive");
    require(detail::in_unit_interval(room.reflectivity.walls), "room.reflectivity.walls", "must lie in [0,1]");
    require(detail::in_unit_interval(room.reflectivity.floor), "room.reflectivity.floor", "must lie in [0,1]");
    require(detail::in_unit_interval(room.reflectivity.ceiling), "room.reflectivity.ceiling", "must lie in [0,1]");

    for (std::size_t i = 0; i < s.aps.size(); ++i) {
        const auto& ap = s.aps[i];
        const std::string p = "aps[" + std::to_string(i) + "]";
        require(std::abs(ap.position.z - room.height) <= 1e-9, p + ".position", "AP must lie on ceiling plane");
        require(ap.position.x >= 0.0 && ap.position.x <= room.length && ap.position.y >= 0.0 &&
                    ap.position.y <= room.width,
                p + ".position", "AP must lie inside the room footprint");
        require(ap.transmit_power_w > 0.0, p + ".transmit_power_w", "must be positive");
        require(ap.half_power_semiangle_deg > 0.0 && ap.half_power_semiangle_deg < 90.0,
                p + ".half_power_semiangle_deg", "must lie in (0, 90)");
        require(detail::unit_norm(ap.normal), p + ".normal", "must be unit norm");
    }

    const AdrConfig& adr = s.adr;
    require(!adr.branches.empty(), "adr.branches", "at least one branch required");
    for (std::size_t i = 0; i < adr.branches.size(); ++i) {
        const auto& b = adr.branches[i];
        const std::string p = "adr.branches[" + std::to_string(i) + "]";
        require(b.fov_deg > 0.0 && b.fov_deg <= 90.0, p + ".fov_deg", "must lie in (0, 90]");
        require(b.elevation_deg >= 0.0 && b.elevation_deg <= 90.0, p + ".elevation_deg", "must lie in [0, 90]");
    }
    require(adr.pd_area_m2 > 0.0, "adr.pd_area_m2", "must be positive");
    require(adr.responsivity_a_per_w > 0.0, "adr.responsivity_a_per_w", "must be positive");
    require(adr.mount_height_m >= 0.0 && adr.mount_height_m < room.height, "adr.mount_height_m",
            "must lie in [0, room height)");

    for (std::size_t i = 0; i < s.mirror_arrays.size(); ++i) {
        const auto& a = s.mirror_arrays[i];
        const std::string p = "mirror_arrays[" + std::to_string(i) + "]";
        require(a.rows > 0, p + ".rows", "must be positive");
        require(a.cols > 0, p + ".cols", "must be positive");
        require(a.element_width_m > 0.0, p + ".element_width_m", "must be positive");
        require(a.element_height_m > 0.0, p + ".element_height_m", "must be positive");
        require(detail::in_unit_interval(a.reflectivity), p + ".reflectivity", "must lie in [0,1]");
        require(a.roll_range_deg.lo <= a.roll_range_deg.hi, p + ".roll_range_deg", "lo must not exceed hi");
        require(a.yaw_range_deg.lo <= a.yaw_range_deg.hi, p + ".yaw_range_deg", "lo must not exceed hi");
        require(a.poses.size() == a.mirror_count(), p + ".poses", "rows*cols must equal the number of poses");
        const WallFrame f = wall_frame(room, a.wall);
        const double half_w = 0.5 * a.cols * a.element_width_m;
        const double half_h = 0.5 * a.rows * a.element_height_m;
        require(a.center_along - half_w >= -1e-9 && a.center_along + half_w <= f.length + 1e-9,
                p + ".center_along", "array extends beyond the wall");
        require(a.center_height - half_h >= -1e-9 && a.center_height + half_h <= room.height + 1e-9,
                p + ".center_height", "array extends beyond the wall");
        for (std::size_t m = 0; m < a.poses.size(); ++m) {
            const auto& pose = a.poses[m];
            const std::string pm = p + ".poses[" + std::to_string(m) + "]";
            require(pose.half_width > 0.0 && pose.half_height > 0.0, pm, "half extents must be positive");
            require(detail::unit_norm(pose.base_normal), pm + ".base_normal", "must be unit norm");
        }
    }

    const DiffuseGrid& g = s.diffuse_grid;
    require(g.first_order_element_m > 0.0, "diffuse_grid.first_order_element_m", "must be positive");
    require(g.second_order_element_m > 0.0, "diffuse_grid.second_order_element_m", "must be positive");
    require(g.second_order_element_m >= g.first_order_element_m, "diffuse_grid.second_order_element_m",
            "must not be finer than the first-order grid");
    const double smallest = std::min({room.length, room.width, room.height});
    require(g.second_order_element_m <= smallest, "diffuse_grid.second_order_element_m",
            "larger than the smallest room dimension");

    require(s.noise.noise_psd_a2_per_hz > 0.0, "noise.noise_psd_a2_per_hz", "must be positive");
    require(s.noise.bandwidth_hz > 0.0, "noise.bandwidth_hz", "must be positive");
    require(s.solver.max_search_space >= 1.0, "solver.max_search_space", "must be at least 1");
    require(s.solver.utility_epsilon > 0.0, "solver.utility_epsilon", "must be positive");
    require(s.solver.max_greedy_passes >= 1, "solver.max_greedy_passes", "must be at least 1");
    require(s.time_bin_ns > 0.0, "time_bin_ns", "must be positive");

    if (const auto* explicit_users = std::get_if<std::vector<Vec3>>(&s.users)) {
        for (std::size_t i = 0; i < explicit_users->size(); ++i) {
            const Vec3& u = (*explicit_users)[i];
            const std::string p = "users[" + std::to_string(i) + "]";
            require(u.x >= 0.0 && u.x <= room.length && u.y >= 0.0 && u.y <= room.width, p,
                    "position outside the room");
            require(std::abs(u.z - adr.mount_height_m) <= 1e-9, p, "user must lie at the receiver mount height");
        }
    } else {
        require(std::get<RandomUsers>(s.users).count >= 0, "users.count", "must be non-negative");
    }
}

// ---------------------------------------------------------------------------
// Defaults

inline AdrConfig default_adr() {
    AdrConfig adr;
    for (double az : {0.0, 90.0, 180.0, 270.0}) adr.branches.push_back({az, 60.0, 25.0});
    return adr;
}

/// The reference configuration: 5 x 5 x 3 m room, four ceiling APs, two 5 x 5
/// mirror arrays on opposite walls, four users with a four-branch ADR.
inline ScenarioConfig default_scenario() {
    ScenarioConfig s;
    s.room = Room{};
    for (const auto& [x, y] : std::array<std::array<double, 2>, 4>{{{1.5, 1.5}, {1.5, 3.5}, {3.5, 1.5}, {3.5, 3.5}}})
        s.aps.push_back(ApConfig{{x, y, 3.0}, 2.0, 60.0, {0.0, 0.0, -1.0}});

    MirrorArrayConfig south;
    south.wall = Wall::YMin;
    south.center_along = 2.5;
    south.center_height = kDefaultMirrorArrayHeight;
    south.rng_seed = 1;
    MirrorArrayConfig north = south;
    north.wall = Wall::YMax;
    north.rng_seed = 2;
    for (auto* a : {&south, &north}) {
        a->roll_range_deg = kDefaultMirrorRollRange;
        a->yaw_range_deg = kDefaultMirrorYawRange;
        a->poses = generate_mirror_poses(*a, s.room, a->rng_seed);
    }
    s.mirror_arrays = {south, north};

    s.users = RandomUsers{4, 7};
    s.adr = default_adr();
    return s;
}

}  // namespace irsvlc
