#pragma once

// Optical channel: Lambertian LoS links, first- and second-order diffuse
// reflections off the room surfaces, and first-order specular reflections off
// wall-mounted mirrors (image-source model). Gains are DC gains, i.e. the
// fraction of transmitted optical power collected by one photodiode.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "irsvlc/geometry.hpp"
#include "irsvlc/scene.hpp"

namespace irsvlc {

inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

/// Lambertian mode number for a half-power semi-angle in degrees.
inline double lambertian_order(double half_power_semiangle_deg) {
    if (!(half_power_semiangle_deg > 0.0 && half_power_semiangle_deg < 90.0))
        throw std::domain_error("lambertian_order: semi-angle must lie in (0, 90) degrees");
    return -std::numbers::ln2 / std::log(cos_deg(half_power_semiangle_deg));
}

/// A photodiode at a point: position, facing, collecting area and FoV.
struct Aperture {
    Vec3 position;
    Vec3 normal{0.0, 0.0, 1.0};
    double area_m2 = 0.0;
    double fov_deg = 90.0;
};

inline Aperture branch_aperture(const Vec3& position, const BranchOrientation& branch, double pd_area_m2) {
    return {position, branch.normal(), pd_area_m2, branch.fov_deg};
}

struct LinkResult {
    double gain = 0.0;
    double distance_m = 0.0;
};

/// Single Lambertian hop: (m+1) A / (2 pi d^2) cos^m(phi) cos(psi), gated by
/// the receiver FoV and by back-facing geometry.
inline LinkResult lambertian_link(const Vec3& src, const Vec3& src_normal, double order, const Aperture& rx) {
    const Vec3 d = rx.position - src;
    const double dist2 = dot(d, d);
    if (!(dist2 > 0.0)) return {};
    const double dist = std::sqrt(dist2);
    const double cos_phi = dot(src_normal, d) / dist;
    const double cos_psi = -dot(rx.normal, d) / dist;
    if (cos_phi <= 0.0 || cos_psi <= 0.0 || !within_fov(cos_psi, rx.fov_deg)) return {0.0, dist};
    const double emission = order == 1.0 ? cos_phi : std::pow(cos_phi, order);
    return {(order + 1.0) * rx.area_m2 / (2.0 * std::numbers::pi * dist2) * emission * cos_psi, dist};
}

inline double los_gain(const ApConfig& ap, const Vec3& rx_pos, const Vec3& branch_normal, double pd_area_m2,
                       double fov_deg) {
    return lambertian_link(ap.position, ap.normal, lambertian_order(ap.half_power_semiangle_deg),
                           {rx_pos, branch_normal, pd_area_m2, fov_deg})
        .gain;
}

// ---------------------------------------------------------------------------
// Paths and impulse responses

enum class PathClass : std::uint8_t { LoS = 0, Diffuse1 = 1, Diffuse2 = 2, IRS = 3 };

struct PathContribution {
    double gain = 0.0;
    double delay_ns = 0.0;
    PathClass path_class = PathClass::LoS;
    std::optional<std::size_t> mirror_index;
};

inline double delay_for_length(double length_m) { return length_m / kSpeedOfLightMPerNs; }

/// Power-delay profile binned at a fixed width, kept per path class.
struct ImpulseResponse {
    double bin_width_ns = 0.5;
    std::int64_t first_bin = 0;
    std::vector<std::array<double, 4>> bins;

    std::size_t size() const { return bins.size(); }
    double t_start_ns(std::size_t i) const { return static_cast<double>(first_bin + static_cast<std::int64_t>(i)) * bin_width_ns; }
    double class_gain(std::size_t i, PathClass c) const { return bins[i][static_cast<std::size_t>(c)]; }
    double total(std::size_t i) const { return bins[i][0] + bins[i][1] + bins[i][2] + bins[i][3]; }

    double total_gain() const {
        double s = 0.0;
        for (std::size_t i = 0; i < bins.size(); ++i) s += total(i);
        return s;
    }
    double class_total(PathClass c) const {
        double s = 0.0;
        for (const auto& b : bins) s += b[static_cast<std::size_t>(c)];
        return s;
    }
};

/// Streaming accumulator for ImpulseResponse; bins grow on demand in both
/// directions.
class ImpulseHistogram {
public:
    explicit ImpulseHistogram(double bin_width_ns) : response_{bin_width_ns, 0, {}} {
        if (!(bin_width_ns > 0.0)) throw std::invalid_argument("impulse bin width must be positive");
    }

    void add(const PathContribution& p) {
        const auto bin = static_cast<std::int64_t>(std::floor(p.delay_ns / response_.bin_width_ns));
        auto& bins = response_.bins;
        if (bins.empty()) {
            response_.first_bin = bin;
            bins.resize(1, {});
        } else if (bin < response_.first_bin) {
            bins.insert(bins.begin(), static_cast<std::size_t>(response_.first_bin - bin), std::array<double, 4>{});
            response_.first_bin = bin;
        } else if (bin >= response_.first_bin + static_cast<std::int64_t>(bins.size())) {
            bins.resize(static_cast<std::size_t>(bin - response_.first_bin + 1), {});
        }
        bins[static_cast<std::size_t>(bin - response_.first_bin)][static_cast<std::size_t>(p.path_class)] += p.gain;
    }

    void operator()(const PathContribution& p) { add(p); }

    const ImpulseResponse& response() const { return response_; }

private:
    ImpulseResponse response_;
};

inline ImpulseResponse impulse_response(std::span<const PathContribution> paths, double bin_width_ns) {
    ImpulseHistogram h(bin_width_ns);
    for (const auto& p : paths) h.add(p);
    return h.response();
}

// ---------------------------------------------------------------------------
// Per-path engines. Each takes a sink invoked once per non-zero path.

struct NullSink {
    void operator()(const PathContribution&) const {}
};

inline double los_path(const ApConfig& ap, const Aperture& rx, auto&& sink) {
    const LinkResult l = lambertian_link(ap.position, ap.normal, lambertian_order(ap.half_power_semiangle_deg), rx);
    if (l.gain > 0.0) sink(PathContribution{l.gain, delay_for_length(l.distance_m), PathClass::LoS, {}});
    return l.gain;
}

/// Tangent axes of an element matching its width_m / height_m sides.
inline std::pair<Vec3, Vec3> element_axes(const SurfaceElement& e) {
    if (std::abs(e.normal.z) > 0.5) return {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    if (std::abs(e.normal.x) > 0.5) return {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    return {{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
}

inline constexpr int kFovEdgeSubdivisions = 8;

/// Element re-emission (order 1) into a receiver. The receiver's FoV cut is a
/// step in the integrand, so elements the cone edge passes through are
/// integrated on a sub-grid instead of at their center alone.
inline LinkResult element_to_receiver(const SurfaceElement& e, const Aperture& rx) {
    const LinkResult center = lambertian_link(e.center, e.normal, 1.0, rx);
    if (rx.fov_deg >= 90.0 || e.width_m <= 0.0 || e.height_m <= 0.0) return center;
    const Vec3 d = rx.position - e.center;
    const double dist = norm(d);
    if (!(dist > 0.0)) return center;
    const double radius = 0.5 * std::hypot(e.width_m, e.height_m);
    const double off_axis = std::acos(std::clamp(-dot(rx.normal, d) / dist, -1.0, 1.0));
    const double spread = radius >= dist ? std::numbers::pi : std::asin(radius / dist);
    if (std::abs(off_axis - deg_to_rad(rx.fov_deg)) > spread) return center;

    const auto [u, v] = element_axes(e);
    const int n = kFovEdgeSubdivisions;
    double gain = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Vec3 p = e.center + u * (e.width_m * ((i + 0.5) / n - 0.5)) + v * (e.height_m * ((j + 0.5) / n - 0.5));
            gain += lambertian_link(p, e.normal, 1.0, rx).gain;
        }
    }
    return {gain / (n * n), center.distance_m};
}

/// AP -> surface element -> receiver, summed over `elements`.
inline double diffuse_first_order(const ApConfig& ap, const Aperture& rx, std::span<const SurfaceElement> elements,
                                  auto&& sink) {
    const double m = lambertian_order(ap.half_power_semiangle_deg);
    double total = 0.0;
    for (const auto& e : elements) {
        if (e.reflectivity <= 0.0) continue;
        const LinkResult in = lambertian_link(ap.position, ap.normal, m, {e.center, e.normal, e.area_m2, 90.0});
        if (in.gain <= 0.0) continue;
        const LinkResult out = element_to_receiver(e, rx);
        if (out.gain <= 0.0) continue;
        const double g = in.gain * e.reflectivity * out.gain;
        total += g;
        sink(PathContribution{g, delay_for_length(in.distance_m + out.distance_m), PathClass::Diffuse1, {}});
    }
    return total;
}

inline double diffuse_first_order(const ApConfig& ap, const Aperture& rx, std::span<const SurfaceElement> elements) {
    return diffuse_first_order(ap, rx, elements, NullSink{});
}

/// AP -> element -> element -> receiver over all ordered pairs of distinct
/// elements.
inline double diffuse_second_order(const ApConfig& ap, const Aperture& rx, std::span<const SurfaceElement> elements,
                                   auto&& sink) {
    const double m = lambertian_order(ap.half_power_semiangle_deg);
    const std::size_t n = elements.size();
    std::vector<LinkResult> first(n), last(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = elements[i];
        first[i] = lambertian_link(ap.position, ap.normal, m, {e.center, e.normal, e.area_m2, 90.0});
        first[i].gain *= e.reflectivity;
        last[i] = element_to_receiver(e, rx);
        last[i].gain *= e.reflectivity;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (first[i].gain <= 0.0) continue;
        const auto& a = elements[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || last[j].gain <= 0.0) continue;
            const auto& b = elements[j];
            const LinkResult mid = lambertian_link(a.center, a.normal, 1.0, {b.center, b.normal, b.area_m2, 90.0});
            if (mid.gain <= 0.0) continue;
            const double g = first[i].gain * mid.gain * last[j].gain;
            total += g;
            sink(PathContribution{g, delay_for_length(first[i].distance_m + mid.distance_m + last[j].distance_m),
                                  PathClass::Diffuse2, {}});
        }
    }
    return total;
}

inline double diffuse_second_order(const ApConfig& ap, const Aperture& rx, std::span<const SurfaceElement> elements) {
    return diffuse_second_order(ap, rx, elements, NullSink{});
}

struct MirrorPath {
    double gain = 0.0;
    double delay_ns = 0.0;
    Vec3 specular_point;
};

/// Single specular bounce AP -> mirror -> receiver. The mirror passes the
/// AP's radiance unchanged apart from `reflectivity`, so the link behaves as
/// a virtual AP at the image position with path length d1 + d2.
inline MirrorPath mirror_gain(const ApConfig& ap, const MirrorPose& mirror, double reflectivity, const Aperture& rx) {
    const auto q = specular_point(ap.position, rx.position, mirror);
    if (!q) return {};
    const Vec3 leg1 = *q - ap.position;
    const Vec3 leg2 = rx.position - *q;
    const double d1 = norm(leg1);
    const double d2 = norm(leg2);
    const double cos_phi = dot(ap.normal, leg1) / d1;
    const double cos_psi = -dot(rx.normal, leg2) / d2;
    if (cos_phi <= 0.0 || cos_psi <= 0.0 || !within_fov(cos_psi, rx.fov_deg)) return {};
    const double m = lambertian_order(ap.half_power_semiangle_deg);
    const double length = d1 + d2;
    const double gain = reflectivity * (m + 1.0) * rx.area_m2 / (2.0 * std::numbers::pi * length * length) *
                        std::pow(cos_phi, m) * cos_psi;
    return {gain, delay_for_length(length), *q};
}

// ---------------------------------------------------------------------------
// Gain tensor

/// DC gains for every (user, branch, AP) and, for mirror paths, every mirror.
/// `diff` holds first plus second order diffuse gain.
struct GainTensor {
    std::size_t users = 0;
    std::size_t branches = 0;
    std::size_t aps = 0;
    std::size_t mirrors = 0;
    std::vector<double> los_gain;
    std::vector<double> diff_gain;
    std::vector<double> irs_gain;
    std::vector<std::size_t> mirror_array;  // owning array of each mirror

    GainTensor() = default;
    GainTensor(std::size_t k, std::size_t b, std::size_t l, std::size_t m)
        : users(k), branches(b), aps(l), mirrors(m), los_gain(k * b * l), diff_gain(k * b * l),
          irs_gain(k * b * l * m), mirror_array(m, 0) {}

    std::size_t index(std::size_t k, std::size_t b, std::size_t l) const { return (k * branches + b) * aps + l; }
    std::size_t index(std::size_t k, std::size_t b, std::size_t l, std::size_t m) const {
        return index(k, b, l) * mirrors + m;
    }

    double& los(std::size_t k, std::size_t b, std::size_t l) { return los_gain[index(k, b, l)]; }
    double los(std::size_t k, std::size_t b, std::size_t l) const { return los_gain[index(k, b, l)]; }
    double& diff(std::size_t k, std::size_t b, std::size_t l) { return diff_gain[index(k, b, l)]; }
    double diff(std::size_t k, std::size_t b, std::size_t l) const { return diff_gain[index(k, b, l)]; }
    double& irs(std::size_t k, std::size_t b, std::size_t l, std::size_t m) { return irs_gain[index(k, b, l, m)]; }
    double irs(std::size_t k, std::size_t b, std::size_t l, std::size_t m) const {
        return irs_gain[index(k, b, l, m)];
    }

    bool operator==(const GainTensor&) const = default;
};

/// Channel state for one receiver position, kept per component.
struct UserChannel {
    std::size_t branches = 0;
    std::size_t aps = 0;
    std::size_t mirrors = 0;
    std::vector<double> los;      // [branch][ap]
    std::vector<double> diffuse1; // [branch][ap]
    std::vector<double> diffuse2; // [branch][ap]
    std::vector<double> irs;      // [branch][ap][mirror]

    std::size_t at(std::size_t b, std::size_t l) const { return b * aps + l; }
    std::size_t at(std::size_t b, std::size_t l, std::size_t m) const { return at(b, l) * mirrors + m; }
};

/// Holds everything that does not depend on receiver position (surface
/// tilings, power reflected by each element) so per-user gains are cheap.
class ChannelEngine {
public:
    explicit ChannelEngine(const ScenarioConfig& scenario, unsigned threads = 1)
        : aps_(scenario.aps), adr_(scenario.adr) {
        validate(scenario);
        for (std::size_t a = 0; a < scenario.mirror_arrays.size(); ++a) {
            const auto& arr = scenario.mirror_arrays[a];
            for (const auto& pose : arr.poses) mirrors_.push_back({pose, arr.reflectivity, a});
        }
        fine_ = exclude_mirror_footprints(discretize_surfaces(scenario.room, scenario.diffuse_grid.first_order_element_m),
                                          scenario.room, scenario.mirror_arrays);
        coarse_ = exclude_mirror_footprints(
            discretize_surfaces(scenario.room, scenario.diffuse_grid.second_order_element_m), scenario.room,
            scenario.mirror_arrays);
        precompute(std::max(1u, threads));
    }

    std::size_t ap_count() const { return aps_.size(); }
    std::size_t branch_count() const { return adr_.branches.size(); }
    std::size_t mirror_count() const { return mirrors_.size(); }
    std::span<const SurfaceElement> first_order_elements() const { return fine_; }
    std::span<const SurfaceElement> second_order_elements() const { return coarse_; }

    Aperture aperture(const Vec3& position, std::size_t branch) const {
        return branch_aperture(position, adr_.branches[branch], adr_.pd_area_m2);
    }

    UserChannel user_channel(const Vec3& position) const {
        const std::size_t nb = branch_count(), nl = ap_count(), nm = mirror_count();
        UserChannel out{nb, nl, nm, std::vector<double>(nb * nl), std::vector<double>(nb * nl),
                        std::vector<double>(nb * nl), std::vector<double>(nb * nl * nm)};
        std::vector<Aperture> rx(nb);
        for (std::size_t b = 0; b < nb; ++b) rx[b] = aperture(position, b);

        for (std::size_t b = 0; b < nb; ++b) {
            for (std::size_t l = 0; l < nl; ++l) {
                out.los[out.at(b, l)] = los_path(aps_[l], rx[b], NullSink{});
                for (std::size_t m = 0; m < nm; ++m)
                    out.irs[out.at(b, l, m)] = mirror_gain(aps_[l], mirrors_[m].pose, mirrors_[m].reflectivity, rx[b]).gain;
            }
        }
        collect(fine_, fine_out_, rx, out.diffuse1, out);
        collect(coarse_, coarse_out_, rx, out.diffuse2, out);
        return out;
    }

    GainTensor build(std::span<const Vec3> users) const {
        GainTensor t(users.size(), branch_count(), ap_count(), mirror_count());
        for (std::size_t m = 0; m < mirrors_.size(); ++m) t.mirror_array[m] = mirrors_[m].array;
        for (std::size_t k = 0; k < users.size(); ++k) {
            const UserChannel u = user_channel(users[k]);
            for (std::size_t b = 0; b < t.branches; ++b) {
                for (std::size_t l = 0; l < t.aps; ++l) {
                    t.los(k, b, l) = u.los[u.at(b, l)];
                    t.diff(k, b, l) = u.diffuse1[u.at(b, l)] + u.diffuse2[u.at(b, l)];
                    for (std::size_t m = 0; m < t.mirrors; ++m) t.irs(k, b, l, m) = u.irs[u.at(b, l, m)];
                }
            }
        }
        return t;
    }

    /// Every path from AP `ap` to one branch at `position`, fed to `sink` in a
    /// fixed order (LoS, first order, second order, mirrors).
    void enumerate_paths(const Vec3& position, std::size_t branch, std::size_t ap, auto&& sink) const {
        const Aperture rx = aperture(position, branch);
        los_path(aps_[ap], rx, sink);
        diffuse_first_order(aps_[ap], rx, fine_, sink);
        diffuse_second_order(aps_[ap], rx, coarse_, sink);
        for (std::size_t m = 0; m < mirrors_.size(); ++m) {
            const MirrorPath p = mirror_gain(aps_[ap], mirrors_[m].pose, mirrors_[m].reflectivity, rx);
            if (p.gain > 0.0) sink(PathContribution{p.gain, p.delay_ns, PathClass::IRS, m});
        }
    }

    ImpulseResponse impulse(const Vec3& position, std::size_t branch, std::size_t ap, double bin_width_ns) const {
        ImpulseHistogram h(bin_width_ns);
        enumerate_paths(position, branch, ap, h);
        return h.response();
    }

private:
    struct Mirror {
        MirrorPose pose;
        double reflectivity;
        std::size_t array;
    };

    // Power leaving each element toward the room per unit AP power, with the
    // element's reflectivity applied: [ap][element].
    void precompute(unsigned threads) {
        const std::size_t nl = aps_.size();
        fine_out_.assign(nl, std::vector<double>(fine_.size()));
        std::vector<std::vector<double>> coarse_first(nl, std::vector<double>(coarse_.size()));
        for (std::size_t l = 0; l < nl; ++l) {
            const double m = lambertian_order(aps_[l].half_power_semiangle_deg);
            for (std::size_t e = 0; e < fine_.size(); ++e)
                fine_out_[l][e] = incident(aps_[l], m, fine_[e]) * fine_[e].reflectivity;
            for (std::size_t e = 0; e < coarse_.size(); ++e)
                coarse_first[l][e] = incident(aps_[l], m, coarse_[e]) * coarse_[e].reflectivity;
        }

        // Second bounce: each target element is owned by exactly one thread and
        // its sum runs over sources in index order, so the result does not
        // depend on the thread count.
        coarse_out_.assign(nl, std::vector<double>(coarse_.size()));
        const std::size_t n = coarse_.size();
        auto work = [&](std::size_t begin, std::size_t end) {
            std::vector<double> acc(nl);
            for (std::size_t j = begin; j < end; ++j) {
                const auto& b = coarse_[j];
                std::fill(acc.begin(), acc.end(), 0.0);
                if (b.reflectivity > 0.0) {
                    const Aperture target{b.center, b.normal, b.area_m2, 90.0};
                    for (std::size_t i = 0; i < n; ++i) {
                        if (i == j) continue;
                        const auto& a = coarse_[i];
                        const double k = lambertian_link(a.center, a.normal, 1.0, target).gain;
                        if (k <= 0.0) continue;
                        for (std::size_t l = 0; l < nl; ++l) acc[l] += coarse_first[l][i] * k;
                    }
                }
                for (std::size_t l = 0; l < nl; ++l) coarse_out_[l][j] = acc[l] * b.reflectivity;
            }
        };
        if (threads <= 1) {
            work(0, n);
        } else {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (n + threads - 1) / threads;
            for (std::size_t begin = 0; begin < n; begin += chunk) pool.emplace_back(work, begin, std::min(n, begin + chunk));
        }
    }

    static double incident(const ApConfig& ap, double order, const SurfaceElement& e) {
        return lambertian_link(ap.position, ap.normal, order, {e.center, e.normal, e.area_m2, 90.0}).gain;
    }

    // Re-emission from every element into every branch, weighted by the
    // power each element sends out.
    void collect(const std::vector<SurfaceElement>& elements, const std::vector<std::vector<double>>& emitted,
                 std::span<const Aperture> rx, std::vector<double>& out, const UserChannel& shape) const {
        const std::size_t nl = aps_.size();
        for (std::size_t e = 0; e < elements.size(); ++e) {
            for (std::size_t b = 0; b < rx.size(); ++b) {
                const double k = element_to_receiver(elements[e], rx[b]).gain;
                if (k <= 0.0) continue;
                for (std::size_t l = 0; l < nl; ++l) out[shape.at(b, l)] += emitted[l][e] * k;
            }
        }
    }

    std::vector<ApConfig> aps_;
    AdrConfig adr_;
    std::vector<Mirror> mirrors_;
    std::vector<SurfaceElement> fine_;
    std::vector<SurfaceElement> coarse_;
    std::vector<std::vector<double>> fine_out_;
    std::vector<std::vector<double>> coarse_out_;
};

/// Full tensor for the scenario's users.
inline GainTensor build_gain_tensor(const ScenarioConfig& scenario, unsigned threads = 1) {
    validate(scenario);
    const auto users = place_users(scenario.users, scenario.room, scenario.adr.mount_height_m);
    return ChannelEngine(scenario, threads).build(users);
}

}  // namespace irsvlc
