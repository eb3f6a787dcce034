#pragma once

// Experiment drivers behind the command-line tool: channel variants, seeded
// sweeps over transmit power and blockage ratio, impulse-response export and
// the single-scenario solve report. Outputs are pure functions of their
// inputs and seeds, independent of the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "irsvlc/allocation.hpp"
#include "irsvlc/channel.hpp"
#include "irsvlc/error.hpp"
#include "irsvlc/random.hpp"
#include "irsvlc/scene.hpp"

namespace irsvlc {

/// Nine significant digits, the precision of every number written by the
/// tool.
inline std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    return fmt::format("{:.9g}", v);
}

inline double round_to_output_precision(double v) { return std::stod(format_number(v)); }

// ---------------------------------------------------------------------------
// Variants

enum class ChannelVariant { LoSOnly, LoSPlusDiffuse, IRS_1Array, IRS_2Arrays };

inline constexpr std::array<ChannelVariant, 4> kAllVariants{ChannelVariant::LoSOnly, ChannelVariant::LoSPlusDiffuse,
                                                             ChannelVariant::IRS_1Array, ChannelVariant::IRS_2Arrays};

inline std::string_view variant_name(ChannelVariant v) {
    switch (v) {
        case ChannelVariant::LoSOnly: return "LoSOnly";
        case ChannelVariant::LoSPlusDiffuse: return "LoSPlusDiffuse";
        case ChannelVariant::IRS_1Array: return "IRS_1Array";
        case ChannelVariant::IRS_2Arrays: return "IRS_2Arrays";
    }
    return "?";
}

inline ChannelVariant parse_variant(std::string_view name) {
    for (auto v : kAllVariants)
        if (variant_name(v) == name) return v;
    throw ValidationError("variants", "unknown variant \"" + std::string(name) + "\"");
}

inline std::vector<ChannelVariant> parse_variants(std::string_view list) {
    std::vector<ChannelVariant> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto end = std::min(list.find(',', start), list.size());
        if (end > start) out.push_back(parse_variant(list.substr(start, end - start)));
        start = end + 1;
    }
    if (out.empty()) throw ValidationError("variants", "at least one variant required");
    return out;
}

/// Masks tensor components; geometry and indexing are unchanged.
inline GainTensor apply_variant(GainTensor t, ChannelVariant v) {
    if (v == ChannelVariant::LoSOnly) std::fill(t.diff_gain.begin(), t.diff_gain.end(), 0.0);
    if (v == ChannelVariant::LoSOnly || v == ChannelVariant::LoSPlusDiffuse)
        std::fill(t.irs_gain.begin(), t.irs_gain.end(), 0.0);
    if (v == ChannelVariant::IRS_1Array && t.mirrors > 0) {
        for (std::size_t i = 0; i < t.irs_gain.size(); ++i)
            if (t.mirror_array[i % t.mirrors] != 0) t.irs_gain[i] = 0.0;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepVariable { PowerW, BlockageRatio };

struct SweepSpec {
    SweepVariable variable = SweepVariable::PowerW;
    std::vector<double> grid;
    int trials = 100;
    std::uint64_t rng_seed_base = 1;
};

inline std::vector<double> default_power_grid() { return {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}; }

inline std::vector<double> default_blockage_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
    return g;
}

inline void validate(const SweepSpec& spec) {
    if (spec.grid.empty()) throw ValidationError("grid", "must not be empty");
    if (!std::is_sorted(spec.grid.begin(), spec.grid.end())) throw ValidationError("grid", "must be sorted ascending");
    if (spec.trials < 1) throw ValidationError("trials", "must be at least 1");
    for (double x : spec.grid) {
        if (spec.variable == SweepVariable::PowerW && !(x > 0.0))
            throw ValidationError("grid", "transmit power must be positive");
        if (spec.variable == SweepVariable::BlockageRatio && !(x >= 0.0 && x <= 1.0))
            throw ValidationError("grid", "blockage ratio must lie in [0,1]");
    }
}

struct SweepRow {
    double x = 0.0;
    ChannelVariant variant = ChannelVariant::LoSOnly;
    double mean_sum_rate = 0.0;
    double stddev = 0.0;
    int trials = 0;
};

inline std::size_t user_count(const UserSpec& users) {
    if (const auto* v = std::get_if<std::vector<Vec3>>(&users)) return v->size();
    return static_cast<std::size_t>(std::get<RandomUsers>(users).count);
}

/// Seeds used by trial `trial` of a sweep.
inline std::uint64_t trial_user_seed(std::uint64_t base, std::size_t trial) { return derive_seed(base, "trial-users", trial); }
inline std::uint64_t trial_blockage_seed(std::uint64_t base, std::size_t trial) {
    return derive_seed(base, "trial-blockage", trial);
}

namespace experiment_detail {

inline void parallel_for(std::size_t n, unsigned threads, auto&& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads) body(i);
        });
}

}  // namespace experiment_detail

/// Mean and population standard deviation of the solved sum rate per grid
/// point and variant. Each trial re-places users (and, for blockage sweeps,
/// redraws the mask) from seeds derived from the trial index; mirror poses
/// stay fixed. Rows are ordered by grid point, then variant.
inline std::vector<SweepRow> run_sweep(const ScenarioConfig& scenario, const SweepSpec& spec,
                                       std::span<const ChannelVariant> variants, unsigned threads = 1) {
    validate(scenario);
    validate(spec);
    const ChannelEngine engine(scenario, threads);
    const std::size_t K = user_count(scenario.users), L = scenario.aps.size();
    const std::size_t G = spec.grid.size(), V = variants.size(), T = static_cast<std::size_t>(spec.trials);

    std::vector<double> sum_rate(T * G * V);
    auto run_trial = [&](std::size_t trial) {
        const auto users = place_users(RandomUsers{static_cast<int>(K), trial_user_seed(spec.rng_seed_base, trial)},
                                       scenario.room, scenario.adr.mount_height_m);
        const GainTensor tensor = engine.build(users);
        std::vector<GainTensor> masked;
        for (auto v : variants) masked.push_back(apply_variant(tensor, v));
        ScenarioConfig local = scenario;
        for (std::size_t g = 0; g < G; ++g) {
            BlockageMask mask = BlockageMask::all_open(K, L);
            if (spec.variable == SweepVariable::PowerW) {
                for (auto& ap : local.aps) ap.transmit_power_w = spec.grid[g];
            } else {
                mask = sample_blockage(spec.grid[g], K, L, trial_blockage_seed(spec.rng_seed_base, trial));
            }
            for (std::size_t v = 0; v < V; ++v)
                sum_rate[(trial * G + g) * V + v] = solve(local, masked[v], mask).report.sum_rate;
        }
    };
    experiment_detail::parallel_for(T, threads, run_trial);

    std::vector<SweepRow> rows;
    for (std::size_t g = 0; g < G; ++g) {
        for (std::size_t v = 0; v < V; ++v) {
            double mean = 0.0;
            for (std::size_t t = 0; t < T; ++t) mean += sum_rate[(t * G + g) * V + v];
            mean /= static_cast<double>(T);
            double var = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const double d = sum_rate[(t * G + g) * V + v] - mean;
                var += d * d;
            }
            rows.push_back({spec.grid[g], variants[v], mean, std::sqrt(var / static_cast<double>(T)), spec.trials});
        }
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, SweepVariable variable, std::span<const SweepRow> rows) {
    os << (variable == SweepVariable::PowerW ? "power_w" : "rho") << ",variant,mean_sum_rate_bps_hz,stddev,trials\n";
    for (const auto& r : rows)
        os << format_number(r.x) << ',' << variant_name(r.variant) << ',' << format_number(r.mean_sum_rate) << ','
           << format_number(r.stddev) << ',' << r.trials << '\n';
}

// ---------------------------------------------------------------------------
// Impulse responses

struct ImpulseSection {
    std::size_t ap = 0;
    std::size_t branch = 0;
    ImpulseResponse response;
};

/// For each AP, the impulse response seen by the branch with the largest
/// total DC gain (LoS, diffuse and every mirror path) toward that AP.
inline std::vector<ImpulseSection> impulse_sections(const ScenarioConfig& scenario, const Vec3& position,
                                                    unsigned threads = 1) {
    validate(scenario);
    const Room& r = scenario.room;
    if (!(position.x >= 0.0 && position.x <= r.length && position.y >= 0.0 && position.y <= r.width &&
          position.z >= 0.0 && position.z < r.height))
        throw ValidationError("user", "position outside the room");
    const ChannelEngine engine(scenario, threads);
    const UserChannel ch = engine.user_channel(position);
    std::vector<ImpulseSection> out;
    for (std::size_t l = 0; l < engine.ap_count(); ++l) {
        std::size_t best = 0;
        double best_gain = -1.0;
        for (std::size_t b = 0; b < engine.branch_count(); ++b) {
            double g = ch.los[ch.at(b, l)] + ch.diffuse1[ch.at(b, l)] + ch.diffuse2[ch.at(b, l)];
            for (std::size_t m = 0; m < ch.mirrors; ++m) g += ch.irs[ch.at(b, l, m)];
            if (g > best_gain) {
                best_gain = g;
                best = b;
            }
        }
        out.push_back({l, best, engine.impulse(position, best, l, scenario.time_bin_ns)});
    }
    return out;
}

inline void write_impulse_csv(std::ostream& os, std::span<const ImpulseSection> sections) {
    bool first = true;
    for (const auto& s : sections) {
        if (!first) os << '\n';
        first = false;
        os << "# ap=" << s.ap << " branch=" << s.branch << '\n';
        os << "t_ns,total,los,diffuse1,diffuse2,irs\n";
        const auto& ir = s.response;
        for (std::size_t i = 0; i < ir.size(); ++i) {
            os << format_number(ir.t_start_ns(i)) << ',' << format_number(ir.total(i));
            for (auto c : {PathClass::LoS, PathClass::Diffuse1, PathClass::Diffuse2, PathClass::IRS})
                os << ',' << format_number(ir.class_gain(i, c));
            os << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Solve report

struct SolveRun {
    std::vector<Vec3> users;
    BlockageMask mask;
    GainTensor tensor;
    Solution solution;
};

inline SolveRun run_solve(const ScenarioConfig& scenario, double rho, std::uint64_t seed, unsigned threads = 1) {
    validate(scenario);
    SolveRun run;
    run.users = place_users(scenario.users, scenario.room, scenario.adr.mount_height_m);
    run.tensor = ChannelEngine(scenario, threads).build(run.users);
    run.mask = sample_blockage(rho, run.users.size(), scenario.aps.size(), seed);
    run.solution = solve(scenario, run.tensor, run.mask);
    return run;
}

inline nlohmann::json solve_report(const SolveRun& run, double rho, std::uint64_t seed) {
    using nlohmann::json;
    auto num = [](double v) { return round_to_output_precision(v); };
    const auto& a = run.solution.assignment;
    const auto& r = run.solution.report;
    json doc;
    doc["rho"] = num(rho);
    doc["seed"] = seed;
    doc["users"] = json::array();
    for (const auto& u : run.users) doc["users"].push_back({num(u.x), num(u.y), num(u.z)});
    doc["los_unblocked"] = json::array();
    for (std::size_t k = 0; k < run.mask.users; ++k) {
        json row = json::array();
        for (std::size_t l = 0; l < run.mask.aps; ++l) row.push_back(run.mask.unblocked(k, l) ? 1 : 0);
        doc["los_unblocked"].push_back(row);
    }
    doc["ap_of_user"] = a.ap_of_user;
    doc["user_of_mirror"] = json::array();
    for (int owner : a.user_of_mirror) {
        if (owner == kUnassigned)
            doc["user_of_mirror"].push_back("unassigned");
        else
            doc["user_of_mirror"].push_back(owner);
    }
    doc["time_fraction"] = json::array();
    for (double t : a.time_fraction) doc["time_fraction"].push_back(num(t));
    doc["branch"] = r.branch;
    doc["rate_bps_hz"] = json::array();
    for (double x : r.rate) doc["rate_bps_hz"].push_back(num(x));
    doc["sum_rate_bps_hz"] = num(r.sum_rate);
    doc["log_utility"] = num(r.log_utility);
    return doc;
}

/// Reads the assignment back out of a solve report.
inline Assignment assignment_from_report(const nlohmann::json& doc) {
    Assignment a;
    a.ap_of_user = doc.at("ap_of_user").get<std::vector<std::size_t>>();
    for (const auto& e : doc.at("user_of_mirror"))
        a.user_of_mirror.push_back(e.is_string() ? kUnassigned : e.get<int>());
    a.time_fraction = time_fractions(a.ap_of_user);
    return a;
}

}  // namespace irsvlc
