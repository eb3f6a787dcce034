#pragma once

// Proportional-fair allocation of APs and mirrors to users. Users sharing an
// AP split its airtime; the objective is sum_k ln(rate_k + eps). APs are
// allocated first by exhaustive search with no mirrors, then mirrors are
// handed out greedily (or exhaustively for small instances).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "irsvlc/channel.hpp"
#include "irsvlc/error.hpp"
#include "irsvlc/link.hpp"
#include "irsvlc/random.hpp"
#include "irsvlc/scene.hpp"

namespace irsvlc {

/// LoS visibility per (user, AP): true means unobstructed.
struct BlockageMask {
    std::size_t users = 0;
    std::size_t aps = 0;
    std::vector<std::uint8_t> open;

    static BlockageMask all_open(std::size_t k, std::size_t l) { return {k, l, std::vector<std::uint8_t>(k * l, 1)}; }
    static BlockageMask all_blocked(std::size_t k, std::size_t l) {
        return {k, l, std::vector<std::uint8_t>(k * l, 0)};
    }

    bool unblocked(std::size_t k, std::size_t l) const { return open[k * aps + l] != 0; }

    bool operator==(const BlockageMask&) const = default;
};

/// Each link is blocked independently with probability `ratio`. For a fixed
/// seed the blocked sets are nested in `ratio`.
inline BlockageMask sample_blockage(double ratio, std::size_t users, std::size_t aps, std::uint64_t rng_seed) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw ValidationError("rho", "blockage ratio must lie in [0,1]");
    Rng rng(derive_seed(rng_seed, "blockage"));
    BlockageMask mask{users, aps, std::vector<std::uint8_t>(users * aps)};
    for (auto& o : mask.open) o = rng.uniform() < ratio ? 0 : 1;
    return mask;
}

inline constexpr int kUnassigned = -1;

struct Assignment {
    std::vector<std::size_t> ap_of_user;
    std::vector<int> user_of_mirror;  // user index or kUnassigned
    std::vector<double> time_fraction;

    bool operator==(const Assignment&) const = default;
};

struct UtilityReport {
    std::vector<double> rate;  // bps/Hz, airtime-weighted
    std::vector<double> snr;
    std::vector<std::size_t> branch;
    double sum_rate = 0.0;
    double log_utility = 0.0;
};

/// Equal airtime among the users of each AP, the exact maximizer of
/// sum ln(tau_k r_k) subject to the per-AP budget.
inline std::vector<double> time_fractions(std::span<const std::size_t> ap_of_user) {
    std::vector<double> tau(ap_of_user.size());
    for (std::size_t k = 0; k < ap_of_user.size(); ++k) {
        const auto n = std::count(ap_of_user.begin(), ap_of_user.end(), ap_of_user[k]);
        tau[k] = 1.0 / static_cast<double>(n);
    }
    return tau;
}

namespace detail {

struct UserLink {
    double snr = 0.0;
    double spectral_efficiency = 0.0;
    std::size_t branch = 0;
};

inline UserLink user_link(const GainTensor& t, const BlockageMask& mask, const ScenarioConfig& s, std::size_t k,
                          std::size_t ap, std::span<const std::size_t> mirrors) {
    const BranchChoice c = best_branch(t, k, ap, mirrors, mask.unblocked(k, ap));
    const double q = snr(c.gain, s.aps[ap].transmit_power_w, s.adr.responsivity_a_per_w, s.noise);
    return {q, spectral_efficiency(q), c.branch};
}

inline std::vector<std::size_t> mirrors_of(std::span<const int> user_of_mirror, std::size_t k) {
    std::vector<std::size_t> out;
    for (std::size_t m = 0; m < user_of_mirror.size(); ++m)
        if (user_of_mirror[m] == static_cast<int>(k)) out.push_back(m);
    return out;
}

inline double user_utility(double rate, double eps) { return std::log(rate + eps); }

inline void check_dims(const GainTensor& t, const BlockageMask& mask, const ScenarioConfig& s) {
    if (mask.users != t.users || mask.aps != t.aps) throw ValidationError("mask", "dimensions do not match tensor");
    if (s.aps.size() != t.aps) throw ValidationError("aps", "AP count does not match tensor");
    if (t.users > 0 && t.aps == 0) throw ValidationError("aps", "users present but no AP to serve them");
}

/// Log utility with fixed AP map and airtime; the inner loop of the mirror
/// searches. Must agree bit-for-bit with evaluate().
inline double mirror_map_utility(const GainTensor& t, const BlockageMask& mask, const ScenarioConfig& s,
                                 std::span<const std::size_t> ap_of_user, std::span<const double> tau,
                                 std::span<const int> user_of_mirror) {
    double u = 0.0;
    for (std::size_t k = 0; k < t.users; ++k) {
        const auto mirrors = mirrors_of(user_of_mirror, k);
        const double se = user_link(t, mask, s, k, ap_of_user[k], mirrors).spectral_efficiency;
        u += user_utility(tau[k] * se, s.solver.utility_epsilon);
    }
    return u;
}

inline double search_space(std::size_t choices, std::size_t slots) {
    return std::pow(static_cast<double>(choices), static_cast<double>(slots));
}

}  // namespace detail

inline UtilityReport evaluate(const Assignment& a, const GainTensor& t, const BlockageMask& mask,
                              const ScenarioConfig& s) {
    detail::check_dims(t, mask, s);
    UtilityReport r;
    r.rate.resize(t.users);
    r.snr.resize(t.users);
    r.branch.resize(t.users);
    for (std::size_t k = 0; k < t.users; ++k) {
        const auto mirrors = detail::mirrors_of(a.user_of_mirror, k);
        const auto link = detail::user_link(t, mask, s, k, a.ap_of_user[k], mirrors);
        r.rate[k] = a.time_fraction[k] * link.spectral_efficiency;
        r.snr[k] = link.snr;
        r.branch[k] = link.branch;
        r.sum_rate += r.rate[k];
        r.log_utility += detail::user_utility(r.rate[k], s.solver.utility_epsilon);
    }
    return r;
}

/// Best AP map under equal airtime with no mirrors, by enumeration of all
/// L^K maps in lexicographic order; the first maximizer wins.
inline std::vector<std::size_t> allocate_aps_exhaustive(const GainTensor& t, const BlockageMask& mask,
                                                        const ScenarioConfig& s) {
    detail::check_dims(t, mask, s);
    const std::size_t K = t.users, L = t.aps;
    if (K == 0) return {};
    if (detail::search_space(L, K) > s.solver.max_search_space)
        throw SearchSpaceError("AP search space L^K = " + std::to_string(detail::search_space(L, K)) +
                               " exceeds the configured guard");

    std::vector<double> se(K * L);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) se[k * L + l] = detail::user_link(t, mask, s, k, l, {}).spectral_efficiency;

    std::vector<std::size_t> map(K, 0), best = map;
    std::vector<std::size_t> load(L);
    double best_u = -INFINITY;
    const double eps = s.solver.utility_epsilon;
    while (true) {
        std::fill(load.begin(), load.end(), 0);
        for (std::size_t l : map) ++load[l];
        double u = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double tau = 1.0 / static_cast<double>(load[map[k]]);
            u += detail::user_utility(tau * se[k * L + map[k]], eps);
        }
        if (u > best_u) {
            best_u = u;
            best = map;
        }
        std::size_t pos = K;
        while (pos > 0 && ++map[pos - 1] == L) map[--pos] = 0;
        if (pos == 0) break;
    }
    return best;
}

/// Local-search mirror assignment. Sweeps move one mirror at a time to the
/// option (unassigned, then users in index order) that strictly increases
/// the utility most; when no single move helps, the best strictly improving
/// joint reassignment of two mirrors is applied and single moves resume.
/// Mirrors with no path to any user's serving AP stay unassigned.
inline std::vector<int> allocate_mirrors_greedy(const GainTensor& t, const BlockageMask& mask,
                                                std::span<const std::size_t> ap_of_user, const ScenarioConfig& s) {
    detail::check_dims(t, mask, s);
    const auto tau = time_fractions(ap_of_user);
    std::vector<int> owner(t.mirrors, kUnassigned);
    if (t.users == 0) return owner;

    std::vector<std::size_t> live;
    for (std::size_t m = 0; m < t.mirrors; ++m) {
        bool reaches = false;
        for (std::size_t k = 0; k < t.users && !reaches; ++k)
            for (std::size_t b = 0; b < t.branches && !reaches; ++b) reaches = t.irs(k, b, ap_of_user[k], m) > 0.0;
        if (reaches) live.push_back(m);
    }

    const int users = static_cast<int>(t.users);
    auto utility = [&] { return detail::mirror_map_utility(t, mask, s, ap_of_user, tau, owner); };
    double current = utility();
    for (int pass = 0; pass < s.solver.max_greedy_passes; ++pass) {
        bool moved = false;
        for (std::size_t m : live) {
            const int held = owner[m];
            int best_opt = held;
            double best_u = current;
            for (int opt = kUnassigned; opt < users; ++opt) {
                if (opt == held) continue;
                owner[m] = opt;
                const double u = utility();
                if (u > best_u) {
                    best_u = u;
                    best_opt = opt;
                }
            }
            owner[m] = best_opt;
            if (best_opt != held) {
                current = best_u;
                moved = true;
            }
        }
        if (moved) continue;

        // Single moves are exhausted; look for a pair of mirrors that must
        // change hands together.
        double best_u = current;
        std::size_t bi = 0, bj = 0;
        int bo = kUnassigned, bp = kUnassigned;
        for (std::size_t x = 0; x < live.size(); ++x) {
            for (std::size_t y = x + 1; y < live.size(); ++y) {
                const std::size_t i = live[x], j = live[y];
                const int hi = owner[i], hj = owner[j];
                for (int oi = kUnassigned; oi < users; ++oi) {
                    if (oi == hi) continue;
                    for (int oj = kUnassigned; oj < users; ++oj) {
                        if (oj == hj) continue;
                        owner[i] = oi;
                        owner[j] = oj;
                        const double u = utility();
                        if (u > best_u) {
                            best_u = u;
                            bi = i;
                            bj = j;
                            bo = oi;
                            bp = oj;
                        }
                    }
                }
                owner[i] = hi;
                owner[j] = hj;
            }
        }
        if (!(best_u > current)) break;
        owner[bi] = bo;
        owner[bj] = bp;
        current = best_u;
    }
    return owner;
}

/// Utility-maximizing mirror map over all (K+1)^M maps; ties go to the
/// lexicographically smallest map with kUnassigned ordered first.
inline std::vector<int> allocate_mirrors_exhaustive(const GainTensor& t, const BlockageMask& mask,
                                                    std::span<const std::size_t> ap_of_user,
                                                    const ScenarioConfig& s) {
    detail::check_dims(t, mask, s);
    const std::size_t M = t.mirrors;
    if (detail::search_space(t.users + 1, M) > s.solver.max_search_space)
        throw SearchSpaceError("mirror search space (K+1)^M = " + std::to_string(detail::search_space(t.users + 1, M)) +
                               " exceeds the configured guard");
    const auto tau = time_fractions(ap_of_user);
    std::vector<int> map(M, kUnassigned), best = map;
    if (M == 0 || t.users == 0) return best;
    double best_u = -INFINITY;
    const int last = static_cast<int>(t.users) - 1;
    while (true) {
        const double u = detail::mirror_map_utility(t, mask, s, ap_of_user, tau, map);
        if (u > best_u) {
            best_u = u;
            best = map;
        }
        std::size_t pos = M;
        while (pos > 0 && map[pos - 1] == last) map[--pos] = kUnassigned;
        if (pos == 0) break;
        ++map[pos - 1];
    }
    return best;
}

struct Solution {
    Assignment assignment;
    UtilityReport report;
};

/// Two-stage allocation: APs, then mirrors, then airtime, then evaluation.
inline Solution solve(const ScenarioConfig& s, const GainTensor& t, const BlockageMask& mask) {
    Solution out;
    auto& a = out.assignment;
    a.ap_of_user = allocate_aps_exhaustive(t, mask, s);
    const bool exhaustive =
        s.solver.mirror_stage == MirrorStage::Exhaustive ||
        (s.solver.mirror_stage == MirrorStage::Auto &&
         detail::search_space(t.users + 1, t.mirrors) <= s.solver.max_search_space);
    a.user_of_mirror = exhaustive ? allocate_mirrors_exhaustive(t, mask, a.ap_of_user, s)
                                  : allocate_mirrors_greedy(t, mask, a.ap_of_user, s);
    a.time_fraction = time_fractions(a.ap_of_user);
    out.report = evaluate(a, t, mask, s);
    return out;
}

}  // namespace irsvlc
