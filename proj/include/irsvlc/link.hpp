#pragma once

// Receiver link budget: composite gain under blockage, electrical SNR for
// IM/DD, Shannon spectral efficiency and ADR branch selection.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include "irsvlc/channel.hpp"
#include "irsvlc/scene.hpp"

namespace irsvlc {

/// O * H_los + H_diff + sum of H_irs over `mirrors`. Blockage gates the LoS
/// term only. Mirror gains are summed in the order given.
inline double received_gain(const GainTensor& t, std::size_t user, std::size_t branch, std::size_t ap,
                            std::span<const std::size_t> mirrors, bool unblocked) {
    if (user >= t.users || branch >= t.branches || ap >= t.aps)
        throw std::out_of_range("received_gain: index out of range");
    double g = (unblocked ? t.los(user, branch, ap) : 0.0) + t.diff(user, branch, ap);
    for (std::size_t m : mirrors) {
        if (m >= t.mirrors) throw std::out_of_range("received_gain: mirror index out of range");
        g += t.irs(user, branch, ap, m);
    }
    return g;
}

/// Electrical SNR (R P_t h)^2 / (N0 B).
inline double snr(double gain, double transmit_power_w, double responsivity_a_per_w, const NoiseModel& noise) {
    const double current = responsivity_a_per_w * transmit_power_w * gain;
    return current * current / noise.variance();
}

inline double spectral_efficiency(double snr_linear) { return std::log2(1.0 + snr_linear); }

struct BranchChoice {
    std::size_t branch = 0;
    double gain = 0.0;
};

/// Branch with the largest composite gain; ties go to the lowest index.
inline BranchChoice best_branch(const GainTensor& t, std::size_t user, std::size_t ap,
                                std::span<const std::size_t> mirrors, bool unblocked) {
    BranchChoice best{0, received_gain(t, user, 0, ap, mirrors, unblocked)};
    for (std::size_t b = 1; b < t.branches; ++b) {
        const double g = received_gain(t, user, b, ap, mirrors, unblocked);
        if (g > best.gain) best = {b, g};
    }
    return best;
}

struct LinkBudget {
    double received_optical_power_w = 0.0;
    double photocurrent_a = 0.0;
    double snr_linear = 0.0;
    double spectral_efficiency_bps_per_hz = 0.0;
    std::size_t chosen_branch = 0;
};

inline LinkBudget link_budget(const GainTensor& t, std::size_t user, std::size_t ap,
                              std::span<const std::size_t> mirrors, bool unblocked, double transmit_power_w,
                              double responsivity_a_per_w, const NoiseModel& noise) {
    const BranchChoice choice = best_branch(t, user, ap, mirrors, unblocked);
    LinkBudget lb;
    lb.received_optical_power_w = transmit_power_w * choice.gain;
    lb.photocurrent_a = responsivity_a_per_w * lb.received_optical_power_w;
    lb.snr_linear = snr(choice.gain, transmit_power_w, responsivity_a_per_w, noise);
    lb.spectral_efficiency_bps_per_hz = spectral_efficiency(lb.snr_linear);
    lb.chosen_branch = choice.branch;
    return lb;
}

}  // namespace irsvlc
