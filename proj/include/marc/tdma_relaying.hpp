#pragma once

// TDMA relaying: user k owns a slot of length tau^(k), transmits with boosted
// power P^(k)/tau^(k), and the relay matrix is matched to that user alone.

#include <cmath>
#include <numeric>
#include <vector>

#include "marc/channel.hpp"
#include "marc/matrix_core.hpp"
#include "marc/relay_rate.hpp"

namespace marc {

struct TimeAllocation {
    std::vector<double> tau;

    void validate(std::size_t users) const {
        if (tau.size() != users) {
            throw Error(ErrorKind::InvalidAllocation, "allocation has " + std::to_string(tau.size()) +
                                                          " slots for " + std::to_string(users) + " users");
        }
        double total = 0.0;
        for (double t : tau) {
            if (!std::isfinite(t) || t < 0.0 || t > 1.0) {
                throw Error(ErrorKind::InvalidAllocation, "slot length " + std::to_string(t) + " outside [0, 1]");
            }
            total += t;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw Error(ErrorKind::InvalidAllocation, "slot lengths sum to " + std::to_string(total));
        }
    }
};

struct TdmaSolution {
    TimeAllocation allocation;
    std::vector<double> per_user_rate;
    double sum_rate = 0.0;
};

/// Rate of a lone user with best-mode beamforming (q1 = P, f1 = Pr / (1 + alpha1 q1)).
inline double single_user_rate(double receiver_gain, double user_gain, double user_power, double relay_power) {
    return relay_rate(receiver_gain, user_gain * user_power, relay_power);
}

/// Rate of one TDMA slot of length `tau`; the tau -> 0 limit is 0.
inline double slot_rate(double receiver_gain, double user_gain, double user_power, double relay_power, double tau) {
    if (tau <= 0.0) return 0.0;
    return tau * single_user_rate(receiver_gain, user_gain, user_power / tau, relay_power);
}

/// Sum of slot rates for any tau vector (no simplex check); used for finite differences.
inline double tdma_rate_unchecked(const DerivedGains& g, const PowerBudget& p, const std::vector<double>& tau) {
    double total = 0.0;
    for (std::size_t k = 0; k < tau.size(); ++k)
        total += slot_rate(g.receiver_gain, g.user_gain[k], p.user_power[k], p.relay_power, tau[k]);
    return total;
}

inline TdmaSolution evaluate_tdma_rate(const ChannelSet& c, const PowerBudget& p, const TimeAllocation& t) {
    p.validate(c.users());
    t.validate(c.users());
    const DerivedGains g = derive_gains(c);
    TdmaSolution s;
    s.allocation = t;
    s.per_user_rate.reserve(c.users());
    for (std::size_t k = 0; k < c.users(); ++k) {
        s.per_user_rate.push_back(slot_rate(g.receiver_gain, g.user_gain[k], p.user_power[k], p.relay_power, t.tau[k]));
    }
    s.sum_rate = std::accumulate(s.per_user_rate.begin(), s.per_user_rate.end(), 0.0);
    return s;
}

/// tau^(k) = alpha1^(k) P^(k) / sum_j alpha1^(j) P^(j); uniform when every product is zero.
inline TimeAllocation optimal_time_slots(const DerivedGains& g, const PowerBudget& p) {
    const std::size_t users = g.user_gain.size();
    std::vector<double> weight(users);
    for (std::size_t k = 0; k < users; ++k) weight[k] = g.user_gain[k] * p.user_power[k];
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    TimeAllocation t;
    if (!(total > 0.0)) {
        t.tau.assign(users, 1.0 / static_cast<double>(users));
        return t;
    }
    t.tau.reserve(users);
    for (double w : weight) t.tau.push_back(w / total);
    return t;
}

inline TimeAllocation optimal_time_slots(const ChannelSet& c, const PowerBudget& p) {
    p.validate(c.users());
    return optimal_time_slots(derive_gains(c), p);
}

/// Closed form at the optimal slots: a single-user link with signal power sum_j alpha1^(j) P^(j).
inline double tdma_closed_form_rate(const DerivedGains& g, const PowerBudget& p) {
    double weighted = 0.0;
    for (std::size_t k = 0; k < g.user_gain.size(); ++k) weighted += g.user_gain[k] * p.user_power[k];
    return relay_rate(g.receiver_gain, weighted, p.relay_power);
}

inline TdmaSolution tdma_sum_rate(const ChannelSet& c, const PowerBudget& p) {
    p.validate(c.users());
    return evaluate_tdma_rate(c, p, optimal_time_slots(derive_gains(c), p));
}

/// Per-slot matrices for callers that want them: Q^(k) puts P^(k)/tau^(k) on
/// the top right-singular vector of H_r^(k); F^(k) matches the top
/// left-singular vector to h with f1 = Pr / (1 + alpha1 q1).
struct SlotMatrices {
    ComplexMatrix covariance;
    ComplexMatrix relay_matrix;
};

inline SlotMatrices expand_slot(const ChannelSet& c, const PowerBudget& p, const TimeAllocation& t, std::size_t user) {
    c.validate();
    const auto& h = c.to_relay.at(user);
    const double tau = t.tau.at(user);
    SlotMatrices m{ComplexMatrix(h.cols(), h.cols()), ComplexMatrix(c.relay_antennas, c.relay_antennas)};
    if (tau <= 0.0) return m;

    const auto top = top_singular(h);
    const double q1 = p.user_power.at(user) / tau;
    m.covariance = hermitian_part(outer(top.right, top.right) * q1);

    const double h_norm = norm(c.to_receiver);
    if (h_norm == 0.0) return m;
    const double f1 = p.relay_power / (1.0 + top.sigma * top.sigma * q1);
    CVector direction = c.to_receiver;
    for (auto& z : direction) z *= std::sqrt(f1) / h_norm;
    m.relay_matrix = outer(direction, top.left);
    return m;
}

}  // namespace marc
