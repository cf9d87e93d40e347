#pragma once

// Joint relaying: all users transmit at once and the relay amplifies the
// superposition with a single matrix F.

#include <cmath>
#include <numbers>
#include <vector>

#include "marc/channel.hpp"
#include "marc/matrix_core.hpp"
#include "marc/relay_rate.hpp"

namespace marc {

inline constexpr double kFeasibilityTol = 1e-9;

struct CovarianceSet {
    std::vector<ComplexMatrix> per_user;  // Q^(k), M^(k) x M^(k) Hermitian PSD
};

struct JointSolution {
    ComplexMatrix relay_matrix;    // F, Mr x Mr
    CovarianceSet covariances;     // optimal Q^(k)
    double lambda_max_r_tilde = 0.0;
    CVector top_eigenvector;       // v = v_max(R~)
    double sum_rate = 0.0;         // bits per channel use
};

struct RateEvaluation {
    double rate = 0.0;
    double relay_power_used = 0.0;  // tr(F (I + R) F^H)
    bool relay_power_feasible = false;
};

/// R = sum_k H_r^(k) Q^(k) H_r^(k)^H
inline ComplexMatrix build_r(const ChannelSet& c, const CovarianceSet& q) {
    c.validate();
    if (q.per_user.size() != c.users()) {
        throw Error(ErrorKind::ShapeMismatch, "covariance set has " + std::to_string(q.per_user.size()) +
                                                  " matrices for " + std::to_string(c.users()) + " users");
    }
    ComplexMatrix r(c.relay_antennas, c.relay_antennas);
    for (std::size_t k = 0; k < c.users(); ++k) {
        const auto& qk = q.per_user[k];
        if (qk.rows() != c.user_antennas[k] || qk.cols() != c.user_antennas[k]) {
            throw Error(ErrorKind::ShapeMismatch, "Q of user " + std::to_string(k) + " is " + qk.shape());
        }
        r += sandwich(c.to_relay[k], qk);
    }
    return r;
}

/// R~ = sum_k P^(k) H_r^(k) H_r^(k)^H, the covariance bound that no feasible Q exceeds in lambda_max.
inline ComplexMatrix build_r_tilde(const ChannelSet& c, const PowerBudget& p) {
    c.validate();
    p.validate(c.users());
    ComplexMatrix r(c.relay_antennas, c.relay_antennas);
    for (std::size_t k = 0; k < c.users(); ++k) r += gram(c.to_relay[k]) * p.user_power[k];
    return r;
}

namespace detail {

inline CovarianceSet covariances_along(const ChannelSet& c, const PowerBudget& p, const CVector& v) {
    CovarianceSet q;
    q.per_user.reserve(c.users());
    for (std::size_t k = 0; k < c.users(); ++k) {
        const auto& h = c.to_relay[k];
        const CVector w = matvec(h.adjoint(), v);  // H^H v
        const double denom = dot(w, w).real();
        // H^H v = 0: this user cannot contribute along v, so it stays silent.
        if (denom == 0.0 || p.user_power[k] == 0.0) {
            q.per_user.emplace_back(h.cols(), h.cols());
            continue;
        }
        q.per_user.push_back(hermitian_part(outer(w, w) * (p.user_power[k] / denom)));
    }
    return q;
}

}  // namespace detail

/// Rank-one covariances Q^(k) = P^(k) H^H v v^H H / (v^H H H^H v) with v the top eigenvector of R~.
inline CovarianceSet optimal_covariances(const ChannelSet& c, const PowerBudget& p) {
    const auto top = eig_max(build_r_tilde(c, p));
    return detail::covariances_along(c, p, top.vector);
}

/// F = (h/||h||) sqrt(Pr / (lambda_1 + 1)) u^H, where (lambda_1, u) is the top eigenpair of R.
/// Spends the entire relay budget on the strongest received mode.
inline ComplexMatrix optimal_relay_matrix(const ChannelSet& c, const ComplexMatrix& r, double relay_power) {
    c.validate();
    if (r.rows() != c.relay_antennas || r.cols() != c.relay_antennas) {
        throw Error(ErrorKind::ShapeMismatch, "R is " + r.shape() + ", relay has " +
                                                  std::to_string(c.relay_antennas) + " antennas");
    }
    const double h_norm = norm(c.to_receiver);
    if (h_norm == 0.0) return ComplexMatrix(c.relay_antennas, c.relay_antennas);

    const auto top = eig_max(r);
    const double gain = std::sqrt(relay_power / (top.lambda + 1.0));
    CVector direction = c.to_receiver;
    for (auto& z : direction) z *= gain / h_norm;
    return outer(direction, top.vector);
}

inline double relay_power_used(const ComplexMatrix& f, const ComplexMatrix& r) {
    const auto load = ComplexMatrix::identity(r.rows()) + r;
    return (f * load * f.adjoint()).trace().real();
}

/// Achievable sum rate of joint relaying for an arbitrary (F, Q):
/// log2(1 + h^H F R F^H h / (h^H F F^H h + 1)).
inline RateEvaluation evaluate_sum_rate(const ChannelSet& c, const ComplexMatrix& f, const CovarianceSet& q,
                                        const PowerBudget* budget = nullptr) {
    const ComplexMatrix r = build_r(c, q);
    if (f.rows() != c.relay_antennas || f.cols() != c.relay_antennas) {
        throw Error(ErrorKind::ShapeMismatch, "F is " + f.shape());
    }
    require_finite(f);
    for (std::size_t k = 0; k < c.users(); ++k) {
        const auto check = check_psd(q.per_user[k], kFeasibilityTol * std::max(1.0, q.per_user[k].max_abs()));
        if (!check.ok) {
            throw Error(ErrorKind::InfeasibleCovariance, "Q of user " + std::to_string(k) + ": " + check.diagnostic);
        }
        if (budget) {
            const double limit = budget->user_power.at(k);
            const double tr = q.per_user[k].trace().real();
            if (tr > limit + kFeasibilityTol * std::max(1.0, limit)) {
                throw Error(ErrorKind::InfeasibleCovariance, "trace of Q of user " + std::to_string(k) + " is " +
                                                                 std::to_string(tr) + " > " + std::to_string(limit));
            }
        }
    }

    const CVector g = matvec(f.adjoint(), c.to_receiver);  // F^H h
    const double signal = dot(g, matvec(r, g)).real();
    const double noise = dot(g, g).real() + 1.0;

    RateEvaluation out;
    out.rate = std::log1p(std::max(0.0, signal) / noise) / std::numbers::ln2;
    out.relay_power_used = relay_power_used(f, r);
    out.relay_power_feasible =
        budget == nullptr ||
        out.relay_power_used <= budget->relay_power + kFeasibilityTol * std::max(1.0, budget->relay_power);
    return out;
}

/// Optimal joint-relaying solution and its closed-form sum rate
/// log2(1 + ||h||^2 Pr) - log2(1 + ||h||^2 Pr / (1 + lambda_max(R~))).
inline JointSolution joint_sum_rate(const ChannelSet& c, const PowerBudget& p) {
    const ComplexMatrix r_tilde = build_r_tilde(c, p);
    auto top = eig_max(r_tilde);

    JointSolution s;
    s.covariances = detail::covariances_along(c, p, top.vector);
    s.lambda_max_r_tilde = top.lambda;
    s.top_eigenvector = std::move(top.vector);
    s.relay_matrix = optimal_relay_matrix(c, build_r(c, s.covariances), p.relay_power);
    const double h_norm = norm(c.to_receiver);
    s.sum_rate = relay_rate(h_norm * h_norm, s.lambda_max_r_tilde, p.relay_power);
    return s;
}

}  // namespace marc
