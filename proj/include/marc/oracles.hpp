#pragma once

// Brute-force and randomized checks of the optimality and ordering results.
// Nothing here calls back into the closed forms it is checking except as the
// value being compared against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "marc/channel.hpp"
#include "marc/joint_relaying.hpp"
#include "marc/parallel.hpp"
#include "marc/random.hpp"
#include "marc/tdma_relaying.hpp"

namespace marc {

struct OracleReport {
    std::size_t trials = 0;
    std::size_t violations = 0;
    std::size_t strict = 0;  // ordering checks only: instances with a gap above kStrictGap
    double worst_gap = 0.0;  // most negative margin seen (margin >= 0 means the claim held)
    std::vector<std::string> details;

    bool passed() const noexcept { return violations == 0; }
};

struct OracleOptions {
    std::size_t workers = 1;
    std::string dump_dir;  // violating channel instances are written here when non-empty
};

inline constexpr double kRateTol = 1e-9;
inline constexpr double kStrictGap = 1e-6;

namespace detail {

struct TrialOutcome {
    double margin = std::numeric_limits<double>::infinity();
    bool violated = false;
    bool strict = false;
    std::string note;
};

inline OracleReport reduce(const std::vector<TrialOutcome>& outcomes) {
    OracleReport r;
    r.trials = outcomes.size();
    r.worst_gap = outcomes.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        r.worst_gap = std::min(r.worst_gap, o.margin);
        if (o.strict) ++r.strict;
        if (o.violated) {
            ++r.violations;
            r.details.push_back("trial " + std::to_string(i) + ": " + o.note);
        }
    }
    return r;
}

inline std::string describe_powers(const PowerBudget& p) {
    std::ostringstream os;
    os.precision(17);
    os << "P=";
    for (std::size_t k = 0; k < p.user_power.size(); ++k) os << (k ? "," : "") << p.user_power[k];
    os << " Pr=" << p.relay_power;
    return os.str();
}

inline ComplexMatrix gaussian_matrix(RandomSource& rng, std::size_t rows, std::size_t cols) {
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.complex_gaussian();
    return m;
}

}  // namespace detail

/// Writes a violating instance as a channel file with a `# violation` header; returns the path or "".
inline std::string dump_violation(const ChannelSet& c, const PowerBudget& p, const OracleOptions& opts,
                                  const std::string& tag, const std::string& why) {
    if (opts.dump_dir.empty()) return {};
    std::filesystem::create_directories(opts.dump_dir);
    const std::string path = (std::filesystem::path(opts.dump_dir) / (tag + ".marc")).string();
    save_channels(c, path, {"violation " + why, detail::describe_powers(p)});
    return path;
}

/// Gram matrix of a square Gaussian draw, scaled to trace `budget`.
inline ComplexMatrix random_psd(RandomSource& rng, std::size_t n, double budget) {
    ComplexMatrix g = gram(detail::gaussian_matrix(rng, n, n));
    const double tr = g.trace().real();
    if (tr > 0.0) g *= budget / tr;
    return g;
}

inline CovarianceSet random_feasible_covariances(const ChannelSet& c, const PowerBudget& p, RandomSource& rng) {
    CovarianceSet q;
    for (std::size_t k = 0; k < c.users(); ++k) q.per_user.push_back(random_psd(rng, c.user_antennas[k], p.user_power[k]));
    return q;
}

/// closed-form optimum minus the rate that `q` reaches with its own best relay matrix.
inline double joint_competitor_margin(const ChannelSet& c, const PowerBudget& p, const CovarianceSet& q,
                                      double closed_form) {
    const ComplexMatrix f = optimal_relay_matrix(c, build_r(c, q), p.relay_power);
    return closed_form - evaluate_sum_rate(c, f, q, &p).rate;
}

/// |lambda_max(R with optimal Q) - lambda_max(R~)| / max(1, lambda_max(R~)).
inline double achievability_gap(const ChannelSet& c, const PowerBudget& p) {
    const double target = eig_max(build_r_tilde(c, p)).lambda;
    const double reached = eig_max(build_r(c, optimal_covariances(c, p))).lambda;
    return std::abs(reached - target) / std::max(1.0, target);
}

/// Tries to beat the joint-relaying optimum with random feasible covariances,
/// each paired with (a) its optimal relay matrix and (b) a random relay matrix
/// rescaled onto the relay power constraint.
inline OracleReport random_feasible_joint_search(const ChannelSet& c, const PowerBudget& p, std::size_t samples,
                                                 std::uint64_t seed, const OracleOptions& opts = {}) {
    if (samples == 0) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
    const double closed = joint_sum_rate(c, p).sum_rate;

    std::vector<detail::TrialOutcome> outcomes(samples);
    parallel_for(samples, opts.workers, [&](std::size_t i) {
        RandomSource rng(derive_seed(seed, i));
        const CovarianceSet q = random_feasible_covariances(c, p, rng);
        const ComplexMatrix r = build_r(c, q);

        const double matched = joint_competitor_margin(c, p, q, closed);

        ComplexMatrix f = detail::gaussian_matrix(rng, c.relay_antennas, c.relay_antennas);
        const double used = relay_power_used(f, r);
        if (used > 0.0) f *= std::sqrt(p.relay_power / used);
        const double random_f = closed - evaluate_sum_rate(c, f, q, &p).rate;

        auto& o = outcomes[i];
        o.margin = std::min(matched, random_f);
        o.violated = o.margin < -kRateTol;
        if (o.violated) o.note = "rate exceeds closed form by " + std::to_string(-o.margin);
    });
    OracleReport report = detail::reduce(outcomes);

    const double gap = achievability_gap(c, p);
    if (gap > 1e-8) {
        ++report.violations;
        report.details.push_back("optimal covariances miss lambda_max(R~) by relative " + std::to_string(gap));
    }
    if (!report.passed()) {
        const auto path = dump_violation(c, p, opts, "theorem1_" + std::to_string(seed), report.details.front());
        if (!path.empty()) report.details.push_back("instance dumped to " + path);
    }
    return report;
}

struct GridSearchReport {
    OracleReport report;
    std::vector<double> best_tau;
    double best_rate = 0.0;
    double optimum_rate = 0.0;
};

/// Enumerates every slot allocation on the simplex grid {i / resolution}.
inline GridSearchReport tau_grid_search(const ChannelSet& c, const PowerBudget& p, std::size_t resolution,
                                        const OracleOptions& opts = {}) {
    const std::size_t users = c.users();
    if (users > 4) throw Error(ErrorKind::GridTooLarge, "grid search supports K <= 4, got " + std::to_string(users));
    if (resolution < 10) throw Error(ErrorKind::InvalidArgument, "grid resolution must be >= 10");
    p.validate(users);

    const DerivedGains g = derive_gains(c);
    const TdmaSolution optimum = tdma_sum_rate(c, p);

    GridSearchReport out;
    out.optimum_rate = optimum.sum_rate;
    out.best_rate = -std::numeric_limits<double>::infinity();
    out.report.worst_gap = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> counts(users, 0);
    std::vector<double> tau(users);
    auto visit = [&](auto&& self, std::size_t k, std::size_t remaining) -> void {
        if (k + 1 == users) {
            counts[k] = remaining;
            for (std::size_t j = 0; j < users; ++j)
                tau[j] = static_cast<double>(counts[j]) / static_cast<double>(resolution);
            const double rate = tdma_rate_unchecked(g, p, tau);
            const double margin = optimum.sum_rate - rate;
            ++out.report.trials;
            out.report.worst_gap = std::min(out.report.worst_gap, margin);
            if (margin < -kRateTol) {
                ++out.report.violations;
                std::ostringstream os;
                os << "grid point";
                for (double t : tau) os << ' ' << t;
                os << " beats optimum by " << -margin;
                out.report.details.push_back(os.str());
            }
            if (rate > out.best_rate) {
                out.best_rate = rate;
                out.best_tau = tau;
            }
            return;
        }
        for (std::size_t i = 0; i <= remaining; ++i) {
            counts[k] = i;
            self(self, k + 1, remaining - i);
        }
    };
    visit(visit, 0, resolution);

    if (!out.report.passed()) {
        const auto path = dump_violation(c, p, opts, "theorem2_grid", out.report.details.front());
        if (!path.empty()) out.report.details.push_back("instance dumped to " + path);
    }
    return out;
}

/// lambda_max(A) - lambda_max(B).
inline double lemma1_gap(const ComplexMatrix& a, const ComplexMatrix& b) {
    return eig_max(a).lambda - eig_max(b).lambda;
}

/// Random PSD B plus a random PSD increment of random rank; checks lambda_max never drops.
inline OracleReport check_lemma1(std::size_t trials, std::size_t dim, std::uint64_t seed,
                                 const OracleOptions& opts = {}) {
    if (dim == 0) throw Error(ErrorKind::InvalidDimensions, "dimension must be >= 1");
    std::vector<detail::TrialOutcome> outcomes(trials);
    parallel_for(trials, opts.workers, [&](std::size_t i) {
        RandomSource rng(derive_seed(seed, i));
        const ComplexMatrix b = gram(detail::gaussian_matrix(rng, dim, dim));
        const std::size_t rank = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(dim));
        const ComplexMatrix d = gram(detail::gaussian_matrix(rng, dim, std::min(rank, dim))) * (0.01 + rng.uniform());
        auto& o = outcomes[i];
        o.margin = lemma1_gap(b + d, b);
        o.violated = o.margin < -1e-10;
        if (o.violated) o.note = "lambda_max decreased by " + std::to_string(-o.margin);
    });
    return detail::reduce(outcomes);
}

/// Smallest eigenvalue of budget * A A^H - A P A^H.
inline double lemma2_gap(const ComplexMatrix& a, const ComplexMatrix& p, double budget) {
    const ComplexMatrix diff = gram(a) * budget - sandwich(a, p);
    return eig_hermitian(diff).eigenvalues.back();
}

/// Random A (rows x cols) and PSD P with tr(P) equal to a random budget; checks
/// budget*A A^H - A P A^H and budget*I - P are both PSD.
inline OracleReport check_lemma2(std::size_t trials, std::size_t rows, std::size_t cols, std::uint64_t seed,
                                 const OracleOptions& opts = {}) {
    if (rows == 0 || cols == 0) throw Error(ErrorKind::InvalidDimensions, "dimensions must be >= 1");
    constexpr double tol = 1e-9;
    std::vector<detail::TrialOutcome> outcomes(trials);
    parallel_for(trials, opts.workers, [&](std::size_t i) {
        RandomSource rng(derive_seed(seed, i));
        const ComplexMatrix a = detail::gaussian_matrix(rng, rows, cols);
        const double budget = 0.1 + 9.9 * rng.uniform();
        const ComplexMatrix p = random_psd(rng, cols, budget);

        const auto outer_check = check_psd(gram(a) * budget - sandwich(a, p), tol);
        const auto inner_check = check_psd(ComplexMatrix::identity(cols) * budget - p, tol);
        auto& o = outcomes[i];
        o.margin = std::min(outer_check.min_eigenvalue, inner_check.min_eigenvalue);
        o.violated = !outer_check.ok || !inner_check.ok;
        if (o.violated) o.note = outer_check.ok ? inner_check.diagnostic : outer_check.diagnostic;
    });
    return detail::reduce(outcomes);
}

/// Channel where every user has one antenna and all H_r^(k) are scalar multiples
/// of one column, so every user's Gram matrix shares its top eigenvector.
inline ChannelSet make_shared_direction_instance(std::size_t users, std::size_t relay_antennas, std::uint64_t seed) {
    if (users == 0 || relay_antennas == 0) throw Error(ErrorKind::InvalidDimensions, "need K >= 1 and Mr >= 1");
    RandomSource rng(seed);
    CVector base(relay_antennas);
    for (auto& z : base) z = rng.complex_gaussian();
    ChannelSet c;
    c.relay_antennas = relay_antennas;
    c.user_antennas.assign(users, 1);
    for (std::size_t k = 0; k < users; ++k) {
        const cplx scale = rng.complex_gaussian();
        ComplexMatrix h(relay_antennas, 1);
        for (std::size_t i = 0; i < relay_antennas; ++i) h(i, 0) = scale * base[i];
        c.to_relay.push_back(std::move(h));
    }
    c.to_receiver.resize(relay_antennas);
    for (auto& z : c.to_receiver) z = rng.complex_gaussian();
    return c;
}

struct OrderingDims {
    std::vector<std::size_t> user_counts;  // instance i uses user_counts[i % size]
    std::size_t user_antennas = 4;
    std::size_t relay_antennas = 4;
};

/// On random Rayleigh instances: TDMA >= joint, and sum_k alpha1^(k) P^(k) >= lambda_max(R~).
/// `strict` counts instances whose rate gap exceeds kStrictGap.
inline OracleReport check_theorem3(std::size_t instances, const OrderingDims& dims, double user_power,
                                   double relay_power, std::uint64_t seed, const OracleOptions& opts = {}) {
    if (dims.user_counts.empty()) throw Error(ErrorKind::InvalidDimensions, "need at least one user count");
    std::vector<detail::TrialOutcome> outcomes(instances);
    parallel_for(instances, opts.workers, [&](std::size_t i) {
        const std::size_t users = dims.user_counts[i % dims.user_counts.size()];
        const ChannelSet c = sample_rayleigh(users, dims.user_antennas, dims.relay_antennas, derive_seed(seed, i));
        const PowerBudget p = PowerBudget::uniform(users, user_power, relay_power);

        const JointSolution joint = joint_sum_rate(c, p);
        const TdmaSolution tdma = tdma_sum_rate(c, p);
        const DerivedGains g = derive_gains(c);
        double weighted = 0.0;
        for (std::size_t k = 0; k < users; ++k) weighted += g.user_gain[k] * p.user_power[k];

        auto& o = outcomes[i];
        o.margin = tdma.sum_rate - joint.sum_rate;
        const double eig_margin = weighted - joint.lambda_max_r_tilde;
        o.strict = o.margin > kStrictGap;
        o.violated = o.margin < -kRateTol || eig_margin < -kRateTol;
        if (o.violated) {
            std::ostringstream os;
            os << "rate gap " << o.margin << ", eigenvalue gap " << eig_margin;
            const auto path = dump_violation(c, p, opts, "theorem3_" + std::to_string(i), os.str());
            if (!path.empty()) os << " (dumped to " << path << ")";
            o.note = os.str();
        }
    });
    return detail::reduce(outcomes);
}

/// max_j,k |dR/dtau^(j) - dR/dtau^(k)| by central differences of the slot-rate sum.
inline double kkt_residual(const ChannelSet& c, const PowerBudget& p, const TimeAllocation& t, double step = 1e-6) {
    p.validate(c.users());
    t.validate(c.users());
    if (!(step > 0.0)) throw Error(ErrorKind::StepOutOfRange, "step must be positive");
    for (double tau : t.tau) {
        if (tau - step < 0.0 || tau + step > 1.0) {
            throw Error(ErrorKind::StepOutOfRange, "tau " + std::to_string(tau) + " +- step leaves [0, 1]");
        }
    }
    const DerivedGains g = derive_gains(c);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < t.tau.size(); ++k) {
        std::vector<double> up = t.tau, down = t.tau;
        up[k] += step;
        down[k] -= step;
        const double partial = (tdma_rate_unchecked(g, p, up) - tdma_rate_unchecked(g, p, down)) / (2.0 * step);
        lo = std::min(lo, partial);
        hi = std::max(hi, partial);
    }
    return hi - lo;
}

}  // namespace marc
