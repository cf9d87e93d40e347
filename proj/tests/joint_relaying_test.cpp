#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

namespace marc {
namespace {

using testing::random_matrix;

ChannelSet scalar_instance(cplx h_relay, cplx h_rx) {
    ChannelSet c;
    c.relay_antennas = 1;
    c.user_antennas = {1};
    c.to_relay.emplace_back(1, 1, std::vector<cplx>{h_relay});
    c.to_receiver = {h_rx};
    return c;
}

CovarianceSet zero_covariances(const ChannelSet& c) {
    CovarianceSet q;
    for (auto m : c.user_antennas) q.per_user.emplace_back(m, m);
    return q;
}

// Oracle: R entry by entry, sum_k sum_a sum_b H[i,a] Q[a,b] conj(H[j,b]).
ComplexMatrix r_by_summation(const ChannelSet& c, const CovarianceSet& q) {
    ComplexMatrix r(c.relay_antennas, c.relay_antennas);
    for (std::size_t k = 0; k < c.users(); ++k) {
        const auto& h = c.to_relay[k];
        for (std::size_t i = 0; i < r.rows(); ++i)
            for (std::size_t j = 0; j < r.cols(); ++j)
                for (std::size_t a = 0; a < h.cols(); ++a)
                    for (std::size_t b = 0; b < h.cols(); ++b) r(i, j) += h(i, a) * q.per_user[k](a, b) * std::conj(h(j, b));
    }
    return r;
}

TEST(BuildR, ZeroCovariancesGiveZero) {
    const auto c = sample_rayleigh(3, 2, 3, 1);
    EXPECT_EQ(build_r(c, zero_covariances(c)), ComplexMatrix(3, 3));
}

TEST(BuildR, IdentityChannelPassesCovarianceThrough) {
    ChannelSet c;
    c.relay_antennas = 2;
    c.user_antennas = {2};
    c.to_relay.push_back(ComplexMatrix::identity(2));
    c.to_receiver = {1.0, 0.0};
    const std::vector<double> d{2.5, 0.5};
    const CovarianceSet q{{ComplexMatrix::diagonal(d)}};
    EXPECT_EQ(build_r(c, q), ComplexMatrix::diagonal(d));
}

TEST(BuildR, MatchesTermByTermSummation) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = sample_rayleigh(3, std::vector<std::size_t>{1, 2, 4}, 3, seed);
        RandomSource rng(seed + 100);
        CovarianceSet q;
        for (auto m : c.user_antennas) q.per_user.push_back(gram(random_matrix(rng, m, m)));
        EXPECT_LE(testing::max_abs_diff(build_r(c, q), r_by_summation(c, q)), 1e-12 * 50);
    }
}

TEST(BuildR, ShapeMismatch) {
    const auto c = sample_rayleigh(2, 2, 2, 3);
    CovarianceSet q{{ComplexMatrix(2, 2), ComplexMatrix(3, 3)}};
    try {
        build_r(c, q);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
}

TEST(BuildRTilde, SimpleCases) {
    const auto c = sample_rayleigh(2, 3, 2, 4);
    EXPECT_EQ(build_r_tilde(c, PowerBudget::uniform(2, 0.0, 1.0)), ComplexMatrix(2, 2));

    const auto s = build_r_tilde(scalar_instance(2.0, 1.0), PowerBudget{{3.0}, 1.0});
    EXPECT_DOUBLE_EQ(s(0, 0).real(), 12.0);
    EXPECT_DOUBLE_EQ(s(0, 0).imag(), 0.0);
}

TEST(BuildRTilde, MatchesGramSumAndSingleAntennaCovariances) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = sample_rayleigh(4, 3, 4, seed);
        const PowerBudget p{{1.0, 2.5, 0.0, 7.0}, 1.0};
        CovarianceSet scaled_identity;
        for (std::size_t k = 0; k < 4; ++k) {
            scaled_identity.per_user.push_back(ComplexMatrix::identity(3) * cplx(p.user_power[k]));
        }
        // R~ is the R of Q^(k) = P^(k) I
        EXPECT_LE(testing::max_abs_diff(build_r_tilde(c, p), r_by_summation(c, scaled_identity)), 1e-11);
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto c = sample_rayleigh(3, 1, 3, seed);
        const PowerBudget p{{1.5, 0.5, 2.0}, 1.0};
        CovarianceSet q;
        for (double pk : p.user_power) q.per_user.emplace_back(1, 1, std::vector<cplx>{pk});
        EXPECT_LE(testing::max_abs_diff(build_r_tilde(c, p), build_r(c, q)), 1e-12);
    }
}

TEST(OptimalCovariances, ScalarUserGetsFullPower) {
    const auto q = optimal_covariances(scalar_instance(cplx(0.3, -1.2), 1.0), PowerBudget{{4.0}, 1.0});
    EXPECT_NEAR(q.per_user[0](0, 0).real(), 4.0, 1e-15);
    EXPECT_EQ(q.per_user[0](0, 0).imag(), 0.0);
}

TEST(OptimalCovariances, SingleUserIsMatchedBeamformer) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto c = sample_rayleigh(1, 3, 4, seed);
        const double power = 2.0 + static_cast<double>(seed);
        const auto q = optimal_covariances(c, PowerBudget{{power}, 1.0});

        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(testing::to_eigen(c.to_relay[0]), Eigen::ComputeFullV);
        const Eigen::VectorXcd v1 = svd.matrixV().col(0);
        const Eigen::MatrixXcd expected = power * v1 * v1.adjoint();
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(std::abs(q.per_user[0](i, j) - expected(i, j)), 1e-10);
    }
}

TEST(OptimalCovariances, RankOneTraceTightAndAchieving) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto c = sample_rayleigh(1 + seed % 8, 1 + seed % 4, 1 + (seed / 2) % 4, seed);
        PowerBudget p = PowerBudget::uniform(c.users(), 10.0, 10.0);
        for (std::size_t k = 0; k < c.users(); ++k) p.user_power[k] = 0.5 + static_cast<double>(k);
        const auto q = optimal_covariances(c, p);
        for (std::size_t k = 0; k < c.users(); ++k) {
            EXPECT_NEAR(q.per_user[k].trace().real(), p.user_power[k], 1e-12 * p.user_power[k]);
            EXPECT_TRUE(is_psd(q.per_user[k], 1e-9));
            const auto ev = eig_hermitian(q.per_user[k]).eigenvalues;
            for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_NEAR(ev[i], 0.0, 1e-12 * p.user_power[k]);
        }
        const double target = eig_max(build_r_tilde(c, p)).lambda;
        const double reached = eig_max(build_r(c, q)).lambda;
        EXPECT_NEAR(reached, target, 1e-8 * target);
    }
}

TEST(OptimalCovariances, BeatsRandomFeasibleCovariances) {
    const auto c = sample_rayleigh(2, 2, 2, 8);
    const PowerBudget p = PowerBudget::uniform(2, 3.0, 1.0);
    const double best = eig_max(build_r(c, optimal_covariances(c, p))).lambda;
    RandomSource rng(123);
    for (int i = 0; i < 10000; ++i) {
        const auto q = random_feasible_covariances(c, p, rng);
        EXPECT_LE(eig_max(build_r(c, q)).lambda, best + 1e-9);
    }
}

TEST(OptimalCovariances, UserOrthogonalToTopDirectionStaysSilent) {
    ChannelSet c;
    c.relay_antennas = 2;
    c.user_antennas = {1, 1, 1};
    c.to_relay.emplace_back(2, 1, std::vector<cplx>{2.0, 0.0});  // along e1
    c.to_relay.emplace_back(2, 1, std::vector<cplx>{0.0, 1.0});  // along e2, H^H v = 0
    c.to_relay.emplace_back(2, 1, std::vector<cplx>{0.0, 0.0});  // dead link
    c.to_receiver = {1.0, 1.0};
    const PowerBudget p{{5.0, 1.0, 3.0}, 2.0};
    const auto q = optimal_covariances(c, p);
    EXPECT_NEAR(q.per_user[0](0, 0).real(), 5.0, 1e-15);
    EXPECT_EQ(q.per_user[1](0, 0), cplx(0.0));
    EXPECT_EQ(q.per_user[2](0, 0), cplx(0.0));
    EXPECT_NEAR(eig_max(build_r(c, q)).lambda, eig_max(build_r_tilde(c, p)).lambda, 1e-12);
}

TEST(OptimalRelayMatrix, NoiseOnlyInput) {
    ChannelSet c;
    c.relay_antennas = 2;
    c.user_antennas = {1};
    c.to_relay.emplace_back(2, 1, std::vector<cplx>{1.0, 0.0});
    c.to_receiver = {1.0, 0.0};
    const auto f = optimal_relay_matrix(c, ComplexMatrix(2, 2), 4.0);
    const ComplexMatrix expected(2, 2, {2.0, 0.0, 0.0, 0.0});
    EXPECT_LE(testing::max_abs_diff(f, expected), 1e-15);
}

TEST(OptimalRelayMatrix, ScalarArithmetic) {
    const ComplexMatrix r(1, 1, {3.0});
    const auto f = optimal_relay_matrix(scalar_instance(1.0, 1.0), r, 8.0);
    EXPECT_NEAR(f(0, 0).real(), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(f(0, 0).imag(), 0.0);
}

TEST(OptimalRelayMatrix, PowerConstraintActive) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto c = sample_rayleigh(3, 2, 4, seed);
        RandomSource rng(seed);
        const auto q = random_feasible_covariances(c, PowerBudget::uniform(3, 5.0, 1.0), rng);
        const auto r = build_r(c, q);
        const double pr = 0.1 + static_cast<double>(seed);
        const auto f = optimal_relay_matrix(c, r, pr);
        EXPECT_NEAR(relay_power_used(f, r), pr, 1e-9 * pr);
    }
}

TEST(OptimalRelayMatrix, ZeroReceiverChannelGivesZeroMatrix) {
    auto c = sample_rayleigh(2, 2, 3, 5);
    c.to_receiver.assign(3, 0.0);
    EXPECT_EQ(optimal_relay_matrix(c, ComplexMatrix::identity(3), 10.0), ComplexMatrix(3, 3));
}

TEST(EvaluateSumRate, ZeroRelayOrZeroCovarianceGivesZero) {
    const auto c = sample_rayleigh(2, 2, 2, 6);
    const PowerBudget p = PowerBudget::uniform(2, 1.0, 1.0);
    const auto q = optimal_covariances(c, p);
    EXPECT_EQ(evaluate_sum_rate(c, ComplexMatrix(2, 2), q).rate, 0.0);
    const auto f = optimal_relay_matrix(c, build_r(c, q), 1.0);
    EXPECT_EQ(evaluate_sum_rate(c, f, zero_covariances(c)).rate, 0.0);
}

TEST(EvaluateSumRate, InfeasibleCovarianceRejected) {
    const auto c = sample_rayleigh(2, 2, 2, 6);
    const PowerBudget p = PowerBudget::uniform(2, 1.0, 1.0);
    CovarianceSet q{{ComplexMatrix::identity(2), ComplexMatrix::identity(2) * cplx(0.1)}};  // trace 2 > 1
    try {
        evaluate_sum_rate(c, ComplexMatrix::identity(2), q, &p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InfeasibleCovariance);
    }
    const std::vector<double> d{1.0, -0.5};
    CovarianceSet indefinite{{ComplexMatrix::diagonal(d), ComplexMatrix(2, 2)}};
    EXPECT_THROW(evaluate_sum_rate(c, ComplexMatrix::identity(2), indefinite), Error);
    EXPECT_THROW(evaluate_sum_rate(c, ComplexMatrix::identity(3), zero_covariances(c)), Error);
}

TEST(EvaluateSumRate, ReportsRelayPowerFeasibility) {
    const auto c = sample_rayleigh(2, 2, 2, 6);
    const PowerBudget p = PowerBudget::uniform(2, 1.0, 1.0);
    const auto q = optimal_covariances(c, p);
    const auto f = optimal_relay_matrix(c, build_r(c, q), 1.0);
    EXPECT_TRUE(evaluate_sum_rate(c, f, q, &p).relay_power_feasible);
    EXPECT_FALSE(evaluate_sum_rate(c, f * cplx(1.1), q, &p).relay_power_feasible);
}

TEST(JointSumRate, VanishingPowers) {
    const auto c = sample_rayleigh(3, 2, 2, 9);
    EXPECT_NEAR(joint_sum_rate(c, PowerBudget::uniform(3, 10.0, 0.0)).sum_rate, 0.0, 1e-15);
    EXPECT_NEAR(joint_sum_rate(c, PowerBudget::uniform(3, 0.0, 10.0)).sum_rate, 0.0, 1e-15);
}

TEST(JointSumRate, ScalarHandValue) {
    // lambda_max(R~) = 1, rate = log2(2) - log2(1 + 1/2)
    const auto s = joint_sum_rate(scalar_instance(1.0, 1.0), PowerBudget{{1.0}, 1.0});
    EXPECT_DOUBLE_EQ(s.lambda_max_r_tilde, 1.0);
    EXPECT_NEAR(s.sum_rate, 0.4150374992788438, 1e-15);
}

TEST(JointSumRate, ClosedFormMatchesGenericEvaluation) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t users = 1 + seed % 8;
        const auto c = sample_rayleigh(users, 1 + seed % 4, 1 + (seed / 3) % 4, seed);
        const auto p = PowerBudget::uniform(users, 10.0, 0.5 + static_cast<double>(seed % 13));
        const auto s = joint_sum_rate(c, p);
        const auto eval = evaluate_sum_rate(c, s.relay_matrix, s.covariances, &p);
        EXPECT_NEAR(eval.rate, s.sum_rate, 1e-9);
        EXPECT_NEAR(eval.relay_power_used, p.relay_power, 1e-9 * p.relay_power);
        EXPECT_TRUE(eval.relay_power_feasible);
    }
}

TEST(JointSumRate, RatioAndDifferenceFormsAgree) {
    RandomSource rng(4);
    for (int i = 0; i < 10000; ++i) {
        const double g = 5.0 * rng.uniform(), s = 200.0 * rng.uniform(), pr = 1000.0 * rng.uniform();
        EXPECT_NEAR(relay_rate(g, s, pr), relay_rate_ratio_form(g, s, pr), 1e-12);
    }
}

TEST(JointSumRate, MonotoneInEveryPower) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto c = sample_rayleigh(3, 2, 3, seed);
        PowerBudget p{{1.0, 2.0, 3.0}, 5.0};
        const double base = joint_sum_rate(c, p).sum_rate;
        for (std::size_t k = 0; k < 3; ++k) {
            PowerBudget up = p;
            up.user_power[k] *= 1.5;
            EXPECT_GE(joint_sum_rate(c, up).sum_rate, base - 1e-12);
        }
        PowerBudget up = p;
        up.relay_power *= 1.5;
        EXPECT_GE(joint_sum_rate(c, up).sum_rate, base - 1e-12);
    }
}

TEST(JointSumRate, InvariantToReceiverPhase) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto c = sample_rayleigh(4, 2, 3, seed);
        const auto p = PowerBudget::uniform(4, 10.0, 10.0);
        const double base = joint_sum_rate(c, p).sum_rate;
        const cplx phase = std::polar(1.0, 0.3 * static_cast<double>(seed));
        for (auto& z : c.to_receiver) z *= phase;
        EXPECT_NEAR(joint_sum_rate(c, p).sum_rate, base, 1e-12);
    }
}

TEST(JointSumRate, ZeroReceiverChannel) {
    auto c = sample_rayleigh(2, 2, 2, 1);
    c.to_receiver.assign(2, 0.0);
    const auto s = joint_sum_rate(c, PowerBudget::uniform(2, 10.0, 10.0));
    EXPECT_EQ(s.sum_rate, 0.0);
    EXPECT_EQ(s.relay_matrix, ComplexMatrix(2, 2));
}

}  // namespace
}  // namespace marc
