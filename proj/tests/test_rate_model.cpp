#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "v2xalloc/rate_model.hpp"
#include "v2xalloc/wmmse_solver.hpp"

using namespace v2x;
using v2x::testing::small_config;
using v2x::testing::zero_realization;

namespace {

PowerProfile powers(std::initializer_list<double> pc, std::initializer_list<double> pv) {
    PowerProfile p;
    p.pc = Eigen::VectorXd::Map(std::data(pc), static_cast<Eigen::Index>(pc.size()));
    p.pv = Eigen::VectorXd::Map(std::data(pv), static_cast<Eigen::Index>(pv.size()));
    return p;
}

PowerProfile random_powers(const SystemConfig& cfg, Rng& rng) {
    PowerProfile p;
    p.pc.resize(cfg.m_cellular);
    p.pv.resize(cfg.k_v2v);
    for (auto& x : p.pc) x = rng.uniform(0, cfg.pmax_c);
    for (auto& x : p.pv) x = rng.uniform(0, cfg.pmax_v);
    return p;
}

// Straight transcription of the rate expressions, independent of the library's loops.
double oracle_sum_rate(const ChannelRealization& r, const PowerProfile& p, const SystemConfig& cfg) {
    double total = 0.0;
    for (int m = 0; m < r.m(); ++m) {
        double den = cfg.noise_var;
        for (int n = 0; n < r.m(); ++n) den += n == m ? 0.0 : p.pc[n] * r.hc[n];
        for (int k = 0; k < r.k(); ++k) den += p.pv[k] * r.hvb[k];
        total += cfg.weight_c[m] * std::log(1.0 + p.pc[m] * r.hc[m] / den);
    }
    for (int k = 0; k < r.k(); ++k) {
        double den = cfg.noise_var;
        for (int l = 0; l < r.k(); ++l) den += l == k ? 0.0 : p.pv[l] * r.gcross(l, k);
        for (int m = 0; m < r.m(); ++m) den += p.pc[m] * r.hcv(m, k);
        total += cfg.weight_v[k] * std::log(1.0 + p.pv[k] * r.gd[k] / den);
    }
    return total;
}

Amplitudes two_user_amplitudes() {
    Amplitudes a;
    a.v = Eigen::Vector2d(0.8, 0.6);
    a.u = Eigen::Vector2d(0.7, 0.4);
    a.w = Eigen::Vector2d(1.5, 2.5);
    return a;
}

ChannelRealization two_user_channel() {
    ChannelRealization r = zero_realization(1, 1);
    r.hc << 1.0;
    r.hvb << 0.5;
    r.gd << 2.0;
    r.gcross << 2.0;
    r.hcv << 0.25;
    return r;
}

}  // namespace

TEST(Sinr, CellularWorkedValues) {
    ChannelRealization r = zero_realization(1, 0);
    r.hc << 1.0;
    const SystemConfig cfg = small_config(1, 0);
    EXPECT_DOUBLE_EQ(sinr_cellular(r, powers({1.0}, {}), cfg, 0), 10.0);
    EXPECT_EQ(sinr_cellular(r, powers({0.0}, {}), cfg, 0), 0.0);

    ChannelRealization r2 = zero_realization(2, 1);
    r2.hc << 1.0, 0.5;
    r2.hvb << 0.2;
    EXPECT_NEAR(sinr_cellular(r2, powers({1, 1}, {1}), small_config(2, 1), 0), 1.25, 1e-15);
    EXPECT_THROW(sinr_cellular(r2, powers({1, 1}, {1}), small_config(2, 1), 2), std::out_of_range);
}

TEST(Sinr, V2vWorkedValues) {
    ChannelRealization r = zero_realization(0, 1);
    r.gd << 2.0;
    r.gcross << 2.0;
    EXPECT_DOUBLE_EQ(sinr_v2v(r, powers({}, {1.0}), small_config(0, 1), 0), 20.0);

    ChannelRealization r2 = zero_realization(1, 2);
    r2.gd << 2.0, 0.0;
    r2.gcross << 2.0, 0.7, 0.5, 0.0;  // (1,0) = 0.5: transmitter 1 -> receiver 0
    r2.hcv << 0.3, 0.9;
    const SystemConfig cfg = small_config(1, 2);
    // 2 / (0.5 + 0.3 + 0.1)
    EXPECT_NEAR(sinr_v2v(r2, powers({1}, {1, 1}), cfg, 0), 2.2222222222222222, 1e-15);
    EXPECT_EQ(sinr_v2v(r2, powers({1}, {1, 1}), cfg, 1), 0.0);
    EXPECT_THROW(sinr_v2v(r2, powers({1}, {1, 1}), cfg, -1), std::out_of_range);
}

TEST(WeightedSumRate, WorkedValues) {
    ChannelRealization r = zero_realization(1, 0);
    r.hc << 1.0;
    EXPECT_NEAR(weighted_sum_rate(r, powers({1.0}, {}), small_config(1, 0)), std::log(11.0), 1e-15);
    const SystemConfig cfg = small_config(8, 10);
    const ChannelRealization big = sample_realization(cfg, 3, 0);
    PowerProfile zero{Eigen::VectorXd::Zero(8), Eigen::VectorXd::Zero(10)};
    EXPECT_EQ(weighted_sum_rate(big, zero, cfg), 0.0);
}

TEST(WeightedSumRate, MatchesIndependentOracleAndJointRoute) {
    SystemConfig cfg = small_config(8, 10);
    Rng rng(99);
    for (int i = 0; i < 8; ++i) cfg.weight_c[i] = rng.uniform(0, 2);
    for (int k = 0; k < 10; ++k) cfg.weight_v[k] = rng.uniform(0, 2);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const ChannelRealization r = sample_realization(cfg, 5, s);
        const PowerProfile p = random_powers(cfg, rng);
        const double expected = oracle_sum_rate(r, p, cfg);
        EXPECT_NEAR(weighted_sum_rate(r, p, cfg), expected, 1e-12 * expected);
        EXPECT_NEAR(weighted_sum_rate(link_gain_matrix(r), p.joined(), cfg), expected,
                    1e-12 * expected);
    }
}

TEST(WeightedSumRate, ZeroIffAllSinrZero) {
    const SystemConfig cfg = small_config(2, 2);
    const ChannelRealization r = sample_realization(cfg, 1, 0);
    PowerProfile p{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)};
    EXPECT_EQ(weighted_sum_rate(r, p, cfg), 0.0);
    p.pv(1) = 1e-3;
    EXPECT_GT(weighted_sum_rate(r, p, cfg), 0.0);
}

TEST(Sinr, ScalingGainsAndNoiseLeavesSinrUnchanged) {
    SystemConfig cfg = small_config(8, 10);
    Rng rng(4);
    for (std::uint64_t s = 0; s < 100; ++s) {
        const ChannelRealization r = sample_realization(cfg, 8, s);
        const PowerProfile p = random_powers(cfg, rng);
        const double c = std::pow(2.0, rng.uniform(-10, 10));
        ChannelRealization scaled = r;
        scaled.hc *= c;
        scaled.hvb *= c;
        scaled.gd *= c;
        scaled.gcross *= c;
        scaled.hcv *= c;
        SystemConfig scfg = cfg;
        scfg.noise_var *= c;
        const Eigen::VectorXd a = sinr_all(link_gain_matrix(r), p.joined(), cfg.noise_var);
        const Eigen::VectorXd b = sinr_all(link_gain_matrix(scaled), p.joined(), scfg.noise_var);
        for (Eigen::Index j = 0; j < a.size(); ++j) EXPECT_NEAR(b(j), a(j), 1e-14 * a(j));
    }
}

TEST(Sinr, MoreInterferencePowerLowersVictimSinr) {
    const SystemConfig cfg = small_config(3, 4);
    Rng rng(12);
    for (std::uint64_t s = 0; s < 100; ++s) {
        const ChannelRealization r = sample_realization(cfg, 13, s);
        const PowerProfile p = random_powers(cfg, rng);
        PowerProfile louder = p;
        louder.pv(2) = std::min(p.pv(2) + 0.1, cfg.pmax_v + 0.1);
        EXPECT_LT(sinr_v2v(r, louder, cfg, 0), sinr_v2v(r, p, cfg, 0));
        EXPECT_LT(sinr_cellular(r, louder, cfg, 1), sinr_cellular(r, p, cfg, 1));
        PowerProfile cu_louder = p;
        cu_louder.pc(0) += 0.1;
        EXPECT_LT(sinr_v2v(r, cu_louder, cfg, 3), sinr_v2v(r, p, cfg, 3));
    }
}

TEST(MseUser, WorkedValues) {
    const SystemConfig cfg = small_config(1, 1);
    const ChannelRealization r = two_user_channel();
    Amplitudes zero{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones()};
    EXPECT_EQ(mse_user(r, zero, cfg, {LinkClass::Cellular, 0}), 1.0);
    EXPECT_EQ(mse_user(r, zero, cfg, {LinkClass::V2V, 0}), 1.0);

    const Amplitudes a = two_user_amplitudes();
    // term by term: (0.7*1*0.8-1)^2 + 0.7^2*0.5*0.6^2 + 0.1*0.7^2
    EXPECT_NEAR(mse_user(r, a, cfg, {LinkClass::Cellular, 0}), 0.3308, 1e-15);
    // (0.4*sqrt(2)*0.6-1)^2 + 0.4^2*0.25*0.8^2 + 0.1*0.4^2
    EXPECT_NEAR(mse_user(r, a, cfg, {LinkClass::V2V, 0}), 0.47797749006091438, 1e-15);
    const Eigen::VectorXd all = mse_all(link_gain_matrix(r), a, cfg.noise_var);
    EXPECT_NEAR(all(0), 0.3308, 1e-15);
    EXPECT_NEAR(all(1), 0.47797749006091438, 1e-15);
}

TEST(MseUser, WienerReceiverAttainsMmseSinrEquality) {
    SystemConfig cfg = small_config(8, 10);
    Rng rng(31);
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const ChannelRealization r = sample_realization(cfg, 21, s);
        Amplitudes a;
        a.v.resize(18);
        for (auto& v : a.v) v = rng.uniform(0, 1);
        a.w = Eigen::VectorXd::Ones(18);
        a.u = update_u(r, a, cfg);
        const PowerProfile p = a.power(8);
        for (int m = 0; m < 8; ++m) {
            const double gap = std::abs(mse_user(r, a, cfg, {LinkClass::Cellular, m}) -
                                        1.0 / (1.0 + sinr_cellular(r, p, cfg, m)));
            worst = std::max(worst, gap);
        }
        for (int k = 0; k < 10; ++k) {
            const double gap = std::abs(mse_user(r, a, cfg, {LinkClass::V2V, k}) -
                                        1.0 / (1.0 + sinr_v2v(r, p, cfg, k)));
            worst = std::max(worst, gap);
        }
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(WmmseObjective, WorkedValues) {
    const SystemConfig cfg = small_config(1, 1);
    const ChannelRealization r = two_user_channel();
    Amplitudes a = two_user_amplitudes();
    // 1.5*0.3308 - ln 1.5 + 2.5*0.477977... - ln 2.5
    EXPECT_NEAR(wmmse_objective(r, a, cfg), 0.36938788516996649, 1e-14);
    EXPECT_NEAR(wmmse_objective(link_gain_matrix(r), a, cfg), 0.36938788516996649, 1e-14);

    a.w = Eigen::Vector2d::Ones();
    EXPECT_NEAR(wmmse_objective(r, a, cfg), 0.3308 + 0.47797749006091438, 1e-14);
}

TEST(WmmseObjective, AtOptimalWeightsEqualsOnePlusLogMse) {
    SystemConfig cfg = small_config(3, 4);
    Rng rng(8);
    for (int i = 0; i < 3; ++i) cfg.weight_c[i] = rng.uniform(0.5, 2);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const ChannelRealization r = sample_realization(cfg, 2, s);
        Amplitudes a;
        a.v = Eigen::VectorXd::Constant(7, 0.5);
        a.u = Eigen::VectorXd::Constant(7, 0.3);
        const Eigen::VectorXd eps = mse_all(link_gain_matrix(r), a, cfg.noise_var);
        a.w = eps.cwiseInverse();
        double expected = 0.0;
        for (int i = 0; i < 7; ++i) expected += cfg.weight(i) * (1.0 + std::log(eps(i)));
        EXPECT_NEAR(wmmse_objective(r, a, cfg), expected, 1e-12);
    }
}
