#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "vrstream/channel.hpp"

using namespace vrstream;

// Reference thresholds at P_e = 1e-3, from scipy (norm.isf, brentq), not from this code.
constexpr double kBpsk = 4.77476785304162;
constexpr double kQpsk = 9.54953570608324;
constexpr double kQam16 = 45.11283379912762;
constexpr double kQam64 = 179.84601951054327;

TEST(BerTest, ZeroSnrLimits) {
    EXPECT_DOUBLE_EQ(ber(Modulation::bpsk, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(ber(Modulation::qpsk, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(ber(Modulation::qam16, 0.0), 0.375);
    EXPECT_NEAR(ber(Modulation::qam64, 0.0), 7.0 / 24.0, 1e-15);
    EXPECT_THROW(ber(Modulation::bpsk, -1.0), std::domain_error);
}

TEST(BerTest, StrictlyDecreasing) {
    for (Modulation m : kModulations) {
        double prev = ber(m, 0.0);
        for (double snr = 0.5; snr < 400.0; snr *= 1.3) {
            const double cur = ber(m, snr);
            EXPECT_LT(cur, prev);
            prev = cur;
        }
    }
}

TEST(BerTest, UnknownModeIsRejected) {
    EXPECT_THROW(ber(static_cast<Modulation>(3), 1.0), std::invalid_argument);
    EXPECT_THROW(bits_per_symbol(static_cast<Modulation>(8)), std::invalid_argument);
}

TEST(SnrThresholdTest, MatchesReferenceInversion) {
    EXPECT_NEAR(snr_threshold(Modulation::bpsk, 1e-3), kBpsk, kBpsk * 1e-8);
    EXPECT_NEAR(snr_threshold(Modulation::qpsk, 1e-3), kQpsk, kQpsk * 1e-8);
    EXPECT_NEAR(snr_threshold(Modulation::qam16, 1e-3), kQam16, kQam16 * 1e-8);
    EXPECT_NEAR(snr_threshold(Modulation::qam64, 1e-3), kQam64, kQam64 * 1e-8);
    EXPECT_NEAR(10 * std::log10(snr_threshold(Modulation::qpsk, 1e-3)), 9.80, 0.005);
}

TEST(SnrThresholdTest, OrderedByEfficiency) {
    for (double pe : {1e-2, 1e-3, 1e-5, 1e-7}) {
        EXPECT_LT(snr_threshold(Modulation::bpsk, pe), snr_threshold(Modulation::qpsk, pe));
        EXPECT_LT(snr_threshold(Modulation::qpsk, pe), snr_threshold(Modulation::qam16, pe));
        EXPECT_LT(snr_threshold(Modulation::qam16, pe), snr_threshold(Modulation::qam64, pe));
    }
}

TEST(SnrThresholdTest, DomainErrors) {
    EXPECT_THROW(snr_threshold(Modulation::bpsk, 0.0), std::domain_error);
    EXPECT_THROW(snr_threshold(Modulation::bpsk, 0.5), std::domain_error);
    EXPECT_THROW(snr_threshold(Modulation::qam16, 0.4), std::domain_error);
}

TEST(SelectModulationTest, Examples) {
    LinkConfig cfg;
    EXPECT_EQ(select_modulation(1e4, cfg), Modulation::qam64);
    EXPECT_EQ(select_modulation(1.0, cfg), Modulation::bpsk);
    EXPECT_EQ(select_modulation(0.0, cfg), Modulation::bpsk);
    EXPECT_EQ(select_modulation(std::pow(10.0, 1.2), cfg), Modulation::qpsk);
    EXPECT_EQ(select_modulation(kQam16 * 1.001, cfg), Modulation::qam16);
}

TEST(SelectModulationTest, MonotoneAndMeetsTarget) {
    const ModulationTable table(1e-3);
    int prev = 0;
    for (int i = 0; i <= 20000; ++i) {
        const double snr = std::pow(10.0, -1.0 + 4.0 * i / 20000.0);
        const Modulation m = table.select(snr);
        EXPECT_GE(bits_per_symbol(m), prev);
        prev = bits_per_symbol(m);
        if (snr >= table.threshold(Modulation::bpsk)) {
            EXPECT_LE(ber(m, snr), 1e-3 + 1e-12);
        }
    }
}

TEST(FadingChannelTest, AlphaHeldForFortySeconds) {
    FadingChannel ch(LinkConfig{}, 2.0);
    std::mt19937_64 rng(5);
    const double first = ch.draw(rng, 1).alpha;
    double prev_h = std::norm(ch.draw(rng, 2).h_r);
    for (int k = 3; k <= 20; ++k) {
        const auto s = ch.draw(rng, k);
        EXPECT_EQ(s.alpha, first);
        EXPECT_NE(std::norm(s.h_r), prev_h);
        prev_h = std::norm(s.h_r);
    }
    const double second = ch.draw(rng, 21).alpha;
    EXPECT_NE(second, first);
    EXPECT_GE(second, 0.75);
    EXPECT_LE(second, 1.25);
    for (int k = 22; k <= 40; ++k) EXPECT_EQ(ch.draw(rng, k).alpha, second);
    EXPECT_NE(ch.draw(rng, 41).alpha, second);
}

TEST(FadingChannelTest, DegenerateDrawGivesAverageSnr) {
    LinkConfig cfg;
    cfg.alpha_min = cfg.alpha_max = 1.0;
    FadingChannel ch(cfg, 2.0);
    const auto s = ch.state_for(1.0, {1.0, 0.0});
    EXPECT_DOUBLE_EQ(s.snr, cfg.avg_snr);
    EXPECT_EQ(s.mode, Modulation::qam16);
}

TEST(FadingChannelTest, SmallScalePowerHasUnitMean) {
    FadingChannel ch(LinkConfig{}, 2.0);
    std::mt19937_64 rng(11);
    double sum = 0.0;
    const int n = 100000;
    for (int k = 1; k <= n; ++k) sum += std::norm(ch.draw(rng, k).h_r);
    EXPECT_NEAR(sum / n, 1.0, 0.02);
}

TEST(FadingChannelTest, DeterministicGivenSeed) {
    FadingChannel a(LinkConfig{}, 2.0), b(LinkConfig{}, 2.0);
    std::mt19937_64 ra(77), rb(77);
    for (int k = 1; k <= 200; ++k) {
        const auto x = a.draw(ra, k);
        const auto y = b.draw(rb, k);
        EXPECT_EQ(x.snr, y.snr);
        EXPECT_EQ(x.mode, y.mode);
    }
}

TEST(FadingChannelTest, ModeFrequenciesMatchAnalyticLaw) {
    // Redraw alpha every chunk so draws are independent and the binomial
    // standard error applies directly.
    LinkConfig cfg;
    cfg.alpha_period = cfg.fading_period;
    FadingChannel ch(cfg, 2.0);
    std::mt19937_64 rng(2024);
    const int n = 200000;
    std::array<int, 4> counts{};
    for (int k = 1; k <= n; ++k) ++counts[modulation_slot(ch.draw(rng, k).mode)];

    const double inf = std::numeric_limits<double>::infinity();
    const std::array<double, 5> edges{0.0, kQpsk, kQam16, kQam64, inf};
    for (std::size_t i = 0; i < 4; ++i) {
        const double p = oracle::snr_interval_probability(edges[i], edges[i + 1], cfg.avg_snr, cfg.alpha_min,
                                                          cfg.alpha_max);
        EXPECT_GT(p, 0.03) << "mode " << i << " should occur with nonnegligible probability";
        const double se = std::sqrt(p * (1 - p) / n);
        EXPECT_NEAR(static_cast<double>(counts[i]) / n, p, 3 * se) << "mode slot " << i;
    }
}

TEST(LinkConfigTest, Validation) {
    LinkConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.fading_period = 3.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = LinkConfig{};
    cfg.target_ber = 0.6;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = LinkConfig{};
    cfg.alpha_min = 1.5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    EXPECT_DOUBLE_EQ(LinkConfig{}.rate_mbps(Modulation::qpsk), 40.0);
}
