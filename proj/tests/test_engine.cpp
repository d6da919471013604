#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rmarket/engine.hpp"
#include "rmarket/pricing.hpp"

using namespace rmarket;

namespace {

const std::vector<double> kClaimsA = {1.0, 0.75, 0.125};
const std::vector<double> kIncomeA = {0.0, 0.25, 0.75};
const std::vector<double> kRightsA = {8.0 / 15, 6.0 / 15, 1.0 / 15};

}  // namespace

TEST(Frustration, Examples) {
    EXPECT_DOUBLE_EQ(frustration(8.0 / 15, 0.0), 1.0);
    EXPECT_NEAR(frustration(0.4, 0.386667), 0.033333, 1e-6);
    EXPECT_EQ(frustration(0.0, 0.5), 0.0);
    EXPECT_EQ(frustration(0.0, 0.0), 0.0);
    EXPECT_EQ(frustration(0.5, 0.9), 0.0);
}

TEST(Engine, ScenarioAFirstPrices) {
    const auto t = run(presets::scenario_a(), 5);
    EXPECT_NEAR(t.at(1).price_good, 75.0 / 116, 1e-12);
    EXPECT_NEAR(t.at(2).price_good, 1.01219, 1e-5);
    EXPECT_NEAR(t.at(1).frustration[1], 0.033333, 1e-6);
    EXPECT_NEAR(t.at(1).frustration[0], 1.0, 1e-12);
    EXPECT_NEAR(t.at(1).good_bought[1], 0.386667, 1e-6);
    EXPECT_NEAR(t.at(1).useful_money, 75.0 / 116, 1e-12);
    EXPECT_NEAR(t.at(1).useless_money, 41.0 / 116, 1e-12);
    EXPECT_NEAR(t.at(1).price_right, 75.0 / 116, 1e-12);
}

TEST(Engine, ScenarioAMatchesOraclePath) {
    const int horizon = 60;
    const auto t = run(presets::scenario_a(), horizon);
    const auto path = oracle::greedy_path(kClaimsA, kIncomeA, kRightsA, horizon);
    for (int tau = 1; tau <= horizon; ++tau) {
        const auto& r = t.at(tau);
        const auto& o = path[static_cast<std::size_t>(tau - 1)];
        EXPECT_NEAR(r.price_good, o.price, 1e-9) << "round " << tau;
        for (std::size_t b = 0; b < 3; ++b) {
            EXPECT_NEAR(r.money_start[b], o.money[b], 1e-9) << "round " << tau;
            EXPECT_NEAR(r.frustration[b], o.frustration[b], 1e-9) << "round " << tau;
        }
    }
}

TEST(Engine, FreeMarketMatchesOraclePath) {
    auto cfg = presets::scenario_a(DistributionMechanism::proportional(), Variant::free_market);
    const auto t = run(cfg, 40);
    const auto path = oracle::greedy_path(kClaimsA, kIncomeA, kRightsA, 40, true);
    for (int tau = 1; tau <= 40; ++tau) {
        EXPECT_NEAR(t.at(tau).price_good, 1.0, 1e-12);
        EXPECT_EQ(t.at(tau).price_right, 0.0);
        for (std::size_t b = 0; b < 3; ++b)
            EXPECT_NEAR(t.at(tau).frustration[b], path[static_cast<std::size_t>(tau - 1)].frustration[b], 1e-12);
    }
}

TEST(EngineProperty, NextMoneyLawHoldsOnPath) {
    for (const auto& mech : {DistributionMechanism::proportional(), DistributionMechanism::contested_garment()}) {
        for (const auto& cfg : {presets::scenario_a(mech), presets::scenario_b(mech)}) {
            const auto t = run(cfg, 80);
            for (int tau = 1; tau < 80; ++tau) {
                const auto& r = t.at(tau);
                for (std::size_t b = 0; b < cfg.buyers.size(); ++b) {
                    const double expected = cfg.income(b, tau + 1) +
                                            std::max(0.0, r.solved_price * r.right_assigned[b] - r.money_start[b]);
                    EXPECT_NEAR(t.at(tau + 1).money_start[b], expected, 1e-9) << "round " << tau << " buyer " << b;
                }
            }
        }
    }
}

TEST(EngineProperty, ExpectedFrustrationRecomputes) {
    const auto t = run(presets::scenario_b(DistributionMechanism::contested_garment()), 100);
    double sum = 0.0;
    for (int tau = 1; tau <= 100; ++tau) {
        for (double f : t.at(tau).frustration) {
            EXPECT_GE(f, 0.0);
            EXPECT_LE(f, 1.0);
            sum += f;
        }
        EXPECT_NEAR(t.expected_frustration_path[static_cast<std::size_t>(tau - 1)], sum / (3.0 * tau), 1e-12);
        EXPECT_NEAR(t.expected_frustration(tau), sum / (3.0 * tau), 1e-12);
    }
}

TEST(EngineProperty, OnPathAllOfferedGoodSellsAndPoorBuyersGetMoneyOverPrice) {
    const auto t = run(presets::scenario_a(), 30);
    for (const auto& r : t.records) {
        EXPECT_NEAR(r.volume_sold, r.volume_offered, 1e-9);
        double revenue = 0.0;
        for (double v : r.seller_revenue) revenue += v;
        EXPECT_NEAR(revenue, r.solved_price * std::accumulate(r.right_assigned.begin(), r.right_assigned.end(), 0.0), 1e-9);
        for (std::size_t b = 0; b < 3; ++b) {
            if (r.solved_price * r.right_assigned[b] > r.money_start[b] + 1e-12)
                EXPECT_NEAR(r.good_bought[b], r.money_start[b] / r.solved_price, 1e-9);
            else
                EXPECT_GE(r.good_bought[b], r.right_assigned[b] - 1e-9);
        }
    }
}

TEST(EngineProperty, ConservationAndRightsCapEveryRound) {
    for (auto variant : {Variant::rights, Variant::free_market, Variant::myopic_rights}) {
        const auto t = run(presets::scenario_a(DistributionMechanism::contested_garment(), variant), 100);
        EXPECT_TRUE(t.conservation_ok(1e-9)) << to_string(variant);
        EXPECT_EQ(t.first_conservation_failure(1e-9), 0);
    }
}

TEST(Engine, CanonicalClosedForm) {
    const auto t = run(presets::scenario_a(DistributionMechanism::canonical(3)), 30);
    EXPECT_NEAR(t.at(1).price_good, 7.0 / 8, 1e-12);
    for (int tau = 2; tau <= 30; ++tau) EXPECT_NEAR(t.at(tau).price_good, 1.0, 1e-12);
}

TEST(Engine, MyopicFrustrationAtMostHalf) {
    const auto t = run(presets::scenario_a(DistributionMechanism::proportional(), Variant::myopic_rights), 100);
    for (const auto& r : t.records)
        for (double f : r.frustration) EXPECT_LE(f, 0.5 + 1e-12);
}

TEST(Engine, ScenarioBProportionalReachesZeroFrustration) {
    const auto t = run(presets::scenario_b(), 100);
    EXPECT_GT(t.zero_frustration_from(), 0);
    EXPECT_LE(t.first_zero_frustration(), t.zero_frustration_from());
}

TEST(Engine, TimeVaryingSupplyRunsCleanly) {
    auto cfg = presets::scenario_a();
    cfg.sellers[0].resupply = SupplySchedule::cosine(0.25, 10, 0.75);
    const auto t = run(cfg, 100);
    EXPECT_TRUE(t.conservation_ok(1e-9));
    EXPECT_NEAR(t.at(10).volume_offered, 1.0, 1e-12);
    EXPECT_NEAR(t.at(5).volume_offered, 0.5, 1e-12);
}

TEST(Engine, ZeroSupplyRoundMeansNoTrade) {
    auto cfg = presets::scenario_a();
    cfg.sellers[0].resupply = SupplySchedule::step(1.0, 0.0, 3);
    const auto t = run(cfg, 6);
    EXPECT_EQ(t.at(4).volume_offered, 0.0);
    EXPECT_EQ(t.at(4).volume_sold, 0.0);
    EXPECT_TRUE(t.conservation_ok(1e-9));
}

TEST(Engine, StrategyOverrideIsApplied) {
    StrategyOverride o;
    o.offers = [](const MarketState& st, std::vector<SellerOffer>& offers) {
        if (st.round == 2) offers[0].price *= 2.0;
    };
    const auto t = run(presets::scenario_a(), 3, &o);
    EXPECT_NEAR(t.at(2).price_good, 2.0 * t.at(2).solved_price, 1e-12);
    EXPECT_LT(t.at(2).volume_sold, t.at(2).volume_offered);
}

TEST(Engine, FailuresNameTheRound) {
    StrategyOverride o;
    o.offers = [](const MarketState& st, std::vector<SellerOffer>&) {
        if (st.round == 4) throw std::runtime_error("boom");
    };
    try {
        run(presets::scenario_a(), 10, &o);
        FAIL() << "expected SimulationError";
    } catch (const SimulationError& e) {
        EXPECT_EQ(e.round(), 4);
    }
}

TEST(Dirichlet, DeterministicAndNormalized) {
    DirichletOptions opt;
    opt.num_buyers = 50;
    opt.concentration = 5.0;
    opt.seed = 17;
    const auto a = generate_dirichlet_scenario(opt);
    const auto b = generate_dirichlet_scenario(opt);
    EXPECT_TRUE(a == b);
    EXPECT_NEAR(a.total_income(1), 1.0, 1e-12);
    EXPECT_NEAR(a.total_resupply(1), 1.0, 1e-12);
    EXPECT_EQ(a.horizon, 500);
    opt.seed = 18;
    EXPECT_FALSE(a == generate_dirichlet_scenario(opt));
}

TEST(Dirichlet, InfiniteConcentrationGivesMeans) {
    DirichletOptions opt;
    const auto c = generate_dirichlet_scenario(opt);
    ASSERT_EQ(c.buyers.size(), 3u);
    const double h = 1.0 + 0.5 + 1.0 / 3;
    EXPECT_NEAR(c.buyers[0].claim, 2.0 / h, 1e-12);
    EXPECT_NEAR(c.buyers[2].claim, 2.0 / 3 / h, 1e-12);
    EXPECT_GT(c.income(2, 1), c.income(1, 1));
    EXPECT_GT(c.income(1, 1), c.income(0, 1));
    EXPECT_TRUE(c.is_constant_normalized());
}
