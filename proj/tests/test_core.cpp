#include <gtest/gtest.h>

#include <cmath>

#include "rmarket/core.hpp"
#include "rmarket/engine.hpp"

using namespace rmarket;

namespace {

MarketConfig one_each(double g, double m, double d) {
    MarketConfig c;
    c.sellers = {SellerSpec{SupplySchedule::constant(g)}};
    c.buyers = {BuyerSpec{SupplySchedule::constant(m), d}};
    return c;
}

MarketState single(SellerState s, BuyerState b) {
    MarketState st;
    st.round = 1;
    st.sellers = {s};
    st.buyers = {b};
    return st;
}

}  // namespace

TEST(Quantity, RejectsNegativeAndNaN) {
    EXPECT_THROW(Quantity{-1e-3}, std::domain_error);
    EXPECT_THROW(Quantity{std::nan("")}, std::domain_error);
    EXPECT_EQ(Quantity(0.5).value(), 0.5);
    EXPECT_EQ(Quantity::snapped(-1e-15).value(), 0.0);
    EXPECT_THROW(Quantity::snapped(-1e-6), std::domain_error);
}

TEST(Transition, SellerGetsResupplyAndLosesMoney) {
    const auto cfg = one_each(1.0, 0.0, 1.0);
    const auto st = single({Quantity(0.0), Quantity(0.9), Quantity(1.0)}, {});
    const auto next = apply_transition(st, cfg);
    EXPECT_EQ(next.round, 2);
    EXPECT_DOUBLE_EQ(next.sellers[0].good.value(), 1.0);
    EXPECT_EQ(next.sellers[0].money.value(), 0.0);
}

TEST(Transition, BuyerConsumesUpToClaimAndEarnsIncome) {
    auto cfg = one_each(1.0, 0.25, 0.15);
    auto st = single({}, {Quantity(0.25), Quantity(0.0), Quantity(0.4), Quantity(0.15), Quantity(0.25)});
    auto next = apply_transition(st, cfg);
    EXPECT_NEAR(next.buyers[0].good.value(), 0.10, 1e-15);
    EXPECT_DOUBLE_EQ(next.buyers[0].money.value(), 0.25);
    EXPECT_EQ(next.buyers[0].right.value(), 0.0);

    cfg = one_each(1.0, 0.0, 0.125);
    st = single({}, {Quantity(0.05), Quantity(0.3), Quantity(0.0), Quantity(0.125), Quantity(0.0)});
    next = apply_transition(st, cfg);
    EXPECT_EQ(next.buyers[0].good.value(), 0.0);
    EXPECT_DOUBLE_EQ(next.buyers[0].money.value(), 0.3);
    EXPECT_DOUBLE_EQ(next.buyers[0].claim.value(), 0.125);
}

TEST(Transition, FollowsTimeVaryingSchedules) {
    MarketConfig c;
    c.sellers = {SellerSpec{SupplySchedule::step(1.0, 0.5, 2)}};
    c.buyers = {BuyerSpec{SupplySchedule::linear(0.1, 0.0), 1.0}};
    const auto st = initial_state(c);
    EXPECT_DOUBLE_EQ(st.sellers[0].good.value(), 1.0);
    EXPECT_DOUBLE_EQ(st.buyers[0].money.value(), 0.1);
    const auto next = apply_transition(st, c);
    EXPECT_DOUBLE_EQ(next.sellers[0].good.value(), 1.5);
    EXPECT_DOUBLE_EQ(next.sellers[0].resupply.value(), 0.5);
    EXPECT_DOUBLE_EQ(next.buyers[0].money.value(), 0.1 + 0.2);
}

TEST(Utility, SellerAndBuyerExamples) {
    const auto cfg = one_each(1.0, 0.0, 0.125);
    auto st = single({Quantity(0.0), Quantity(1.0), Quantity(1.0)},
                     {Quantity(0.61333), Quantity(0.0), Quantity(0.0), Quantity(0.125), Quantity(0.0)});
    auto u = consumed_utility(st, cfg);
    EXPECT_DOUBLE_EQ(u.sellers[0], 1.0);
    EXPECT_DOUBLE_EQ(u.buyers[0], 0.125);

    st.buyers[0] = {Quantity(0.0), Quantity(0.0), Quantity(0.0), Quantity(1.0), Quantity(0.0)};
    st.sellers[0] = {Quantity(0.25), Quantity(0.5), Quantity(1.0)};
    u = consumed_utility(st, one_each(1.0, 0.0, 1.0));
    EXPECT_DOUBLE_EQ(u.buyers[0], 0.0);
    EXPECT_DOUBLE_EQ(u.sellers[0], 0.25);
}

TEST(Utility, StorageCostIsConfigurable) {
    auto cfg = one_each(1.0, 0.0, 1.0);
    cfg.seller_storage_cost = 3.0;
    const auto st = single({Quantity(0.5), Quantity(1.0), Quantity(1.0)}, {});
    EXPECT_DOUBLE_EQ(consumed_utility(st, cfg).sellers[0], -0.5);
}

TEST(Config, Validation) {
    MarketConfig c;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = presets::scenario_a();
    EXPECT_NO_THROW(c.validate());
    EXPECT_TRUE(c.is_constant_normalized());
    c.horizon = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = presets::scenario_a(DistributionMechanism::canonical(4));
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = presets::scenario_a();
    c.buyers[0].claim = -1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = presets::scenario_a();
    c.sellers[0].resupply = SupplySchedule::constant(2.0);
    EXPECT_FALSE(c.is_normalized(1));
}

TEST(Config, VariantNames) {
    for (auto v : {Variant::rights, Variant::free_market, Variant::myopic_rights})
        EXPECT_EQ(variant_from_string(to_string(v)), v);
    EXPECT_THROW(variant_from_string("barter"), std::invalid_argument);
}

TEST(State, ClaimsConstantAndRightsExpireAcrossRounds) {
    const auto cfg = presets::scenario_a();
    const auto trace = run(cfg, 30);
    auto st = initial_state(cfg);
    const auto claims = st.claims();
    for (int t = 0; t < 30; ++t) {
        st.buyers[0].right = Quantity(0.7);
        st = apply_transition(st, cfg);
        EXPECT_EQ(st.claims(), claims);
        for (const auto& b : st.buyers) EXPECT_EQ(b.right.value(), 0.0);
    }
    for (const auto& r : trace.records) EXPECT_TRUE(r.audit.ok(1e-9)) << "round " << r.round;
}
