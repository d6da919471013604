#include <gtest/gtest.h>

#include <numeric>

#include "rmarket/engine.hpp"
#include "rmarket/mechanism.hpp"
#include "rmarket/pricing.hpp"

using namespace rmarket;

namespace {

constexpr double kP1 = 75.0 / 116.0;

MarketState state_with(std::vector<double> seller_good, std::vector<double> money, std::vector<double> rights) {
    MarketState st;
    for (double g : seller_good) st.sellers.push_back({Quantity(g), Quantity(0.0), Quantity(g)});
    for (std::size_t b = 0; b < money.size(); ++b)
        st.buyers.push_back({Quantity(0.0), Quantity(money[b]), Quantity(rights[b]), Quantity(1.0), Quantity(0.0)});
    return st;
}

struct RoundOne {
    MarketState state;
    std::vector<SellerOffer> offers;
    std::vector<BuyerBid> bids;
};

RoundOne scenario_a_round_one(const std::vector<std::size_t>& order = {0, 1, 2}) {
    const std::vector<double> m = {0.0, 0.25, 0.75}, r = {8.0 / 15, 6.0 / 15, 1.0 / 15};
    std::vector<double> pm, pr;
    for (std::size_t i : order) {
        pm.push_back(m[i]);
        pr.push_back(r[i]);
    }
    RoundOne out{state_with({1.0}, pm, pr), {{1.0, kP1}}, {}};
    for (std::size_t b = 0; b < pm.size(); ++b)
        out.bids.push_back(greedy_buyer_bid(pm[b], pr[b], out.offers, Variant::rights).bid);
    return out;
}

}  // namespace

TEST(Clearing, ScenarioARoundOne) {
    const auto in = scenario_a_round_one();
    const auto r = clear(in.offers, in.bids, in.state, Variant::rights);
    EXPECT_NEAR(r.good_bought[0], 0.0, 1e-12);
    EXPECT_NEAR(r.good_bought[1], 0.386667, 1e-6);
    EXPECT_NEAR(r.good_bought[2], 0.613333, 1e-6);
    EXPECT_NEAR(r.right_sold[0], 8.0 / 15, 1e-12);
    EXPECT_NEAR(r.right_sold[1], 0.013333, 1e-6);
    EXPECT_NEAR(r.right_sold[2], 0.0, 1e-12);
    EXPECT_NEAR(r.volume_sold(), 1.0, 1e-12);
    EXPECT_NEAR(r.unsold_good[0], 0.0, 1e-12);
    EXPECT_TRUE(r.rejected.empty());

    const auto split = useful_useless_split(r);
    EXPECT_NEAR(split.useful, kP1, 1e-12);
    EXPECT_NEAR(split.useless, 1.0 - kP1, 1e-12);
    EXPECT_NEAR(split.useless, 0.353448, 1e-6);
}

TEST(Clearing, SettleConservesMoneyAndGood) {
    const auto in = scenario_a_round_one();
    const auto r = clear(in.offers, in.bids, in.state, Variant::rights);
    const auto after = settle(in.state, r);
    EXPECT_NEAR(after.total_money(), in.state.total_money(), 1e-12);
    EXPECT_NEAR(after.total_good(), in.state.total_good(), 1e-12);
    for (std::size_t b = 0; b < 3; ++b)
        EXPECT_LE(r.good_bought[b], in.state.buyers[b].right.value() - r.right_sold[b] + r.right_bought[b] + 1e-12);
}

TEST(Clearing, AllRichBuyersLeaveNoUselessMoney) {
    auto st = state_with({1.0}, {0.6, 0.6}, {0.5, 0.5});
    const std::vector<SellerOffer> offers = {{1.0, 1.0}};
    std::vector<BuyerBid> bids;
    for (const auto& b : st.buyers) bids.push_back(greedy_buyer_bid(b.money.value(), b.right.value(), offers, Variant::rights).bid);
    const auto r = clear(offers, bids, st, Variant::rights);
    EXPECT_NEAR(r.volume_sold(), 1.0, 1e-12);
    EXPECT_EQ(useful_useless_split(r).useless, 0.0);
}

TEST(Clearing, ZeroMoneyBuysNothing) {
    auto st = state_with({1.0}, {0.0, 0.0}, {0.5, 0.5});
    const std::vector<SellerOffer> offers = {{1.0, 1.0}};
    std::vector<BuyerBid> bids(2);
    for (std::size_t b = 0; b < 2; ++b) bids[b] = greedy_buyer_bid(0.0, 0.5, offers, Variant::rights).bid;
    const auto r = clear(offers, bids, st, Variant::rights);
    EXPECT_EQ(r.volume_sold(), 0.0);
    EXPECT_NEAR(r.unsold_good[0], 1.0, 1e-15);
}

TEST(Clearing, OverCapBidsAreRejected) {
    auto st = state_with({1.0}, {1.0, 1.0}, {0.5, 0.5});
    std::vector<SellerOffer> offers = {{1.0, 1.0}};
    std::vector<BuyerBid> bids = {{0.9, 1.0, 0.0, 1.0, 0.0, 1.0}, {0.0, 1.0, 0.5, 1.0, 0.0, 1.0}};
    auto r = clear(offers, bids, st, Variant::rights);
    ASSERT_EQ(r.rejected.size(), 1u);
    EXPECT_EQ(r.rejected[0].index, 0u);
    EXPECT_EQ(r.rejected[0].side, BidRejection::Side::buyer);
    EXPECT_NEAR(r.good_bought[1], 0.5, 1e-12);
    EXPECT_EQ(r.right_sold[0], 0.0);

    offers[0].volume = 2.0;
    bids[0].right_offer_volume = 0.0;
    r = clear(offers, bids, st, Variant::rights);
    ASSERT_EQ(r.rejected.size(), 1u);
    EXPECT_EQ(r.rejected[0].side, BidRejection::Side::seller);
    EXPECT_EQ(r.volume_sold(), 0.0);

    bids[1].max_good_price = -1.0;
    offers[0].volume = 1.0;
    r = clear(offers, bids, st, Variant::rights);
    EXPECT_EQ(r.rejected.size(), 1u);
}

TEST(Clearing, PriceLimitsAreRespected) {
    auto st = state_with({1.0}, {2.0}, {1.0});
    const std::vector<SellerOffer> offers = {{1.0, 1.5}};
    const std::vector<BuyerBid> bids = {{0.0, 0.0, 1.0, 1.0, 0.0, 0.0}};
    EXPECT_EQ(clear(offers, bids, st, Variant::rights).volume_sold(), 0.0);
}

TEST(Clearing, PermutationInvariant) {
    const std::vector<std::size_t> order = {2, 0, 1};
    const auto base = scenario_a_round_one();
    const auto perm = scenario_a_round_one(order);
    const auto r0 = clear(base.offers, base.bids, base.state, Variant::rights);
    const auto r1 = clear(perm.offers, perm.bids, perm.state, Variant::rights);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(r1.good_bought[k], r0.good_bought[order[k]], 1e-12);
        EXPECT_NEAR(r1.right_sold[k], r0.right_sold[order[k]], 1e-12);
        EXPECT_NEAR(r1.money_spent_right[k], r0.money_spent_right[order[k]], 1e-12);
    }
}

TEST(Clearing, SellersAtOnePriceDepleteAtAnEqualRate) {
    auto st = state_with({1.0, 0.2}, {5.0}, {0.6});
    const std::vector<SellerOffer> offers = {{1.0, 1.0}, {0.2, 1.0}};
    const std::vector<BuyerBid> bids = {{0.0, 0.0, 0.6, 1.0, 0.0, 0.0}};
    const auto r = clear(offers, bids, st, Variant::rights);
    EXPECT_NEAR(r.seller_sold[0], 0.4, 1e-12);
    EXPECT_NEAR(r.seller_sold[1], 0.2, 1e-12);
}

TEST(Clearing, CheaperSellerFirst) {
    auto st = state_with({0.5, 0.5}, {5.0}, {0.6});
    const std::vector<SellerOffer> offers = {{0.5, 2.0}, {0.5, 1.0}};
    const std::vector<BuyerBid> bids = {{0.0, 0.0, 0.6, 2.0, 0.0, 0.0}};
    const auto r = clear(offers, bids, st, Variant::rights);
    EXPECT_NEAR(r.seller_sold[1], 0.5, 1e-12);
    EXPECT_NEAR(r.seller_sold[0], 0.1, 1e-12);
}

TEST(Clearing, ScarceSupplyIsRationedProRata) {
    auto st = state_with({0.5}, {5.0, 5.0}, {0.6, 0.4});
    const std::vector<SellerOffer> offers = {{0.5, 1.0}};
    const std::vector<BuyerBid> bids = {{0.0, 0.0, 0.6, 1.0, 0.0, 0.0}, {0.0, 0.0, 0.4, 1.0, 0.0, 0.0}};
    const auto r = clear(offers, bids, st, Variant::rights);
    EXPECT_NEAR(r.good_bought[0], 0.3, 1e-12);
    EXPECT_NEAR(r.good_bought[1], 0.2, 1e-12);
}

TEST(Clearing, NoBuyerBuysItsOwnRight) {
    auto st = state_with({2.0}, {5.0}, {1.0});
    const std::vector<SellerOffer> offers = {{2.0, 1.0}};
    const std::vector<BuyerBid> bids = {{0.5, 0.1, 2.0, 1.0, 1.0, 1.0}};
    const auto r = clear(offers, bids, st, Variant::rights);
    EXPECT_EQ(r.right_bought[0], 0.0);
    EXPECT_EQ(r.right_sold[0], 0.0);
    EXPECT_NEAR(r.good_bought[0], 1.0, 1e-12);
}

TEST(Clearing, RightUsedInStageOneCannotBeSold) {
    auto st = state_with({2.0}, {1.0, 5.0}, {1.0, 0.0});
    const std::vector<SellerOffer> offers = {{2.0, 1.0}};
    const std::vector<BuyerBid> bids = {{1.0, 0.5, 1.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 1.0, 1.0, 1.0}};
    const auto r = clear(offers, bids, st, Variant::rights);
    EXPECT_NEAR(r.good_bought[0], 1.0, 1e-12);
    EXPECT_EQ(r.right_sold[0], 0.0);
    EXPECT_EQ(r.good_bought[1], 0.0);
}

TEST(Clearing, MyopicProceedsAreSpendable) {
    auto st = state_with({2.0}, {0.0, 2.0}, {2.0, 0.0});
    const std::vector<SellerOffer> offers = {{2.0, 1.0}};
    const std::vector<BuyerBid> bids = {{1.0, 1.0, 1.0, 1.0, 0.0, 1.0}, {0.0, 1.0, 1.0, 1.0, 1.0, 1.0}};
    const auto rights = clear(offers, bids, st, Variant::rights);
    EXPECT_NEAR(rights.good_bought[1], 1.0, 1e-12);
    EXPECT_EQ(rights.good_bought[0], 0.0);
    EXPECT_EQ(rights.passes, 1);
    const auto myopic = clear(offers, bids, st, Variant::myopic_rights);
    EXPECT_NEAR(myopic.good_bought[1], 1.0, 1e-12);
    EXPECT_NEAR(myopic.good_bought[0], 1.0, 1e-12);
    EXPECT_GE(myopic.passes, 2);
}

TEST(Clearing, SizeMismatchThrows) {
    auto st = state_with({1.0}, {1.0}, {1.0});
    EXPECT_THROW(clear({}, {BuyerBid{}}, st, Variant::rights), std::invalid_argument);
    EXPECT_THROW(clear({SellerOffer{}}, {}, st, Variant::rights), std::invalid_argument);
}
