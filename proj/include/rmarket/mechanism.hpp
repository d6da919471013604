#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rmarket/bids.hpp"
#include "rmarket/core.hpp"

namespace rmarket {

struct BidRejection {
    enum class Side { seller, buyer };
    Side side = Side::buyer;
    std::size_t index = 0;
    std::string reason;
};

struct ClearingResult {
    std::vector<double> good_bought;
    std::vector<double> right_bought;
    std::vector<double> right_sold;
    std::vector<double> money_spent_good;
    std::vector<double> money_spent_right;
    std::vector<double> money_earned_right;  // unusable this round except in the myopic variant
    std::vector<double> seller_revenue;
    std::vector<double> seller_sold;
    std::vector<double> unsold_good;
    std::vector<BidRejection> rejected;

    double volume_offered = 0.0;
    double stage1_volume = 0.0;
    double stage2_volume = 0.0;
    double right_volume = 0.0;
    double right_value = 0.0;  // money paid for Right
    int passes = 0;

    double volume_sold() const { return stage1_volume + stage2_volume; }
};

/// Two-stage clearing of one round.
///
/// Stage 1: buyers buy Good backed by their assigned Right. Stage 2: buyers buy Good together
/// with the same volume of Right from other buyers; a buyer can only sell Right it did not
/// use in stage 1. Price levels are processed in ascending order; sellers at a level deplete at an
/// equal rate and scarce supply is rationed pro rata to residual demand.
///
/// Bids or offers over their caps are rejected (the trader sits out) and listed in
/// `rejected`. In the myopic variant Right proceeds are spendable and the two stages are
/// repeated until nothing more trades.
ClearingResult clear(const std::vector<SellerOffer>& offers, const std::vector<BuyerBid>& bids,
                     const MarketState& state, Variant variant);

struct MoneySplit {
    double useful = 0.0;   // paid to sellers
    double useless = 0.0;  // paid for Right, parked until the next round
};

MoneySplit useful_useless_split(const ClearingResult& result);

/// Post-clearing state: Good and Money moved as in `result`, Right held after trading.
MarketState settle(const MarketState& state, const ClearingResult& result);

}  // namespace rmarket
