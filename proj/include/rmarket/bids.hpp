#pragma once

#include <vector>

namespace rmarket {

/// (v_s, p_s): volume of Good offered and its unit price.
struct SellerOffer {
    double volume = 0.0;
    double price = 0.0;
};

/// (w, q, v̄, p̄, w̄, q̄) of one buyer.
struct BuyerBid {
    double right_offer_volume = 0.0;  // w: Right put up for sale
    double right_offer_price = 0.0;   // q
    double max_good_volume = 0.0;     // v̄: total Good wanted this round
    double max_good_price = 0.0;      // p̄
    double max_right_volume = 0.0;    // w̄: Right wanted on top of the assigned Right
    double max_right_price = 0.0;     // q̄
};

struct BidProfile {
    std::vector<SellerOffer> offers;
    std::vector<BuyerBid> bids;
};

}  // namespace rmarket
