#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rmarket/bids.hpp"
#include "rmarket/core.hpp"

namespace rmarket {

struct GreedyPriceSolution {
    double price = 0.0;
    std::vector<std::size_t> poor_set;  // buyers with price * R_b > M_b
    double useful_money = 0.0;          // price * sum R
    double useless_money = 0.0;         // sum over poor of (price * R_b - M_b)
};

/// Unique p >= 0 with  sum_b (M_b - max{0, p R_b - M_b}) = p sum_b R_b.
/// Breakpoint scan over M_b / R_b; O(n log n).
/// Throws std::invalid_argument on mismatched sizes, negative entries, or when
/// no buyer holds any Right ("no rights in circulation").
GreedyPriceSolution solve_implicit_price(std::span<const double> money, std::span<const double> rights);

/// Residual of the implicit price equation; strictly decreasing in p when sum R > 0.
double implicit_price_residual(std::span<const double> money, std::span<const double> rights, double price);

/// What all-greedy sellers expect this round: the offered volume (this round's resupply),
/// the Right the mechanism assigns on it, and the solved price.
struct GreedyRoundPlan {
    double volume = 0.0;
    std::vector<double> rights;
    double price = 0.0;
};

GreedyRoundPlan plan_greedy_round(const MarketState& state, const MarketConfig& config);

/// Offer of a greedy seller: this round's resupply g_s at the plan's price (times the
/// configured markup). Stock left over from earlier rounds is not offered.
/// In the myopic variant the price is the free-market clearing price.
SellerOffer greedy_seller_bid(std::size_t seller, const MarketState& state, const MarketConfig& config);
SellerOffer greedy_seller_bid(std::size_t seller, const MarketState& state, const MarketConfig& config,
                              const GreedyRoundPlan& plan);

/// Arithmetic mean of the posted prices of offers with positive volume; 0 when none.
double mean_posted_price(std::span<const SellerOffer> offers);

struct GreedyBuyerBid {
    BuyerBid bid;
    double psi = 0.0;  // Right the buyer cannot afford to back with Money
    double xi = 0.0;   // Right the buyer wants to add
    bool degenerate = false;  // P == 0 while the buyer holds Money and Right
};

/// (psi, P, R + xi, P, xi, P) with psi = max{0, R - M/P}, xi = max{0, M/P - R}.
/// `right` is the Right assigned to the buyer this round. In the myopic variant only
/// psi/2 is offered. When P == 0 and the buyer holds Money, xi is capped by the total
/// offered volume and the bid is flagged degenerate.
GreedyBuyerBid greedy_buyer_bid(double money, double right, std::span<const SellerOffer> offers,
                                Variant variant);

/// sum M / offered_good. Throws std::invalid_argument when offered_good <= 0.
double free_market_clearing_price(std::span<const double> money, double offered_good);

/// First-round price (1 + m_{b_n})/2 of the canonical mechanism, and 1 afterwards.
/// Throws std::invalid_argument unless the incomes sum to 1 within 1e-12.
double canonical_closed_form(std::size_t rank, std::span<const double> incomes,
                             std::span<const double> claims, int round);
double canonical_closed_form(double recipient_income, std::span<const double> incomes, int round);

/// sum_b alpha_b (M_b + sum M)/2, with alpha the canonical weights per buyer.
double canonical_lower_bound(std::span<const double> alpha, std::span<const double> money);
/// sum_b (alpha_b + 1) M_b / 2.
double displayed_lower_bound(std::span<const double> alpha, std::span<const double> money);

}  // namespace rmarket
