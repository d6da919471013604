#include "rmarket/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace rmarket {

namespace {

constexpr double kProgressTol = 1e-13;
constexpr int kMaxIterations = 200;
constexpr int kMaxPasses = 64;

bool valid_number(double x) { return std::isfinite(x) && x >= 0.0; }

bool price_ok(double price, double limit) { return price <= limit * (1.0 + 1e-12) + 1e-15; }

bool same_level(double a, double b) { return std::abs(a - b) <= 1e-15 * std::max(1.0, std::abs(a)); }

std::vector<double> distinct_levels(std::vector<double> prices) {
    std::sort(prices.begin(), prices.end());
    std::vector<double> out;
    for (double p : prices)
        if (out.empty() || !same_level(out.back(), p)) out.push_back(p);
    return out;
}

// Takes `amount` from the pools in `members` at an equal rate until pools run dry.
// Returns what each member gave, indexed like `members`.
std::vector<double> water_fill(const std::vector<double>& remaining, const std::vector<std::size_t>& members,
                               double amount) {
    std::vector<double> given(members.size(), 0.0);
    if (members.empty() || amount <= 0.0) return given;
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remaining[members[a]] < remaining[members[b]]; });
    double left = amount;
    std::size_t active = members.size();
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double cap = remaining[members[order[k]]];
        const double share = left / static_cast<double>(active);
        if (cap <= share) {
            given[order[k]] = cap;
            left -= cap;
        } else {
            for (std::size_t j = k; j < order.size(); ++j) given[order[j]] = share;
            left = 0.0;
            break;
        }
        --active;
    }
    return given;
}

struct Book {
    const std::vector<SellerOffer>& offers;
    const std::vector<BuyerBid>& bids;
    Variant variant;

    std::vector<double> good_left;     // per seller
    std::vector<double> spendable;     // per buyer
    std::vector<double> own_rights;    // per buyer, Right neither used nor sold yet
    std::vector<double> offer_left;    // per buyer, part of w not sold yet
    std::vector<bool> active_buyer;

    // Right a buyer can still sell: what is left of the offer, backed by unused Right.
    double right_for_sale(std::size_t b) const { return std::min(offer_left[b], own_rights[b]); }

    ClearingResult& r;

    double good_headroom(std::size_t b) const { return std::max(0.0, bids[b].max_good_volume - r.good_bought[b]); }
    double right_headroom(std::size_t b) const { return std::max(0.0, bids[b].max_right_volume - r.right_bought[b]); }

    std::vector<std::size_t> sellers_at(double price) const {
        std::vector<std::size_t> out;
        for (std::size_t s = 0; s < offers.size(); ++s)
            if (good_left[s] > 0.0 && same_level(offers[s].price, price)) out.push_back(s);
        return out;
    }

    std::vector<std::size_t> right_sellers_at(double price) const {
        std::vector<std::size_t> out;
        for (std::size_t b = 0; b < bids.size(); ++b)
            if (active_buyer[b] && right_for_sale(b) > 0.0 && same_level(bids[b].right_offer_price, price)) out.push_back(b);
        return out;
    }

    void sell_good(const std::vector<std::size_t>& sellers, double price, double amount) {
        const auto given = water_fill(good_left, sellers, amount);
        for (std::size_t k = 0; k < sellers.size(); ++k) {
            const std::size_t s = sellers[k];
            good_left[s] = std::max(0.0, good_left[s] - given[k]);
            r.seller_sold[s] += given[k];
            r.seller_revenue[s] += price * given[k];
        }
    }

    void pay_right_seller(std::size_t seller, double price, double amount) {
        offer_left[seller] = std::max(0.0, offer_left[seller] - amount);
        own_rights[seller] = std::max(0.0, own_rights[seller] - amount);
        r.right_sold[seller] += amount;
        r.money_earned_right[seller] += price * amount;
        if (variant == Variant::myopic_rights) spendable[seller] += price * amount;
    }

    double stage1() {
        std::vector<double> prices;
        for (std::size_t s = 0; s < offers.size(); ++s)
            if (good_left[s] > 0.0) prices.push_back(offers[s].price);
        double traded = 0.0;
        for (double p : distinct_levels(prices)) {
            for (int it = 0; it < kMaxIterations; ++it) {
                const auto sellers = sellers_at(p);
                double supply = 0.0;
                for (std::size_t s : sellers) supply += good_left[s];
                std::vector<double> demand(bids.size(), 0.0);
                double total = 0.0;
                for (std::size_t b = 0; b < bids.size(); ++b) {
                    if (!active_buyer[b] || !price_ok(p, bids[b].max_good_price)) continue;
                    double d = std::min(good_headroom(b), own_rights[b]);
                    if (p > 0.0) d = std::min(d, spendable[b] / p);
                    demand[b] = std::max(0.0, d);
                    total += demand[b];
                }
                if (supply <= kProgressTol * 1e-3 || total <= kProgressTol * 1e-3) break;
                const double theta = std::min(1.0, supply / total);
                double volume = 0.0;
                for (std::size_t b = 0; b < bids.size(); ++b) {
                    const double x = theta * demand[b];
                    if (x <= 0.0) continue;
                    r.good_bought[b] += x;
                    r.money_spent_good[b] += p * x;
                    spendable[b] = std::max(0.0, spendable[b] - p * x);
                    own_rights[b] = std::max(0.0, own_rights[b] - x);
                    volume += x;
                }
                sell_good(sellers, p, std::min(volume, supply));
                r.stage1_volume += volume;
                traded += volume;
                if (volume <= kProgressTol || theta >= 1.0) break;
            }
        }
        return traded;
    }

    double stage2() {
        std::vector<double> gp, rp;
        for (std::size_t s = 0; s < offers.size(); ++s)
            if (good_left[s] > 0.0) gp.push_back(offers[s].price);
        for (std::size_t b = 0; b < bids.size(); ++b)
            if (active_buyer[b] && right_for_sale(b) > 0.0) rp.push_back(bids[b].right_offer_price);
        std::vector<std::tuple<double, double, double>> levels;
        for (double p : distinct_levels(gp))
            for (double q : distinct_levels(rp)) levels.emplace_back(p + q, p, q);
        std::sort(levels.begin(), levels.end());

        double traded = 0.0;
        for (const auto& [sum, p, q] : levels) {
            for (int it = 0; it < kMaxIterations; ++it) {
                const auto sellers = sellers_at(p);
                const auto rsellers = right_sellers_at(q);
                double good_supply = 0.0;
                for (std::size_t s : sellers) good_supply += good_left[s];
                double right_supply = 0.0;
                for (std::size_t k : rsellers) right_supply += right_for_sale(k);

                std::vector<double> available(bids.size(), 0.0);
                for (std::size_t k : rsellers) available[k] = right_for_sale(k);
                std::vector<double> demand(bids.size(), 0.0);
                std::vector<double> others(bids.size(), 0.0);
                double total = 0.0;
                bool self_seller = false;
                for (std::size_t b = 0; b < bids.size(); ++b) {
                    if (!active_buyer[b] || !price_ok(p, bids[b].max_good_price) ||
                        !price_ok(q, bids[b].max_right_price))
                        continue;
                    const double own = std::find(rsellers.begin(), rsellers.end(), b) != rsellers.end() ? available[b] : 0.0;
                    others[b] = std::max(0.0, right_supply - own);
                    double d = std::min({good_headroom(b), right_headroom(b), others[b]});
                    if (sum > 0.0) d = std::min(d, spendable[b] / sum);
                    demand[b] = std::max(0.0, d);
                    if (demand[b] > 0.0 && own > 0.0) self_seller = true;
                    total += demand[b];
                }
                if (good_supply <= kProgressTol * 1e-3 || right_supply <= kProgressTol * 1e-3 ||
                    total <= kProgressTol * 1e-3)
                    break;

                double theta = std::min({1.0, good_supply / total});
                std::vector<double> load(bids.size(), 0.0);
                if (self_seller) {
                    for (std::size_t b = 0; b < bids.size(); ++b) {
                        if (demand[b] <= 0.0) continue;
                        for (std::size_t k : rsellers)
                            if (k != b) load[k] += demand[b] * available[k] / others[b];
                    }
                    for (std::size_t k : rsellers)
                        if (load[k] > 0.0) theta = std::min(theta, available[k] / load[k]);
                } else {
                    theta = std::min(theta, right_supply / total);
                }

                double volume = 0.0;
                for (std::size_t b = 0; b < bids.size(); ++b) {
                    const double x = theta * demand[b];
                    if (x <= 0.0) continue;
                    r.good_bought[b] += x;
                    r.right_bought[b] += x;
                    r.money_spent_good[b] += p * x;
                    r.money_spent_right[b] += q * x;
                    spendable[b] = std::max(0.0, spendable[b] - sum * x);
                    volume += x;
                }
                if (self_seller) {
                    for (std::size_t k : rsellers) pay_right_seller(k, q, theta * load[k]);
                } else {
                    const auto given = water_fill(available, rsellers, std::min(volume, right_supply));
                    for (std::size_t j = 0; j < rsellers.size(); ++j) pay_right_seller(rsellers[j], q, given[j]);
                }
                sell_good(sellers, p, std::min(volume, good_supply));
                r.stage2_volume += volume;
                r.right_volume += volume;
                r.right_value += q * volume;
                traded += volume;
                if (volume <= kProgressTol || theta >= 1.0) break;
            }
        }
        return traded;
    }
};

}  // namespace

ClearingResult clear(const std::vector<SellerOffer>& offers, const std::vector<BuyerBid>& bids,
                     const MarketState& state, Variant variant) {
    if (offers.size() != state.sellers.size()) throw std::invalid_argument("one offer per seller is required");
    if (bids.size() != state.buyers.size()) throw std::invalid_argument("one bid per buyer is required");
    const std::size_t ns = offers.size();
    const std::size_t nb = bids.size();

    ClearingResult r;
    for (auto* v : {&r.good_bought, &r.right_bought, &r.right_sold, &r.money_spent_good, &r.money_spent_right,
                    &r.money_earned_right})
        v->assign(nb, 0.0);
    r.seller_revenue.assign(ns, 0.0);
    r.seller_sold.assign(ns, 0.0);
    r.unsold_good.assign(ns, 0.0);

    Book book{offers, bids, variant, std::vector<double>(ns, 0.0), std::vector<double>(nb, 0.0),
              std::vector<double>(nb, 0.0), std::vector<double>(nb, 0.0), std::vector<bool>(nb, false), r};

    for (std::size_t s = 0; s < ns; ++s) {
        const auto& o = offers[s];
        const double stock = state.sellers[s].good.value();
        if (!valid_number(o.volume) || !valid_number(o.price)) {
            r.rejected.push_back({BidRejection::Side::seller, s, "offer fields must be finite and >= 0"});
            continue;
        }
        if (o.volume > stock + kConservationTol) {
            r.rejected.push_back({BidRejection::Side::seller, s, "offered volume exceeds the seller's Good"});
            continue;
        }
        book.good_left[s] = std::min(o.volume, stock);
        r.volume_offered += book.good_left[s];
    }
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& bid = bids[b];
        const auto& buyer = state.buyers[b];
        if (!valid_number(bid.right_offer_volume) || !valid_number(bid.right_offer_price) ||
            !valid_number(bid.max_good_volume) || !valid_number(bid.max_good_price) ||
            !valid_number(bid.max_right_volume) || !valid_number(bid.max_right_price)) {
            r.rejected.push_back({BidRejection::Side::buyer, b, "bid fields must be finite and >= 0"});
            continue;
        }
        if (bid.right_offer_volume > buyer.right.value() + kConservationTol) {
            r.rejected.push_back({BidRejection::Side::buyer, b, "offered Right exceeds the buyer's Right"});
            continue;
        }
        book.active_buyer[b] = true;
        book.spendable[b] = buyer.money.value();
        book.offer_left[b] = std::min(bid.right_offer_volume, buyer.right.value());
        book.own_rights[b] = buyer.right.value();
    }

    for (int pass = 0; pass < kMaxPasses; ++pass) {
        ++r.passes;
        const double moved = book.stage1() + book.stage2();
        if (variant != Variant::myopic_rights || moved <= kProgressTol) break;
    }

    for (std::size_t s = 0; s < ns; ++s) r.unsold_good[s] = book.good_left[s];
    return r;
}

MoneySplit useful_useless_split(const ClearingResult& result) {
    MoneySplit split;
    for (double v : result.seller_revenue) split.useful += v;
    for (double v : result.money_earned_right) split.useless += v;
    return split;
}

MarketState settle(const MarketState& state, const ClearingResult& result) {
    MarketState out = state;
    for (std::size_t s = 0; s < out.sellers.size(); ++s) {
        auto& seller = out.sellers[s];
        seller.good = Quantity::snapped(seller.good.value() - result.seller_sold[s]);
        seller.money = Quantity::snapped(seller.money.value() + result.seller_revenue[s]);
    }
    for (std::size_t b = 0; b < out.buyers.size(); ++b) {
        auto& buyer = out.buyers[b];
        buyer.good = Quantity::snapped(buyer.good.value() + result.good_bought[b]);
        buyer.money = Quantity::snapped(buyer.money.value() - result.money_spent_good[b] - result.money_spent_right[b] +
                                        result.money_earned_right[b]);
        buyer.right = Quantity::snapped(buyer.right.value() - result.right_sold[b] + result.right_bought[b]);
    }
    return out;
}

}  // namespace rmarket
