#include "rmarket/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rmarket {

namespace {

void check_vectors(std::span<const double> money, std::span<const double> rights) {
    if (money.size() != rights.size()) throw std::invalid_argument("money and rights differ in length");
    for (std::size_t i = 0; i < money.size(); ++i) {
        if (!(money[i] >= 0.0) || !std::isfinite(money[i])) throw std::invalid_argument("money must be finite and >= 0");
        if (!(rights[i] >= 0.0) || !std::isfinite(rights[i])) throw std::invalid_argument("rights must be finite and >= 0");
    }
}

bool is_poor(double price, double money, double right) {
    return price * right - money > 1e-14 * std::max(1.0, money);
}

}  // namespace

double implicit_price_residual(std::span<const double> money, std::span<const double> rights, double price) {
    double r = 0.0;
    for (std::size_t i = 0; i < money.size(); ++i)
        r += money[i] - std::max(0.0, price * rights[i] - money[i]) - price * rights[i];
    return r;
}

GreedyPriceSolution solve_implicit_price(std::span<const double> money, std::span<const double> rights) {
    check_vectors(money, rights);
    const double sum_m = std::accumulate(money.begin(), money.end(), 0.0);
    const double sum_r = std::accumulate(rights.begin(), rights.end(), 0.0);
    if (!(sum_r > 0.0)) throw std::invalid_argument("no rights in circulation");

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < rights.size(); ++i)
        if (rights[i] > 0.0) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return money[a] / rights[a] < money[b] / rights[b];
    });

    // Interval k: the first k buyers of `order` are poor.
    double poor_m = 0.0;
    double poor_r = 0.0;
    double price = sum_m / sum_r;
    for (std::size_t k = 0; k <= order.size(); ++k) {
        const double candidate = (sum_m + poor_m) / (sum_r + poor_r);
        const double upper = k < order.size() ? money[order[k]] / rights[order[k]] : INFINITY;
        if (candidate <= upper * (1.0 + 1e-15)) {
            price = candidate;
            break;
        }
        if (k < order.size()) {
            poor_m += money[order[k]];
            poor_r += rights[order[k]];
        }
    }

    GreedyPriceSolution sol;
    sol.price = price;
    sol.useful_money = price * sum_r;
    for (std::size_t i = 0; i < money.size(); ++i) {
        if (is_poor(price, money[i], rights[i])) {
            sol.poor_set.push_back(i);
            sol.useless_money += price * rights[i] - money[i];
        }
    }
    return sol;
}

GreedyRoundPlan plan_greedy_round(const MarketState& state, const MarketConfig& config) {
    GreedyRoundPlan plan;
    for (const auto& s : state.sellers) plan.volume += std::min(s.resupply.value(), s.good.value());
    const auto claims = state.claims();
    plan.rights = allocate(config.mechanism, plan.volume, claims);
    if (plan.volume <= 0.0) return plan;
    const auto money = state.buyer_money();
    if (config.variant == Variant::rights) {
        plan.price = solve_implicit_price(money, plan.rights).price;
    } else {
        plan.price = free_market_clearing_price(money, plan.volume);
    }
    return plan;
}

SellerOffer greedy_seller_bid(std::size_t seller, const MarketState& state, const MarketConfig& config,
                              const GreedyRoundPlan& plan) {
    const auto& s = state.sellers.at(seller);
    const double volume = std::min(s.resupply.value(), s.good.value());
    if (volume <= 0.0) return SellerOffer{0.0, 0.0};
    return SellerOffer{volume, plan.price * config.price_markup};
}

SellerOffer greedy_seller_bid(std::size_t seller, const MarketState& state, const MarketConfig& config) {
    return greedy_seller_bid(seller, state, config, plan_greedy_round(state, config));
}

double mean_posted_price(std::span<const SellerOffer> offers) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& o : offers) {
        if (o.volume > 0.0) {
            sum += o.price;
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

GreedyBuyerBid greedy_buyer_bid(double money, double right, std::span<const SellerOffer> offers, Variant variant) {
    GreedyBuyerBid out;
    const double P = mean_posted_price(offers);
    if (P > 0.0) {
        const double affordable = money / P;
        const double gap = right - affordable;
        if (std::abs(gap) > 1e-15 * std::max(1.0, right)) {
            out.psi = std::max(0.0, gap);
            out.xi = std::max(0.0, -gap);
        }
    } else if (money > 0.0) {
        double volume = 0.0;
        for (const auto& o : offers) volume += o.volume;
        out.xi = volume;
        out.degenerate = right > 0.0;
    }
    const double offered = variant == Variant::myopic_rights ? out.psi / 2.0 : out.psi;
    out.bid = BuyerBid{offered, P, right + out.xi, P, out.xi, P};
    return out;
}

double free_market_clearing_price(std::span<const double> money, double offered_good) {
    if (!(offered_good > 0.0)) throw std::invalid_argument("free-market price needs a positive offered volume");
    return std::accumulate(money.begin(), money.end(), 0.0) / offered_good;
}

double canonical_closed_form(double recipient_income, std::span<const double> incomes, int round) {
    const double total = std::accumulate(incomes.begin(), incomes.end(), 0.0);
    if (std::abs(total - 1.0) > kEqualityTol) throw std::invalid_argument("closed form needs incomes summing to 1");
    if (round < 1) throw std::invalid_argument("round must be >= 1");
    return round == 1 ? (1.0 + recipient_income) / 2.0 : 1.0;
}

double canonical_closed_form(std::size_t rank, std::span<const double> incomes, std::span<const double> claims,
                             int round) {
    if (incomes.size() != claims.size()) throw std::invalid_argument("incomes and claims differ in length");
    if (rank < 1 || rank > claims.size()) throw std::invalid_argument("canonical rank out of range");
    return canonical_closed_form(incomes[claim_ranking(claims)[rank - 1]], incomes, round);
}

double canonical_lower_bound(std::span<const double> alpha, std::span<const double> money) {
    if (alpha.size() != money.size()) throw std::invalid_argument("weights and money differ in length");
    const double total = std::accumulate(money.begin(), money.end(), 0.0);
    double bound = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) bound += alpha[i] * (money[i] + total) / 2.0;
    return bound;
}

double displayed_lower_bound(std::span<const double> alpha, std::span<const double> money) {
    if (alpha.size() != money.size()) throw std::invalid_argument("weights and money differ in length");
    double bound = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) bound += (alpha[i] + 1.0) * money[i] / 2.0;
    return bound;
}

}  // namespace rmarket
