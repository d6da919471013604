#include "rmarket/core.hpp"

#include <cmath>
#include <numeric>

namespace rmarket {

Quantity::Quantity(double value) : value_(value) {
    if (!(value >= 0.0)) throw std::domain_error("negative quantity: " + std::to_string(value));
}

Quantity Quantity::snapped(double value) {
    if (value < 0.0 && value > -kEqualityTol) return Quantity(0.0);
    return Quantity(value);
}

std::string to_string(Variant variant) {
    switch (variant) {
        case Variant::rights: return "rights";
        case Variant::free_market: return "free_market";
        case Variant::myopic_rights: return "myopic_rights";
    }
    return "rights";
}

Variant variant_from_string(const std::string& name) {
    if (name == "rights") return Variant::rights;
    if (name == "free_market" || name == "free-market") return Variant::free_market;
    if (name == "myopic_rights" || name == "myopic-rights" || name == "myopic") return Variant::myopic_rights;
    throw std::invalid_argument("unknown variant '" + name + "'");
}

double MarketState::total_good() const {
    double g = 0.0;
    for (const auto& s : sellers) g += s.good.value();
    for (const auto& b : buyers) g += b.good.value();
    return g;
}

double MarketState::total_money() const {
    double m = 0.0;
    for (const auto& s : sellers) m += s.money.value();
    for (const auto& b : buyers) m += b.money.value();
    return m;
}

std::vector<double> MarketState::buyer_money() const {
    std::vector<double> out;
    out.reserve(buyers.size());
    for (const auto& b : buyers) out.push_back(b.money.value());
    return out;
}

std::vector<double> MarketState::buyer_rights() const {
    std::vector<double> out;
    out.reserve(buyers.size());
    for (const auto& b : buyers) out.push_back(b.right.value());
    return out;
}

std::vector<double> MarketState::claims() const {
    std::vector<double> out;
    out.reserve(buyers.size());
    for (const auto& b : buyers) out.push_back(b.claim.value());
    return out;
}

void MarketConfig::validate() const {
    if (sellers.empty()) throw std::invalid_argument("at least one seller is required");
    if (buyers.empty()) throw std::invalid_argument("at least one buyer is required");
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    if (!(seller_storage_cost >= 0.0) || !std::isfinite(seller_storage_cost))
        throw std::invalid_argument("seller_storage_cost must be finite and >= 0");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!(price_markup > 0.0) || !std::isfinite(price_markup)) throw std::invalid_argument("price_markup must be positive");
    for (std::size_t i = 0; i < sellers.size(); ++i) {
        try {
            sellers[i].resupply.validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("seller " + std::to_string(i) + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < buyers.size(); ++i) {
        if (!(buyers[i].claim >= 0.0) || !std::isfinite(buyers[i].claim))
            throw std::invalid_argument("buyer " + std::to_string(i) + ": claim must be finite and >= 0");
        try {
            buyers[i].income.validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("buyer " + std::to_string(i) + ": " + e.what());
        }
    }
    if (const auto* canon = std::get_if<DistributionMechanism::Canonical>(&mechanism.kind());
        canon && canon->rank > buyers.size())
        throw std::invalid_argument("canonical rank exceeds the number of buyers");
    if (const auto* w = std::get_if<DistributionMechanism::Weighted>(&mechanism.kind()))
        for (const auto& t : w->terms)
            if (t.rank > buyers.size()) throw std::invalid_argument("canonical rank exceeds the number of buyers");
}

std::vector<double> MarketConfig::claims() const {
    std::vector<double> out;
    out.reserve(buyers.size());
    for (const auto& b : buyers) out.push_back(b.claim);
    return out;
}

double MarketConfig::resupply(std::size_t seller, int round) const {
    return evaluate_schedule(sellers.at(seller).resupply, round);
}

double MarketConfig::income(std::size_t buyer, int round) const {
    return evaluate_schedule(buyers.at(buyer).income, round);
}

double MarketConfig::total_resupply(int round) const {
    double g = 0.0;
    for (std::size_t s = 0; s < sellers.size(); ++s) g += resupply(s, round);
    return g;
}

double MarketConfig::total_income(int round) const {
    double m = 0.0;
    for (std::size_t b = 0; b < buyers.size(); ++b) m += income(b, round);
    return m;
}

bool MarketConfig::is_normalized(int round) const {
    return std::abs(total_resupply(round) - 1.0) <= kEqualityTol && std::abs(total_income(round) - 1.0) <= kEqualityTol;
}

bool MarketConfig::is_constant_normalized() const {
    for (const auto& s : sellers)
        if (!s.resupply.is_constant()) return false;
    for (const auto& b : buyers)
        if (!b.income.is_constant()) return false;
    return is_normalized(1);
}

MarketState initial_state(const MarketConfig& config) {
    config.validate();
    MarketState state;
    state.round = 1;
    for (std::size_t s = 0; s < config.sellers.size(); ++s) {
        const Quantity g(config.resupply(s, 1));
        state.sellers.push_back(SellerState{g, Quantity(0.0), g});
    }
    for (std::size_t b = 0; b < config.buyers.size(); ++b) {
        const Quantity m(config.income(b, 1));
        state.buyers.push_back(BuyerState{Quantity(0.0), m, Quantity(0.0), Quantity(config.buyers[b].claim), m});
    }
    return state;
}

MarketState apply_transition(const MarketState& state, const MarketConfig& config) {
    MarketState next;
    next.round = state.round + 1;
    next.sellers.reserve(state.sellers.size());
    next.buyers.reserve(state.buyers.size());
    for (std::size_t s = 0; s < state.sellers.size(); ++s) {
        const Quantity g(config.resupply(s, next.round));
        next.sellers.push_back(SellerState{state.sellers[s].good + g, Quantity(0.0), g});
    }
    for (std::size_t b = 0; b < state.buyers.size(); ++b) {
        const auto& cur = state.buyers[b];
        const Quantity m(config.income(b, next.round));
        const double kept = std::max(0.0, cur.good.value() - cur.claim.value());
        next.buyers.push_back(BuyerState{Quantity(kept), cur.money + m, Quantity(0.0), cur.claim, m});
    }
    return next;
}

Utilities consumed_utility(const MarketState& state, const MarketConfig& config) {
    Utilities u;
    for (const auto& s : state.sellers)
        u.sellers.push_back(s.money.value() - config.seller_storage_cost * s.good.value());
    for (const auto& b : state.buyers) u.buyers.push_back(std::min(b.claim.value(), b.good.value()));
    return u;
}

}  // namespace rmarket
