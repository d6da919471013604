#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmarket/rights.hpp"
#include "rmarket/schedule.hpp"

namespace rmarket {

/// Tolerance for conservation checks (money, good, rights cap).
inline constexpr double kConservationTol = 1e-9;
/// Tolerance for exact-value comparisons.
inline constexpr double kEqualityTol = 1e-12;

/// Failure while simulating a round; carries the round index.
class SimulationError : public std::runtime_error {
public:
    SimulationError(int round, const std::string& what)
        : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}
    int round() const { return round_; }

private:
    int round_;
};

/// Non-negative amount of Good, Money or Right.
class Quantity {
public:
    constexpr Quantity() = default;
    /// Throws std::domain_error for negative or NaN values.
    explicit Quantity(double value);

    /// Like the constructor, but values in (-1e-12, 0) from rounding are snapped to zero.
    static Quantity snapped(double value);

    constexpr double value() const { return value_; }
    constexpr explicit operator double() const { return value_; }

    friend Quantity operator+(Quantity a, Quantity b) { return Quantity(a.value_ + b.value_); }
    friend auto operator<=>(const Quantity&, const Quantity&) = default;

private:
    double value_ = 0.0;
};

enum class Variant { rights, free_market, myopic_rights };

std::string to_string(Variant variant);
/// Throws std::invalid_argument for unknown names.
Variant variant_from_string(const std::string& name);

struct SellerState {
    Quantity good;
    Quantity money;
    Quantity resupply;  // g_s for the current round
};

struct BuyerState {
    Quantity good;
    Quantity money;
    Quantity right;
    Quantity claim;
    Quantity income;  // m_b for the current round
};

struct MarketState {
    int round = 1;
    std::vector<SellerState> sellers;
    std::vector<BuyerState> buyers;

    double total_good() const;
    double total_money() const;
    std::vector<double> buyer_money() const;
    std::vector<double> buyer_rights() const;
    std::vector<double> claims() const;
};

struct SellerSpec {
    SupplySchedule resupply = SupplySchedule::constant(1.0);
    friend bool operator==(const SellerSpec&, const SellerSpec&) = default;
};

struct BuyerSpec {
    SupplySchedule income = SupplySchedule::constant(0.0);
    double claim = 0.0;
    friend bool operator==(const BuyerSpec&, const BuyerSpec&) = default;
};

struct MarketConfig {
    std::vector<SellerSpec> sellers;
    std::vector<BuyerSpec> buyers;
    DistributionMechanism mechanism = DistributionMechanism::proportional();
    Variant variant = Variant::rights;
    int horizon = 100;
    double seller_storage_cost = 1.0;
    double tolerance = kConservationTol;
    /// Greedy sellers post price_markup times the solved price. 1 is the greedy profile;
    /// anything else is a deliberately mispriced profile for negative controls.
    double price_markup = 1.0;

    /// Throws std::invalid_argument describing the first problem found.
    void validate() const;

    std::vector<double> claims() const;
    double resupply(std::size_t seller, int round) const;
    double income(std::size_t buyer, int round) const;
    double total_resupply(int round) const;
    double total_income(int round) const;
    /// Sum of resupply and sum of income are both 1 in `round` (within 1e-12).
    bool is_normalized(int round) const;
    /// Every schedule is constant and the totals are normalized.
    bool is_constant_normalized() const;

    friend bool operator==(const MarketConfig&, const MarketConfig&) = default;
};

/// Start of round 1: sellers hold their first resupply, buyers their first income.
MarketState initial_state(const MarketConfig& config);

/// Moves a post-clearing state of round t to the start of round t+1: sellers gain
/// resupply and lose their money, buyers consume up to their claim, gain income and
/// lose every Right.
MarketState apply_transition(const MarketState& state, const MarketConfig& config);

struct Utilities {
    std::vector<double> sellers;
    std::vector<double> buyers;
};

/// Per-round utility of a post-clearing state: M - c*G for sellers, min(D, G) for buyers.
Utilities consumed_utility(const MarketState& state, const MarketConfig& config);

}  // namespace rmarket
