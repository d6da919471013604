#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rmarket/bids.hpp"
#include "rmarket/core.hpp"

namespace rmarket {

/// f = max{0, (phi - G)/phi}, and 0 when phi == 0.
double frustration(double right_assigned, double good_end);

struct ConservationAudit {
    double money_before = 0.0;
    double money_after = 0.0;
    double good_before = 0.0;
    double good_after = 0.0;
    double max_rights_excess = 0.0;   // max_b good bought - (assigned - sold + bought)
    double min_balance = 0.0;         // most negative holding after clearing
    double offered_gap = 0.0;         // |offered - sold - unsold offered|

    bool ok(double tol) const;
};

struct RoundRecord {
    int round = 0;
    double price_good = 0.0;
    double price_right = 0.0;
    double solved_price = 0.0;  // greedy price before any markup or deviation
    double volume_offered = 0.0;
    double volume_sold = 0.0;
    double useful_money = 0.0;
    double useless_money = 0.0;

    std::vector<double> money_start;
    std::vector<double> good_bought;
    std::vector<double> good_end;
    std::vector<double> right_assigned;
    std::vector<double> right_sold;
    std::vector<double> right_bought;
    std::vector<double> frustration;
    std::vector<double> right_offered;  // w of the bid actually placed
    std::vector<double> right_wanted;   // w-bar of the bid actually placed
    std::vector<double> seller_offered;
    std::vector<double> seller_revenue;
    std::vector<double> seller_good_end;

    std::vector<double> seller_utility;
    std::vector<double> buyer_utility;

    ConservationAudit audit;
    bool degenerate = false;
    std::size_t rejected_bids = 0;

    double mean_frustration() const;
};

struct Trace {
    Variant variant = Variant::rights;
    std::vector<RoundRecord> records;
    std::vector<double> expected_frustration_path;

    std::size_t num_buyers() const;
    std::size_t num_sellers() const;
    const RoundRecord& at(int round) const;

    /// Cumulative E^tau recomputed from the records.
    double expected_frustration(int round) const;
    /// Mean over buyers and over rounds first..last (inclusive) of the frustration.
    double window_mean_frustration(int first, int last) const;
    double buyer_window_frustration(std::size_t buyer, int first, int last) const;
    double window_mean_price(int first, int last) const;
    double buyer_window_money(std::size_t buyer, int first, int last) const;

    std::vector<double> total_seller_utility() const;
    std::vector<double> total_buyer_utility() const;

    bool conservation_ok(double tol) const;
    /// First round whose audit fails; 0 when every round passes.
    int first_conservation_failure(double tol) const;

    /// First round from which every buyer's frustration stays at most tol; 0 if never.
    int zero_frustration_from(double tol = 1e-12) const;
    /// First round in which every buyer's frustration is at most tol; 0 if never.
    int first_zero_frustration(double tol = 1e-12) const;
};

/// Lets a caller replace the greedy profile of selected traders in selected rounds.
/// Both hooks see the greedy values and may edit them in place.
struct StrategyOverride {
    std::function<void(const MarketState&, std::vector<SellerOffer>&)> offers;
    std::function<void(const MarketState&, const std::vector<SellerOffer>&, std::vector<BuyerBid>&)> bids;
};

/// Distribution, trading and transition for `horizon` rounds with greedy traders.
/// Throws SimulationError naming the failing round.
Trace run(const MarketConfig& config, int horizon, const StrategyOverride* override_ = nullptr);
Trace run(const MarketConfig& config);

struct DirichletOptions {
    std::size_t num_buyers = 3;
    /// Dirichlet concentration; infinity returns the means without noise.
    double concentration = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    double claim_scale = 1.0;
    double total_claim = 2.0;
    DistributionMechanism mechanism = DistributionMechanism::proportional();
    Variant variant = Variant::rights;
};

/// Random scenario with one seller (g = 1). Mean claims decrease with the buyer index
/// (proportional to 1/(i+1)), mean incomes increase (proportional to 1/(n-i)); incomes
/// sum to 1 and claims to total_claim * claim_scale. Horizon is 10 * num_buyers.
MarketConfig generate_dirichlet_scenario(const DirichletOptions& options);

namespace presets {

/// D = (1, 3/4, 1/8), m = (0, 1/4, 3/4), total resupply 1 split over `sellers` sellers.
MarketConfig scenario_a(DistributionMechanism mechanism = DistributionMechanism::proportional(),
                        Variant variant = Variant::rights, std::size_t sellers = 1);
/// Scenario A with every claim divided by 5.
MarketConfig scenario_b(DistributionMechanism mechanism = DistributionMechanism::proportional(),
                        Variant variant = Variant::rights);

}  // namespace presets

}  // namespace rmarket
