#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rmarket/core.hpp"
#include "rmarket/engine.hpp"

namespace rmarket {

struct TraderRef {
    bool seller = false;
    std::size_t index = 0;

    std::string label() const;  // "s0", "b2", ...
    /// Parses "s<i>" or "b<i>"; throws std::invalid_argument otherwise.
    static TraderRef parse(const std::string& text);
    friend bool operator==(const TraderRef&, const TraderRef&) = default;
};

struct Deviation {
    enum class Kind {
        seller_withhold,        // magnitude: absolute Good kept back, added to next round's offer
        seller_price,           // magnitude: relative price change
        buyer_sell_less_right,  // magnitude: fraction of w not offered (negative: offer more)
        buyer_buy_less_right,   // magnitude: fraction of the wanted Right not bought (negative: more)
        buyer_price,            // magnitude: relative change of q, p-bar and q-bar
    };

    TraderRef trader;
    Kind kind = Kind::seller_price;
    double magnitude = 0.0;
    int round = 1;

    std::string describe() const;
};

std::string to_string(Deviation::Kind kind);

/// Hooks replaying greedy play with the given deviations applied.
StrategyOverride make_override(const std::vector<Deviation>& deviations);

struct DeviationGrid {
    std::vector<double> magnitudes{0.05, 0.10, 0.25, 0.50};
    std::vector<int> rounds;  // empty: {1, horizon/2, horizon}
    bool both_signs = true;   // also try -magnitude where it makes sense

    std::vector<int> resolved_rounds(int horizon) const;
};

struct Trial {
    std::vector<Deviation> deviations;
    std::vector<double> gains;  // one per deviating trader
};

struct AuditReport {
    std::vector<double> baseline_seller_utility;
    std::vector<double> baseline_buyer_utility;
    std::vector<Trial> trials;
    std::vector<std::string> skipped;
    double max_gain = -std::numeric_limits<double>::infinity();
    std::vector<Trial> witnesses;  // unilateral: gain > tol; coalition: every member gains > tol
    double tolerance = 1e-9;

    bool found_deviation() const { return !witnesses.empty(); }
};

/// Replays the trace with one trader deviating per trial.
AuditReport audit_unilateral(const MarketConfig& config, int horizon, const DeviationGrid& grid = {},
                             double tol = 1e-9);

/// Joint deviations of the coalition, all in the same round. A trial wins only if every
/// member strictly gains. max_gain is the largest of the members' minimum gains.
AuditReport audit_coalition(const MarketConfig& config, int horizon, const std::vector<TraderRef>& coalition,
                            const DeviationGrid& grid = {}, std::size_t max_joint_per_round = 256,
                            double tol = 1e-9);

/// Candidate single-trader deviations of `trader` in `round` of the baseline trace.
/// Entries that would not change the greedy bid are reported in `skipped`.
std::vector<Deviation> deviation_options(const MarketConfig& config, const Trace& baseline, TraderRef trader,
                                         int round, const DeviationGrid& grid,
                                         std::vector<std::string>* skipped = nullptr);

/// Coalitions scanned when none are given: the first two buyers that sell Right in round 1
/// of the baseline (else b0+b1), all sellers when there are several, and seller 0 paired
/// with the first and with the last buyer.
std::vector<std::vector<TraderRef>> default_coalitions(const MarketConfig& config, const Trace& baseline);

struct NonexpansiveReport {
    bool passed = true;
    int first_violation = 0;       // round tau with |p^{tau+1} - 1| > |p^tau - 1| + tol
    int first_sign_violation = 0;  // round tau where the price fails to move toward 1
    std::vector<double> distance;  // |p^tau - 1|
};

NonexpansiveReport check_nonexpansive(const Trace& trace, double tol = 1e-12);

struct SolverCrossCheck {
    std::size_t instances = 0;
    double max_discrepancy = 0.0;
    double max_single_buyer_discrepancy = 0.0;
    bool degenerate_zero = true;  // zero-money instances solved to 0 by both
};

/// Interval-scan solver versus bisection on the residual, random (M, R) with sum R in (0, 10].
SolverCrossCheck cross_validate_price_solver(std::size_t instances, std::uint64_t seed);

/// Bisection root of the implicit price residual on [0, sum M / sum R].
double bisect_implicit_price(const std::vector<double>& money, const std::vector<double>& rights,
                             int iterations = 200);

struct LowerBoundCheck {
    std::size_t rounds = 0;
    std::size_t below = 0;  // rounds where the solved price is under the bound
    double worst_gap = 0.0; // min over rounds of price - bound
};

/// Compares the greedy price of every round with canonical_lower_bound on the round's money.
/// Needs a mechanism linear in the volume; throws std::invalid_argument for contested garment.
LowerBoundCheck check_canonical_lower_bound(const MarketConfig& config, const Trace& trace);

}  // namespace rmarket
