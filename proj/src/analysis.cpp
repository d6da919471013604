#include "rmarket/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rmarket/pricing.hpp"

namespace rmarket {

std::string TraderRef::label() const { return (seller ? "s" : "b") + std::to_string(index); }

TraderRef TraderRef::parse(const std::string& text) {
    if (text.size() < 2 || (text[0] != 's' && text[0] != 'b'))
        throw std::invalid_argument("trader must look like s0 or b1, got '" + text + "'");
    std::size_t pos = 0;
    unsigned long idx = 0;
    try {
        idx = std::stoul(text.substr(1), &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("trader must look like s0 or b1, got '" + text + "'");
    }
    if (pos != text.size() - 1) throw std::invalid_argument("trader must look like s0 or b1, got '" + text + "'");
    return TraderRef{text[0] == 's', static_cast<std::size_t>(idx)};
}

std::string to_string(Deviation::Kind kind) {
    switch (kind) {
        case Deviation::Kind::seller_withhold: return "seller_withhold";
        case Deviation::Kind::seller_price: return "seller_price";
        case Deviation::Kind::buyer_sell_less_right: return "buyer_sell_less_right";
        case Deviation::Kind::buyer_buy_less_right: return "buyer_buy_less_right";
        case Deviation::Kind::buyer_price: return "buyer_price";
    }
    return "unknown";
}

std::string Deviation::describe() const {
    std::ostringstream os;
    os << trader.label() << ' ' << to_string(kind) << '(' << magnitude << ") at round " << round;
    return os.str();
}

StrategyOverride make_override(const std::vector<Deviation>& deviations) {
    StrategyOverride o;
    o.offers = [deviations](const MarketState& state, std::vector<SellerOffer>& offers) {
        for (const auto& d : deviations) {
            if (!d.trader.seller || d.trader.index >= offers.size()) continue;
            auto& offer = offers[d.trader.index];
            if (d.kind == Deviation::Kind::seller_withhold && d.round + 1 == state.round) {
                const double stock = state.sellers[d.trader.index].good.value();
                offer.volume = std::min(stock, offer.volume + d.magnitude);
                if (offer.volume > 0.0 && offer.price <= 0.0) offer.price = mean_posted_price(offers);
            }
            if (d.round != state.round) continue;
            if (d.kind == Deviation::Kind::seller_withhold) offer.volume = std::max(0.0, offer.volume - d.magnitude);
            if (d.kind == Deviation::Kind::seller_price) offer.price = std::max(0.0, offer.price * (1.0 + d.magnitude));
        }
    };
    o.bids = [deviations](const MarketState& state, const std::vector<SellerOffer>&, std::vector<BuyerBid>& bids) {
        for (const auto& d : deviations) {
            if (d.trader.seller || d.round != state.round || d.trader.index >= bids.size()) continue;
            auto& bid = bids[d.trader.index];
            const double right = state.buyers[d.trader.index].right.value();
            switch (d.kind) {
                case Deviation::Kind::buyer_sell_less_right:
                    bid.right_offer_volume = std::clamp(bid.right_offer_volume * (1.0 - d.magnitude), 0.0, right);
                    break;
                case Deviation::Kind::buyer_buy_less_right: {
                    const double wanted = std::max(0.0, bid.max_right_volume * (1.0 - d.magnitude));
                    bid.max_good_volume = std::max(0.0, bid.max_good_volume + wanted - bid.max_right_volume);
                    bid.max_right_volume = wanted;
                    break;
                }
                case Deviation::Kind::buyer_price: {
                    const double k = std::max(0.0, 1.0 + d.magnitude);
                    bid.right_offer_price *= k;
                    bid.max_good_price *= k;
                    bid.max_right_price *= k;
                    break;
                }
                default: break;
            }
        }
    };
    return o;
}

std::vector<int> DeviationGrid::resolved_rounds(int horizon) const {
    std::vector<int> out = rounds;
    if (out.empty()) out = {1, horizon / 2, horizon};
    std::vector<int> valid;
    for (int r : out)
        if (r >= 1 && r <= horizon) valid.push_back(r);
    std::sort(valid.begin(), valid.end());
    valid.erase(std::unique(valid.begin(), valid.end()), valid.end());
    return valid;
}

std::vector<Deviation> deviation_options(const MarketConfig& config, const Trace& baseline, TraderRef trader,
                                         int round, const DeviationGrid& grid, std::vector<std::string>* skipped) {
    std::vector<Deviation> out;
    const auto& rec = baseline.at(round);
    auto skip = [&](Deviation::Kind kind, const std::string& why) {
        if (skipped) skipped->push_back(trader.label() + ' ' + to_string(kind) + " at round " + std::to_string(round) + ": " + why);
    };
    auto signed_magnitudes = [&] {
        std::vector<double> m;
        for (double x : grid.magnitudes) {
            m.push_back(x);
            if (grid.both_signs) m.push_back(-x);
        }
        return m;
    };
    if (trader.seller) {
        if (trader.index >= config.sellers.size()) throw std::invalid_argument("no seller " + trader.label());
        const double offered = rec.seller_offered.at(trader.index);
        if (offered > 0.0) {
            for (double m : grid.magnitudes) out.push_back({trader, Deviation::Kind::seller_withhold, m * offered, round});
        } else {
            skip(Deviation::Kind::seller_withhold, "nothing offered");
        }
        for (double m : signed_magnitudes()) out.push_back({trader, Deviation::Kind::seller_price, m, round});
        return out;
    }
    if (trader.index >= config.buyers.size()) throw std::invalid_argument("no buyer " + trader.label());
    const double w = rec.right_offered.at(trader.index);
    const double wanted = rec.right_wanted.at(trader.index);
    const double right = rec.right_assigned.at(trader.index);
    if (w > 0.0) {
        for (double m : signed_magnitudes())
            if (m > 0.0 || w < right) out.push_back({trader, Deviation::Kind::buyer_sell_less_right, m, round});
    } else {
        skip(Deviation::Kind::buyer_sell_less_right, "greedy bid offers no Right");
    }
    if (wanted > 0.0) {
        for (double m : signed_magnitudes()) out.push_back({trader, Deviation::Kind::buyer_buy_less_right, m, round});
    } else {
        skip(Deviation::Kind::buyer_buy_less_right, "greedy bid buys no Right");
    }
    for (double m : signed_magnitudes()) out.push_back({trader, Deviation::Kind::buyer_price, m, round});
    return out;
}

namespace {

double utility_of(const std::vector<double>& sellers, const std::vector<double>& buyers, TraderRef t) {
    return t.seller ? sellers.at(t.index) : buyers.at(t.index);
}

std::vector<TraderRef> all_traders(const MarketConfig& config) {
    std::vector<TraderRef> out;
    for (std::size_t s = 0; s < config.sellers.size(); ++s) out.push_back({true, s});
    for (std::size_t b = 0; b < config.buyers.size(); ++b) out.push_back({false, b});
    return out;
}

}  // namespace

AuditReport audit_unilateral(const MarketConfig& config, int horizon, const DeviationGrid& grid, double tol) {
    AuditReport report;
    report.tolerance = tol;
    const Trace baseline = run(config, horizon);
    report.baseline_seller_utility = baseline.total_seller_utility();
    report.baseline_buyer_utility = baseline.total_buyer_utility();
    for (const auto& trader : all_traders(config)) {
        const double base = utility_of(report.baseline_seller_utility, report.baseline_buyer_utility, trader);
        for (int round : grid.resolved_rounds(horizon)) {
            for (const auto& dev : deviation_options(config, baseline, trader, round, grid, &report.skipped)) {
                const auto hooks = make_override({dev});
                const Trace trace = run(config, horizon, &hooks);
                const double gain =
                    utility_of(trace.total_seller_utility(), trace.total_buyer_utility(), trader) - base;
                Trial trial{{dev}, {gain}};
                report.max_gain = std::max(report.max_gain, gain);
                if (gain > tol) report.witnesses.push_back(trial);
                report.trials.push_back(std::move(trial));
            }
        }
    }
    return report;
}

AuditReport audit_coalition(const MarketConfig& config, int horizon, const std::vector<TraderRef>& coalition,
                            const DeviationGrid& grid, std::size_t max_joint_per_round, double tol) {
    if (coalition.size() < 2) throw std::invalid_argument("a coalition needs at least two traders");
    for (std::size_t i = 0; i < coalition.size(); ++i)
        for (std::size_t j = i + 1; j < coalition.size(); ++j)
            if (coalition[i] == coalition[j]) throw std::invalid_argument("coalition lists a trader twice");
    AuditReport report;
    report.tolerance = tol;
    const Trace baseline = run(config, horizon);
    report.baseline_seller_utility = baseline.total_seller_utility();
    report.baseline_buyer_utility = baseline.total_buyer_utility();

    for (int round : grid.resolved_rounds(horizon)) {
        std::vector<std::vector<Deviation>> options;
        std::size_t total = 1;
        for (const auto& member : coalition) {
            options.push_back(deviation_options(config, baseline, member, round, grid, &report.skipped));
            total = options.back().empty() ? 0 : total * options.back().size();
        }
        if (total == 0) {
            report.skipped.push_back("coalition at round " + std::to_string(round) + ": a member has no deviation");
            continue;
        }
        const std::size_t count = std::min(total, std::max<std::size_t>(1, max_joint_per_round));
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t index = total == count ? k : k * total / count;
            std::vector<Deviation> joint;
            for (const auto& opts : options) {
                joint.push_back(opts[index % opts.size()]);
                index /= opts.size();
            }
            const auto hooks = make_override(joint);
            const Trace trace = run(config, horizon, &hooks);
            const auto su = trace.total_seller_utility();
            const auto bu = trace.total_buyer_utility();
            Trial trial{joint, {}};
            double worst = INFINITY;
            for (const auto& member : coalition) {
                const double gain = utility_of(su, bu, member) -
                                    utility_of(report.baseline_seller_utility, report.baseline_buyer_utility, member);
                trial.gains.push_back(gain);
                worst = std::min(worst, gain);
            }
            report.max_gain = std::max(report.max_gain, worst);
            if (worst > tol) report.witnesses.push_back(trial);
            report.trials.push_back(std::move(trial));
        }
    }
    return report;
}

std::vector<std::vector<TraderRef>> default_coalitions(const MarketConfig& config, const Trace& baseline) {
    std::vector<std::vector<TraderRef>> out;
    const std::size_t nb = config.buyers.size();
    std::vector<TraderRef> sellers_of_right;
    if (!baseline.records.empty()) {
        const auto& first = baseline.records.front();
        for (std::size_t b = 0; b < nb && sellers_of_right.size() < 2; ++b)
            if (first.right_offered.size() == nb && first.right_offered[b] > 0.0) sellers_of_right.push_back({false, b});
    }
    if (sellers_of_right.size() < 2 && nb >= 2) sellers_of_right = {{false, 0}, {false, 1}};
    if (sellers_of_right.size() == 2) out.push_back(sellers_of_right);
    if (config.sellers.size() >= 2) {
        std::vector<TraderRef> all;
        for (std::size_t s = 0; s < config.sellers.size(); ++s) all.push_back({true, s});
        out.push_back(all);
    }
    out.push_back({{true, 0}, {false, 0}});
    if (nb >= 2) out.push_back({{true, 0}, {false, nb - 1}});
    return out;
}

NonexpansiveReport check_nonexpansive(const Trace& trace, double tol) {
    NonexpansiveReport rep;
    for (const auto& r : trace.records) rep.distance.push_back(std::abs(r.price_good - 1.0));
    for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
        const double p = trace.records[i].price_good;
        const double next = trace.records[i + 1].price_good;
        const int round = trace.records[i].round;
        if (rep.distance[i + 1] > rep.distance[i] + tol && rep.first_violation == 0) rep.first_violation = round;
        const bool wrong_way = (p < 1.0 - tol && !(next > p)) || (p > 1.0 + tol && !(next < p));
        if (wrong_way && rep.first_sign_violation == 0) rep.first_sign_violation = round;
    }
    rep.passed = rep.first_violation == 0 && rep.first_sign_violation == 0;
    return rep;
}

double bisect_implicit_price(const std::vector<double>& money, const std::vector<double>& rights, int iterations) {
    const double sum_m = std::accumulate(money.begin(), money.end(), 0.0);
    const double sum_r = std::accumulate(rights.begin(), rights.end(), 0.0);
    if (!(sum_r > 0.0)) throw std::invalid_argument("no rights in circulation");
    double lo = 0.0;
    double hi = sum_m / sum_r;
    for (int i = 0; i < iterations && hi - lo > 0.0; ++i) {
        const double mid = lo + (hi - lo) / 2.0;
        if (implicit_price_residual(money, rights, mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return lo + (hi - lo) / 2.0;
}

SolverCrossCheck cross_validate_price_solver(std::size_t instances, std::uint64_t seed) {
    SolverCrossCheck out;
    out.instances = instances;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> size_dist(1, 8);
    for (std::size_t i = 0; i < instances; ++i) {
        const std::size_t n = size_dist(rng);
        const bool broke = i % 20 == 19;
        std::vector<double> money(n), rights(n);
        for (std::size_t b = 0; b < n; ++b) {
            money[b] = broke || unit(rng) < 0.1 ? 0.0 : 2.0 * unit(rng);
            rights[b] = unit(rng) < 0.1 ? 0.0 : unit(rng);
        }
        if (std::accumulate(rights.begin(), rights.end(), 0.0) <= 0.0) rights[0] = 1.0;
        const double target = 10.0 * (1.0 - unit(rng));  // in (0, 10]
        const double sum = std::accumulate(rights.begin(), rights.end(), 0.0);
        for (double& r : rights) r *= target / sum;

        const double scan = solve_implicit_price(money, rights).price;
        const double bisect = bisect_implicit_price(money, rights);
        out.max_discrepancy = std::max(out.max_discrepancy, std::abs(scan - bisect));
        if (broke && (scan != 0.0 || bisect != 0.0)) out.degenerate_zero = false;
        if (n == 1 && rights[0] > 0.0)
            out.max_single_buyer_discrepancy = std::max(out.max_single_buyer_discrepancy,
                                                        std::abs(scan - money[0] / rights[0]));
    }
    return out;
}

LowerBoundCheck check_canonical_lower_bound(const MarketConfig& config, const Trace& trace) {
    LowerBoundCheck out;
    out.worst_gap = INFINITY;
    const auto claims = config.claims();
    const auto alpha = canonical_weights(config.mechanism, claims);
    for (const auto& r : trace.records) {
        if (r.volume_offered <= 0.0) continue;
        const double bound = canonical_lower_bound(alpha, r.money_start);
        const double gap = r.solved_price - bound;
        ++out.rounds;
        if (gap < -1e-12) ++out.below;
        out.worst_gap = std::min(out.worst_gap, gap);
    }
    return out;
}

}  // namespace rmarket
