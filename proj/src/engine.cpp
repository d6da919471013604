#include "rmarket/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rmarket/mechanism.hpp"
#include "rmarket/pricing.hpp"

namespace rmarket {

double frustration(double right_assigned, double good_end) {
    if (!(right_assigned > 0.0)) return 0.0;
    const double f = (right_assigned - good_end) / right_assigned;
    return std::clamp(f, 0.0, 1.0);
}

bool ConservationAudit::ok(double tol) const {
    const double money_scale = std::max(1.0, std::abs(money_before));
    const double good_scale = std::max(1.0, std::abs(good_before));
    return std::abs(money_after - money_before) <= tol * money_scale &&
           std::abs(good_after - good_before) <= tol * good_scale && max_rights_excess <= tol &&
           min_balance >= -tol && offered_gap <= tol * good_scale;
}

double RoundRecord::mean_frustration() const {
    if (frustration.empty()) return 0.0;
    return std::accumulate(frustration.begin(), frustration.end(), 0.0) / static_cast<double>(frustration.size());
}

std::size_t Trace::num_buyers() const { return records.empty() ? 0 : records.front().frustration.size(); }
std::size_t Trace::num_sellers() const { return records.empty() ? 0 : records.front().seller_revenue.size(); }

const RoundRecord& Trace::at(int round) const {
    if (round < 1 || round > static_cast<int>(records.size())) throw std::out_of_range("round outside the trace");
    return records[static_cast<std::size_t>(round - 1)];
}

double Trace::expected_frustration(int round) const {
    const std::size_t n = num_buyers();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (int t = 1; t <= round; ++t)
        for (double f : at(t).frustration) sum += f;
    return sum / (static_cast<double>(round) * static_cast<double>(n));
}

namespace {

void check_window(const Trace& trace, int first, int last) {
    if (first < 1 || last < first || last > static_cast<int>(trace.records.size()))
        throw std::out_of_range("invalid round window");
}

}  // namespace

double Trace::window_mean_frustration(int first, int last) const {
    check_window(*this, first, last);
    double sum = 0.0;
    for (int t = first; t <= last; ++t) sum += at(t).mean_frustration();
    return sum / static_cast<double>(last - first + 1);
}

double Trace::buyer_window_frustration(std::size_t buyer, int first, int last) const {
    check_window(*this, first, last);
    double sum = 0.0;
    for (int t = first; t <= last; ++t) sum += at(t).frustration.at(buyer);
    return sum / static_cast<double>(last - first + 1);
}

double Trace::window_mean_price(int first, int last) const {
    check_window(*this, first, last);
    double sum = 0.0;
    for (int t = first; t <= last; ++t) sum += at(t).price_good;
    return sum / static_cast<double>(last - first + 1);
}

double Trace::buyer_window_money(std::size_t buyer, int first, int last) const {
    check_window(*this, first, last);
    double sum = 0.0;
    for (int t = first; t <= last; ++t) sum += at(t).money_start.at(buyer);
    return sum / static_cast<double>(last - first + 1);
}

std::vector<double> Trace::total_seller_utility() const {
    std::vector<double> out(num_sellers(), 0.0);
    for (const auto& r : records)
        for (std::size_t s = 0; s < out.size(); ++s) out[s] += r.seller_utility[s];
    return out;
}

std::vector<double> Trace::total_buyer_utility() const {
    std::vector<double> out(num_buyers(), 0.0);
    for (const auto& r : records)
        for (std::size_t b = 0; b < out.size(); ++b) out[b] += r.buyer_utility[b];
    return out;
}

bool Trace::conservation_ok(double tol) const { return first_conservation_failure(tol) == 0; }

int Trace::first_conservation_failure(double tol) const {
    for (const auto& r : records)
        if (!r.audit.ok(tol)) return r.round;
    return 0;
}

int Trace::zero_frustration_from(double tol) const {
    int from = 0;
    for (const auto& r : records) {
        const bool zero = std::all_of(r.frustration.begin(), r.frustration.end(), [&](double f) { return f <= tol; });
        if (!zero) from = 0;
        else if (from == 0) from = r.round;
    }
    return from;
}

int Trace::first_zero_frustration(double tol) const {
    for (const auto& r : records)
        if (std::all_of(r.frustration.begin(), r.frustration.end(), [&](double f) { return f <= tol; })) return r.round;
    return 0;
}

namespace {

ClearingResult free_market_round(const MarketState& state, double& price) {
    const std::size_t ns = state.sellers.size();
    const std::size_t nb = state.buyers.size();
    ClearingResult r;
    for (auto* v : {&r.good_bought, &r.right_bought, &r.right_sold, &r.money_spent_good, &r.money_spent_right,
                    &r.money_earned_right})
        v->assign(nb, 0.0);
    r.seller_revenue.assign(ns, 0.0);
    r.seller_sold.assign(ns, 0.0);
    r.unsold_good.assign(ns, 0.0);
    r.passes = 1;
    for (std::size_t s = 0; s < ns; ++s) r.volume_offered += state.sellers[s].good.value();
    const auto money = state.buyer_money();
    const double total = std::accumulate(money.begin(), money.end(), 0.0);
    price = 0.0;
    if (r.volume_offered <= 0.0 || total <= 0.0) {
        for (std::size_t s = 0; s < ns; ++s) r.unsold_good[s] = state.sellers[s].good.value();
        return r;
    }
    price = free_market_clearing_price(money, r.volume_offered);
    for (std::size_t b = 0; b < nb; ++b) {
        r.good_bought[b] = r.volume_offered * (money[b] / total);
        r.money_spent_good[b] = money[b];
        r.stage1_volume += r.good_bought[b];
    }
    for (std::size_t s = 0; s < ns; ++s) {
        const double stock = state.sellers[s].good.value();
        r.seller_sold[s] = stock;
        r.seller_revenue[s] = total * (stock / r.volume_offered);
    }
    return r;
}

// The rights cap is skipped for the free market, where no Right exists.
ConservationAudit audit_round(const MarketState& before, const MarketState& after, const ClearingResult& r,
                              bool rights_cap) {
    ConservationAudit a;
    a.money_before = before.total_money();
    a.money_after = after.total_money();
    a.good_before = before.total_good();
    a.good_after = after.total_good();
    double min_balance = 0.0;
    for (std::size_t b = 0; b < before.buyers.size(); ++b) {
        const double held = before.buyers[b].right.value() - r.right_sold[b] + r.right_bought[b];
        if (rights_cap) a.max_rights_excess = std::max(a.max_rights_excess, r.good_bought[b] - held);
        const double money = before.buyers[b].money.value() - r.money_spent_good[b] - r.money_spent_right[b] +
                             r.money_earned_right[b];
        min_balance = std::min({min_balance, money, held});
    }
    double sold = 0.0;
    double unsold = 0.0;
    for (std::size_t s = 0; s < before.sellers.size(); ++s) {
        sold += r.seller_sold[s];
        unsold += r.unsold_good[s];
        min_balance = std::min(min_balance, before.sellers[s].good.value() - r.seller_sold[s]);
    }
    a.min_balance = min_balance;
    a.offered_gap = std::abs(r.volume_offered - sold - unsold);
    return a;
}

}  // namespace

Trace run(const MarketConfig& config, int horizon, const StrategyOverride* override_) {
    config.validate();
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
    Trace trace;
    trace.variant = config.variant;
    const auto claims = config.claims();
    const std::size_t nb = config.buyers.size();
    MarketState state = initial_state(config);
    double cumulative = 0.0;

    for (int t = 1; t <= horizon; ++t) {
        RoundRecord rec;
        rec.round = t;
        try {
            rec.money_start = state.buyer_money();
            ClearingResult result;
            MarketState before = state;
            std::vector<double> rights(nb, 0.0);

            if (config.variant == Variant::free_market) {
                double price = 0.0;
                result = free_market_round(state, price);
                if (result.volume_offered > 0.0) rights = allocate(config.mechanism, result.volume_offered, claims);
                rec.price_good = price;
                rec.solved_price = price;
                rec.degenerate = price <= 0.0;
                for (const auto& seller : state.sellers) rec.seller_offered.push_back(seller.good.value());
                rec.right_offered.assign(nb, 0.0);
                rec.right_wanted.assign(nb, 0.0);
            } else {
                const auto plan = plan_greedy_round(state, config);
                std::vector<SellerOffer> offers;
                for (std::size_t s = 0; s < state.sellers.size(); ++s)
                    offers.push_back(greedy_seller_bid(s, state, config, plan));
                if (override_ && override_->offers) override_->offers(state, offers);

                double volume = 0.0;
                for (std::size_t s = 0; s < offers.size(); ++s)
                    if (std::isfinite(offers[s].volume) && offers[s].volume > 0.0)
                        volume += std::min(offers[s].volume, state.sellers[s].good.value());
                rights = allocate(config.mechanism, volume, claims);
                for (std::size_t b = 0; b < nb; ++b) before.buyers[b].right = Quantity::snapped(rights[b]);

                std::vector<BuyerBid> bids;
                for (std::size_t b = 0; b < nb; ++b) {
                    const auto g = greedy_buyer_bid(before.buyers[b].money.value(), rights[b], offers, config.variant);
                    rec.degenerate = rec.degenerate || g.degenerate;
                    bids.push_back(g.bid);
                }
                if (override_ && override_->bids) override_->bids(before, offers, bids);
                for (const auto& o : offers) rec.seller_offered.push_back(o.volume);
                for (const auto& bid : bids) {
                    rec.right_offered.push_back(bid.right_offer_volume);
                    rec.right_wanted.push_back(bid.max_right_volume);
                }

                result = clear(offers, bids, before, config.variant);
                rec.price_good = mean_posted_price(offers);
                rec.solved_price = plan.price;
                if (result.right_volume > 0.0) {
                    rec.price_right = result.right_value / result.right_volume;
                } else {
                    double sum = 0.0;
                    std::size_t n = 0;
                    for (const auto& bid : bids)
                        if (bid.right_offer_volume > 0.0) {
                            sum += bid.right_offer_price;
                            ++n;
                        }
                    rec.price_right = n ? sum / static_cast<double>(n) : 0.0;
                }
                rec.rejected_bids = result.rejected.size();
                rec.degenerate = rec.degenerate || volume <= 0.0;
            }

            const MarketState after = settle(before, result);
            const auto split = useful_useless_split(result);
            rec.useful_money = split.useful;
            rec.useless_money = split.useless;
            rec.volume_offered = result.volume_offered;
            rec.volume_sold = result.volume_sold();
            rec.good_bought = result.good_bought;
            rec.right_assigned = rights;
            rec.right_sold = result.right_sold;
            rec.right_bought = result.right_bought;
            rec.seller_revenue = result.seller_revenue;
            for (std::size_t b = 0; b < nb; ++b) {
                rec.good_end.push_back(after.buyers[b].good.value());
                rec.frustration.push_back(frustration(rights[b], after.buyers[b].good.value()));
            }
            for (const auto& s : after.sellers) rec.seller_good_end.push_back(s.good.value());
            const auto u = consumed_utility(after, config);
            rec.seller_utility = u.sellers;
            rec.buyer_utility = u.buyers;
            rec.audit = audit_round(before, after, result, config.variant != Variant::free_market);

            for (double f : rec.frustration) cumulative += f;
            trace.expected_frustration_path.push_back(cumulative /
                                                      (static_cast<double>(t) * static_cast<double>(nb)));
            trace.records.push_back(std::move(rec));
            state = apply_transition(after, config);
        } catch (const SimulationError&) {
            throw;
        } catch (const std::exception& e) {
            throw SimulationError(t, e.what());
        }
    }
    return trace;
}

Trace run(const MarketConfig& config) { return run(config, config.horizon); }

MarketConfig generate_dirichlet_scenario(const DirichletOptions& options) {
    if (options.num_buyers < 2) throw std::invalid_argument("a generated scenario needs at least two buyers");
    if (!(options.concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
    const std::size_t n = options.num_buyers;
    std::mt19937_64 rng(options.seed);

    auto draw = [&](std::vector<double> mean) {
        const double total = std::accumulate(mean.begin(), mean.end(), 0.0);
        for (double& m : mean) m /= total;
        if (std::isinf(options.concentration)) return mean;
        std::vector<double> x(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::gamma_distribution<double> gamma(options.concentration * mean[i], 1.0);
            x[i] = gamma(rng);
            sum += x[i];
        }
        if (!(sum > 0.0)) return mean;
        for (double& v : x) v /= sum;
        return x;
    };

    std::vector<double> claim_mean(n), income_mean(n);
    for (std::size_t i = 0; i < n; ++i) {
        claim_mean[i] = 1.0 / static_cast<double>(i + 1);
        income_mean[i] = 1.0 / static_cast<double>(n - i);
    }
    const auto claims = draw(claim_mean);
    auto incomes = draw(income_mean);
    // Renormalize so that the incomes add up to 1 as closely as doubles allow.
    const double income_total = std::accumulate(incomes.begin(), incomes.end() - 1, 0.0);
    incomes.back() = std::max(0.0, 1.0 - income_total);

    MarketConfig config;
    config.sellers.push_back(SellerSpec{SupplySchedule::constant(1.0)});
    for (std::size_t i = 0; i < n; ++i)
        config.buyers.push_back(BuyerSpec{SupplySchedule::constant(incomes[i]),
                                          claims[i] * options.total_claim * options.claim_scale});
    config.mechanism = options.mechanism;
    config.variant = options.variant;
    config.horizon = static_cast<int>(10 * n);
    return config;
}

namespace presets {

MarketConfig scenario_a(DistributionMechanism mechanism, Variant variant, std::size_t sellers) {
    if (sellers < 1) throw std::invalid_argument("at least one seller");
    MarketConfig c;
    for (std::size_t s = 0; s < sellers; ++s)
        c.sellers.push_back(SellerSpec{SupplySchedule::constant(1.0 / static_cast<double>(sellers))});
    c.buyers = {BuyerSpec{SupplySchedule::constant(0.0), 1.0}, BuyerSpec{SupplySchedule::constant(0.25), 0.75},
                BuyerSpec{SupplySchedule::constant(0.75), 0.125}};
    c.mechanism = std::move(mechanism);
    c.variant = variant;
    c.horizon = 100;
    return c;
}

MarketConfig scenario_b(DistributionMechanism mechanism, Variant variant) {
    MarketConfig c = scenario_a(std::move(mechanism), variant);
    for (auto& b : c.buyers) b.claim /= 5.0;
    return c;
}

}  // namespace presets

}  // namespace rmarket
