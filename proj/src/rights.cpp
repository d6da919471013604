#include "rmarket/rights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rmarket {

namespace {

void check_input(double volume, std::span<const double> claims) {
    if (claims.empty()) throw std::invalid_argument("allocation needs at least one buyer");
    if (!(volume >= 0.0) || !std::isfinite(volume)) throw std::invalid_argument("volume must be finite and >= 0");
    for (double d : claims)
        if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("claims must be finite and >= 0");
}

// Solves sum_i min(h_i, x) = target for x, with 0 <= target <= sum h. `sorted` ascending.
double level_for(const std::vector<double>& sorted, double target) {
    const std::size_t n = sorted.size();
    double prefix = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = (target - prefix) / static_cast<double>(n - k);
        if (x <= sorted[k]) return x;
        prefix += sorted[k];
    }
    return sorted.back();
}

std::string join(const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ')';
    return os.str();
}

std::size_t min_buyers(const DistributionMechanism& mech) {
    if (const auto* c = std::get_if<DistributionMechanism::Canonical>(&mech.kind())) return c->rank;
    if (const auto* w = std::get_if<DistributionMechanism::Weighted>(&mech.kind())) {
        std::size_t r = 1;
        for (const auto& t : w->terms) r = std::max(r, t.rank);
        return r;
    }
    return 1;
}

}  // namespace

DistributionMechanism DistributionMechanism::canonical(std::size_t rank) {
    if (rank < 1) throw std::invalid_argument("canonical rank is 1-based");
    return DistributionMechanism(Canonical{rank});
}

DistributionMechanism DistributionMechanism::weighted(std::vector<Weighted::Term> terms) {
    if (terms.empty()) throw std::invalid_argument("weighted mechanism needs at least one term");
    double sum = 0.0;
    for (const auto& t : terms) {
        if (!(t.weight >= 0.0 && t.weight <= 1.0)) throw std::invalid_argument("weights must lie in [0, 1]");
        if (t.rank < 1) throw std::invalid_argument("canonical rank is 1-based");
        sum += t.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("weights must sum to 1");
    return DistributionMechanism(Weighted{std::move(terms)});
}

std::string DistributionMechanism::name() const {
    if (std::holds_alternative<Proportional>(kind_)) return "proportional";
    if (std::holds_alternative<ContestedGarment>(kind_)) return "contested_garment";
    if (const auto* c = std::get_if<Canonical>(&kind_)) return "canonical(" + std::to_string(c->rank) + ")";
    const auto& w = std::get<Weighted>(kind_);
    std::ostringstream os;
    os << "weighted(";
    for (std::size_t i = 0; i < w.terms.size(); ++i)
        os << (i ? ", " : "") << w.terms[i].weight << "*" << w.terms[i].rank;
    os << ')';
    return os.str();
}

std::vector<std::size_t> claim_ranking(std::span<const double> claims) {
    std::vector<std::size_t> order(claims.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return claims[a] > claims[b]; });
    return order;
}

std::vector<double> proportional_rule(double volume, std::span<const double> claims) {
    check_input(volume, claims);
    const double total = std::accumulate(claims.begin(), claims.end(), 0.0);
    std::vector<double> out(claims.size());
    if (total <= 0.0) {
        std::fill(out.begin(), out.end(), volume / static_cast<double>(claims.size()));
        return out;
    }
    for (std::size_t i = 0; i < claims.size(); ++i) out[i] = volume * (claims[i] / total);
    return out;
}

std::vector<double> contested_garment_rule(double volume, std::span<const double> claims) {
    check_input(volume, claims);
    const std::size_t n = claims.size();
    const double total = std::accumulate(claims.begin(), claims.end(), 0.0);
    std::vector<double> out(n);
    if (volume >= total) {
        const double surplus = (volume - total) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = claims[i] + surplus;
        return out;
    }
    std::vector<double> halves(n);
    for (std::size_t i = 0; i < n; ++i) halves[i] = claims[i] / 2.0;
    std::vector<double> sorted = halves;
    std::sort(sorted.begin(), sorted.end());
    if (volume <= total / 2.0) {
        const double lambda = level_for(sorted, volume);
        for (std::size_t i = 0; i < n; ++i) out[i] = std::min(halves[i], lambda);
    } else {
        const double mu = level_for(sorted, total - volume);
        for (std::size_t i = 0; i < n; ++i) out[i] = claims[i] - std::min(halves[i], mu);
    }
    return out;
}

std::vector<double> canonical_rule(std::size_t rank, double volume, std::span<const double> claims) {
    check_input(volume, claims);
    if (rank < 1 || rank > claims.size())
        throw std::invalid_argument("canonical rank " + std::to_string(rank) + " exceeds the number of buyers");
    std::vector<double> out(claims.size(), 0.0);
    out[claim_ranking(claims)[rank - 1]] = volume;
    return out;
}

std::vector<double> allocate(const DistributionMechanism& mechanism, double volume, std::span<const double> claims) {
    const auto& kind = mechanism.kind();
    if (std::holds_alternative<DistributionMechanism::Proportional>(kind)) return proportional_rule(volume, claims);
    if (std::holds_alternative<DistributionMechanism::ContestedGarment>(kind))
        return contested_garment_rule(volume, claims);
    if (const auto* c = std::get_if<DistributionMechanism::Canonical>(&kind))
        return canonical_rule(c->rank, volume, claims);
    check_input(volume, claims);
    const auto alpha = canonical_weights(mechanism, claims);
    std::vector<double> out(claims.size());
    for (std::size_t i = 0; i < claims.size(); ++i) out[i] = alpha[i] * volume;
    return out;
}

std::vector<double> canonical_weights(const DistributionMechanism& mechanism, std::span<const double> claims) {
    if (claims.empty()) throw std::invalid_argument("allocation needs at least one buyer");
    const auto& kind = mechanism.kind();
    if (std::holds_alternative<DistributionMechanism::ContestedGarment>(kind))
        throw std::invalid_argument("contested garment is not linear in the volume");
    if (std::holds_alternative<DistributionMechanism::Proportional>(kind)) return proportional_rule(1.0, claims);
    std::vector<double> alpha(claims.size(), 0.0);
    const auto order = claim_ranking(claims);
    auto add = [&](std::size_t rank, double weight) {
        if (rank < 1 || rank > claims.size())
            throw std::invalid_argument("canonical rank " + std::to_string(rank) + " exceeds the number of buyers");
        alpha[order[rank - 1]] += weight;
    };
    if (const auto* c = std::get_if<DistributionMechanism::Canonical>(&kind)) {
        add(c->rank, 1.0);
    } else {
        for (const auto& t : std::get<DistributionMechanism::Weighted>(kind).terms) add(t.rank, t.weight);
    }
    return alpha;
}

std::string AxiomViolation::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (axiom) {
        case 1:
            os << "axiom 1: V=" << volume << " D=" << join(claims) << " allocates " << observed;
            break;
        case 2:
            os << "axiom 2: buyer " << buyer << " V=" << volume << " D=" << join(claims) << " gets " << bound
               << " but with D'=" << join(other_claims) << " gets " << observed;
            break;
        default:
            os << "axiom 3: buyer " << buyer << " D=" << join(claims) << " gets " << bound << " at V=" << volume
               << " but " << observed << " at V'=" << other_volume;
            break;
    }
    return os.str();
}

AxiomReport verify_axioms(const AllocationRule& rule, std::size_t samples, std::uint64_t seed, std::string label,
                          std::size_t min_n) {
    AxiomReport report;
    report.mechanism = std::move(label);
    report.samples = samples;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> size_dist(std::max<std::size_t>(min_n, 1), std::max<std::size_t>(min_n, 1) + 5);
    constexpr double tol = 1e-12;
    constexpr std::size_t keep = 3;
    std::size_t kept[3] = {0, 0, 0};

    auto record = [&](AxiomViolation v) {
        const int a = v.axiom - 1;
        ++report.violations[a];
        if (kept[a] < keep) {
            ++kept[a];
            report.counterexamples.push_back(std::move(v));
        }
    };

    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t n = size_dist(rng);
        std::vector<double> claims(n);
        for (auto& d : claims) {
            const double u = unit(rng);
            d = u < 0.1 ? 0.0 : 2.0 * unit(rng);
        }
        if (n > 1 && unit(rng) < 0.2) claims[1] = claims[0];
        const double total = std::accumulate(claims.begin(), claims.end(), 0.0);
        const double volume = unit(rng) < 0.05 ? 0.0 : 1.5 * std::max(total, 0.1) * unit(rng);

        const auto base = rule(volume, claims);
        const double sum = std::accumulate(base.begin(), base.end(), 0.0);
        const bool negative = std::any_of(base.begin(), base.end(), [](double x) { return x < -tol; });
        if (base.size() != n || std::abs(sum - volume) > tol * std::max(1.0, volume) || negative) {
            AxiomViolation v;
            v.axiom = 1;
            v.volume = volume;
            v.claims = claims;
            v.observed = sum;
            v.bound = volume;
            record(std::move(v));
            continue;
        }

        const std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        auto raised = claims;
        raised[b] += unit(rng) < 0.5 ? 2.0 * unit(rng) : 0.05 * unit(rng);
        const auto other = rule(volume, raised);
        if (other.size() == n && other[b] < base[b] - tol * std::max(1.0, volume)) {
            AxiomViolation v;
            v.axiom = 2;
            v.buyer = b;
            v.volume = volume;
            v.claims = claims;
            v.other_claims = raised;
            v.observed = other[b];
            v.bound = base[b];
            record(std::move(v));
        }

        const double bigger = volume + (unit(rng) < 0.5 ? total * unit(rng) : 0.05 * unit(rng));
        const auto grown = rule(bigger, claims);
        for (std::size_t i = 0; i < n && grown.size() == n; ++i) {
            if (grown[i] < base[i] - tol * std::max(1.0, bigger)) {
                AxiomViolation v;
                v.axiom = 3;
                v.buyer = i;
                v.volume = volume;
                v.other_volume = bigger;
                v.claims = claims;
                v.observed = grown[i];
                v.bound = base[i];
                record(std::move(v));
                break;
            }
        }
    }
    return report;
}

AxiomReport verify_axioms(const DistributionMechanism& mechanism, std::size_t samples, std::uint64_t seed) {
    const AllocationRule rule = [&mechanism](double v, std::span<const double> d) { return allocate(mechanism, v, d); };
    return verify_axioms(rule, samples, seed, mechanism.name(), min_buyers(mechanism));
}

}  // namespace rmarket
