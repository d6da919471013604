#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rmarket {

/// How the central authority splits the offered volume of Good into buying rights.
class DistributionMechanism {
public:
    struct Proportional {
        friend bool operator==(const Proportional&, const Proportional&) = default;
    };
    struct ContestedGarment {
        friend bool operator==(const ContestedGarment&, const ContestedGarment&) = default;
    };
    /// All Right goes to the buyer holding the `rank`-th highest claim (1-based).
    struct Canonical {
        std::size_t rank = 1;
        friend bool operator==(const Canonical&, const Canonical&) = default;
    };
    /// Convex combination of canonical mechanisms: sum of weight * canonical(rank).
    struct Weighted {
        struct Term {
            double weight = 0.0;
            std::size_t rank = 1;
            friend bool operator==(const Term&, const Term&) = default;
        };
        std::vector<Term> terms;
        friend bool operator==(const Weighted&, const Weighted&) = default;
    };

    using Kind = std::variant<Proportional, ContestedGarment, Canonical, Weighted>;

    DistributionMechanism() = default;

    static DistributionMechanism proportional() { return DistributionMechanism(Proportional{}); }
    static DistributionMechanism contested_garment() { return DistributionMechanism(ContestedGarment{}); }
    static DistributionMechanism canonical(std::size_t rank);
    /// Throws std::invalid_argument unless every weight is in [0, 1], every rank is >= 1
    /// and the weights sum to 1 within 1e-12.
    static DistributionMechanism weighted(std::vector<Weighted::Term> terms);

    const Kind& kind() const { return kind_; }
    std::string name() const;

    friend bool operator==(const DistributionMechanism&, const DistributionMechanism&) = default;

private:
    explicit DistributionMechanism(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_ = Proportional{};
};

/// Buyer indices ordered by descending claim; equal claims keep ascending index order.
std::vector<std::size_t> claim_ranking(std::span<const double> claims);

std::vector<double> proportional_rule(double volume, std::span<const double> claims);

/// Talmud / contested-garment division with equal surplus split once every claim is met.
/// Throws std::invalid_argument on an empty claim vector or negative inputs.
std::vector<double> contested_garment_rule(double volume, std::span<const double> claims);

std::vector<double> canonical_rule(std::size_t rank, double volume, std::span<const double> claims);

/// Rights per buyer; they sum to `volume`. Throws std::invalid_argument on empty or
/// negative input, or a canonical rank larger than the number of buyers.
std::vector<double> allocate(const DistributionMechanism& mechanism, double volume,
                             std::span<const double> claims);

/// Share of each buyer under the mechanism's canonical decomposition: entry b is the
/// total weight of canonical mechanisms whose recipient is b. Only defined for mechanisms
/// whose allocation is linear in the volume (everything except contested garment).
std::vector<double> canonical_weights(const DistributionMechanism& mechanism,
                                      std::span<const double> claims);

using AllocationRule = std::function<std::vector<double>(double, std::span<const double>)>;

struct AxiomViolation {
    int axiom = 0;  // 1: budget balance, 2: monotone in own claim, 3: monotone in volume
    std::size_t buyer = 0;
    double volume = 0.0;
    double other_volume = 0.0;
    std::vector<double> claims;
    std::vector<double> other_claims;
    double observed = 0.0;
    double bound = 0.0;

    std::string describe() const;
};

struct AxiomReport {
    std::string mechanism;
    std::size_t samples = 0;
    std::size_t violations[3] = {0, 0, 0};
    std::vector<AxiomViolation> counterexamples;  // the first few of each axiom

    bool passed() const { return violations[0] + violations[1] + violations[2] == 0; }
};

/// Samples random (volume, claims) instances plus single-coordinate perturbations and
/// checks the three distribution axioms on every sample.
/// Instances have between min_buyers and min_buyers + 5 buyers.
AxiomReport verify_axioms(const AllocationRule& rule, std::size_t samples, std::uint64_t seed,
                          std::string label = "custom", std::size_t min_buyers = 1);
AxiomReport verify_axioms(const DistributionMechanism& mechanism, std::size_t samples,
                          std::uint64_t seed);

}  // namespace rmarket
