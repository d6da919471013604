#pragma once

#include <string>
#include <variant>

namespace rmarket {

/// Per-round resupply (for sellers) or income (for buyers).
///
/// Every kind is evaluated at a 1-based round index and clamped at zero, so a
/// schedule never emits a negative amount.
struct SupplySchedule {
    struct Constant {
        double value = 0.0;
        friend bool operator==(const Constant&, const Constant&) = default;
    };
    /// amplitude * cos(2*pi*round/period) + offset
    struct Cosine {
        double amplitude = 0.0;
        double period = 1.0;
        double offset = 0.0;
        friend bool operator==(const Cosine&, const Cosine&) = default;
    };
    /// slope * round + intercept
    struct Linear {
        double slope = 0.0;
        double intercept = 0.0;
        friend bool operator==(const Linear&, const Linear&) = default;
    };
    /// `before` for rounds < switch_round, `after` from switch_round on.
    struct Step {
        double before = 0.0;
        double after = 0.0;
        int switch_round = 1;
        friend bool operator==(const Step&, const Step&) = default;
    };
    /// capacity / (1 + exp(-rate * (round - midpoint))); a negative rate gives a decaying curve.
    struct Logistic {
        double capacity = 1.0;
        double rate = 1.0;
        double midpoint = 0.0;
        friend bool operator==(const Logistic&, const Logistic&) = default;
    };
    /// Damped oscillation around a base level:
    /// base + amplitude * exp(-damping * (round - 1)) * sin(2*pi*(round - 1)/period)
    struct Bullwhip {
        double base = 1.0;
        double amplitude = 0.0;
        double damping = 0.0;
        double period = 1.0;
        friend bool operator==(const Bullwhip&, const Bullwhip&) = default;
    };
    /// Hubbert peak: peak * 4e / (1 + e)^2 with e = exp(-(round - center)/width).
    struct Hubbert {
        double peak = 1.0;
        double width = 1.0;
        double center = 0.0;
        friend bool operator==(const Hubbert&, const Hubbert&) = default;
    };

    using Params = std::variant<Constant, Cosine, Linear, Step, Logistic, Bullwhip, Hubbert>;
    Params params = Constant{};

    static SupplySchedule constant(double value) { return {Constant{value}}; }
    static SupplySchedule cosine(double amplitude, double period, double offset) {
        return {Cosine{amplitude, period, offset}};
    }
    static SupplySchedule linear(double slope, double intercept) { return {Linear{slope, intercept}}; }
    static SupplySchedule step(double before, double after, int switch_round) {
        return {Step{before, after, switch_round}};
    }
    static SupplySchedule logistic(double capacity, double rate, double midpoint) {
        return {Logistic{capacity, rate, midpoint}};
    }
    static SupplySchedule bullwhip(double base, double amplitude, double damping, double period) {
        return {Bullwhip{base, amplitude, damping, period}};
    }
    static SupplySchedule hubbert(double peak, double width, double center) {
        return {Hubbert{peak, width, center}};
    }

    bool is_constant() const { return std::holds_alternative<Constant>(params); }
    std::string kind_name() const;

    /// Throws std::invalid_argument on non-finite parameters or a non-positive period/width.
    void validate() const;

    friend bool operator==(const SupplySchedule&, const SupplySchedule&) = default;
};

/// Value of the schedule at `round` (>= 1), clamped at zero.
/// Throws std::invalid_argument for round < 1.
double evaluate_schedule(const SupplySchedule& schedule, int round);

}  // namespace rmarket
