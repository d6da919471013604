#include "rmarket/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rmarket {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("schedule parameter '") + what + "' is not finite");
}

void require_positive(double v, const char* what) {
    require_finite(v, what);
    if (v <= 0.0) throw std::invalid_argument(std::string("schedule parameter '") + what + "' must be positive");
}

}  // namespace

std::string SupplySchedule::kind_name() const {
    return std::visit(overloaded{
                          [](const Constant&) { return std::string("constant"); },
                          [](const Cosine&) { return std::string("cosine"); },
                          [](const Linear&) { return std::string("linear"); },
                          [](const Step&) { return std::string("step"); },
                          [](const Logistic&) { return std::string("logistic"); },
                          [](const Bullwhip&) { return std::string("bullwhip"); },
                          [](const Hubbert&) { return std::string("hubbert"); },
                      },
                      params);
}

void SupplySchedule::validate() const {
    std::visit(overloaded{
                   [](const Constant& c) { require_finite(c.value, "value"); },
                   [](const Cosine& c) {
                       require_finite(c.amplitude, "amplitude");
                       require_positive(c.period, "period");
                       require_finite(c.offset, "offset");
                   },
                   [](const Linear& l) {
                       require_finite(l.slope, "slope");
                       require_finite(l.intercept, "intercept");
                   },
                   [](const Step& s) {
                       require_finite(s.before, "before");
                       require_finite(s.after, "after");
                   },
                   [](const Logistic& l) {
                       require_finite(l.capacity, "capacity");
                       require_finite(l.rate, "rate");
                       require_finite(l.midpoint, "midpoint");
                   },
                   [](const Bullwhip& b) {
                       require_finite(b.base, "base");
                       require_finite(b.amplitude, "amplitude");
                       require_finite(b.damping, "damping");
                       require_positive(b.period, "period");
                   },
                   [](const Hubbert& h) {
                       require_finite(h.peak, "peak");
                       require_positive(h.width, "width");
                       require_finite(h.center, "center");
                   },
               },
               params);
}

double evaluate_schedule(const SupplySchedule& schedule, int round) {
    if (round < 1) throw std::invalid_argument("schedule round must be >= 1");
    const double t = static_cast<double>(round);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double v = std::visit(
        overloaded{
            [](const SupplySchedule::Constant& c) { return c.value; },
            [&](const SupplySchedule::Cosine& c) { return c.amplitude * std::cos(two_pi * t / c.period) + c.offset; },
            [&](const SupplySchedule::Linear& l) { return l.slope * t + l.intercept; },
            [&](const SupplySchedule::Step& s) { return round < s.switch_round ? s.before : s.after; },
            [&](const SupplySchedule::Logistic& l) {
                return l.capacity / (1.0 + std::exp(-l.rate * (t - l.midpoint)));
            },
            [&](const SupplySchedule::Bullwhip& b) {
                return b.base + b.amplitude * std::exp(-b.damping * (t - 1.0)) * std::sin(two_pi * (t - 1.0) / b.period);
            },
            [&](const SupplySchedule::Hubbert& h) {
                const double e = std::exp(-(t - h.center) / h.width);
                if (!std::isfinite(e)) return 0.0;
                return h.peak * 4.0 * e / ((1.0 + e) * (1.0 + e));
            },
        },
        schedule.params);
    return v > 0.0 ? v : 0.0;
}

}  // namespace rmarket
