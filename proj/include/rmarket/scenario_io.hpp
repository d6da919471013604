#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "rmarket/core.hpp"
#include "rmarket/engine.hpp"

namespace rmarket {

/// Syntax or schema problem in a scenario file; `where` is "line N" or a key path.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string where, const std::string& what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

struct OutputOptions {
    std::string csv_path;
    bool per_buyer_columns = true;
    std::uint64_t seed = 0;
    friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

struct Scenario {
    std::string name;
    MarketConfig config;
    OutputOptions output;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
/// Pretty JSON; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

/// One header line and one line per round; '.' decimal separator, '\n' line ends.
void write_trace_csv(std::ostream& out, const Trace& trace, bool per_buyer_columns = true);
std::string trace_csv(const Trace& trace, bool per_buyer_columns = true);

/// Shortest round-trip decimal form of `value`, independent of the locale.
std::string format_number(double value);

}  // namespace rmarket
