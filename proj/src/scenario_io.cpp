#include "rmarket/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rmarket {

namespace {

using nlohmann::json;

std::string join_path(const std::string& base, const std::string& key) { return base + "/" + key; }

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!keys.count(it.key())) throw ScenarioError(join_path(path, it.key()), "unknown key");
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ScenarioError(path.empty() ? "/" : path, "expected an object");
    return j;
}

double get_number(const json& obj, const std::string& path, const char* key, std::optional<double> fallback) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ScenarioError(join_path(path, key), "missing required key");
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ScenarioError(join_path(path, key), "expected a number");
    return v.get<double>();
}

long long get_integer(const json& obj, const std::string& path, const char* key, std::optional<long long> fallback) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ScenarioError(join_path(path, key), "missing required key");
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ScenarioError(join_path(path, key), "expected an integer");
    return v.get<long long>();
}

std::string get_string(const json& obj, const std::string& path, const char* key, std::optional<std::string> fallback) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ScenarioError(join_path(path, key), "missing required key");
    }
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ScenarioError(join_path(path, key), "expected a string");
    return v.get<std::string>();
}

SupplySchedule parse_schedule(const json& j, const std::string& path) {
    if (j.is_number()) return SupplySchedule::constant(j.get<double>());
    require_object(j, path);
    const std::string kind = get_string(j, path, "kind", std::nullopt);
    SupplySchedule s;
    if (kind == "constant") {
        reject_unknown(j, path, {"kind", "value"});
        s = SupplySchedule::constant(get_number(j, path, "value", std::nullopt));
    } else if (kind == "cosine") {
        reject_unknown(j, path, {"kind", "amplitude", "period", "offset"});
        s = SupplySchedule::cosine(get_number(j, path, "amplitude", std::nullopt),
                                   get_number(j, path, "period", std::nullopt), get_number(j, path, "offset", 0.0));
    } else if (kind == "linear") {
        reject_unknown(j, path, {"kind", "slope", "intercept"});
        s = SupplySchedule::linear(get_number(j, path, "slope", std::nullopt), get_number(j, path, "intercept", 0.0));
    } else if (kind == "step") {
        reject_unknown(j, path, {"kind", "before", "after", "switch_round"});
        s = SupplySchedule::step(get_number(j, path, "before", std::nullopt), get_number(j, path, "after", std::nullopt),
                                 static_cast<int>(get_integer(j, path, "switch_round", std::nullopt)));
    } else if (kind == "logistic") {
        reject_unknown(j, path, {"kind", "capacity", "rate", "midpoint"});
        s = SupplySchedule::logistic(get_number(j, path, "capacity", std::nullopt),
                                     get_number(j, path, "rate", std::nullopt),
                                     get_number(j, path, "midpoint", std::nullopt));
    } else if (kind == "bullwhip") {
        reject_unknown(j, path, {"kind", "base", "amplitude", "damping", "period"});
        s = SupplySchedule::bullwhip(get_number(j, path, "base", std::nullopt),
                                     get_number(j, path, "amplitude", std::nullopt),
                                     get_number(j, path, "damping", 0.0), get_number(j, path, "period", std::nullopt));
    } else if (kind == "hubbert") {
        reject_unknown(j, path, {"kind", "peak", "width", "center"});
        s = SupplySchedule::hubbert(get_number(j, path, "peak", std::nullopt), get_number(j, path, "width", std::nullopt),
                                    get_number(j, path, "center", std::nullopt));
    } else {
        throw ScenarioError(join_path(path, "kind"), "unknown schedule kind '" + kind + "'");
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(path, e.what());
    }
    return s;
}

json schedule_json(const SupplySchedule& s) {
    json j;
    j["kind"] = s.kind_name();
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SupplySchedule::Constant>) {
                j["value"] = p.value;
            } else if constexpr (std::is_same_v<T, SupplySchedule::Cosine>) {
                j["amplitude"] = p.amplitude;
                j["period"] = p.period;
                j["offset"] = p.offset;
            } else if constexpr (std::is_same_v<T, SupplySchedule::Linear>) {
                j["slope"] = p.slope;
                j["intercept"] = p.intercept;
            } else if constexpr (std::is_same_v<T, SupplySchedule::Step>) {
                j["before"] = p.before;
                j["after"] = p.after;
                j["switch_round"] = p.switch_round;
            } else if constexpr (std::is_same_v<T, SupplySchedule::Logistic>) {
                j["capacity"] = p.capacity;
                j["rate"] = p.rate;
                j["midpoint"] = p.midpoint;
            } else if constexpr (std::is_same_v<T, SupplySchedule::Bullwhip>) {
                j["base"] = p.base;
                j["amplitude"] = p.amplitude;
                j["damping"] = p.damping;
                j["period"] = p.period;
            } else {
                j["peak"] = p.peak;
                j["width"] = p.width;
                j["center"] = p.center;
            }
        },
        s.params);
    return j;
}

DistributionMechanism parse_mechanism(const json& j, const std::string& path) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "proportional") return DistributionMechanism::proportional();
        if (name == "contested_garment") return DistributionMechanism::contested_garment();
        throw ScenarioError(path, "unknown mechanism '" + name + "'");
    }
    require_object(j, path);
    const std::string kind = get_string(j, path, "kind", std::nullopt);
    try {
        if (kind == "proportional") {
            reject_unknown(j, path, {"kind"});
            return DistributionMechanism::proportional();
        }
        if (kind == "contested_garment") {
            reject_unknown(j, path, {"kind"});
            return DistributionMechanism::contested_garment();
        }
        if (kind == "canonical") {
            reject_unknown(j, path, {"kind", "rank"});
            const long long rank = get_integer(j, path, "rank", std::nullopt);
            if (rank < 1) throw ScenarioError(join_path(path, "rank"), "rank must be >= 1");
            return DistributionMechanism::canonical(static_cast<std::size_t>(rank));
        }
        if (kind == "weighted") {
            reject_unknown(j, path, {"kind", "terms"});
            if (!j.contains("terms") || !j.at("terms").is_array())
                throw ScenarioError(join_path(path, "terms"), "expected an array");
            std::vector<DistributionMechanism::Weighted::Term> terms;
            const auto& arr = j.at("terms");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string tp = join_path(join_path(path, "terms"), std::to_string(i));
                require_object(arr[i], tp);
                reject_unknown(arr[i], tp, {"weight", "rank"});
                const long long rank = get_integer(arr[i], tp, "rank", std::nullopt);
                if (rank < 1) throw ScenarioError(join_path(tp, "rank"), "rank must be >= 1");
                terms.push_back({get_number(arr[i], tp, "weight", std::nullopt), static_cast<std::size_t>(rank)});
            }
            return DistributionMechanism::weighted(std::move(terms));
        }
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(path, e.what());
    }
    throw ScenarioError(join_path(path, "kind"), "unknown mechanism kind '" + kind + "'");
}

json mechanism_json(const DistributionMechanism& m) {
    json j;
    const auto& kind = m.kind();
    if (std::holds_alternative<DistributionMechanism::Proportional>(kind)) {
        j["kind"] = "proportional";
    } else if (std::holds_alternative<DistributionMechanism::ContestedGarment>(kind)) {
        j["kind"] = "contested_garment";
    } else if (const auto* c = std::get_if<DistributionMechanism::Canonical>(&kind)) {
        j["kind"] = "canonical";
        j["rank"] = c->rank;
    } else {
        j["kind"] = "weighted";
        j["terms"] = json::array();
        for (const auto& t : std::get<DistributionMechanism::Weighted>(kind).terms)
            j["terms"].push_back({{"weight", t.weight}, {"rank", t.rank}});
    }
    return j;
}

std::string line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i < byte; ++i)
        if (text[i] == '\n') ++line;
    return "line " + std::to_string(line);
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        throw ScenarioError(line_of(text, byte), e.what());
    }
    require_object(root, "");
    reject_unknown(root, "", {"name", "variant", "horizon", "seller_storage_cost", "tolerance", "price_markup",
                              "mechanism", "sellers", "buyers", "output"});
    Scenario sc;
    sc.name = get_string(root, "", "name", std::string{});
    MarketConfig& c = sc.config;
    try {
        c.variant = variant_from_string(get_string(root, "", "variant", std::string("rights")));
    } catch (const std::invalid_argument& e) {
        throw ScenarioError("/variant", e.what());
    }
    const long long horizon = get_integer(root, "", "horizon", 100);
    if (horizon < 1 || horizon > 100000000) throw ScenarioError("/horizon", "horizon must be positive");
    c.horizon = static_cast<int>(horizon);
    c.seller_storage_cost = get_number(root, "", "seller_storage_cost", 1.0);
    c.tolerance = get_number(root, "", "tolerance", kConservationTol);
    c.price_markup = get_number(root, "", "price_markup", 1.0);
    if (root.contains("mechanism")) c.mechanism = parse_mechanism(root.at("mechanism"), "/mechanism");

    for (const char* side : {"sellers", "buyers"}) {
        if (!root.contains(side)) throw ScenarioError(std::string("/") + side, "missing required key");
        if (!root.at(side).is_array()) throw ScenarioError(std::string("/") + side, "expected an array");
    }
    const auto& sellers = root.at("sellers");
    for (std::size_t i = 0; i < sellers.size(); ++i) {
        const std::string p = "/sellers/" + std::to_string(i);
        require_object(sellers[i], p);
        reject_unknown(sellers[i], p, {"resupply"});
        if (!sellers[i].contains("resupply")) throw ScenarioError(p + "/resupply", "missing required key");
        c.sellers.push_back(SellerSpec{parse_schedule(sellers[i].at("resupply"), p + "/resupply")});
    }
    const auto& buyers = root.at("buyers");
    for (std::size_t i = 0; i < buyers.size(); ++i) {
        const std::string p = "/buyers/" + std::to_string(i);
        require_object(buyers[i], p);
        reject_unknown(buyers[i], p, {"claim", "income"});
        if (!buyers[i].contains("income")) throw ScenarioError(p + "/income", "missing required key");
        c.buyers.push_back(BuyerSpec{parse_schedule(buyers[i].at("income"), p + "/income"),
                                     get_number(buyers[i], p, "claim", std::nullopt)});
    }
    if (root.contains("output")) {
        const auto& out = require_object(root.at("output"), "/output");
        reject_unknown(out, "/output", {"csv", "per_buyer_columns", "seed"});
        sc.output.csv_path = get_string(out, "/output", "csv", std::string{});
        if (out.contains("per_buyer_columns")) {
            if (!out.at("per_buyer_columns").is_boolean())
                throw ScenarioError("/output/per_buyer_columns", "expected true or false");
            sc.output.per_buyer_columns = out.at("per_buyer_columns").get<bool>();
        }
        const long long seed = get_integer(out, "/output", "seed", 0);
        if (seed < 0) throw ScenarioError("/output/seed", "seed must be >= 0");
        sc.output.seed = static_cast<std::uint64_t>(seed);
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ScenarioError("/", e.what());
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError(path.string(), "cannot read scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& scenario) {
    const MarketConfig& c = scenario.config;
    json root;
    root["name"] = scenario.name;
    root["variant"] = to_string(c.variant);
    root["horizon"] = c.horizon;
    root["seller_storage_cost"] = c.seller_storage_cost;
    root["tolerance"] = c.tolerance;
    root["price_markup"] = c.price_markup;
    root["mechanism"] = mechanism_json(c.mechanism);
    root["sellers"] = json::array();
    for (const auto& s : c.sellers) root["sellers"].push_back({{"resupply", schedule_json(s.resupply)}});
    root["buyers"] = json::array();
    for (const auto& b : c.buyers) root["buyers"].push_back({{"claim", b.claim}, {"income", schedule_json(b.income)}});
    root["output"] = {{"csv", scenario.output.csv_path},
                      {"per_buyer_columns", scenario.output.per_buyer_columns},
                      {"seed", scenario.output.seed}};
    return root.dump(2) + "\n";
}

std::string format_number(double value) {
    if (value == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const Trace& trace, bool per_buyer_columns) {
    out << "tau,price_good,price_right,expected_frustration,useful_money,useless_money,volume_offered,volume_sold";
    const std::size_t nb = trace.num_buyers();
    if (per_buyer_columns)
        for (std::size_t b = 0; b < nb; ++b)
            out << ",b" << b << "_money,b" << b << "_good,b" << b << "_right,b" << b << "_frustration";
    out << '\n';
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        out << r.round << ',' << format_number(r.price_good) << ',' << format_number(r.price_right) << ','
            << format_number(trace.expected_frustration_path[i]) << ',' << format_number(r.useful_money) << ','
            << format_number(r.useless_money) << ',' << format_number(r.volume_offered) << ','
            << format_number(r.volume_sold);
        if (per_buyer_columns)
            for (std::size_t b = 0; b < nb; ++b)
                out << ',' << format_number(r.money_start[b]) << ',' << format_number(r.good_end[b]) << ','
                    << format_number(r.right_assigned[b]) << ',' << format_number(r.frustration[b]);
        out << '\n';
    }
}

std::string trace_csv(const Trace& trace, bool per_buyer_columns) {
    std::ostringstream os;
    write_trace_csv(os, trace, per_buyer_columns);
    return os.str();
}

}  // namespace rmarket
