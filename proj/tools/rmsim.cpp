// rmsim: command-line front end for the rights-market simulator.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmarket/analysis.hpp"
#include "rmarket/engine.hpp"
#include "rmarket/rights.hpp"
#include "rmarket/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace rmarket;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitFound = 3;
constexpr int kExitRuntime = 4;

struct ParseFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return arg;
#ifdef RMARKET_PRESET_DIR
    for (const fs::path& candidate : {fs::path(RMARKET_PRESET_DIR) / arg, fs::path(RMARKET_PRESET_DIR) / (arg + ".json")})
        if (fs::exists(candidate)) return candidate;
#endif
    throw ParseFailure("scenario '" + arg + "' not found");
}

Scenario load(const std::string& arg, int horizon, const std::string& variant) {
    Scenario sc = load_scenario(resolve_scenario(arg));
    if (horizon > 0) sc.config.horizon = horizon;
    if (!variant.empty()) {
        try {
            sc.config.variant = variant_from_string(variant);
        } catch (const std::invalid_argument& e) {
            throw ParseFailure(std::string("--variant: ") + e.what());
        }
    }
    return sc;
}

// Writes to `path`, or to stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

DistributionMechanism parse_mechanism_arg(const std::string& text) {
    if (text == "proportional") return DistributionMechanism::proportional();
    if (text == "contested_garment") return DistributionMechanism::contested_garment();
    if (text.rfind("canonical:", 0) == 0) return DistributionMechanism::canonical(std::stoul(text.substr(10)));
    if (text.rfind("weighted:", 0) == 0) {
        std::vector<DistributionMechanism::Weighted::Term> terms;
        std::stringstream ss(text.substr(9));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto at = item.find('@');
            if (at == std::string::npos) throw ParseFailure("weighted terms look like 0.5@1");
            terms.push_back({std::stod(item.substr(0, at)), std::stoul(item.substr(at + 1))});
        }
        return DistributionMechanism::weighted(std::move(terms));
    }
    throw ParseFailure("unknown mechanism '" + text + "'");
}

std::vector<TraderRef> parse_coalition(const std::string& text) {
    std::vector<TraderRef> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, '+')) {
        try {
            out.push_back(TraderRef::parse(item));
        } catch (const std::invalid_argument& e) {
            throw ParseFailure(e.what());
        }
    }
    return out;
}

std::string describe_report(const std::string& title, const AuditReport& r) {
    std::ostringstream os;
    os.precision(12);
    os << title << ": " << r.trials.size() << " trials, " << r.skipped.size() << " skipped, max gain "
       << (r.trials.empty() ? 0.0 : r.max_gain) << ", " << r.witnesses.size() << " profitable\n";
    for (const auto& w : r.witnesses) {
        os << "  witness:";
        for (std::size_t i = 0; i < w.deviations.size(); ++i)
            os << ' ' << w.deviations[i].describe() << " gain " << w.gains[i] << ';';
        os << '\n';
    }
    for (const auto& s : r.skipped) os << "  skipped " << s << '\n';
    return os.str();
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe m;
    if (v.empty()) return m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repeated market with buying rights: simulation and audits"};
    app.require_subcommand(1);

    std::string scenario_arg, out_path, variant;
    int horizon = 0;
    std::uint64_t seed = 0;

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write the per-round CSV");
    sim->add_option("--scenario", scenario_arg, "Scenario file or preset name")->required();
    sim->add_option("--out", out_path, "CSV output path ('-' for stdout)");
    sim->add_option("--seed", seed, "Seed recorded with the run");
    sim->add_option("--horizon", horizon, "Override the scenario horizon")->check(CLI::PositiveNumber);
    sim->add_option("--variant", variant, "rights, free_market or myopic_rights");

    std::vector<std::string> coalitions;
    bool no_coalitions = false;
    std::vector<double> magnitudes;
    std::vector<int> rounds;
    auto* audit = app.add_subcommand("audit", "Search for profitable unilateral and coalition deviations");
    audit->add_option("--scenario", scenario_arg, "Scenario file or preset name")->required();
    audit->add_option("--out", out_path, "Report path ('-' for stdout)");
    audit->add_option("--seed", seed, "Unused; accepted for uniformity");
    audit->add_option("--horizon", horizon, "Override the scenario horizon")->check(CLI::PositiveNumber);
    audit->add_option("--variant", variant, "rights, free_market or myopic_rights");
    audit->add_option("--coalition", coalitions, "Coalition such as b0+b1 (repeatable)");
    audit->add_flag("--no-coalitions", no_coalitions, "Only run the unilateral audit");
    audit->add_option("--magnitudes", magnitudes, "Deviation magnitudes (default 0.05 0.1 0.25 0.5)");
    audit->add_option("--rounds", rounds, "Deviation rounds (default 1, T/2, T)");

    std::size_t min_buyers = 3, max_buyers = 10, seeds = 10;
    std::string claim_scale = "1";
    double concentration = 10.0;
    auto* sweep = app.add_subcommand("sweep", "Asymptotic frustration over Dirichlet scenarios");
    sweep->add_option("--min-buyers", min_buyers)->check(CLI::Range(2, 1000));
    sweep->add_option("--max-buyers", max_buyers)->check(CLI::Range(2, 1000));
    sweep->add_option("--seeds", seeds, "Scenarios per size")->check(CLI::Range(1, 100000));
    sweep->add_option("--seed", seed, "Base seed");
    sweep->add_option("--claim-scale", claim_scale, "Claim multiplier, or 'inverse' for 1/|B|");
    sweep->add_option("--concentration", concentration, "Dirichlet concentration ('inf' for the means)");
    sweep->add_option("--variant", variant, "Rights variant compared with the free market");
    sweep->add_option("--out", out_path, "CSV output path ('-' for stdout)");

    std::size_t samples = 1000;
    std::vector<std::string> mechanisms;
    auto* verify = app.add_subcommand("verify-mechanisms", "Sample the distribution axioms");
    verify->add_option("--samples", samples)->check(CLI::Range(1, 100000000));
    verify->add_option("--seed", seed);
    verify->add_option("--mechanism", mechanisms,
                       "proportional, contested_garment, canonical:N or weighted:w@n,... (repeatable)");
    verify->add_option("--out", out_path, "Report path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    try {
        if (sim->parsed()) {
            Scenario sc = load(scenario_arg, horizon, variant);
            if (sim->count("--seed")) sc.output.seed = seed;
            const Trace trace = run(sc.config);
            const std::string path = out_path.empty() ? sc.output.csv_path : out_path;
            emit(path, trace_csv(trace, sc.output.per_buyer_columns));
            return kExitOk;
        }
        if (audit->parsed()) {
            const Scenario sc = load(scenario_arg, horizon, variant);
            DeviationGrid grid;
            if (!magnitudes.empty()) grid.magnitudes = magnitudes;
            grid.rounds = rounds;
            const int T = sc.config.horizon;
            std::ostringstream report;
            bool found = false;
            const auto uni = audit_unilateral(sc.config, T, grid);
            report << describe_report("unilateral", uni);
            found = found || uni.found_deviation();
            std::vector<std::vector<TraderRef>> groups;
            for (const auto& c : coalitions) groups.push_back(parse_coalition(c));
            if (groups.empty() && !no_coalitions) groups = default_coalitions(sc.config, run(sc.config, T));
            for (const auto& g : groups) {
                std::string name;
                for (const auto& t : g) name += (name.empty() ? "" : "+") + t.label();
                const auto rep = audit_coalition(sc.config, T, g, grid);
                report << describe_report("coalition " + name, rep);
                found = found || rep.found_deviation();
            }
            report << (found ? "result: profitable deviation found\n" : "result: no profitable deviation\n");
            emit(out_path, report.str());
            return found ? kExitFound : kExitOk;
        }
        if (sweep->parsed()) {
            if (min_buyers > max_buyers) throw ParseFailure("--min-buyers exceeds --max-buyers");
            Variant rights_variant = Variant::rights;
            if (!variant.empty()) rights_variant = variant_from_string(variant);
            std::ostringstream csv;
            csv << "num_buyers,claim_scale,runs,rights_frustration_mean,rights_frustration_se,"
                   "free_frustration_mean,free_frustration_se,rights_price_mean,rights_price_se,"
                   "free_price_mean,free_price_se\n";
            for (std::size_t n = min_buyers; n <= max_buyers; ++n) {
                double scale = 1.0;
                if (claim_scale == "inverse") scale = 1.0 / static_cast<double>(n);
                else {
                    try {
                        scale = std::stod(claim_scale);
                    } catch (const std::exception&) {
                        throw ParseFailure("--claim-scale must be a number or 'inverse'");
                    }
                }
                std::vector<double> rf, ff, rp, fp;
                for (std::size_t k = 0; k < seeds; ++k) {
                    DirichletOptions opt;
                    opt.num_buyers = n;
                    opt.concentration = concentration;
                    opt.seed = seed + 1000003ULL * n + k;
                    opt.claim_scale = scale;
                    opt.variant = rights_variant;
                    MarketConfig cfg = generate_dirichlet_scenario(opt);
                    const int T = cfg.horizon;
                    const int window = std::max(2, (T / 2) / 2 * 2);
                    const Trace tr = run(cfg, T);
                    cfg.variant = Variant::free_market;
                    const Trace tf = run(cfg, T);
                    rf.push_back(tr.window_mean_frustration(T - window + 1, T));
                    ff.push_back(tf.window_mean_frustration(T - window + 1, T));
                    rp.push_back(tr.window_mean_price(T - window + 1, T));
                    fp.push_back(tf.window_mean_price(T - window + 1, T));
                }
                const auto a = mean_se(rf), b = mean_se(ff), c = mean_se(rp), d = mean_se(fp);
                csv << n << ',' << format_number(scale) << ',' << seeds << ',' << format_number(a.mean) << ','
                    << format_number(a.se) << ',' << format_number(b.mean) << ',' << format_number(b.se) << ','
                    << format_number(c.mean) << ',' << format_number(c.se) << ',' << format_number(d.mean) << ','
                    << format_number(d.se) << '\n';
            }
            emit(out_path, csv.str());
            return kExitOk;
        }
        if (verify->parsed()) {
            if (mechanisms.empty())
                mechanisms = {"proportional", "contested_garment", "canonical:1", "canonical:2", "canonical:3",
                              "weighted:0.5@1,0.3@2,0.2@3"};
            std::ostringstream report;
            bool failed = false;
            for (const auto& m : mechanisms) {
                DistributionMechanism mech;
                try {
                    mech = parse_mechanism_arg(m);
                } catch (const std::invalid_argument& e) {
                    throw ParseFailure("--mechanism " + m + ": " + e.what());
                }
                const auto rep = verify_axioms(mech, samples, seed);
                report << rep.mechanism << ": " << (rep.passed() ? "pass" : "FAIL") << " (" << rep.samples
                       << " samples; violations " << rep.violations[0] << '/' << rep.violations[1] << '/'
                       << rep.violations[2] << ")\n";
                for (const auto& v : rep.counterexamples) report << "  " << v.describe() << '\n';
                failed = failed || !rep.passed();
            }
            emit(out_path, report.str());
            return failed ? kExitFound : kExitOk;
        }
    } catch (const ScenarioError& e) {
        std::cerr << "rmsim: parse error: " << e.what() << '\n';
        return kExitParse;
    } catch (const ParseFailure& e) {
        std::cerr << "rmsim: " << e.what() << '\n';
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "rmsim: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}
