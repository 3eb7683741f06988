#include "mstop/cli.hpp"

#include "mstop/error.hpp"
#include "mstop/finite.hpp"
#include "mstop/infinite.hpp"
#include "mstop/json_io.hpp"
#include "mstop/mc.hpp"
#include "mstop/model.hpp"
#include "mstop/quadrature.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mstop::cli {

namespace {

using nlohmann::json;

constexpr std::array<double, 5> kPublishedTable = {3.317653, 3.079880, 2.971528, 2.738782,
                                                   2.643230};
constexpr double kPublishedXHat = 2.593508;
constexpr double kTableTolerance = 1e-3;

struct RunConfig {
    GbmModel model = reference_model();
    std::size_t rights = 5;
    double x0 = 2.0;
    std::string engine = "algebra";
    std::string format;  // empty: json, except csv for curve
    std::string output;
    std::string preset = "paper-table1";
    std::string grid = "0.5:10:200";
    std::size_t paths = 1000000;
    std::uint64_t seed = 42;
    unsigned workers = 1;
    std::optional<double> perturb;
    std::vector<double> alt_thresholds;
};

/// Input problems detected after parsing; mapped to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string sci6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

json config_json(const std::string& command, const RunConfig& c, const std::string& format) {
    json j = {{"command", command},
              {"mu", c.model.mu},
              {"sigma", c.model.sigma},
              {"rate", c.model.rate},
              {"lambda", c.model.lambda},
              {"strike", c.model.strike},
              {"rights", c.rights},
              {"x0", c.x0},
              {"engine", c.engine},
              {"format", format}};
    if (command == "table") j["preset"] = c.preset;
    if (command == "curve") j["grid"] = c.grid;
    if (command == "verify") {
        j["paths"] = c.paths;
        j["seed"] = c.seed;
        j["workers"] = c.workers;
        j["perturb"] = c.perturb ? json(*c.perturb) : json(nullptr);
        j["alt_thresholds"] = c.alt_thresholds;
    }
    return j;
}

struct Grid {
    double lo, hi;
    std::size_t points;
};

Grid parse_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw InputError("grid must look like lo:hi:points, got '" + spec + "'");
    try {
        std::size_t used = 0;
        const std::string lo_s = spec.substr(0, c1);
        const std::string hi_s = spec.substr(c1 + 1, c2 - c1 - 1);
        const std::string n_s = spec.substr(c2 + 1);
        Grid g{};
        g.lo = std::stod(lo_s, &used);
        if (used != lo_s.size()) throw std::invalid_argument(lo_s);
        g.hi = std::stod(hi_s, &used);
        if (used != hi_s.size()) throw std::invalid_argument(hi_s);
        const long long n = std::stoll(n_s, &used);
        if (used != n_s.size() || n < 0) throw std::invalid_argument(n_s);
        g.points = static_cast<std::size_t>(n);
        if (!(g.lo > 0.0) || !(g.hi > g.lo) || g.points < 2 || !std::isfinite(g.hi))
            throw InputError("grid needs 0 < lo < hi and points >= 2, got '" + spec + "'");
        return g;
    } catch (const std::logic_error&) {
        throw InputError("grid must look like lo:hi:points, got '" + spec + "'");
    }
}

// Commands write the full report for the chosen format to `os`.

void cmd_solve(const RunConfig& c, const std::string& format, std::ostream& os) {
    validate(c.model, true);
    if (!(c.x0 > 0.0)) throw InputError("x0 must be positive");
    if (c.engine != "algebra" && c.engine != "quadrature")
        throw InputError("engine must be algebra or quadrature");

    const auto exps = derive_exponents(c.model);
    const double x_hat = exps.beta / (exps.beta - 1.0) * c.model.strike;
    std::vector<double> thresholds, deltas, values;
    double v_inf = 0.0;
    if (c.engine == "algebra") {
        const auto ladder = solve_ladder(c.model, c.rights);
        thresholds = ladder.thresholds;
        deltas = ladder.deltas;
        for (const auto& v : ladder.values) values.push_back(v(c.x0));
        v_inf = solve_infinite(c.model).v_inf(c.x0);
    } else {
        const auto q = solve_ladder_quadrature(c.model, c.rights, c.x0);
        thresholds = q.thresholds;
        deltas = q.deltas;
        values = q.values_at_x0;
        v_inf = q.v_inf_at_x0;
    }

    if (format == "json") {
        json j = {{"config", config_json("solve", c, format)},
                  {"model", to_json(c.model)},
                  {"exponents", to_json(exps)},
                  {"x_hat_inf", x_hat},
                  {"thresholds", thresholds},
                  {"deltas", deltas},
                  {"values_at_x0", values},
                  {"v_inf_at_x0", v_inf}};
        os << j.dump(2) << '\n';
    } else if (format == "csv") {
        os << "rights,threshold,delta,value_at_x0\n";
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            os << i + 1 << ',' << num17(thresholds[i]) << ','
               << (i == 0 ? std::string() : num17(deltas[i - 1])) << ',' << num17(values[i])
               << '\n';
        os << "inf," << num17(x_hat) << ",," << num17(v_inf) << '\n';
    } else {
        os << "engine      " << c.engine << '\n'
           << "b, a        " << num6(exps.b) << ", " << num6(exps.a) << '\n'
           << "beta, alpha " << num6(exps.beta) << ", " << num6(exps.alpha) << '\n'
           << "x_hat_inf   " << num6(x_hat) << '\n';
        os << "rights  threshold  delta          V(x0)\n";
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            os << i + 1 << "       " << num6(thresholds[i]) << "   "
               << (i == 0 ? std::string("-            ") : sci6(deltas[i - 1])) << "  "
               << num6(values[i]) << '\n';
        os << "V_inf(x0)   " << num6(v_inf) << '\n';
    }
}

void cmd_table(const RunConfig& c, const std::string& format, std::ostream& os) {
    if (c.preset != "paper-table1") throw InputError("unknown preset '" + c.preset + "'");
    const GbmModel m = reference_model();
    const auto ladder = solve_ladder(m, kPublishedTable.size());
    const auto exps = derive_exponents(m);
    const double x_hat = exps.beta / (exps.beta - 1.0) * m.strike;

    double max_diff = 0.0;
    std::vector<double> diffs;
    for (std::size_t i = 0; i < kPublishedTable.size(); ++i) {
        diffs.push_back(std::abs(ladder.thresholds[i] - kPublishedTable[i]));
        max_diff = std::max(max_diff, diffs.back());
    }

    if (format == "json") {
        RunConfig echoed = c;
        echoed.model = m;
        echoed.rights = kPublishedTable.size();
        json rows = json::array();
        for (std::size_t i = 0; i < kPublishedTable.size(); ++i)
            rows.push_back({{"rights", i + 1},
                            {"computed", ladder.thresholds[i]},
                            {"published", kPublishedTable[i]},
                            {"abs_diff", diffs[i]}});
        json j = {{"config", config_json("table", echoed, format)},
                  {"preset", c.preset},
                  {"rows", rows},
                  {"x_hat_inf",
                   {{"computed", x_hat},
                    {"published", kPublishedXHat},
                    {"abs_diff", std::abs(x_hat - kPublishedXHat)}}},
                  {"max_abs_diff", max_diff},
                  {"tolerance", kTableTolerance},
                  {"within_tolerance", max_diff < kTableTolerance}};
        os << j.dump(2) << '\n';
    } else if (format == "csv") {
        os << "rights,computed,published,abs_diff\n";
        for (std::size_t i = 0; i < kPublishedTable.size(); ++i)
            os << i + 1 << ',' << num17(ladder.thresholds[i]) << ',' << num17(kPublishedTable[i])
               << ',' << num17(diffs[i]) << '\n';
        os << "inf," << num17(x_hat) << ',' << num17(kPublishedXHat) << ','
           << num17(std::abs(x_hat - kPublishedXHat)) << '\n';
    } else {
        os << "            ";
        for (std::size_t i = 0; i < kPublishedTable.size(); ++i) os << "x*_" << i + 1 << "       ";
        os << "x_hat_inf\n";
        os << "computed    ";
        for (double t : ladder.thresholds) os << num6(t) << "   ";
        os << num6(x_hat) << '\n';
        os << "published   ";
        for (double t : kPublishedTable) os << num6(t) << "   ";
        os << num6(kPublishedXHat) << '\n';
        os << "abs diff    ";
        for (double d : diffs) os << num6(d) << "   ";
        os << num6(std::abs(x_hat - kPublishedXHat)) << '\n';
    }
}

// Returns true when the z-test passes.
bool cmd_verify(const RunConfig& c, const std::string& format, std::ostream& os) {
    validate(c.model, true);
    if (c.paths < 1000) throw InputError("--paths must be at least 1000");
    if (!(c.x0 > 0.0)) throw InputError("x0 must be positive");
    if (c.perturb && !(*c.perturb > 0.0 && *c.perturb <= 0.2))
        throw InputError("--perturb must lie in (0, 0.2]");
    if (!c.alt_thresholds.empty() && c.alt_thresholds.size() != c.rights)
        throw InputError("--alt-thresholds needs exactly one value per right");

    const auto ladder = solve_ladder(c.model, c.rights);
    const double analytic = ladder.values.back()(c.x0);
    const PolicySpec policy{ladder.thresholds, c.x0, std::nullopt};
    const auto est = simulate_policy(c.model, policy, c.paths, c.seed, c.workers);

    double z;
    if (est.std_err > 0.0) {
        z = (est.mean - analytic) / est.std_err;
    } else {
        const double gap = std::abs(est.mean - analytic);
        z = gap <= 1e-12 * std::max(1.0, std::abs(analytic))
                ? 0.0
                : std::copysign(std::numeric_limits<double>::infinity(), est.mean - analytic);
    }
    const bool pass = std::abs(z) <= 3.0;

    std::optional<DominanceReport> dom;
    if (c.perturb)
        dom = policy_dominance_scan(c.model, ladder, c.x0, *c.perturb, c.paths, c.seed, c.workers);
    std::optional<PolicyComparison> alt;
    if (!c.alt_thresholds.empty())
        alt = compare_policies(c.model, policy, PolicySpec{c.alt_thresholds, c.x0, std::nullopt},
                               c.paths, c.seed, c.workers);

    if (format == "json") {
        json mc = {{"mean", est.mean},
                   {"std_err", est.std_err},
                   {"n_paths", est.n_paths},
                   {"seed", est.seed},
                   {"exercised_counts", est.exercised_counts},
                   {"clamped", est.clamped}};
        json j = {{"config", config_json("verify", c, format)},
                  {"thresholds", ladder.thresholds},
                  {"analytic", analytic},
                  {"mc", mc},
                  {"z", std::isfinite(z) ? json(z) : json(nullptr)},
                  {"pass", pass}};
        if (dom) {
            json variants = json::array();
            for (const auto& v : dom->variants)
                variants.push_back({{"rights", v.rights},
                                    {"direction", v.direction},
                                    {"thresholds", v.thresholds},
                                    {"mean", v.mean},
                                    {"diff", v.diff},
                                    {"diff_se", v.diff_se},
                                    {"beats_optimal", v.beats_optimal}});
            j["dominance"] = {{"perturbation", dom->perturbation},
                              {"optimal_mean", dom->optimal.mean},
                              {"optimal_std_err", dom->optimal.std_err},
                              {"variants", variants},
                              {"ok", dom->ok}};
        }
        if (alt) {
            j["alternative"] = {{"thresholds", c.alt_thresholds},
                                {"mean", alt->mean_alt},
                                {"diff", alt->diff},
                                {"diff_se", alt->diff_se},
                                {"strictly_lower", alt->diff < -3.0 * alt->diff_se}};
        }
        os << j.dump(2) << '\n';
    } else if (format == "csv") {
        os << "key,value\n"
           << "analytic," << num17(analytic) << '\n'
           << "mc_mean," << num17(est.mean) << '\n'
           << "mc_std_err," << num17(est.std_err) << '\n'
           << "z," << num17(z) << '\n'
           << "pass," << (pass ? "true" : "false") << '\n';
        if (dom)
            for (const auto& v : dom->variants)
                os << "diff_" << v.rights << (v.direction > 0 ? "_up," : "_down,") << num17(v.diff)
                   << '\n';
        if (alt) os << "alt_diff," << num17(alt->diff) << "\nalt_diff_se," << num17(alt->diff_se) << '\n';
    } else {
        os << "analytic V(x0)  " << num6(analytic) << '\n'
           << "mc mean         " << num6(est.mean) << " +- " << num6(est.std_err) << " ("
           << est.n_paths << " paths, seed " << est.seed << ")\n"
           << "z               " << num6(z) << (pass ? "  pass\n" : "  FAIL\n");
        if (dom) {
            os << "dominance scan (perturbation " << num6(dom->perturbation) << ")\n";
            for (const auto& v : dom->variants)
                os << "  x*_" << v.rights << (v.direction > 0 ? " up   " : " down ") << num6(v.diff)
                   << " +- " << num6(v.diff_se) << (v.beats_optimal ? "  beats optimal\n" : "\n");
            os << "  " << (dom->ok ? "no variant beats the optimal policy" : "VIOLATION") << '\n';
        }
        if (alt)
            os << "alternative     " << num6(alt->diff) << " +- " << num6(alt->diff_se)
               << (alt->diff < -3.0 * alt->diff_se ? "  strictly lower\n" : "\n");
    }
    return pass;
}

void cmd_curve(const RunConfig& c, const std::string& format, std::ostream& os) {
    const Grid grid = parse_grid(c.grid);
    validate(c.model, true);
    const auto ladder = solve_ladder(c.model, c.rights);
    const auto inf = solve_infinite(c.model);
    const auto g = call_payoff(c.model.strike);
    const auto xs = log_grid(grid.lo, grid.hi, grid.points);

    if (format == "json") {
        json j = {{"config", config_json("curve", c, format)}, {"x", xs}};
        std::vector<double> col;
        for (double x : xs) col.push_back(g(x));
        j["g"] = col;
        for (std::size_t i = 0; i < ladder.values.size(); ++i) {
            col.clear();
            for (double x : xs) col.push_back(ladder.values[i](x));
            j["V" + std::to_string(i + 1)] = col;
        }
        col.clear();
        for (double x : xs) col.push_back(inf.v_inf(x));
        j["Vinf"] = col;
        os << j.dump(2) << '\n';
        return;
    }
    const char sep = format == "csv" ? ',' : ' ';
    auto fmt = [&](double v) { return format == "csv" ? num17(v) : num6(v); };
    os << 'x' << sep << 'g';
    for (std::size_t i = 1; i <= ladder.values.size(); ++i) os << sep << 'V' << i;
    os << sep << "Vinf\n";
    for (double x : xs) {
        os << fmt(x) << sep << fmt(g(x));
        for (const auto& v : ladder.values) os << sep << fmt(v(x));
        os << sep << fmt(inf.v_inf(x)) << '\n';
    }
}

json error_json(const std::string& kind, int code, const std::string& message,
                const std::vector<std::string>& violations = {}) {
    json j = {{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}};
    if (!violations.empty()) j["error"]["violations"] = violations;
    return j;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiple stopping with exponential refraction periods: call payoff under GBM",
                 "mstop"};
    RunConfig c;
    app.set_config("--config", "", "INI file with keys named after the long flags")
        ->envname("MSTOP_CONFIG");
    app.require_subcommand(1);

    app.add_option("--mu", c.model.mu, "Drift of X")->capture_default_str();
    app.add_option("--sigma", c.model.sigma, "Volatility of X")->capture_default_str();
    app.add_option("--rate", c.model.rate, "Discount rate r")->capture_default_str();
    app.add_option("--lambda", c.model.lambda, "Refraction intensity")->capture_default_str();
    app.add_option("--strike", c.model.strike, "Strike K")->capture_default_str();
    app.add_option("--rights", c.rights, "Number of exercise rights N")
        ->check(CLI::Range(std::size_t{1}, std::size_t{1000}))
        ->capture_default_str();
    app.add_option("--x0", c.x0, "Initial state")->capture_default_str();
    app.add_option("--engine", c.engine, "Resolvent engine for solve")
        ->check(CLI::IsMember({"algebra", "quadrature"}))
        ->capture_default_str();
    app.add_option("--format", c.format, "Output format (default json; csv for curve)")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--output", c.output, "Write the report to this file");
    app.add_option("--preset", c.preset, "Preset for table")->capture_default_str();
    app.add_option("--grid", c.grid, "Curve grid lo:hi:points (log spaced)")->capture_default_str();
    app.add_option("--paths", c.paths, "Monte Carlo paths")->capture_default_str();
    app.add_option("--seed", c.seed, "Monte Carlo master seed")->capture_default_str();
    app.add_option("--workers", c.workers, "Monte Carlo worker threads")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    app.add_option("--perturb", c.perturb, "Relative shift for the dominance scan");
    app.add_option("--alt-thresholds", c.alt_thresholds,
                   "Alternative policy (x*_1 .. x*_N) compared on common random numbers")
        ->delimiter(',');

    auto* solve = app.add_subcommand("solve", "Threshold ladder, values at x0, infinite problem");
    auto* table = app.add_subcommand("table", "Reproduce the published threshold table");
    auto* verify = app.add_subcommand("verify", "Monte Carlo check of the analytic value");
    auto* curve = app.add_subcommand("curve", "Value functions on a log grid");
    for (auto* sub : {solve, table, verify, curve}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << error_json("usage", kExitInput, e.what()).dump() << '\n';
        return kExitInput;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const std::string format = !c.format.empty() ? c.format : command == "curve" ? "csv" : "json";

    std::ostringstream report;
    int code = kExitOk;
    try {
        if (command == "solve") {
            cmd_solve(c, format, report);
        } else if (command == "table") {
            cmd_table(c, format, report);
        } else if (command == "verify") {
            if (!cmd_verify(c, format, report)) code = kExitVerification;
        } else {
            cmd_curve(c, format, report);
        }
    } catch (const ValidationError& e) {
        err << error_json("validation", kExitInput, e.what(), e.violations()).dump() << '\n';
        return kExitInput;
    } catch (const InputError& e) {
        err << error_json("input", kExitInput, e.what()).dump() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << error_json("solver", kExitSolver, e.what()).dump() << '\n';
        return kExitSolver;
    }

    if (c.output.empty()) {
        out << report.str();
    } else {
        std::ofstream file(c.output, std::ios::binary);
        file << report.str();
        if (!file) {
            err << error_json("io", kExitInput, "cannot write " + c.output).dump() << '\n';
            return kExitInput;
        }
    }
    return code;
}

}  // namespace mstop::cli
