// Command-line runner: every invocation resolves a flat JSON config
// (defaults < config file < flags), executes one operation, and writes its
// outputs plus a replayable manifest into the output directory.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stroock/action.hpp"
#include "stroock/bounds.hpp"
#include "stroock/errors.hpp"
#include "stroock/format.hpp"
#include "stroock/kernels.hpp"
#include "stroock/mc.hpp"
#include "stroock/rate.hpp"
#include "stroock/sde.hpp"
#include "stroock/telegraph.hpp"

namespace {

using nlohmann::json;
using namespace stroock;

constexpr const char* kArtifactVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCapacity = 4;
constexpr int kExitUsage = 64;

// FNV-1a over the canonical config dump; recorded in the manifest so replays
// can detect a config that was edited by hand.
std::string config_hash(const json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunConfig {
    std::string command;
    json params; // flat key -> value
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string output_dir = ".";
    std::string format = "csv";
};

json manifest_json(const RunConfig& cfg, const std::vector<std::string>& outputs) {
    json m;
    m["artifact_version"] = kArtifactVersion;
    m["command"] = cfg.command;
    m["seed"] = cfg.seed;
    m["format"] = cfg.format;
    m["params"] = cfg.params;
    json hashed;
    hashed["command"] = cfg.command;
    hashed["seed"] = cfg.seed;
    hashed["format"] = cfg.format;
    hashed["params"] = cfg.params;
    m["config_hash"] = config_hash(hashed);
    m["outputs"] = outputs;
    return m;
}

void write_text(const std::string& dir, const std::string& name, const std::string& body) {
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << body;
}

void finish(const RunConfig& cfg, const std::string& stem,
            const std::vector<std::pair<std::string, std::string>>& files) {
    std::vector<std::string> names;
    for (const auto& [name, body] : files) {
        write_text(cfg.output_dir, name, body);
        names.push_back(name);
    }
    write_text(cfg.output_dir, stem + "_manifest.json",
               manifest_json(cfg, names).dump(2) + "\n");
}

double pnum(const json& p, const std::string& key) { return p.at(key).get<double>(); }
double pnum(const json& p, const std::string& key, double dflt) {
    return p.contains(key) ? p.at(key).get<double>() : dflt;
}
std::string pstr(const json& p, const std::string& key, const std::string& dflt) {
    return p.contains(key) ? p.at(key).get<std::string>() : dflt;
}

std::vector<double> plist(const json& p, const std::string& key,
                          const std::vector<double>& dflt) {
    if (!p.contains(key)) return dflt;
    return p.at(key).get<std::vector<double>>();
}

InitialLaw parse_initial(const std::string& s) {
    if (s == "plus") return InitialLaw::fixed_plus;
    if (s == "minus") return InitialLaw::fixed_minus;
    if (s == "stationary") return InitialLaw::stationary;
    throw domain_error("initial must be plus|minus|stationary");
}

KernelSpec parse_kernel(const json& p) {
    const std::string family = pstr(p, "kernel", "brownian");
    if (family == "brownian") return KernelSpec::standard_brownian();
    if (family == "fbm") return KernelSpec::fbm(pnum(p, "hurst", 0.75));
    if (family == "ou") return KernelSpec::ou(pnum(p, "ou_c", 1.0), pnum(p, "ou_lambda", 1.0));
    throw domain_error("kernel must be brownian|fbm|ou");
}

LambdaSpec parse_lambda(const json& p) {
    const std::string form = pstr(p, "lambda_form", "kappa");
    if (form == "kappa") return LambdaSpec::kappa_eps(pnum(p, "kappa", 1.0));
    if (form == "power") return LambdaSpec::power(pnum(p, "beta", 0.5));
    throw domain_error("lambda_form must be kappa|power");
}

DriftDiffusion parse_drift_diffusion(const json& p) {
    const std::string drift = pstr(p, "drift", "zero");
    const std::string diffusion = pstr(p, "diffusion", "one");
    std::function<double(double)> b, s;
    double lip = 1.0;
    if (drift == "zero") b = [](double) { return 0.0; };
    else if (drift == "minus_x") b = [](double z) { return -z; };
    else if (drift == "sin") b = [](double z) { return std::sin(z); };
    else throw domain_error("drift must be zero|minus_x|sin");
    if (diffusion == "one") s = [](double) { return 1.0; };
    else if (diffusion == "linear") s = [](double z) { return z; };
    else if (diffusion == "cos") s = [](double z) { return std::cos(z); };
    else throw domain_error("diffusion must be one|linear|cos");
    return DriftDiffusion::make(std::move(b), std::move(s), lip);
}

std::string csv_of_grid(const GridPath& g, const char* header) {
    std::ostringstream os;
    os << header << "\n";
    for (std::size_t i = 0; i < g.times.size(); ++i)
        os << format_double(g.times[i]) << "," << format_double(g.values[i]) << "\n";
    return os.str();
}

json estimate_json(const LdpEstimate& e) {
    json j;
    j["epsilon"] = e.epsilon;
    j["n_samples"] = e.n_samples;
    j["n_hits"] = e.n_hits;
    j["p_hat"] = e.p_hat;
    j["ci_low"] = e.ci_low;
    j["ci_high"] = e.ci_high;
    j["speed"] = e.speed;
    j["scaled_log_p"] = e.degenerate ? json(nullptr) : json(e.scaled_log_p);
    j["rate_reference"] = is_infinite_rate(e.rate_reference) ? json(nullptr)
                                                             : json(e.rate_reference);
    j["tilted"] = e.tilted;
    j["a_plus"] = e.rates.a_plus;
    j["a_minus"] = e.rates.a_minus;
    j["degenerate"] = e.degenerate;
    return j;
}

std::string estimates_csv(const std::vector<LdpEstimate>& rows) {
    std::ostringstream os;
    os << "epsilon,p_hat,ci_low,ci_high,scaled_log_p,rate_reference\n";
    for (const auto& e : rows)
        os << format_double(e.epsilon) << "," << format_double(e.p_hat) << ","
           << format_double(e.ci_low) << "," << format_double(e.ci_high) << ","
           << format_double(e.scaled_log_p) << "," << format_double(e.rate_reference) << "\n";
    return os.str();
}

json fit_json(const RegressionFit& f) {
    return json{{"intercept", f.intercept},
                {"slope", f.slope},
                {"intercept_se", f.intercept_se},
                {"max_abs_residual", f.max_abs_residual},
                {"points", f.points}};
}

// --- command bodies -------------------------------------------------------

void run_simulate_telegraph(const RunConfig& cfg) {
    const json& p = cfg.params;
    TelegraphPath path = sample_path(pnum(p, "epsilon"), pnum(p, "horizon", 1.0),
                                     RngSeed{cfg.seed, 0},
                                     parse_initial(pstr(p, "initial", "plus")));
    std::ostringstream os;
    write_path_csv(os, path);
    finish(cfg, "telegraph", {{"telegraph_path.csv", os.str()}});
}

void run_simulate_gaussian(const RunConfig& cfg) {
    const json& p = cfg.params;
    const double eps = pnum(p, "epsilon");
    TelegraphPath path = sample_path(eps, 1.0, RngSeed{cfg.seed, 0},
                                     parse_initial(pstr(p, "initial", "plus")));
    const auto cells = static_cast<std::size_t>(pnum(p, "cells", 200));
    GridPath g = g_epsilon(parse_kernel(p), path, GridPath::uniform(cells));
    finish(cfg, "gaussian", {{"gaussian_path.csv", csv_of_grid(g, "t,g")}});
}

void run_simulate_sde(const RunConfig& cfg) {
    const json& p = cfg.params;
    const double eps = pnum(p, "epsilon");
    DriftDiffusion dd = parse_drift_diffusion(p);
    LambdaSpec lam = parse_lambda(p);
    SdeOptions opts;
    opts.tol_ode = pnum(p, "tol_ode", 1e-10);
    TelegraphPath path = sample_path(eps, 1.0, RngSeed{cfg.seed, 0},
                                     parse_initial(pstr(p, "initial", "plus")));
    const auto cells = static_cast<std::size_t>(pnum(p, "cells", 200));
    GridPath x = simulate(dd, pnum(p, "x0", 0.0), eps, lam, path, GridPath::uniform(cells), opts);
    json report{{"epsilon", eps},
                {"lambda_form", lam.name()},
                {"lambda_value", lam(eps)},
                {"seed", cfg.seed},
                {"tol_ode", opts.tol_ode},
                {"lipschitz_check_passed", dd.lipschitz_check_passed}};
    finish(cfg, "sde", {{"sde_path.csv", csv_of_grid(x, "t,x")},
                        {"sde_report.json", report.dump(2) + "\n"}});
}

void run_rate_eval(const RunConfig& cfg) {
    const json& p = cfg.params;
    json report;
    if (p.contains("lambda_star")) {
        const double v = lambda_star(pnum(p, "lambda_star"));
        report["lambda_star"] = v;
        std::printf("%.7g\n", v);
    }
    if (p.contains("cgf")) {
        const double v = lambda_cgf(pnum(p, "cgf"));
        report["cgf"] = v;
        std::printf("%.7g\n", v);
    }
    if (p.contains("occupation_nu_plus")) {
        const double v = occupation_rate(OccupationMeasure{pnum(p, "occupation_nu_plus")});
        report["occupation_rate"] = v;
        std::printf("%.7g\n", v);
    }
    if (p.contains("finite_eps_alpha")) {
        const double v = finite_eps_cgf(pnum(p, "finite_eps_alpha"), pnum(p, "finite_eps_T", 100.0),
                                        pstr(p, "chain_start", "stationary") == "plus"
                                            ? ChainStart::plus
                                            : ChainStart::stationary);
        report["finite_eps_cgf"] = v;
        std::printf("%.7g\n", v);
    }
    if (report.empty())
        throw domain_error(
            "rate eval: pass at least one of --lambda-star, --cgf, --occupation, --finite-eps-alpha");
    finish(cfg, "rate_eval", {{"rate_eval.json", report.dump(2) + "\n"}});
}

GridPath target_from_params(const json& p) {
    const auto cells = static_cast<std::size_t>(pnum(p, "target_cells", 50));
    if (p.contains("target_csv")) {
        std::ifstream is(p.at("target_csv").get<std::string>());
        if (!is) throw domain_error("rate action: cannot open target_csv");
        GridPath g;
        std::string line;
        std::getline(is, line); // header t,f
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw domain_error("rate action: malformed target_csv");
            g.times.push_back(std::stod(line.substr(0, comma)));
            g.values.push_back(std::stod(line.substr(comma + 1)));
        }
        return g;
    }
    const double slope = pnum(p, "target_slope", 0.5);
    return GridPath::sample(cells, [&](double t) { return slope * t; });
}

void run_rate_action(const RunConfig& cfg) {
    const json& p = cfg.params;
    GridPath f = target_from_params(p);
    KernelRateOptions opts;
    opts.n_control = static_cast<std::size_t>(pnum(p, "control_cells", 200));
    KernelRateResult r = kernel_rate(parse_kernel(p), f, opts);
    json report{{"value", is_infinite_rate(r.value) ? json(nullptr) : json(r.value)},
                {"infeasible", is_infinite_rate(r.value)},
                {"control_values", r.control},
                {"feasibility_residual", r.feasibility_residual},
                {"iterations", r.outer_iterations}};
    std::printf("%.7g\n", r.value);
    finish(cfg, "rate_action", {{"rate_action.json", report.dump(2) + "\n"}});
}

EventSpec event_from_params(const json& p) {
    const std::string process = pstr(p, "process", "theta");
    ProcessSpec proc;
    if (process == "theta") proc = ThetaIntegralProcess{};
    else if (process == "gaussian")
        proc = GepsProcess{parse_kernel(p), static_cast<std::size_t>(pnum(p, "cells", 200))};
    else if (process == "sde")
        proc = SdeProcess{parse_drift_diffusion(p), pnum(p, "x0", 0.0), parse_lambda(p),
                          static_cast<std::size_t>(pnum(p, "cells", 200))};
    else throw domain_error("process must be theta|gaussian|sde");
    return EndpointExceeds{std::move(proc), pnum(p, "t", 1.0), pnum(p, "threshold")};
}

Sampler sampler_from_params(const json& p, double epsilon) {
    if (p.contains("plain") && p.at("plain").get<bool>()) return Sampler::plain();
    if (p.contains("tilt_mean")) return Sampler::tilted(tilt_for_mean_drift(pnum(p, "tilt_mean")));
    // default: aim the mean of xi at the drift a constant control needs to
    // reach the threshold (eps-scaled for theta/gaussian, eps/lambda for sde)
    const double scale = pstr(p, "process", "theta") == "sde" ? epsilon / parse_lambda(p)(epsilon)
                                                              : epsilon;
    const double m = pnum(p, "threshold") * scale / pnum(p, "t", 1.0);
    if (std::abs(m) >= 0.995) return Sampler::plain();
    return Sampler::tilted(tilt_for_mean_drift(m));
}

void run_mc_estimate(const RunConfig& cfg) {
    const json& p = cfg.params;
    const double eps = pnum(p, "epsilon");
    McOptions opts;
    opts.threads = cfg.threads;
    opts.initial = parse_initial(pstr(p, "initial", "plus"));
    EventSpec event = event_from_params(p);
    LdpEstimate e = estimate(event, eps, static_cast<std::uint64_t>(pnum(p, "n", 10000)),
                             RngSeed{cfg.seed, 0}, sampler_from_params(p, eps), opts);
    e.rate_reference = event_rate_reference(event, eps);
    std::printf("p_hat=%.7g scaled_log_p=%.7g\n", e.p_hat, e.scaled_log_p);
    finish(cfg, "mc_estimate", {{"mc_estimate.csv", estimates_csv({e})},
                                {"mc_estimate.json", estimate_json(e).dump(2) + "\n"}});
}

void run_mc_curve(const RunConfig& cfg) {
    const json& p = cfg.params;
    const std::vector<double> eps = plist(p, "epsilons", {0.35, 0.3, 0.25, 0.2});
    McOptions opts;
    opts.threads = cfg.threads;
    opts.initial = parse_initial(pstr(p, "initial", "plus"));
    EventSpec event = event_from_params(p);
    LdpCurve curve = ldp_curve(event, eps, static_cast<std::uint64_t>(pnum(p, "n", 10000)),
                               RngSeed{cfg.seed, 0}, sampler_from_params(p, eps.back()), opts);
    json report{{"rate_reference", is_infinite_rate(curve.rate_reference)
                                       ? json(nullptr)
                                       : json(curve.rate_reference)},
                {"excluded", curve.excluded},
                {"fit", fit_json(curve.fit)},
                {"estimates", json::array()}};
    for (const auto& e : curve.estimates) report["estimates"].push_back(estimate_json(e));
    std::printf("intercept=%.7g rate_reference=%.7g\n", curve.fit.intercept,
                curve.rate_reference);
    finish(cfg, "mc_curve", {{"mc_curve.csv", estimates_csv(curve.estimates)},
                             {"mc_curve.json", report.dump(2) + "\n"}});
}

void run_mc_phase(const RunConfig& cfg) {
    const json& p = cfg.params;
    McOptions opts;
    opts.threads = cfg.threads;
    opts.initial = parse_initial(pstr(p, "initial", "plus"));
    std::vector<PhaseCell> cells = phase_transition_report(
        plist(p, "kappas", {1.0, 0.4}), plist(p, "betas", {0.5}), pnum(p, "threshold", 0.5),
        plist(p, "epsilons", {0.35, 0.3, 0.25, 0.2}),
        static_cast<std::uint64_t>(pnum(p, "n", 10000)), RngSeed{cfg.seed, 0}, opts);
    std::ostringstream csv;
    csv << "label,target,intercept,intercept_se,pass\n";
    json report = json::array();
    for (const auto& c : cells) {
        csv << c.label << "," << format_double(c.target) << ","
            << format_double(c.curve.fit.intercept) << ","
            << format_double(c.curve.fit.intercept_se) << "," << (c.pass ? 1 : 0) << "\n";
        json jc{{"label", c.label},
                {"target", std::isinf(c.target) ? json(nullptr) : json(c.target)},
                {"pass", c.pass},
                {"fit", fit_json(c.curve.fit)},
                {"excluded", c.curve.excluded},
                {"estimates", json::array()}};
        for (const auto& e : c.curve.estimates) jc["estimates"].push_back(estimate_json(e));
        report.push_back(jc);
        std::printf("%-14s target=%.7g intercept=%.7g pass=%d\n", c.label.c_str(), c.target,
                    c.curve.fit.intercept, c.pass ? 1 : 0);
    }
    finish(cfg, "mc_phase", {{"mc_phase.csv", csv.str()},
                             {"mc_phase.json", report.dump(2) + "\n"}});
}

void run_bounds_verify(const RunConfig& cfg) {
    const json& p = cfg.params;
    std::vector<BoundCell> cells = exponential_bound_grid(
        plist(p, "epsilons", {0.3, 0.2, 0.1}), plist(p, "levels", {0.4, 0.6, 0.8}),
        parse_lambda(p), static_cast<std::uint64_t>(pnum(p, "n", 20000)), RngSeed{cfg.seed, 0},
        cfg.threads);
    json report = json::array();
    bool all = true;
    for (const auto& c : cells) {
        report.push_back(json{{"epsilon", c.epsilon},
                              {"a", c.a},
                              {"lambda", c.lambda},
                              {"n", c.n},
                              {"hits", c.hits},
                              {"freq", c.freq},
                              {"ci99_low", c.ci99_low},
                              {"ci99_high", c.ci99_high},
                              {"bound", c.bound},
                              {"log_bound", c.log_bound},
                              {"verdict", c.consistent ? "consistent" : "violated"}});
        all = all && c.consistent;
        std::printf("eps=%.3g a=%.3g freq=%.4g bound=%.4g %s\n", c.epsilon, c.a, c.freq, c.bound,
                    c.consistent ? "consistent" : "VIOLATED");
    }
    finish(cfg, "bounds_verify", {{"bounds_verify.json", report.dump(2) + "\n"}});
    if (!all) throw numeric_error("bounds verify: empirical frequency exceeds the bound", 0.0);
}

void run_kernel_selftest(const RunConfig& cfg) {
    const json& p = cfg.params;
    KernelSpec spec = parse_kernel(p);
    KernelSelfTest st = kernel_selftest(spec, static_cast<std::size_t>(pnum(p, "grid", 10)),
                                        pnum(p, "tol", 1e-6));
    json report{{"family", pstr(p, "kernel", "brownian")},
                {"max_h1_violation", st.max_h1_violation},
                {"h2_alpha", st.h2.alpha},
                {"h2_constant", st.h2.constant},
                {"h2_max_residual", st.h2.max_residual}};
    std::printf("h1=%.3g h2_alpha=%.7g\n", st.max_h1_violation, st.h2.alpha);
    finish(cfg, "kernel_selftest", {{"kernel_selftest.json", report.dump(2) + "\n"}});
}

void dispatch(const RunConfig& cfg) {
    if (cfg.command == "simulate telegraph") run_simulate_telegraph(cfg);
    else if (cfg.command == "simulate gaussian") run_simulate_gaussian(cfg);
    else if (cfg.command == "simulate sde") run_simulate_sde(cfg);
    else if (cfg.command == "rate eval") run_rate_eval(cfg);
    else if (cfg.command == "rate action") run_rate_action(cfg);
    else if (cfg.command == "mc estimate") run_mc_estimate(cfg);
    else if (cfg.command == "mc curve") run_mc_curve(cfg);
    else if (cfg.command == "mc phase") run_mc_phase(cfg);
    else if (cfg.command == "bounds verify") run_bounds_verify(cfg);
    else if (cfg.command == "kernel selftest") run_kernel_selftest(cfg);
    else throw std::invalid_argument("unknown command: " + cfg.command);
}

int run_guarded(const RunConfig& cfg) {
    try {
        dispatch(cfg);
        return kExitOk;
    } catch (const domain_error& e) {
        std::fprintf(stderr, "domain error: %s\n", e.what());
        return kExitDomain;
    } catch (const capacity_error& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return kExitCapacity;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const solver_error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kExitNumeric;
    } catch (const divergence_error& e) {
        std::fprintf(stderr, "numeric error: %s (blow-up near t=%g)\n", e.what(),
                     e.blow_up_time());
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    }
}

int run_replay(const std::string& manifest_path, unsigned threads_override,
               const std::string& output_dir) {
    std::ifstream is(manifest_path);
    if (!is) {
        std::fprintf(stderr, "replay: cannot open %s\n", manifest_path.c_str());
        return kExitUsage;
    }
    json m;
    try {
        is >> m;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "replay: bad manifest: %s\n", e.what());
        return kExitUsage;
    }
    RunConfig cfg;
    cfg.command = m.at("command").get<std::string>();
    cfg.params = m.value("params", json::object());
    cfg.seed = m.at("seed").get<std::uint64_t>();
    cfg.format = m.value("format", "csv");
    cfg.threads = threads_override;
    cfg.output_dir = output_dir;
    return run_guarded(cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"telegraph-approximation toolkit: exact telegraph paths, kernel Gaussian "
                 "processes, rate functions, small-noise SDEs, rare-event Monte Carlo, and "
                 "concentration bounds"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    RunConfig cfg;
    std::string config_file;
    const char* env_dir = std::getenv("STROOCK_OUTPUT_DIR");
    cfg.output_dir = env_dir ? env_dir : ".";

    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--threads", cfg.threads, "worker threads (never changes results)");
    app.add_option("--output-dir", cfg.output_dir, "output directory");
    app.add_option("--format", cfg.format, "output format: csv|json");
    app.add_option("--config", config_file, "JSON config file; flags override its values");

    // Flat parameter flags shared across subcommands; each run records only
    // the keys it was given, so manifests stay minimal and diffable.
    json flags = json::object();
    auto opt_num = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                       const std::string& help) {
        cmd->add_option_function<double>(
            flag, [&flags, key](double v) { flags[key] = v; }, help);
    };
    auto opt_str = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                       const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    };
    auto opt_list = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                        const std::string& help) {
        cmd->add_option_function<std::vector<double>>(
            flag, [&flags, key](const std::vector<double>& v) { flags[key] = v; }, help)
            ->delimiter(',');
    };
    auto opt_flag = [&](CLI::App* cmd, const std::string& flag, const std::string& key,
                        const std::string& help) {
        cmd->add_flag_function(
            flag, [&flags, key](std::int64_t n) { flags[key] = (n > 0); }, help);
    };
    auto kernel_opts = [&](CLI::App* cmd) {
        opt_str(cmd, "--kernel", "kernel", "kernel family: brownian|fbm|ou");
        opt_num(cmd, "--hurst", "hurst", "fBm Hurst index in (0,1)");
        opt_num(cmd, "--ou-c", "ou_c", "OU kernel amplitude C");
        opt_num(cmd, "--ou-lambda", "ou_lambda", "OU kernel decay lambda");
    };
    auto sde_opts = [&](CLI::App* cmd) {
        opt_str(cmd, "--lambda-form", "lambda_form", "noise scale: kappa|power");
        opt_num(cmd, "--kappa", "kappa", "lambda(eps) = kappa * eps");
        opt_num(cmd, "--beta", "beta", "lambda(eps) = eps^beta");
        opt_str(cmd, "--drift", "drift", "drift preset: zero|minus_x|sin");
        opt_str(cmd, "--diffusion", "diffusion", "diffusion preset: one|linear|cos");
        opt_num(cmd, "--x0", "x0", "initial state");
    };

    auto* simulate = app.add_subcommand("simulate", "sample one path");
    simulate->require_subcommand(1);
    auto* sim_tel = simulate->add_subcommand("telegraph", "exact telegraph path dump");
    opt_num(sim_tel, "--epsilon", "epsilon", "scale parameter");
    opt_num(sim_tel, "--horizon", "horizon", "time horizon (default 1)");
    opt_str(sim_tel, "--initial", "initial", "initial sign law: plus|minus|stationary");
    auto* sim_gauss = simulate->add_subcommand("gaussian", "kernel process G_eps on a grid");
    opt_num(sim_gauss, "--epsilon", "epsilon", "scale parameter");
    opt_num(sim_gauss, "--cells", "cells", "grid cells (default 200)");
    opt_str(sim_gauss, "--initial", "initial", "initial sign law: plus|minus|stationary");
    kernel_opts(sim_gauss);
    auto* sim_sde = simulate->add_subcommand("sde", "small-noise SDE trajectory");
    opt_num(sim_sde, "--epsilon", "epsilon", "scale parameter");
    opt_num(sim_sde, "--cells", "cells", "grid cells (default 200)");
    opt_num(sim_sde, "--tol-ode", "tol_ode", "ODE step tolerance (default 1e-10)");
    opt_str(sim_sde, "--initial", "initial", "initial sign law: plus|minus|stationary");
    sde_opts(sim_sde);

    auto* rate = app.add_subcommand("rate", "rate functions and action minimization");
    rate->require_subcommand(1);
    auto* rate_eval = rate->add_subcommand("eval", "closed-form rate evaluations");
    opt_num(rate_eval, "--lambda-star", "lambda_star", "local cost at x");
    opt_num(rate_eval, "--cgf", "cgf", "scaled CGF at alpha");
    opt_num(rate_eval, "--occupation", "occupation_nu_plus", "occupation rate at nu(+1)");
    opt_num(rate_eval, "--finite-eps-alpha", "finite_eps_alpha", "finite-eps CGF at alpha");
    opt_num(rate_eval, "--finite-eps-T", "finite_eps_T", "finite-eps CGF horizon T");
    opt_str(rate_eval, "--chain-start", "chain_start", "chain start: plus|stationary");
    auto* rate_action = rate->add_subcommand("action", "kernel-constrained action minimum");
    opt_num(rate_action, "--target-slope", "target_slope", "target f(t) = slope * t");
    opt_num(rate_action, "--target-cells", "target_cells", "target grid cells (default 50)");
    opt_str(rate_action, "--target-csv", "target_csv", "target path CSV with header t,f");
    opt_num(rate_action, "--control-cells", "control_cells", "control cells (default 200)");
    kernel_opts(rate_action);

    auto* mc = app.add_subcommand("mc", "rare-event Monte Carlo");
    mc->require_subcommand(1);
    auto add_mc_common = [&](CLI::App* cmd) {
        opt_str(cmd, "--process", "process", "process: theta|gaussian|sde");
        opt_num(cmd, "--threshold", "threshold", "endpoint threshold");
        opt_num(cmd, "--t", "t", "endpoint time (default 1)");
        opt_num(cmd, "--n", "n", "samples per epsilon");
        opt_num(cmd, "--tilt-mean", "tilt_mean", "tilt to this mean drift of xi");
        opt_flag(cmd, "--plain", "plain", "disable tilting");
        opt_num(cmd, "--cells", "cells", "grid cells for gaussian/sde processes");
        opt_str(cmd, "--initial", "initial", "initial sign law: plus|minus|stationary");
        kernel_opts(cmd);
        sde_opts(cmd);
    };
    auto* mc_est = mc->add_subcommand("estimate", "one epsilon");
    opt_num(mc_est, "--epsilon", "epsilon", "scale parameter");
    add_mc_common(mc_est);
    auto* mc_curve = mc->add_subcommand("curve", "scaled log-probability vs epsilon");
    opt_list(mc_curve, "--epsilons", "epsilons", "comma-separated epsilon list");
    add_mc_common(mc_curve);
    auto* mc_phase = mc->add_subcommand("phase", "phase-transition table");
    opt_list(mc_phase, "--kappas", "kappas", "kappa regimes (lambda = kappa*eps)");
    opt_list(mc_phase, "--betas", "betas", "power regimes (lambda = eps^beta)");
    opt_num(mc_phase, "--threshold", "threshold", "endpoint threshold");
    opt_list(mc_phase, "--epsilons", "epsilons", "comma-separated epsilon list");
    opt_num(mc_phase, "--n", "n", "samples per epsilon");
    opt_str(mc_phase, "--initial", "initial", "initial sign law: plus|minus|stationary");

    auto* bounds = app.add_subcommand("bounds", "concentration bound checks");
    auto* bounds_verify = bounds->add_subcommand("verify", "empirical vs exponential bound grid");
    bounds->require_subcommand(1);
    opt_list(bounds_verify, "--epsilons", "epsilons", "epsilon grid");
    opt_list(bounds_verify, "--levels", "levels", "exceedance levels a");
    opt_num(bounds_verify, "--n", "n", "paths per epsilon");
    opt_str(bounds_verify, "--lambda-form", "lambda_form", "noise scale: kappa|power");
    opt_num(bounds_verify, "--kappa", "kappa", "lambda(eps) = kappa * eps");
    opt_num(bounds_verify, "--beta", "beta", "lambda(eps) = eps^beta");

    auto* kernel = app.add_subcommand("kernel", "kernel hypothesis checks");
    kernel->require_subcommand(1);
    auto* kernel_self = kernel->add_subcommand("selftest", "(H1)/(H2) report");
    opt_num(kernel_self, "--grid", "grid", "pairs per side in the (H2) fit (default 10)");
    opt_num(kernel_self, "--tol", "tol", "quadrature tolerance (default 1e-6)");
    kernel_opts(kernel_self);

    auto* replay = app.add_subcommand("replay", "re-run a recorded manifest");
    std::string manifest_path;
    replay->add_option("manifest", manifest_path, "path to a *_manifest.json")->required();

    // global flags (--seed, --output-dir, ...) may appear after the subcommand
    for (auto* top : app.get_subcommands({})) {
        top->fallthrough();
        for (auto* sub : top->get_subcommands({})) sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (replay->parsed()) return run_replay(manifest_path, cfg.threads, cfg.output_dir);

    // config file < flags
    cfg.params = json::object();
    if (!config_file.empty()) {
        std::ifstream is(config_file);
        if (!is) {
            std::fprintf(stderr, "cannot open config file: %s\n", config_file.c_str());
            return kExitUsage;
        }
        json file_cfg;
        try {
            is >> file_cfg;
        } catch (const json::exception& e) {
            std::fprintf(stderr, "bad config file: %s\n", e.what());
            return kExitUsage;
        }
        if (file_cfg.contains("seed") && !app.count("--seed"))
            cfg.seed = file_cfg["seed"].get<std::uint64_t>();
        if (file_cfg.contains("threads") && !app.count("--threads"))
            cfg.threads = file_cfg["threads"].get<unsigned>();
        if (file_cfg.contains("output_dir") && !app.count("--output-dir") && !env_dir)
            cfg.output_dir = file_cfg["output_dir"].get<std::string>();
        if (file_cfg.contains("params"))
            for (auto& [k, v] : file_cfg["params"].items())
                if (!flags.contains(k)) flags[k] = v;
    }
    cfg.params = flags;

    for (auto* top : app.get_subcommands())
        for (auto* sub : top->get_subcommands())
            cfg.command = top->get_name() + " " + sub->get_name();

    if (cfg.threads == 0) cfg.threads = 1;
    return run_guarded(cfg);
}
