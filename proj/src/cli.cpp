#include "netfail/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "netfail/composition.hpp"
#include "netfail/config.hpp"
#include "netfail/format.hpp"
#include "netfail/network.hpp"
#include "netfail/simulation.hpp"
#include "netfail/stability.hpp"
#include "netfail/tail_bounds.hpp"

namespace netfail {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_manifest(const std::string& dir, const std::string& command,
                    const std::optional<std::string>& config_path, json options) {
    json m;
    m["version"] = kVersion;
    m["command"] = command;
    if (config_path) {
        m["config"] = *config_path;
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(file_fnv1a(*config_path)));
        m["config_fnv1a"] = hex;
    }
    m["options"] = std::move(options);
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
}

std::string format_derivation_indented(const CompositionResult& r);

void print_network_bound(const std::string& label, const NetworkBound& nb) {
    std::cout << "network " << label << ": " << nb.paths.size() << " path(s)\n";
    for (std::size_t i = 0; i < nb.paths.size(); ++i) {
        std::cout << "  path " << nb.paths[i].id() << ": " << to_string(nb.per_path[i].cls)
                  << "  [" << rule_name(nb.per_path[i].rule_applied) << "]\n";
        std::cout << format_derivation_indented(nb.per_path[i]);
    }
    std::cout << "  => " << label << " class: " << to_string(nb.network.cls) << "  ["
              << rule_name(nb.network.rule_applied) << "]\n";
    std::cout << format_derivation_indented(nb.network);
}

int cmd_analyze(const std::string& config_path, const std::string& out_dir) {
    ExperimentConfig cfg = parse_config(config_path);
    NetworkBound gb = derive_network_class(cfg.g);
    NetworkBound gtb = derive_network_class(cfg.gt);
    RoundTripBound rt = derive_round_trip(gb, gtb);

    print_network_bound("G", gb);
    print_network_bound("Gt", gtb);
    std::cout << "round-trip class: " << to_string(rt.cls);
    if (rt.saturated) std::cout << "  (warning: bound sum exceeded 1)";
    std::cout << "\n";

    CsvWriter csv(out_dir + "/analysis.csv",
                  {"network", "path", "dead", "rule", "class", "lambda_bound", "lambda_open"});
    auto emit = [&](const std::string& net, const std::string& path, bool dead,
                    const CompositionResult& r) {
        Lambda lv = to_lambda(r.cls);
        csv.field(net);
        csv.field(path);
        csv.field(std::string(dead ? "1" : "0"));
        csv.field(std::string(rule_name(r.rule_applied)));
        csv.field(to_string(r.cls));
        csv.field(lv.bound);
        csv.field(std::string(lv.openness == Openness::open ? "1" : "0"));
        csv.end_row();
    };
    for (std::size_t i = 0; i < gb.paths.size(); ++i)
        emit("G", gb.paths[i].id(), cfg.g.dead_paths.count(gb.paths[i].id()) > 0, gb.per_path[i]);
    emit("G", "(network)", false, gb.network);
    for (std::size_t i = 0; i < gtb.paths.size(); ++i)
        emit("Gt", gtb.paths[i].id(), cfg.gt.dead_paths.count(gtb.paths[i].id()) > 0,
             gtb.per_path[i]);
    emit("Gt", "(network)", false, gtb.network);
    Lambda rtl = to_lambda(rt.cls);
    csv.field(std::string("roundtrip"));
    csv.field(std::string("(exchange)"));
    csv.field(std::string(rt.saturated ? "1" : "0"));
    csv.field(std::string("DropRecursion"));
    csv.field(to_string(rt.cls));
    csv.field(rtl.bound);
    csv.field(std::string(rtl.openness == Openness::open ? "1" : "0"));
    csv.end_row();
    return 0;
}

double residual_max_eig(const Eigen::MatrixXd& S, double scale, const Eigen::MatrixXd& P) {
    Eigen::MatrixXd R = S - scale * P;
    R = 0.5 * (R + R.transpose().eval());
    auto eigs = symmetric_eigenvalues(R);
    double mx = eigs.front();
    for (double e : eigs) mx = std::max(mx, e);
    return mx;
}

int cmd_stability(const std::string& config_path, const std::string& out_dir,
                  std::optional<double> rho_opt, bool require_certified) {
    ExperimentConfig cfg = parse_config(config_path);
    double rho;
    bool derived = false;
    if (rho_opt) {
        rho = *rho_opt;
    } else {
        NetworkBound gb = derive_network_class(cfg.g);
        NetworkBound gtb = derive_network_class(cfg.gt);
        rho = to_lambda(derive_round_trip(gb, gtb).cls).bound;
        derived = true;
    }

    StabilityDecision d = check_stability(cfg.plant, rho, cfg.analysis.search_budget);
    const StabilityCertificate& cert = d.certificate;
    const Eigen::MatrixXd Acl = cfg.plant.closed_loop();
    double res_beta = residual_max_eig(Acl.transpose() * cert.P * Acl, cert.beta, cert.P);
    double res_phi = residual_max_eig(cfg.plant.A.transpose() * cert.P * cfg.plant.A, cert.phi,
                                      cert.P);

    std::cout << "spectral radius(A+BK) = " << format_double(spectral_radius(Acl)) << "\n";
    std::cout << "certificate: beta = " << format_double(cert.beta)
              << ", phi = " << format_double(cert.phi)
              << ", rho_star = " << format_double(cert.rho_star) << "\n";
    std::cout << "P =\n" << cert.P << "\n";
    std::cout << "residuals: beta " << format_double(res_beta) << ", phi "
              << format_double(res_phi) << "\n";
    std::cout << "rho = " << format_double(rho) << (derived ? " (derived from config)" : "")
              << " -> " << (d.verdict == Verdict::certified ? "certified" : "not certified")
              << "\n";

    std::vector<std::string> header{"beta", "phi", "rho_star", "rho", "certified",
                                    "residual_beta", "residual_phi"};
    const int n = cfg.plant.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            header.push_back("p_" + std::to_string(i) + "_" + std::to_string(j));
    CsvWriter csv(out_dir + "/certificate.csv", header);
    csv.field(cert.beta);
    csv.field(cert.phi);
    csv.field(cert.rho_star);
    csv.field(rho);
    csv.field(std::string(d.verdict == Verdict::certified ? "1" : "0"));
    csv.field(res_beta);
    csv.field(res_phi);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) csv.field(cert.P(i, j));
    csv.end_row();

    if (require_certified && d.verdict != Verdict::certified) return 3;
    return 0;
}

int cmd_budget(const std::string& config_path, const std::string& out_dir, double rho_star) {
    ExperimentConfig cfg = parse_config(config_path);
    double rho_bar = budget_allocation(cfg.g, cfg.gt, rho_star);
    auto min_len = [](const NetworkGraph& g) {
        std::size_t best = SIZE_MAX;
        for (const auto& p : enumerate_paths(g)) best = std::min(best, p.length());
        return best;
    };
    std::size_t lg = min_len(cfg.g), lgt = min_len(cfg.gt);
    std::cout << "shortest path lengths: G " << lg << ", Gt " << lgt << "\n";
    std::cout << "uniform per-link bound rho_bar = " << format_double(rho_bar) << "\n";
    CsvWriter csv(out_dir + "/budget.csv", {"rho_star", "minlen_g", "minlen_gt", "rho_bar"});
    csv.field(rho_star);
    csv.field(static_cast<long>(lg));
    csv.field(static_cast<long>(lgt));
    csv.field(rho_bar);
    csv.end_row();
    return 0;
}

void write_trace_csv(const std::string& path, const std::vector<TrialResult>& traces, int n,
                     int m) {
    std::vector<std::string> header{"trial", "t"};
    for (int i = 1; i <= n; ++i) header.push_back("x_" + std::to_string(i));
    for (int i = 1; i <= m; ++i) header.push_back("u_" + std::to_string(i));
    for (const char* c : {"l", "l_G", "l_Gt", "l_A", "ratio_l", "ratio_G", "ratio_Gt"})
        header.push_back(c);
    CsvWriter csv(path, header);
    for (const auto& tr : traces) {
        for (long t = 0; t < tr.steps; ++t) {
            csv.field(static_cast<long>(tr.trial));
            csv.field(t);
            for (int i = 0; i < n; ++i) csv.field(tr.x[static_cast<std::size_t>(t * n + i)]);
            for (int i = 0; i < m; ++i) csv.field(tr.u[static_cast<std::size_t>(t * m + i)]);
            csv.field(static_cast<long>(tr.l[static_cast<std::size_t>(t)]));
            csv.field(static_cast<long>(tr.l_G[static_cast<std::size_t>(t)]));
            csv.field(static_cast<long>(tr.l_Gt[static_cast<std::size_t>(t)]));
            csv.field(static_cast<long>(tr.l_A[static_cast<std::size_t>(t)]));
            csv.field(tr.ratio_l[static_cast<std::size_t>(t)]);
            csv.field(tr.ratio_G[static_cast<std::size_t>(t)]);
            csv.field(tr.ratio_Gt[static_cast<std::size_t>(t)]);
            csv.end_row();
        }
    }
}

void write_summary_csv(const std::string& path, const std::vector<TrialResult>& traces) {
    CsvWriter csv(path, {"trial", "steps", "initial_norm", "final_norm", "ratio_l", "ratio_G",
                         "ratio_Gt", "ratio_A", "diverged", "divergence_step",
                         "first_exceed_1e6"});
    for (const auto& tr : traces) {
        long atk = 0;
        for (auto v : tr.l_A) atk += v;
        csv.field(static_cast<long>(tr.trial));
        csv.field(tr.steps);
        csv.field(tr.initial_norm);
        csv.field(tr.final_norm);
        csv.field(tr.ratio_l.back());
        csv.field(tr.ratio_G.back());
        csv.field(tr.ratio_Gt.back());
        csv.field(static_cast<double>(atk) / static_cast<double>(tr.steps));
        csv.field(std::string(tr.divergence_step ? "1" : "0"));
        csv.field(tr.divergence_step ? *tr.divergence_step : -1L);
        csv.field(tr.first_exceed_1e6 ? *tr.first_exceed_1e6 : -1L);
        csv.end_row();
    }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<long> horizon, std::optional<int> trials,
                 std::optional<std::uint64_t> seed) {
    ExperimentConfig cfg = parse_config(config_path);
    SimulationSetup setup = make_simulation_setup(cfg);
    if (horizon) setup.horizon = *horizon;
    if (trials) setup.trials = *trials;
    if (seed) setup.seed = *seed;

    auto traces = run_trials(setup);

    NetworkBound gb = derive_network_class(cfg.g);
    NetworkBound gtb = derive_network_class(cfg.gt);
    RoundTripBound rt = derive_round_trip(gb, gtb);
    auto report = empirical_ratio_report(traces, to_lambda(rt.cls), to_lambda(gb.network.cls),
                                         to_lambda(gtb.network.cls),
                                         cfg.attacker.enabled
                                             ? std::optional<AttackerSpec>(cfg.attacker)
                                             : std::nullopt);
    for (const auto& row : report.rows) {
        std::cout << row.name << ": max final ratio " << format_double(row.max_final_ratio)
                  << " vs bound " << format_double(row.bound)
                  << (row.violated ? "  VIOLATED" : "") << "\n";
    }
    long diverged = 0;
    for (const auto& tr : traces)
        if (tr.divergence_step) ++diverged;
    std::cout << traces.size() << " trial(s), " << diverged << " diverged\n";

    write_trace_csv(out_dir + "/trace.csv", traces, cfg.plant.n(), cfg.plant.m());
    write_summary_csv(out_dir + "/summary.csv", traces);
    return 0;
}

int cmd_tailbound(const std::string& out_dir, double p_tilde, double w_tilde, double rho,
                  long k_max, std::optional<double> kappa, std::optional<double> w,
                  bool with_oracle) {
    TailBoundParams params;
    params.p_tilde = p_tilde;
    params.w_tilde = w_tilde;
    params.rho = rho;
    if (kappa && w) params.sigma = pi_sigma(*kappa, *w, w_tilde);
    params.validate();

    auto cert = summability_certificate(params);
    std::cout << "phi = " << format_double(params.phi()) << ", envelope ratio r = "
              << format_double(cert.ratio)
              << ", sum estimate = " << format_double(cert.finite_sum_estimate) << "\n";

    std::optional<HmmSpec> oracle_chain;
    if (with_oracle) {
        if (w_tilde != 1.0)
            throw std::invalid_argument("tailbound: --oracle requires --w-tilde 1 (chi == 1)");
        oracle_chain = constant_two_state(p_tilde);
    }

    CsvWriter csv(out_dir + "/tailbound.csv", {"k", "sigma_k", "psi_k", "oracle"});
    for (long k = 1; k <= k_max; ++k) {
        csv.field(k);
        csv.field(params.sigma_at(k));
        csv.field(psi_k(params, k));
        if (oracle_chain && k <= 12)
            csv.field(exact_tail_oracle(*oracle_chain, nullptr, rho, static_cast<int>(k)));
        else
            csv.field(std::string());
        csv.end_row();
    }
    return 0;
}

int cmd_attack_demo(const std::string& config_path, const std::string& out_dir, int N, double w,
                    double kappa, std::optional<int> trials, std::optional<long> horizon,
                    std::optional<std::uint64_t> seed) {
    ExperimentConfig cfg = parse_config(config_path);
    SimulationSetup setup = make_simulation_setup(cfg);
    setup.attacker.enabled = true;
    setup.attacker.horizon = N;
    setup.attacker.w = w;
    setup.attacker.kappa = kappa;
    if (trials) setup.trials = *trials;
    if (horizon) setup.horizon = *horizon;
    if (seed) setup.seed = *seed;

    auto traces = run_trials(setup);
    CsvWriter csv(out_dir + "/attack_demo.csv", {"trial", "t", "norm_x", "l", "l_A"});
    const int n = cfg.plant.n();
    for (const auto& tr : traces) {
        for (long t = 0; t < tr.steps; ++t) {
            double nx = 0;
            for (int i = 0; i < n; ++i) {
                double xi = tr.x[static_cast<std::size_t>(t * n + i)];
                nx += xi * xi;
            }
            csv.field(static_cast<long>(tr.trial));
            csv.field(t);
            csv.field(std::sqrt(nx));
            csv.field(static_cast<long>(tr.l[static_cast<std::size_t>(t)]));
            csv.field(static_cast<long>(tr.l_A[static_cast<std::size_t>(t)]));
            csv.end_row();
        }
    }
    long diverged = 0;
    for (const auto& tr : traces)
        if (tr.divergence_step) ++diverged;
    std::cout << traces.size() << " trial(s), " << diverged << " diverged\n";
    return 0;
}

std::string format_derivation_indented(const CompositionResult& r) {
    std::string base = format_derivation(r);
    std::string out;
    std::size_t start = 0;
    while (start < base.size()) {
        std::size_t end = base.find('\n', start);
        out += "    " + base.substr(start, end - start) + "\n";
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"failure-class calculus for multi-hop networked control"};
    app.require_subcommand(1);
    std::string output_dir = "out";
    app.add_option("--output-dir", output_dir, "directory for CSV artifacts")
        ->capture_default_str();

    // analyze
    auto* analyze = app.add_subcommand("analyze", "derive per-path, network, round-trip classes");
    std::string analyze_config;
    analyze->add_option("config", analyze_config, "experiment config")->required();

    // stability
    auto* stability = app.add_subcommand("stability", "stability certificate and verdict");
    std::string stability_config;
    double stability_rho = -1;
    bool require_certified = false;
    stability->add_option("config", stability_config, "experiment config")->required();
    auto* rho_opt = stability->add_option("--rho", stability_rho, "failure-ratio bound to check");
    stability->add_flag("--require-certified", require_certified,
                        "exit 3 when the verdict is not certified");

    // budget
    auto* budget = app.add_subcommand("budget", "uniform per-link budget for a target rho*");
    std::string budget_config;
    double budget_rho_star = 0;
    budget->add_option("config", budget_config, "experiment config")->required();
    budget->add_option("--rho-star", budget_rho_star, "target round-trip bound")->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo closed-loop simulation");
    std::string simulate_config;
    long sim_horizon = 0;
    int sim_trials = 0;
    std::uint64_t sim_seed = 0;
    simulate->add_option("config", simulate_config, "experiment config")->required();
    auto* horizon_opt = simulate->add_option("--horizon", sim_horizon, "steps per trial");
    auto* trials_opt = simulate->add_option("--trials", sim_trials, "number of trials");
    auto* seed_opt = simulate->add_option("--seed", sim_seed, "base seed");

    // tailbound
    auto* tailbound = app.add_subcommand("tailbound", "tail bound table");
    double tb_p = 0, tb_w = 1, tb_rho = 0, tb_kappa = 0, tb_watt = 0;
    long tb_kmax = 50;
    bool tb_oracle = false;
    tailbound->add_option("--p-tilde", tb_p, "chain failure-mass bound")->required();
    tailbound->add_option("--w-tilde", tb_w, "chi ratio bound")->capture_default_str();
    tailbound->add_option("--rho", tb_rho, "tail threshold")->required();
    tailbound->add_option("--k-max", tb_kmax, "table length")->capture_default_str();
    auto* tb_kappa_opt = tailbound->add_option("--kappa", tb_kappa, "attack budget for sigma");
    auto* tb_watt_opt = tailbound->add_option("--w", tb_watt, "attack rate for sigma");
    tailbound->add_flag("--oracle", tb_oracle,
                        "exact enumeration column (two-state chain, k <= 12)");

    // attack-demo
    auto* demo = app.add_subcommand("attack-demo", "state-dependent attacker trajectories");
    std::string demo_config;
    int demo_N = 2;
    double demo_w = 0.25, demo_kappa = 1;
    long demo_horizon = 0;
    int demo_trials = 0;
    std::uint64_t demo_seed = 0;
    demo->add_option("config", demo_config, "experiment config")->required();
    demo->add_option("--N", demo_N, "attacker horizon")->capture_default_str();
    demo->add_option("--w", demo_w, "attack rate")->capture_default_str();
    demo->add_option("--kappa", demo_kappa, "initial budget")->capture_default_str();
    auto* demo_h_opt = demo->add_option("--horizon", demo_horizon, "steps per trial");
    auto* demo_t_opt = demo->add_option("--trials", demo_trials, "number of trials");
    auto* demo_s_opt = demo->add_option("--seed", demo_seed, "base seed");

    std::vector<const char*> argv;
    argv.push_back("netfail");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        fs::create_directories(output_dir);
        if (*analyze) {
            write_manifest(output_dir, "analyze", analyze_config, json::object());
            return cmd_analyze(analyze_config, output_dir);
        }
        if (*stability) {
            json opts;
            if (*rho_opt) opts["rho"] = stability_rho;
            opts["require_certified"] = require_certified;
            write_manifest(output_dir, "stability", stability_config, opts);
            return cmd_stability(stability_config, output_dir,
                                 *rho_opt ? std::optional<double>(stability_rho) : std::nullopt,
                                 require_certified);
        }
        if (*budget) {
            json opts;
            opts["rho_star"] = budget_rho_star;
            write_manifest(output_dir, "budget", budget_config, opts);
            return cmd_budget(budget_config, output_dir, budget_rho_star);
        }
        if (*simulate) {
            json opts;
            if (*horizon_opt) opts["horizon"] = sim_horizon;
            if (*trials_opt) opts["trials"] = sim_trials;
            if (*seed_opt) opts["seed"] = sim_seed;
            write_manifest(output_dir, "simulate", simulate_config, opts);
            return cmd_simulate(simulate_config, output_dir,
                                *horizon_opt ? std::optional<long>(sim_horizon) : std::nullopt,
                                *trials_opt ? std::optional<int>(sim_trials) : std::nullopt,
                                *seed_opt ? std::optional<std::uint64_t>(sim_seed) : std::nullopt);
        }
        if (*tailbound) {
            if (static_cast<bool>(*tb_kappa_opt) != static_cast<bool>(*tb_watt_opt))
                throw std::invalid_argument("tailbound: --kappa and --w must be given together");
            json opts;
            opts["p_tilde"] = tb_p;
            opts["w_tilde"] = tb_w;
            opts["rho"] = tb_rho;
            opts["k_max"] = tb_kmax;
            write_manifest(output_dir, "tailbound", std::nullopt, opts);
            return cmd_tailbound(output_dir, tb_p, tb_w, tb_rho, tb_kmax,
                                 *tb_kappa_opt ? std::optional<double>(tb_kappa) : std::nullopt,
                                 *tb_watt_opt ? std::optional<double>(tb_watt) : std::nullopt,
                                 tb_oracle);
        }
        if (*demo) {
            json opts;
            opts["N"] = demo_N;
            opts["w"] = demo_w;
            opts["kappa"] = demo_kappa;
            write_manifest(output_dir, "attack-demo", demo_config, opts);
            return cmd_attack_demo(
                demo_config, output_dir, demo_N, demo_w, demo_kappa,
                *demo_t_opt ? std::optional<int>(demo_trials) : std::nullopt,
                *demo_h_opt ? std::optional<long>(demo_horizon) : std::nullopt,
                *demo_s_opt ? std::optional<std::uint64_t>(demo_seed) : std::nullopt);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace netfail
