#pragma once

#include "lwf/closed_forms.hpp"
#include "lwf/config.hpp"
#include "lwf/estimation.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace lwf {

enum ExitCode { exit_ok = 0, exit_validation = 1, exit_usage = 2, exit_numeric = 3, exit_io = 4 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& formula_names()
{
    static const std::vector<std::string> names{"coupon-pmf",     "order-prob",     "first-lost",   "fix-mean-kingman",
                                                "fix-mean-beta",  "explosion-beta", "phi",          "charfunc",
                                                "stationary-mean", "lambda-rate",   "fixline-rate"};
    return names;
}

struct EvalArgs {
    std::string formula;
    std::vector<double> x;
    std::vector<int> order;
    std::vector<std::vector<double>> atoms;
    int k = 1, j = 0, type = 1;
    std::int64_t p = 2, n = 2, l = 1;
    double kingman = 0.0, alpha = 0.0, beta_scale = 1.0, theta = 0.0, s = 0.5, t = 1.0;
};

namespace detail {

inline LambdaSpec eval_lambda(const EvalArgs& a)
{
    LambdaSpec spec;
    spec.kingman_mass = a.kingman;
    if (a.alpha != 0.0)
        spec.beta = BetaComponent{a.alpha, a.beta_scale};
    for (auto& rw : a.atoms) {
        if (rw.size() != 2)
            throw DomainError("--atom expects r,w");
        spec.atoms.push_back({rw[0], rw[1]});
    }
    spec.validate();
    return spec;
}

inline SimplexPoint eval_point(const EvalArgs& a)
{
    if (a.x.empty())
        throw DomainError("--x is required");
    return SimplexPoint(a.x);
}

inline void print_value(std::ostream& out, double v, double err)
{
    out << format_double(v) << " +/- " << format_double(err) << "\n";
}

/// Value at default tolerance and the change under a tighter one.
template <class F>
std::pair<double, double> with_error(F&& f)
{
    QuadratureConfig tight;
    tight.abs_tol = 1e-13;
    tight.rel_tol = 1e-11;
    double v = f(QuadratureConfig{});
    return {v, std::abs(f(tight) - v)};
}

} // namespace detail

inline void cmd_eval(const EvalArgs& a, std::ostream& out)
{
    const double eps = std::numeric_limits<double>::epsilon();
    const auto& f = a.formula;
    if (f == "coupon-pmf") {
        double v = coupon_pmf(detail::eval_point(a), a.k, a.p);
        detail::print_value(out, v, 4 * eps);
    } else if (f == "order-prob") {
        double v = disappearance_order_prob(detail::eval_point(a), a.order);
        detail::print_value(out, v, 4 * eps * v);
    } else if (f == "first-lost") {
        double v = first_to_disappear_prob(detail::eval_point(a), a.type);
        detail::print_value(out, v, 16 * eps);
    } else if (f == "fix-mean-kingman") {
        double v = mean_fixation_kingman(detail::eval_point(a), a.k, a.kingman);
        detail::print_value(out, v, 16 * eps * std::max(v, 1.0));
    } else if (f == "fix-mean-beta") {
        auto x = detail::eval_point(a);
        auto [v, e] = detail::with_error(
            [&](const QuadratureConfig& c) { return mean_fixation_beta(x, a.k, a.alpha, a.beta_scale, c); });
        detail::print_value(out, v, e);
    } else if (f == "explosion-beta") {
        auto [v, e] = detail::with_error(
            [&](const QuadratureConfig& c) { return mean_explosion_beta(a.k, a.alpha, a.beta_scale, c); });
        detail::print_value(out, v, e);
    } else if (f == "phi") {
        auto [v, e] = detail::with_error([&](const QuadratureConfig& c) { return phi_generating(a.j, a.s, a.alpha, c); });
        detail::print_value(out, v, e);
    } else if (f == "charfunc") {
        auto v = fixation_charfunc_kingman(detail::eval_point(a), a.k, a.t, a.kingman);
        out << format_double(v.real()) << " " << format_double(v.imag()) << "\n";
    } else if (f == "stationary-mean") {
        double v = stationary_time_mean(a.kingman, a.theta);
        double e = 16 * eps * v;
        if (std::abs(a.theta - 0.5 * a.kingman) > 1e-3 * a.kingman)
            e = std::max(e, std::abs(stationary_time_mean_digamma(a.kingman, a.theta) - v));
        detail::print_value(out, v, e);
    } else if (f == "lambda-rate") {
        double v = lambda_rate(detail::eval_lambda(a), a.n, a.k);
        detail::print_value(out, v, 16 * eps * v);
    } else if (f == "fixline-rate") {
        ModelParams p;
        p.lambda = detail::eval_lambda(a);
        p.theta = a.theta;
        double v = fixation_jump_rate(p, a.n, a.l);
        detail::print_value(out, v, 16 * eps * v);
    } else {
        throw DomainError("unknown formula " + f);
    }
}

struct SimulateArgs {
    std::string config;
    std::optional<std::string> output;
};

inline std::ofstream open_output(const std::string& path)
{
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent))
        throw IoError("output directory does not exist: " + parent.string());
    std::ofstream f(path);
    if (!f)
        throw IoError("cannot open " + path);
    return f;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs one configured experiment; writes the CSV and a `.cfg` file that re-parses to the effective config.
inline void cmd_simulate(RunConfig cfg, unsigned workers, std::ostream& out)
{
    cfg = canonical(std::move(cfg));
    auto& p = cfg.model;
    auto file = open_output(cfg.output);
    switch (cfg.kind) {
    case ExperimentKind::lookdown: {
        if (cfg.x.empty())
            throw DomainError("lookdown needs run.x");
        std::vector<SimplexPoint> ics;
        for (auto& x : cfg.x)
            ics.emplace_back(x);
        RunOptions opt;
        for (std::int64_t i = 1; i <= cfg.samples; ++i)
            opt.sample_times.push_back(cfg.horizon * static_cast<double>(i) / static_cast<double>(cfg.samples));
        auto r = run(p, static_cast<std::size_t>(cfg.N), cfg.horizon, ics, cfg.seed, opt);
        write_trajectory_csv(file, r, p.d);
        out << "lookdown N=" << cfg.N << " horizon=" << format_double(cfg.horizon)
            << " snapshots=" << r.trajectory.size() << "\n";
        break;
    }
    case ExperimentKind::explosion:
    case ExperimentKind::fixation: {
        TimeSamples s;
        if (cfg.kind == ExperimentKind::explosion)
            s = sample_explosions(p, cfg.k, cfg.replicates, cfg.seed, workers, cfg.levels);
        else {
            if (cfg.x.size() != 1)
                throw DomainError("fixation needs exactly one initial condition in run.x");
            s = sample_fixation_times(p, SimplexPoint(cfg.x.front()), static_cast<int>(cfg.k), cfg.replicates,
                                      cfg.seed, workers, cfg.levels);
        }
        file << "replicate,time\n";
        for (std::size_t i = 0; i < s.samples.size(); ++i)
            file << i << "," << format_double(s.samples[i]) << "\n";
        auto e = s.estimate();
        out << kind_name(cfg.kind) << " mean=" << format_double(e.mean) << " stderr=" << format_double(e.stderr)
            << " tail_bias=" << format_double(s.tail_bias) << " n=" << e.n << "\n";
        break;
    }
    case ExperimentKind::dual: {
        if (static_cast<int>(cfg.n0.size()) != p.d)
            throw DomainError("dual needs run.n0 with d entries");
        file << "replicate,dead";
        for (int i = 1; i <= p.d; ++i)
            file << ",n" << i;
        file << "\n";
        auto finals = parallel_map<DualState>(static_cast<std::size_t>(cfg.replicates), workers, [&](std::size_t r) {
            Rng rng(derive_seed(cfg.seed, "dual", r));
            return simulate_dual(p, DualState::counts(cfg.n0), cfg.horizon, rng);
        });
        for (std::size_t r = 0; r < finals.size(); ++r) {
            file << r << "," << (finals[r].dead ? 1 : 0);
            for (int i = 0; i < p.d; ++i)
                file << "," << (finals[r].dead ? 0 : finals[r].n[i]);
            file << "\n";
        }
        std::vector<SimplexPoint> xs;
        for (auto& x : cfg.x)
            xs.emplace_back(x);
        out << "dual replicates=" << finals.size();
        for (auto& x : xs) {
            std::vector<double> h;
            for (auto& f : finals)
                h.push_back(duality_function(x, f));
            auto e = Estimate::from_samples(h);
            out << " moment=" << format_double(e.mean) << " stderr=" << format_double(e.stderr);
        }
        out << "\n";
        break;
    }
    }
    if (!file)
        throw IoError("write failed for " + cfg.output);
    auto side = open_output(cfg.output + ".cfg");
    side << to_config_text(cfg);
    if (!side)
        throw IoError("write failed for " + cfg.output + ".cfg");
}

inline bool cmd_validate(const std::string& suite, const SuiteOptions& o, const std::optional<std::string>& output,
                         std::ostream& out)
{
    auto reports = run_suite(suite, o);
    write_report_csv(out, reports);
    if (output) {
        auto f = open_output(*output);
        write_report_csv(f, reports);
        if (!f)
            throw IoError("write failed for " + *output);
    }
    return all_pass(reports);
}

inline void cmd_heatmap(const std::string& dir, int m, int k, const std::vector<std::string>& only, std::ostream& out)
{
    if (!std::filesystem::is_directory(dir))
        throw IoError("output directory does not exist: " + dir);
    for (auto& panel : default_panels()) {
        if (!only.empty() && std::find(only.begin(), only.end(), panel.name) == only.end())
            continue;
        ModelParams p;
        p.d = 2;
        p.lambda = panel.lambda;
        p.nu = {0.0, 0.0};
        auto cells = heatmap_grid(p, k, m);
        auto path = (std::filesystem::path(dir) / ("heatmap_" + panel.name + ".csv")).string();
        auto f = open_output(path);
        write_heatmap_csv(f, cells);
        if (!f)
            throw IoError("write failed for " + path);
        out << path << " cells=" << cells.size() << "\n";
    }
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Multi-type Lambda-Wright-Fisher lookdown simulator and formula evaluator"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = default_seed;
    unsigned workers = default_workers();
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "evaluate a closed-form expression");
    eval->add_option("formula", ea.formula, "formula name")->required()->check(CLI::IsMember(formula_names()));
    eval->add_option("--x", ea.x, "initial frequencies x(1..d)")->delimiter(',');
    eval->add_option("--order", ea.order, "order i_1,...,i_{d+1}")->delimiter(',');
    eval->add_option("--atom", ea.atoms, "atom r,w (repeatable)")->delimiter(',')->allow_extra_args(false);
    eval->add_option("--k", ea.k, "number of remaining types or level");
    eval->add_option("--p", ea.p, "level");
    eval->add_option("--type", ea.type, "type index");
    eval->add_option("--j", ea.j, "generating function index");
    eval->add_option("--s", ea.s, "generating function argument");
    eval->add_option("--t", ea.t, "characteristic function argument");
    eval->add_option("--n", ea.n, "block count or level");
    eval->add_option("--l", ea.l, "jump size");
    eval->add_option("--kingman", ea.kingman, "Kingman mass");
    eval->add_option("--alpha", ea.alpha, "Beta parameter");
    eval->add_option("--beta-scale", ea.beta_scale, "Beta mass");
    eval->add_option("--theta", ea.theta, "mutation rate");

    std::string config_path;
    std::optional<std::string> sim_output;
    auto* sim = app.add_subcommand("simulate", "run a configured experiment");
    sim->add_option("config", config_path, "config file")->required();
    sim->add_option("--output", sim_output, "override run.output");

    std::string suite;
    std::optional<std::string> report_path;
    double scale = 1.0;
    auto* val = app.add_subcommand("validate", "run a validation suite");
    val->add_option("suite", suite, "suite name")->required()->check(CLI::IsMember(suite_names()));
    val->add_option("--output", report_path, "report CSV path");
    val->add_option("--scale", scale, "replicate multiplier")->check(CLI::PositiveNumber);

    std::string heat_dir = ".";
    int grid = 30, heat_k = 1;
    std::vector<std::string> panels;
    auto* heat = app.add_subcommand("heatmap", "write mean fixation time grids over the 2-simplex");
    heat->add_option("--output-dir", heat_dir, "directory for heatmap_<panel>.csv");
    heat->add_option("--grid", grid, "lattice resolution m (step 1/m)")->check(CLI::PositiveNumber);
    heat->add_option("--k", heat_k, "number of remaining types")->check(CLI::Range(1, 2));
    heat->add_option("--panel", panels, "restrict to panels")
        ->check(CLI::IsMember({"kingman", "beta-1.8", "beta-1.5", "beta-1.2"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return exit_usage;
    }

    try {
        if (*eval) {
            cmd_eval(ea, out);
        } else if (*sim) {
            auto cfg = parse_run_config(read_file(config_path));
            if (sim_output)
                cfg.output = *sim_output;
            if (app.get_option("--seed")->count())
                cfg.seed = seed;
            cmd_simulate(cfg, workers, out);
        } else if (*val) {
            SuiteOptions o{seed, workers, scale};
            return cmd_validate(suite, o, report_path, out) ? exit_ok : exit_validation;
        } else if (*heat) {
            cmd_heatmap(heat_dir, grid, heat_k, panels, out);
        }
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::ios_base::failure& e) {
        err << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << "\n";
        return exit_usage;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const OverflowError& e) {
        err << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_ok;
}

} // namespace lwf
