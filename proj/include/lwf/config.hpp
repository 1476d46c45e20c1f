#pragma once

#include "lwf/kv.hpp"
#include "lwf/lambda_measure.hpp"
#include "lwf/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lwf {

enum class ExperimentKind { lookdown, explosion, fixation, dual };

inline const std::map<std::string, ExperimentKind>& experiment_kinds()
{
    static const std::map<std::string, ExperimentKind> m{{"lookdown", ExperimentKind::lookdown},
                                                         {"explosion", ExperimentKind::explosion},
                                                         {"fixation", ExperimentKind::fixation},
                                                         {"dual", ExperimentKind::dual}};
    return m;
}

inline std::string kind_name(ExperimentKind k)
{
    for (auto& [name, v] : experiment_kinds())
        if (v == k)
            return name;
    return {};
}

/// Keys of the [run] section accepted by each experiment kind, besides `kind`.
inline const std::set<std::string>& run_keys(ExperimentKind k)
{
    static const std::map<ExperimentKind, std::set<std::string>> m{
        {ExperimentKind::lookdown, {"seed", "N", "horizon", "x", "samples", "output"}},
        {ExperimentKind::explosion, {"seed", "replicates", "k", "levels", "output"}},
        {ExperimentKind::fixation, {"seed", "replicates", "x", "k", "levels", "output"}},
        {ExperimentKind::dual, {"seed", "replicates", "x", "n0", "horizon", "output"}},
    };
    return m.at(k);
}

struct RunConfig {
    ModelParams model;
    ExperimentKind kind = ExperimentKind::lookdown;
    std::int64_t replicates = 10000;
    std::uint64_t seed = default_seed;
    std::int64_t N = 100;
    double horizon = 1.0;
    std::vector<std::vector<double>> x; // initial conditions
    std::int64_t k = 1;
    std::int64_t levels = 10000;       // truncation level for explosion sampling
    std::int64_t samples = 100;        // snapshot count for lookdown trajectories
    std::vector<int> n0;
    std::string output = "out.csv";

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::int64_t as_count(const ConfigValue& v, const std::string& key)
{
    double d = v.as_number(key);
    if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15)
        throw ConfigError(key + ": expected a nonnegative integer");
    return static_cast<std::int64_t>(d);
}

inline std::string list_text(const std::vector<double>& v)
{
    return to_string(make_list(v));
}

} // namespace detail

inline RunConfig parse_run_config(const std::string& text)
{
    auto doc = ConfigDocument::parse(text);
    RunConfig cfg;
    if (!doc.has("run.kind"))
        throw ConfigError("missing key run.kind");
    auto kname = doc.at("run.kind").as_word("run.kind");
    auto kit = experiment_kinds().find(kname);
    if (kit == experiment_kinds().end())
        throw ConfigError("unknown experiment kind " + kname);
    cfg.kind = kit->second;
    const auto& allowed = run_keys(cfg.kind);
    bool have_nu = false;
    for (auto& key : doc.keys()) {
        const auto& v = doc.at(key);
        auto dot = key.find('.');
        std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
        std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        if (section == "model") {
            if (name == "d")
                cfg.model.d = static_cast<int>(detail::as_count(v, key));
            else if (name == "theta")
                cfg.model.theta = v.as_number(key);
            else if (name == "nu") {
                cfg.model.nu = v.as_numbers(key);
                have_nu = true;
            } else if (name == "boundary_nu") {
                auto w = v.as_word(key);
                if (w != "true" && w != "false")
                    throw ConfigError(key + ": expected true or false");
                cfg.model.allow_boundary_nu = w == "true";
            } else
                throw ConfigError("unknown key " + key);
        } else if (section == "lambda") {
            if (!apply_lambda_key(cfg.model.lambda, name, v))
                throw ConfigError("unknown key " + key);
        } else if (section == "run") {
            if (name == "kind")
                continue;
            if (!allowed.count(name))
                throw ConfigError("key " + key + " is not used by experiment kind " + kname);
            if (name == "seed")
                cfg.seed = static_cast<std::uint64_t>(detail::as_count(v, key));
            else if (name == "replicates")
                cfg.replicates = detail::as_count(v, key);
            else if (name == "N")
                cfg.N = detail::as_count(v, key);
            else if (name == "horizon")
                cfg.horizon = v.as_number(key);
            else if (name == "k")
                cfg.k = detail::as_count(v, key);
            else if (name == "levels")
                cfg.levels = detail::as_count(v, key);
            else if (name == "samples")
                cfg.samples = detail::as_count(v, key);
            else if (name == "output")
                cfg.output = v.as_word(key);
            else if (name == "n0") {
                cfg.n0.clear();
                for (double d : v.as_numbers(key))
                    cfg.n0.push_back(static_cast<int>(detail::as_count(make_number(d), key)));
            } else if (name == "x") {
                cfg.x.clear();
                if (v.kind == ConfigValue::Kind::list && !v.items.empty() &&
                    v.items.front().kind == ConfigValue::Kind::list)
                    for (auto& item : v.items)
                        cfg.x.push_back(item.as_numbers(key));
                else
                    cfg.x.push_back(v.as_numbers(key));
            }
        } else {
            throw ConfigError("unknown key " + key);
        }
    }
    if (!have_nu && cfg.model.theta > 0.0)
        cfg.model.nu.assign(cfg.model.d, 1.0 / (cfg.model.d + 1));
    if (!have_nu && cfg.model.theta == 0.0)
        cfg.model.nu.assign(cfg.model.d, 0.0);
    cfg.model.validate();
    for (auto& x : cfg.x)
        if (static_cast<int>(x.size()) != cfg.model.d)
            throw ConfigError("run.x: every initial condition needs d entries");
    return cfg;
}

/// Text that parses back to an identical RunConfig.
inline std::string to_config_text(const RunConfig& c)
{
    std::string s = "[model]\n";
    s += "d = " + std::to_string(c.model.d) + "\n";
    s += "theta = " + format_double(c.model.theta) + "\n";
    s += "nu = " + detail::list_text(c.model.nu) + "\n";
    s += std::string("boundary_nu = ") + (c.model.allow_boundary_nu ? "true" : "false") + "\n";
    s += "[lambda]\n" + to_config_block(c.model.lambda);
    s += "[run]\nkind = " + kind_name(c.kind) + "\n";
    const auto& allowed = run_keys(c.kind);
    auto put = [&](const std::string& key, const std::string& value) {
        if (allowed.count(key))
            s += key + " = " + value + "\n";
    };
    put("seed", std::to_string(c.seed));
    put("replicates", std::to_string(c.replicates));
    put("N", std::to_string(c.N));
    put("horizon", format_double(c.horizon));
    put("k", std::to_string(c.k));
    put("levels", std::to_string(c.levels));
    put("samples", std::to_string(c.samples));
    if (allowed.count("x")) {
        std::string xs = "[";
        for (std::size_t i = 0; i < c.x.size(); ++i)
            xs += (i ? ", " : "") + detail::list_text(c.x[i]);
        put("x", xs + "]");
    }
    if (allowed.count("n0")) {
        std::vector<double> n(c.n0.begin(), c.n0.end());
        put("n0", detail::list_text(n));
    }
    put("output", c.output);
    return s;
}

/// Canonical form: keys not used by the kind reset to defaults, so round trips compare equal.
inline RunConfig canonical(RunConfig c)
{
    RunConfig d;
    const auto& a = run_keys(c.kind);
    if (!a.count("seed"))
        c.seed = d.seed;
    if (!a.count("replicates"))
        c.replicates = d.replicates;
    if (!a.count("N"))
        c.N = d.N;
    if (!a.count("horizon"))
        c.horizon = d.horizon;
    if (!a.count("k"))
        c.k = d.k;
    if (!a.count("levels"))
        c.levels = d.levels;
    if (!a.count("samples"))
        c.samples = d.samples;
    if (!a.count("x"))
        c.x = d.x;
    if (!a.count("n0"))
        c.n0 = d.n0;
    return c;
}

} // namespace lwf
