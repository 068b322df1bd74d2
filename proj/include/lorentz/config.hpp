// Copyright 2026 The lorentz-bg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lorentz/csv.hpp"
#include "lorentz/errors.hpp"

namespace lorentz {

inline constexpr const char *code_version = "lorentz-bg 1.0.0";

/// Numeric acceptance thresholds. Defaults are the published gates.
struct Gates {
    double moment_tol = 1e-9;
    double moment_seconds = 10.0;
    double normalization_tol = 1e-9;
    double bound_slack = 1e-12;
    double chi2_percentile = 0.999;
    double ks_discrete = 0.002;
    double ks_eta100 = 0.003;
    double xi_tail_rel = 0.10;
    double mu_tail_rel = 0.50;
    double clt_ks = 0.08;
    double clt_cov_rel = 0.25;
    double angle_ks = 0.02;
    double growth_rel = 0.30;
    double santalo_rel = 0.01;
    double limit_rel = 0.02;
    double histogram_tv = 0.05;
    double spectral_slack = 1e-3;
    double spectral_stability = 1e-3;
    double mixing_slack = 0.05;
    double specular_tol = 1e-10;
};

/// Everything an experiment reads. Validated as a whole before any work.
struct ExperimentConfig {
    std::string kind = "verify";
    int dimension = 2;
    double r = 1e-3;
    std::string theta = "hard_sphere";
    double gamma = 1.5;
    std::string initial = "stationary_continuous";
    long trajectories = 100;
    long steps = 10000;
    long collisions = 100000;
    std::uint64_t seed = 20260101;
    std::vector<long> checkpoints = {1000, 10000};
    std::string out_dir = "lorentz-out";
    unsigned threads = 0;
    std::string profile = "full";
    int spectral_m = 200;
    int grid = 21;
    Gates gates;

    /// Canonical key = value dump of every field that can change results;
    /// hashed into manifests. Threads and the output directory are left out.
    std::string canonical() const
    {
        std::ostringstream o;
        o << "[experiment]\nkind = " << kind << "\nseed = " << seed << "\nprofile = " << profile
          << "\n[model]\ndimension = " << dimension << "\nr = " << format_double(r)
          << "\ntheta = " << theta << "\ngamma = " << format_double(gamma) << "\ninitial = " << initial
          << "\n[ensemble]\ntrajectories = " << trajectories << "\nsteps = " << steps
          << "\ncollisions = " << collisions << "\ncheckpoints = ";
        for (std::size_t i = 0; i < checkpoints.size(); ++i)
            o << (i ? "," : "") << checkpoints[i];
        o << "\n[spectral]\nm = " << spectral_m << "\n[kernel]\ngrid = " << grid << "\n[gates]\n";
        for (const auto &[k, v] : gate_fields(gates))
            o << k << " = " << format_double(*v) << "\n";
        return o.str();
    }

    /// (name, member pointer) for every gate, const or mutable.
    template <class G>
    static std::vector<std::pair<std::string, decltype(&std::declval<G &>().moment_tol)>> gate_fields(G &g)
    {
        return {{"moment_tol", &g.moment_tol},
                {"moment_seconds", &g.moment_seconds},
                {"normalization_tol", &g.normalization_tol},
                {"bound_slack", &g.bound_slack},
                {"chi2_percentile", &g.chi2_percentile},
                {"ks_discrete", &g.ks_discrete},
                {"ks_eta100", &g.ks_eta100},
                {"xi_tail_rel", &g.xi_tail_rel},
                {"mu_tail_rel", &g.mu_tail_rel},
                {"clt_ks", &g.clt_ks},
                {"clt_cov_rel", &g.clt_cov_rel},
                {"angle_ks", &g.angle_ks},
                {"growth_rel", &g.growth_rel},
                {"santalo_rel", &g.santalo_rel},
                {"limit_rel", &g.limit_rel},
                {"histogram_tv", &g.histogram_tv},
                {"spectral_slack", &g.spectral_slack},
                {"spectral_stability", &g.spectral_stability},
                {"mixing_slack", &g.mixing_slack},
                {"specular_tol", &g.specular_tol}};
    }

    void validate() const
    {
        static const char *kinds[] = {"kernel-eval", "chain", "billiard", "clt", "spectral", "verify"};
        if (std::find(std::begin(kinds), std::end(kinds), kind) == std::end(kinds))
            throw config_error("experiment.kind: unknown experiment '" + kind + "'");
        if (dimension != 2 && dimension != 3)
            throw config_error("model.dimension must be 2 or 3");
        if (!(r > 0.0 && r < 0.5))
            throw config_error("model.r must lie in (0, 0.5)");
        if (!(gamma > 1.0 && gamma < 2.0))
            throw config_error("model.gamma must lie in (1, 2)");
        if (initial != "stationary_continuous" && initial != "stationary_discrete")
            throw config_error("model.initial must be stationary_continuous or stationary_discrete");
        if (trajectories < 1)
            throw config_error("ensemble.trajectories must be >= 1");
        if (steps < 3)
            throw config_error("ensemble.steps must be >= 3");
        if (collisions < 1)
            throw config_error("ensemble.collisions must be >= 1");
        // checkpoints only drive the chain growth table
        for (long c : kind == "chain" ? checkpoints : std::vector<long>{})
            if (c < 3 || c > steps)
                throw config_error("ensemble.checkpoints must lie in [3, steps]");
        if (profile != "full" && profile != "quick")
            throw config_error("experiment.profile must be full or quick");
        if (spectral_m < 50)
            throw config_error("spectral.m must be >= 50");
        if (grid < 2)
            throw config_error("kernel.grid must be >= 2");
        if (out_dir.empty())
            throw config_error("experiment.out must not be empty");
    }
};

namespace detail {

template <class T>
T parse_value(const std::string &key, const std::string &text)
{
    std::istringstream in(text);
    T v{};
    in >> v;
    if (in.fail() || !(in >> std::ws).eof())
        throw config_error(key + ": cannot parse '" + text + "'");
    return v;
}

inline std::vector<long> parse_list(const std::string &key, const std::string &text)
{
    std::vector<long> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(parse_value<long>(key, item));
    return out;
}

} // namespace detail

/// Applies one "section.key = value" assignment; unknown keys are errors.
inline void set_config_key(ExperimentConfig &c, const std::string &key, const std::string &value)
{
    using detail::parse_value;
    std::map<std::string, std::function<void(const std::string &)>> setters = {
        {"experiment.kind", [&](const std::string &v) { c.kind = v; }},
        {"experiment.seed", [&](const std::string &v) { c.seed = parse_value<std::uint64_t>(key, v); }},
        {"experiment.out", [&](const std::string &v) { c.out_dir = v; }},
        {"experiment.threads", [&](const std::string &v) { c.threads = parse_value<unsigned>(key, v); }},
        {"experiment.profile", [&](const std::string &v) { c.profile = v; }},
        {"model.dimension", [&](const std::string &v) { c.dimension = parse_value<int>(key, v); }},
        {"model.r", [&](const std::string &v) { c.r = parse_value<double>(key, v); }},
        {"model.theta", [&](const std::string &v) { c.theta = v; }},
        {"model.gamma", [&](const std::string &v) { c.gamma = parse_value<double>(key, v); }},
        {"model.initial", [&](const std::string &v) { c.initial = v; }},
        {"ensemble.trajectories", [&](const std::string &v) { c.trajectories = parse_value<long>(key, v); }},
        {"ensemble.steps", [&](const std::string &v) { c.steps = parse_value<long>(key, v); }},
        {"ensemble.collisions", [&](const std::string &v) { c.collisions = parse_value<long>(key, v); }},
        {"ensemble.checkpoints", [&](const std::string &v) { c.checkpoints = detail::parse_list(key, v); }},
        {"spectral.m", [&](const std::string &v) { c.spectral_m = parse_value<int>(key, v); }},
        {"kernel.grid", [&](const std::string &v) { c.grid = parse_value<int>(key, v); }},
    };
    for (auto &[name, ptr] : ExperimentConfig::gate_fields(c.gates)) {
        double *p = ptr;
        setters.emplace("gates." + name, [p, &key](const std::string &v) { *p = parse_value<double>(key, v); });
    }
    auto it = setters.find(key);
    if (it == setters.end())
        throw config_error("unknown configuration key '" + key + "'");
    it->second(value);
}

/// Reads an INI file (sections plus key = value lines) over the defaults.
inline ExperimentConfig load_config(std::istream &in, ExperimentConfig c = {})
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error &e) {
        throw config_error(std::string("config: ") + e.what());
    }
    for (const auto &[section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw config_error("config: key '" + section + "' outside a section");
        for (const auto &[key, value] : body)
            set_config_key(c, section + "." + key, value.data());
    }
    return c;
}

inline ExperimentConfig load_config_file(const std::string &path, ExperimentConfig c = {})
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw config_error("cannot read config file " + path);
    return load_config(f, std::move(c));
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string &bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace lorentz
