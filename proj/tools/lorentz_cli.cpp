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

// Command-line driver: lorentz_cli <subcommand> [options].
//
// Exit codes: 0 success, 1 configuration error, 2 a verify gate failed,
// 3 resource error (output not writable, size caps), 4 anything else.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "lorentz/acceptance.hpp"
#include "lorentz/config.hpp"
#include "lorentz/experiments.hpp"
#include "lorentz/output.hpp"
#include "lorentz/rng.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<unsigned> threads;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;
};

lorentz::ExperimentConfig resolve(const std::string &kind, const Overrides &o)
{
    lorentz::ExperimentConfig cfg;
    if (const char *env = std::getenv("LORENTZ_OUT"); env && *env)
        cfg.out_dir = env;
    if (!o.config_path.empty())
        cfg = lorentz::load_config_file(o.config_path, cfg);
    cfg.kind = kind;
    for (const auto &s : o.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw lorentz::config_error("--set expects section.key=value, got '" + s + "'");
        lorentz::set_config_key(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto &[k, v] : o.flags)
        lorentz::set_config_key(cfg, k, v);
    if (o.seed)
        cfg.seed = *o.seed;
    if (!o.out.empty())
        cfg.out_dir = o.out;
    if (o.threads)
        cfg.threads = *o.threads;
    cfg.validate();
    return cfg;
}

int run(const std::string &kind, const Overrides &o)
{
    auto cfg = resolve(kind, o);
    unsigned threads = lorentz::resolve_threads(cfg.threads);
    if (kind == "verify") {
        auto outcome = lorentz::acceptance::run_verify(cfg, cfg.out_dir, threads, [](const auto &r) {
            std::cout << lorentz::acceptance::format_line(r) << std::endl;
        });
        std::cout << (outcome.all_pass ? "all gates passed" : "some gates failed") << "; results in "
                  << cfg.out_dir << "\n";
        return outcome.exit_code();
    }
    lorentz::experiments::RunOutput out;
    if (kind == "kernel-eval")
        out = lorentz::experiments::kernel_eval(cfg);
    else if (kind == "chain")
        out = lorentz::experiments::chain(cfg, threads);
    else if (kind == "billiard")
        out = lorentz::experiments::billiard_run(cfg, threads);
    else if (kind == "clt")
        out = lorentz::experiments::clt(cfg, threads);
    else
        out = lorentz::experiments::spectral(cfg);
    lorentz::write_run(cfg.out_dir, kind, cfg, out.files, out.extra);
    std::cout << out.text << "results in " << cfg.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Periodic Lorentz gas in the Boltzmann-Grad limit: kernel, flight process, billiard and checks"};
    app.require_subcommand(1);
    // global options may also follow the subcommand
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "master seed (overrides the config)");
    app.add_option("--out", o.out, "output directory (default: config, then $LORENTZ_OUT, then ./lorentz-out)");
    app.add_option("--threads", o.threads, "worker threads (0 = all cores); results do not depend on it");
    app.add_option("--set", o.sets, "override any config key, e.g. --set ensemble.steps=5000");

    // subcommand-specific shorthands for common keys
    auto flag = [&o](CLI::App *sub, const std::string &name, const std::string &key, const std::string &help) {
        sub->add_option_function<std::string>(
            name, [&o, key](const std::string &v) { o.flags.emplace_back(key, v); }, help);
    };
    auto *kernel = app.add_subcommand("kernel-eval", "tabulate psi0 and its moments on a grid");
    flag(kernel, "--grid", "kernel.grid", "grid points per axis");
    auto *chain = app.add_subcommand("chain", "flight-process ensembles with growth table and report");
    auto *clt = app.add_subcommand("clt", "normalized-endpoint Gaussianity run");
    for (auto *sub : {chain, clt}) {
        flag(sub, "--trajectories", "ensemble.trajectories", "number of trajectories");
        flag(sub, "--steps", "ensemble.steps", "collisions per trajectory");
        flag(sub, "--initial", "model.initial", "stationary_continuous or stationary_discrete");
        flag(sub, "--theta", "model.theta", "hard_sphere or a CSV table w,theta");
    }
    flag(chain, "--checkpoints", "ensemble.checkpoints", "comma-separated n values");
    flag(chain, "--gamma", "model.gamma", "truncation exponent in (1, 2)");
    auto *bil = app.add_subcommand("billiard", "finite-r billiard ensembles with kernel comparison");
    flag(bil, "--r", "model.r", "scatterer radius");
    flag(bil, "--dim", "model.dimension", "2 or 3");
    flag(bil, "--trajectories", "ensemble.trajectories", "number of trajectories");
    flag(bil, "--collisions", "ensemble.collisions", "collisions per trajectory");
    auto *spec = app.add_subcommand("spectral", "estimate of ||P - Pi|| on a Gauss-Legendre grid");
    flag(spec, "--m", "spectral.m", "grid size (>= 50)");
    auto *verify = app.add_subcommand("verify", "run every acceptance gate and write gates.json");
    flag(verify, "--profile", "experiment.profile", "full or quick");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (!lorentz::rng_self_test()) {
        std::cerr << "error: random stream self-test failed\n";
        return 4;
    }
    try {
        return run(app.get_subcommands().front()->get_name(), o);
    } catch (const lorentz::config_error &e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const lorentz::resource_error &e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
