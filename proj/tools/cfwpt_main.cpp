// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: validate, simulate, baseline, sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cfwpt/config.hpp"
#include "cfwpt/errors.hpp"
#include "cfwpt/netmodel.hpp"
#include "cfwpt/simctl.hpp"

namespace fs = std::filesystem;
using namespace cfwpt;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    int trials = 0;
    std::optional<int> slots;
    std::vector<double> w;
    bool finite_tau = false;
};

SystemConfig resolve_config(const Options& o)
{
    SystemConfig c = o.config_path.empty() ? SystemConfig::desk() : load_config(o.config_path);
    if (o.seed)
        c.seed = *o.seed;
    if (o.slots)
        c.T_max = *o.slots;
    if (o.w.size() == 1)
        c.W = o.w.front();
    if (o.finite_tau)
        c.finite_tau_accounting = true;
    c.validate();
    return c;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f.exceptions(std::ios::badbit | std::ios::failbit);
    return f;
}

void write_run(const RunResult& run, const fs::path& dir)
{
    fs::create_directories(dir);
    auto slots = open_out(dir / "slots.csv");
    write_slots_csv(run.records, slots);
    auto summary = open_out(dir / "summary.json");
    write_summary_json(run.summary, summary);
}

void print_run(const char* what, const RunResult& run, const fs::path& dir)
{
    const RunSummary& s = run.summary;
    std::printf("%s: %zu slots (%d harvest, %d transmit), min avg rate %s, X_bar %s, Y_bar %s -> %s\n", what,
                run.records.size(), s.harvest_slots, s.transmit_slots, fmt17(s.min_avg_rate.back()).c_str(),
                fmt17(s.X_bar.back()).c_str(), fmt17(s.Y_bar.back()).c_str(), dir.string().c_str());
}

int cmd_validate(const Options& o)
{
    const SystemConfig c = resolve_config(o);
    const int trials = o.trials > 0 ? o.trials : 500;
    std::vector<int> ka;
    for (int k = 1; k <= std::min(c.K, 4 * c.tau); k *= 2)
        ka.push_back(k);
    const ValidationReport rep = validate_asymptotics(c, make_fading_map(c), trials, ka);
    const fs::path dir(o.out);
    fs::create_directories(dir);
    auto g = open_out(dir / "validate_gamma.csv");
    write_validation_csv(rep.gamma, true, g);
    auto e = open_out(dir / "validate_energy.csv");
    write_validation_csv(rep.energy, false, e);
    auto ef = open_out(dir / "validate_energy_full.csv");
    write_validation_csv(rep.energy_full, false, ef);
    auto r = open_out(dir / "validate_rate.csv");
    write_validation_csv(rep.rate, false, r);
    auto s = open_out(dir / "ka_sweep.csv");
    write_ka_sweep_csv(rep.ka_sweep, s);
    std::printf("validate: %d trials over %zu active sensors -> %s\n", trials, rep.active.size(), dir.string().c_str());
    return 0;
}

int cmd_run(const Options& o, bool greedy)
{
    const SystemConfig c = resolve_config(o);
    const RunResult run = greedy ? run_greedy(c) : run_lyapunov(c);
    write_run(run, o.out);
    write_fading_csv(make_fading_map(c), (fs::path(o.out) / "fading.csv").string());
    print_run(greedy ? "baseline" : "simulate", run, o.out);
    return 0;
}

int cmd_sweep(const Options& o)
{
    const SystemConfig base = resolve_config(o);
    const int seeds = o.trials > 0 ? o.trials : 10;
    const std::vector<double> ws = o.w.empty() ? std::vector<double>{1.0, 10.0, 100.0} : o.w;
    const fs::path dir(o.out);
    fs::create_directories(dir);
    auto table = open_out(dir / "sweep.csv");
    table << "seed,policy,W,min_avg_rate,sigma_hat,X_bar,Y_bar,min_battery,bound_violations\n";
    auto row = [&](std::uint64_t seed, const char* policy, double W, const RunSummary& s) {
        table << seed << ',' << policy << ',' << fmt17(W) << ',' << fmt17(s.min_avg_rate.back()) << ','
              << fmt17(s.sigma_hat.back()) << ',' << fmt17(s.X_bar.back()) << ',' << fmt17(s.Y_bar.back()) << ','
              << fmt17(s.min_battery) << ',' << s.bound_violations << '\n';
    };
    for (int i = 0; i < seeds; ++i) {
        SystemConfig c = base;
        c.seed = base.seed + static_cast<std::uint64_t>(i);
        const RunResult g = run_greedy(c);
        const fs::path gdir = dir / ("seed" + std::to_string(c.seed)) / "greedy";
        write_run(g, gdir);
        row(c.seed, "greedy", c.W, g.summary);
        for (double W : ws) {
            c.W = W;
            const RunResult run = run_lyapunov(c);
            const fs::path rdir = dir / ("seed" + std::to_string(c.seed)) / ("W" + fmt17(W));
            write_run(run, rdir);
            row(c.seed, "lyapunov", W, run.summary);
            print_run("sweep", run, rdir);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Scheduler simulator for wirelessly powered cell-free IoT networks"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "root seed");
        sub->add_option("--out", o.out, "output directory");
        sub->add_flag("--finite-tau", o.finite_tau, "credit energy and rates from one pilot realisation per slot");
    };
    auto* validate = app.add_subcommand("validate", "Monte Carlo check of the closed forms");
    common(validate);
    validate->add_option("--trials", o.trials, "pilot draws")->check(CLI::PositiveNumber);

    auto* simulate = app.add_subcommand("simulate", "drift-plus-penalty scheduler run");
    auto* baseline = app.add_subcommand("baseline", "greedy benchmark run");
    for (auto* sub : {simulate, baseline}) {
        common(sub);
        sub->add_option("--slots", o.slots, "number of slots")->check(CLI::PositiveNumber);
        sub->add_option("--w", o.w, "drift-penalty weight")->expected(1);
    }

    auto* sweep = app.add_subcommand("sweep", "multi-seed, multi-W batch");
    common(sweep);
    sweep->add_option("--trials", o.trials, "number of consecutive seeds")->check(CLI::PositiveNumber);
    sweep->add_option("--slots", o.slots, "number of slots")->check(CLI::PositiveNumber);
    sweep->add_option("--w", o.w, "drift-penalty weights (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "cfwpt: %s\n", e.what());
        return 2;
    }

    try {
        if (*validate)
            return cmd_validate(o);
        if (*simulate)
            return cmd_run(o, false);
        if (*baseline)
            return cmd_run(o, true);
        return cmd_sweep(o);
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& ch : msg)
            if (ch == '\n')
                ch = ' ';
        std::fprintf(stderr, "cfwpt: error: %s\n", msg.c_str());
        return 1;
    }
}
