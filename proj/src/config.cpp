// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "cfwpt/errors.hpp"
#include "cfwpt/netmodel.hpp"

namespace cfwpt {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    std::from_chars_result res{};
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is missing on older libstdc++; strtod is fine here.
        char* stop = nullptr;
        value = std::strtod(text.c_str(), &stop);
        res.ptr = stop;
        res.ec = (stop == begin) ? std::errc::invalid_argument : std::errc{};
    } else {
        res = std::from_chars(begin, end, value);
    }
    if (res.ec != std::errc{} || res.ptr != end)
        throw ConfigError("cannot parse value '" + text + "' for key '" + key + "'");
    return value;
}

bool parse_bool(const std::string& key, const std::string& text)
{
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes")
        return true;
    if (t == "false" || t == "0" || t == "no")
        return false;
    throw ConfigError("cannot parse boolean '" + text + "' for key '" + key + "'");
}

struct Field {
    std::function<void(SystemConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const SystemConfig&)> get;
};

template <typename T>
Field make_field(T SystemConfig::*member)
{
    Field fld;
    fld.set = [member](SystemConfig& c, const std::string& k, const std::string& v) {
        if constexpr (std::is_same_v<T, bool>)
            c.*member = parse_bool(k, v);
        else
            c.*member = parse_number<T>(k, v);
    };
    fld.get = [member](const SystemConfig& c) {
        if constexpr (std::is_same_v<T, bool>)
            return std::string(c.*member ? "true" : "false");
        else if constexpr (std::is_floating_point_v<T>)
            return fmt_double(c.*member);
        else
            return std::to_string(c.*member);
    };
    return fld;
}

template <typename T>
Field make_knob(T SolverKnobs::*member)
{
    Field fld;
    fld.set = [member](SystemConfig& c, const std::string& k, const std::string& v) {
        c.solver.*member = parse_number<T>(k, v);
    };
    fld.get = [member](const SystemConfig& c) {
        if constexpr (std::is_floating_point_v<T>)
            return fmt_double(c.solver.*member);
        else
            return std::to_string(c.solver.*member);
    };
    return fld;
}

const std::vector<std::pair<std::string, Field>>& field_table()
{
    static const std::vector<std::pair<std::string, Field>> table = {
        {"L", make_field(&SystemConfig::L)},
        {"N", make_field(&SystemConfig::N)},
        {"K", make_field(&SystemConfig::K)},
        {"K_a", make_field(&SystemConfig::K_a)},
        {"tau", make_field(&SystemConfig::tau)},
        {"T_c", make_field(&SystemConfig::T_c)},
        {"Delta", make_field(&SystemConfig::Delta)},
        {"B", make_field(&SystemConfig::B)},
        {"f", make_field(&SystemConfig::f)},
        {"rho_p", make_field(&SystemConfig::rho_p)},
        {"rho_u", make_field(&SystemConfig::rho_u)},
        {"rho_d", make_field(&SystemConfig::rho_d)},
        {"zeta", make_field(&SystemConfig::zeta)},
        {"b_max", make_field(&SystemConfig::b_max)},
        {"b_0", make_field(&SystemConfig::b_0)},
        {"W", make_field(&SystemConfig::W)},
        {"sigma_sh", make_field(&SystemConfig::sigma_sh)},
        {"side", make_field(&SystemConfig::side)},
        {"h_AP", make_field(&SystemConfig::h_AP)},
        {"h_s", make_field(&SystemConfig::h_s)},
        {"d0", make_field(&SystemConfig::d0)},
        {"d1", make_field(&SystemConfig::d1)},
        {"T_max", make_field(&SystemConfig::T_max)},
        {"seed", make_field(&SystemConfig::seed)},
        {"finite_tau_accounting", make_field(&SystemConfig::finite_tau_accounting)},
        {"threads", make_field(&SystemConfig::threads)},
        {"fixed_point_max_iter", make_knob(&SolverKnobs::fixed_point_max_iter)},
        {"fixed_point_tol", make_knob(&SolverKnobs::fixed_point_tol)},
        {"scp_max_iter", make_knob(&SolverKnobs::scp_max_iter)},
        {"scp_rel_tol", make_knob(&SolverKnobs::scp_rel_tol)},
        {"scp_min_radius", make_knob(&SolverKnobs::scp_min_radius)},
        {"scp_radius_fraction", make_knob(&SolverKnobs::scp_radius_fraction)},
        {"scp_shrink", make_knob(&SolverKnobs::scp_shrink)},
        {"scp_expand", make_knob(&SolverKnobs::scp_expand)},
        {"fp_max_alternations", make_knob(&SolverKnobs::fp_max_alternations)},
        {"fp_rel_tol", make_knob(&SolverKnobs::fp_rel_tol)},
        {"chi_grid_points", make_knob(&SolverKnobs::chi_grid_points)},
        {"chi_golden_iterations", make_knob(&SolverKnobs::chi_golden_iterations)},
    };
    return table;
}

bool is_perfect_square(int n)
{
    if (n < 0)
        return false;
    int r = 0;
    while (r * r < n)
        ++r;
    return r * r == n;
}

} // namespace

double SystemConfig::noise_power() const
{
    return cfwpt::noise_power(*this);
}

void SystemConfig::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok)
            throw ConfigError(std::string("invalid configuration: ") + what);
    };
    require(L > 0 && is_perfect_square(L), "L must be a positive perfect square");
    require(N > 0, "N > 0");
    require(K > 0, "K > 0");
    require(tau > 0 && tau < T_c, "0 < tau < T_c");
    require(K_a > 0 && K_a <= std::min(K, 4 * tau), "0 < K_a <= min(K, 4 tau)");
    require(Delta > 0, "Delta > 0");
    require(B > 0, "B > 0");
    require(f > 0, "f > 0");
    require(rho_p > 0 && rho_u > 0 && rho_d > 0, "all powers > 0");
    require(zeta > 0 && zeta <= 1, "0 < zeta <= 1");
    require(b_0 > 0 && b_0 < b_max, "0 < b_0 < b_max");
    require(W >= 0, "W >= 0");
    require(sigma_sh >= 0, "sigma_sh >= 0");
    require(side > 0, "side > 0");
    require(h_AP > 0 && h_s >= 0, "heights");
    require(d0 > 0 && d0 < d1, "0 < d0 < d1");
    require(T_max > 0, "T_max > 0");
    require(threads >= 0, "threads >= 0");
    require(solver.fixed_point_max_iter > 0 && solver.fixed_point_tol > 0, "fixed-point knobs");
    require(solver.scp_max_iter > 0 && solver.scp_radius_fraction > 0, "SCP knobs");
    require(solver.scp_shrink > 0 && solver.scp_shrink < 1 && solver.scp_expand >= 1, "SCP radius schedule");
    require(solver.fp_max_alternations > 0 && solver.chi_grid_points >= 2, "FP knobs");
}

SystemConfig SystemConfig::desk()
{
    return SystemConfig{};
}

SystemConfig SystemConfig::table_one()
{
    SystemConfig c;
    c.L = 100;
    c.N = 10;
    c.K = 200;
    c.K_a = 30;
    c.tau = 60;
    return c;
}

void set_config_value(SystemConfig& cfg, const std::string& key, const std::string& value)
{
    for (const auto& [name, field] : field_table()) {
        if (name == key) {
            field.set(cfg, key, value);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const SystemConfig& cfg)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, field] : field_table())
        out.emplace_back(name, field.get(cfg));
    return out;
}

SystemConfig parse_config(std::istream& in)
{
    SystemConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        set_config_value(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

SystemConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open configuration file '" + path + "'");
    return parse_config(in);
}

} // namespace cfwpt
