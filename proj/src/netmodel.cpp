// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cfwpt/errors.hpp"

namespace cfwpt {

namespace {

constexpr double kBoltzmann = 1.381e-23; // J/K
constexpr double kNoiseTemperature = 290.0;
constexpr double kNoiseFigureDb = 9.0;

int grid_side(int L)
{
    int r = 0;
    while (r * r < L)
        ++r;
    if (L <= 0 || r * r != L)
        throw ConfigError("L = " + std::to_string(L) + " is not a perfect square");
    return r;
}

double wrapped_axis(double a, double b, double side)
{
    double d = std::fabs(a - b);
    d = std::fmod(d, side);
    return std::min(d, side - d);
}

} // namespace

Topology build_topology(const SystemConfig& config, Rng& rng)
{
    const int per_row = grid_side(config.L);
    Topology topo;
    topo.side = config.side;
    const double cell = config.side / per_row;
    topo.ap_positions.reserve(config.L);
    for (int i = 0; i < per_row; ++i)
        for (int j = 0; j < per_row; ++j)
            topo.ap_positions.push_back({(i + 0.5) * cell, (j + 0.5) * cell, config.h_AP});

    topo.sensor_positions.reserve(config.K);
    for (int k = 0; k < config.K; ++k) {
        const double x = rng.uniform(0.0, config.side);
        const double y = rng.uniform(0.0, config.side);
        topo.sensor_positions.push_back({x, y, config.h_s});
    }
    return topo;
}

double wrap_distance(const Point3& p, const Point3& q, double side)
{
    const double dx = wrapped_axis(p.x, q.x, side);
    const double dy = wrapped_axis(p.y, q.y, side);
    const double dz = p.z - q.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double path_loss_constant_db(const SystemConfig& config)
{
    const double lf = std::log10(config.f);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(config.h_AP) - (1.1 * lf - 0.7) * config.h_s + (1.56 * lf - 0.8);
}

double path_loss_db(double d, const SystemConfig& config)
{
    if (!(d > 0.0))
        throw DomainError("path_loss_db: distance must be positive");
    const double L0 = path_loss_constant_db(config);
    const double km = 1e-3;
    const double d_km = d * km;
    const double d0_km = config.d0 * km;
    const double d1_km = config.d1 * km;
    if (d > config.d1)
        return -L0 - 35.0 * std::log10(d_km);
    if (d > config.d0)
        return -L0 - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d_km);
    return -L0 - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d0_km);
}

FadingMap draw_fading_map(const Topology& topology, const SystemConfig& config, Rng& rng)
{
    const int L = static_cast<int>(topology.ap_positions.size());
    const int K = static_cast<int>(topology.sensor_positions.size());
    FadingMap map;
    map.beta.resize(L, K);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            const double d = wrap_distance(topology.ap_positions[l], topology.sensor_positions[k], topology.side);
            const double z = rng.normal();
            map.beta(l, k) = std::pow(10.0, (path_loss_db(d, config) + config.sigma_sh * z) / 10.0);
        }
    }
    return map;
}

FadingMap make_fading_map(const SystemConfig& config)
{
    Rng placement = Rng::stream(config.seed, Stream::Placement);
    Rng shadowing = Rng::stream(config.seed, Stream::Shadowing);
    const Topology topo = build_topology(config, placement);
    FadingMap map = draw_fading_map(topo, config, shadowing);
    map.generated_seed = config.seed;
    return map;
}

double noise_power(const SystemConfig& config)
{
    if (!(config.B > 0.0))
        throw DomainError("noise_power: bandwidth must be positive");
    return config.B * kBoltzmann * kNoiseTemperature * std::pow(10.0, kNoiseFigureDb / 10.0);
}

void write_fading_csv(const FadingMap& map, std::ostream& out)
{
    out << "l,k,beta\n";
    char buf[64];
    for (int l = 0; l < map.num_aps(); ++l) {
        for (int k = 0; k < map.num_sensors(); ++k) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", l, k, map.beta(l, k));
            out << buf;
        }
    }
}

void write_fading_csv(const FadingMap& map, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    write_fading_csv(map, out);
}

FadingMap read_fading_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line.rfind("l,k,beta", 0) != 0)
        throw ConfigError("fading CSV: missing 'l,k,beta' header");
    struct Entry {
        int l, k;
        double beta;
    };
    std::vector<Entry> entries;
    int L = 0;
    int K = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        Entry e{};
        if (std::sscanf(line.c_str(), "%d,%d,%lf", &e.l, &e.k, &e.beta) != 3 || e.l < 0 || e.k < 0)
            throw ConfigError("fading CSV: malformed row '" + line + "'");
        if (!(e.beta > 0.0) || !std::isfinite(e.beta))
            throw ConfigError("fading CSV: beta must be positive and finite");
        L = std::max(L, e.l + 1);
        K = std::max(K, e.k + 1);
        entries.push_back(e);
    }
    if (static_cast<std::size_t>(L) * K != entries.size())
        throw ConfigError("fading CSV: expected a dense L x K table");
    FadingMap map;
    map.beta = Eigen::MatrixXd::Constant(L, K, -1.0);
    for (const auto& e : entries)
        map.beta(e.l, e.k) = e.beta;
    if ((map.beta.array() <= 0.0).any())
        throw ConfigError("fading CSV: duplicate or missing entries");
    return map;
}

FadingMap read_fading_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open fading map '" + path + "'");
    return read_fading_csv(in);
}

} // namespace cfwpt
