// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cfwpt {

/// Iteration limits and tolerances of the per-slot solvers.
struct SolverKnobs {
    int fixed_point_max_iter = 500;
    double fixed_point_tol = 1e-10;

    int scp_max_iter = 200;
    double scp_rel_tol = 1e-6;
    double scp_min_radius = 1e-8;
    double scp_radius_fraction = 0.25; // initial trust radius relative to max sqrt(gamma)
    double scp_shrink = 0.5;
    double scp_expand = 1.5;

    int fp_max_alternations = 50;
    double fp_rel_tol = 1e-6;
    int chi_grid_points = 16;
    int chi_golden_iterations = 20;
};

/// Physical scene, battery and algorithm parameters. Units are SI except the
/// carrier frequency, which is in MHz.
///
/// The defaults are the desk-scale profile (16 APs, 40 sensors); `table_one()`
/// returns the full-size reference profile.
struct SystemConfig {
    int L = 16;       // access points (perfect square)
    int N = 4;        // antennas per AP
    int K = 40;       // sensors
    int K_a = 8;      // active sensors per slot
    int tau = 24;     // pilot length [symbols]
    int T_c = 200;    // symbols per slot
    double Delta = 0.2;    // slot duration [s]
    double B = 20e6;       // bandwidth [Hz]
    double f = 1900.0;     // carrier [MHz]
    double rho_p = 0.2e-3; // pilot power [W]
    double rho_u = 20e-3;  // uplink power [W]
    double rho_d = 20.0;   // downlink power per antenna [W]
    double zeta = 1.0;     // RF-to-DC efficiency
    double b_max = 0.3;    // battery capacity [J]
    double b_0 = 0.01;     // battery threshold [J]
    double W = 10.0;       // drift-penalty weight
    double sigma_sh = 8.0; // shadowing std [dB]
    double side = 50.0;    // hall side [m]
    double h_AP = 7.0;     // AP height [m]
    double h_s = 1.65;     // sensor height [m]
    double d0 = 10.0;      // path-loss breakpoints [m]
    double d1 = 50.0;
    int T_max = 2000;
    std::uint64_t seed = 1;
    bool finite_tau_accounting = false;
    int threads = 0; // Monte Carlo worker threads, 0 = hardware concurrency

    SolverKnobs solver;

    /// Fraction of each slot spent on pilots, tau / T_c.
    double alpha() const { return static_cast<double>(tau) / T_c; }
    /// Thermal noise power B * k_B * T_0 * NF [W].
    double noise_power() const;
    /// Pilot SNR scale tau * rho_p / sigma^2.
    double E_p() const { return tau * rho_p / noise_power(); }
    /// Energy drawn by one active sensor over a full-power uplink slot [J].
    double uplink_slot_energy() const { return (1.0 - alpha()) * Delta * rho_u; }

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    static SystemConfig desk();
    static SystemConfig table_one();
};

/// Parses `key = value` lines (`#` starts a comment). Keys not present keep the
/// desk-scale defaults; unknown keys are an error. The result is validated.
SystemConfig parse_config(std::istream& in);
SystemConfig load_config(const std::string& path);

/// Sets a single key from its textual value; throws ConfigError on unknown key
/// or unparsable value.
void set_config_value(SystemConfig& cfg, const std::string& key, const std::string& value);

/// Key/value listing of every setting, in file syntax order.
std::vector<std::pair<std::string, std::string>> config_entries(const SystemConfig& cfg);

} // namespace cfwpt
