// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfwpt/config.hpp"
#include "cfwpt/netmodel.hpp"

namespace cfwpt {

struct SlotRecord {
    int t = 0;
    int delta = 0;
    std::vector<int> active;
    double r = 0.0;
    Eigen::VectorXd R; // rates credited in this slot
    Eigen::VectorXd b; // batteries after the slot
    Eigen::VectorXd X; // queues after the slot
    Eigen::VectorXd Y;
    double q_harvest = 0.0;  // surrogate of the harvest candidate
    double q_transmit = 0.0; // surrogate of the transmit candidate
    double phi = 0.0;
    double phi_bar = 0.0;
    bool bound_ok = true;
    double wall_ms = 0.0;
};

struct RunSummary {
    std::vector<double> min_avg_rate; // min_k of the running time-average rate
    std::vector<double> sigma_hat;    // spread of per-sensor time-average rates
    std::vector<double> X_bar;        // running time average of sum_k X_k
    std::vector<double> Y_bar;        // running time average of sum_k Y_k
    Eigen::VectorXd avg_rate;         // per-sensor time-average rate at the horizon
    Eigen::VectorXd avg_battery;      // per-sensor time-average battery over the second half
    double min_battery = 0.0;         // smallest battery level seen
    int harvest_slots = 0;
    int transmit_slots = 0;
    int bound_violations = 0;
    double r_max = 0.0;
    std::uint64_t seed = 0;
    SystemConfig config;
};

struct RunResult {
    std::vector<SlotRecord> records;
    RunSummary summary;
};

/// Drift-plus-penalty scheduler. Uses `fading` when given, otherwise the map
/// generated from config.seed. Errors are rethrown with the slot index.
RunResult run_lyapunov(const SystemConfig& config, const std::optional<FadingMap>& fading = std::nullopt);

/// Greedy benchmark: transmit at full power with the best-charged sensors until
/// some battery cannot fund a full slot, then harvest for the least-charged ones
/// with uniform power until every battery is back at b_0.
RunResult run_greedy(const SystemConfig& config, const std::optional<FadingMap>& fading = std::nullopt);

/// Greedy mode for the next slot: leave transmit mode (0) once some battery
/// cannot fund a full-power slot, leave harvest mode (1) once every battery is
/// back at b_0.
int greedy_next_mode(int mode, const Eigen::VectorXd& b, const SystemConfig& config);

/// Throws DomainError for an empty record list.
RunSummary compute_metrics(const std::vector<SlotRecord>& records, const SystemConfig& config);

struct ValidationRow {
    int l = -1; // AP index for per-(l, k) tables, -1 otherwise
    int k = 0;
    double closed_form = 0.0;
    double mc_mean = 0.0;
    double mc_std = 0.0;
    int n_trials = 0;
};

struct KaSweepRow {
    int K_a = 0;
    double mean_energy = 0.0;
    double mean_rate = 0.0;
    int n_schedules = 0;
};

struct ValidationReport {
    std::vector<int> active;
    std::vector<ValidationRow> gamma;  // per (l, active k)
    std::vector<ValidationRow> energy; // realised lower-bound energy vs closed form
    std::vector<ValidationRow> energy_full; // full conditional energy vs closed form
    std::vector<ValidationRow> rate;
    std::vector<KaSweepRow> ka_sweep;
};

/// Monte Carlo check of the closed forms for a random schedule under uniform
/// power control (eta gamma = 1/K_a, xi = 1). Throws DomainError if n_trials < 1.
/// `ka_values` empty skips the sweep.
ValidationReport validate_asymptotics(const SystemConfig& config, const FadingMap& fading, int n_trials,
                                      const std::vector<int>& ka_values = {}, int energy_draws = 4);

// --------------------------------------------------------------- writers

/// Floating point text with 17 significant digits.
std::string fmt17(double v);

void write_slots_csv(const std::vector<SlotRecord>& records, std::ostream& out);
void write_summary_json(const RunSummary& summary, std::ostream& out);
void write_validation_csv(const std::vector<ValidationRow>& rows, bool with_ap, std::ostream& out);
void write_ka_sweep_csv(const std::vector<KaSweepRow>& rows, std::ostream& out);

} // namespace cfwpt
