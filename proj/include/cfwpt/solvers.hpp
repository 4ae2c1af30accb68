// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

#include "cfwpt/config.hpp"
#include "cfwpt/detequiv.hpp"
#include "cfwpt/ledger.hpp"

namespace cfwpt {

/// r_max when sum_k Y_k <= W, otherwise 0.
double optimal_r(const Eigen::VectorXd& Y, double W, double r_max);

/// The K_a sensors with the largest backlog (ties to the smaller index), in
/// ascending index order. `mode` 1 ranks by X, 0 by Y.
std::vector<int> select_active(const NetworkState& state, int mode, int K_a);

/// 1 when q_harvest >= q_transmit.
int select_mode(double q_harvest, double q_transmit);

// ---------------------------------------------------------------- downlink

struct DownlinkSolution {
    Eigen::MatrixXd eta;    // L x K
    Eigen::MatrixXd mu;     // L x K_a, mu = sqrt(eta) gamma_bar
    Eigen::VectorXd energy; // K, closed-form harvested energy [J]
    /// sum_k X_k b_next_k with b_next = min(b + energy, b_max).
    double objective = 0.0;
    int iterations = 0;
    /// Linearised objective f(mu) after every accepted iterate, best start only.
    std::vector<double> objective_path;
};

/// f(mu) = sum_k X_k c (sum_l mu_lk)^2, c = (1-alpha) Delta zeta rho_d N^2.
/// `weights` holds X_k c per active position.
double downlink_objective(const Eigen::MatrixXd& mu, const Eigen::VectorXd& weights);
/// Gradient of downlink_objective, L x K_a.
Eigen::MatrixXd downlink_gradient(const Eigen::MatrixXd& mu, const Eigen::VectorXd& weights);

/// Maximises g . m over {m >= 0, sum m^2 / gamma <= 1, lo <= m <= hi} for one
/// AP. Requires lo to be feasible.
Eigen::VectorXd downlink_linear_step(const Eigen::VectorXd& g, const Eigen::VectorXd& gamma, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi);

/// Sequential convex programming from a given feasible start; returns mu.
Eigen::MatrixXd downlink_scp(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& weights, Eigen::MatrixXd mu,
                             const SolverKnobs& knobs, int* iterations = nullptr,
                             std::vector<double>* path = nullptr);

/// Harvest-mode power control. Throws DomainError for an empty active set.
DownlinkSolution solve_downlink(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config);

// ------------------------------------------------------------------ uplink

struct UplinkSolution {
    Eigen::VectorXd xi;    // K
    Eigen::VectorXd omega; // K_a, SINR at the solution
    Eigen::VectorXd rates; // K, closed-form rates
    /// sum_k (X_k b_next_k + Y_k R_k).
    double objective = 0.0;
    double chi_star = 0.0; // budget of the winning slice; negative for the unconstrained solve
    int alternations = 0;
    /// Objective after every alternation of the winning slice.
    std::vector<double> objective_path;
};

/// sum_k Y_k R_k(xi) - sum_k (1-alpha) X_k Delta rho_u xi_k over the active
/// sensors; `xi` has length K.
double uplink_net_utility(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config,
                          const Eigen::VectorXd& xi);

/// Per-sensor box bound min(1, b_k / ((1-alpha) Delta rho_u)), length K_a.
Eigen::VectorXd uplink_power_cap(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config);

/// Fractional-programming solve of one slice. With chi >= 0 the rate sum is
/// maximised under sum_k (1-alpha) X_k Delta rho_u xi_k <= chi; with chi < 0
/// the net utility is maximised with no budget. The result is scored by
/// uplink_net_utility (stored in `objective` without the sum_k X_k b_k part).
UplinkSolution uplink_fp(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config, double chi);

/// Transmit-mode power control. Throws DomainError for an empty active set
/// and SolverError when the objective is not finite.
UplinkSolution solve_uplink(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config);

} // namespace cfwpt
