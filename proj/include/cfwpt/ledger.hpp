// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

#include "cfwpt/config.hpp"

namespace cfwpt {

/// Batteries and virtual queues at the start of slot t.
struct NetworkState {
    Eigen::VectorXd b; // battery levels [J]
    Eigen::VectorXd X; // energy backlogs [J]
    Eigen::VectorXd Y; // rate backlogs [bits/s/Hz]
    int t = 0;

    /// b = b_0, X = Y = 0.
    static NetworkState initial(const SystemConfig& config);
    int size() const { return static_cast<int>(b.size()); }
};

/// One slot's decision. `eta` is L x K, `xi` has length K; only entries of
/// active sensors are meaningful.
struct SlotPolicy {
    int delta = 0; // 1 = harvest, 0 = transmit
    std::vector<int> active;
    Eigen::MatrixXd eta;
    Eigen::VectorXd xi;
    double r = 0.0;

    /// 0/1 activation indicator of length K.
    Eigen::VectorXi theta(int K) const;
};

/// Throws ContractError when the policy violates an invariant: wrong active
/// set size, negative eta, xi outside [0, 1], the per-AP power budget (checked
/// against `gamma`, L x K), the per-sensor energy budget or r outside [0, r_max].
void check_policy(const NetworkState& state, const SlotPolicy& policy, const Eigen::MatrixXd& gamma,
                  const SystemConfig& config, double r_max);

/// Energy spent by each sensor in a transmit slot, (1-alpha) Delta rho_u theta xi.
Eigen::VectorXd consumption(const SlotPolicy& policy, const SystemConfig& config, int K);

/// min(b - (1-delta) consumption + delta energy, b_max). Throws ContractError if
/// a sensor would spend more than it holds.
Eigen::VectorXd update_battery(const NetworkState& state, const SlotPolicy& policy, const Eigen::VectorXd& energy,
                               const SystemConfig& config);

double update_queue_X(double X, double b_next, double b_0);
double update_queue_Y(double Y, double r, double R);

/// Queues, batteries and slot index after applying a decision.
NetworkState advance(const NetworkState& state, const Eigen::VectorXd& b_next, double r, const Eigen::VectorXd& R,
                     const SystemConfig& config);

/// sum_k (X_k b_next_k + Y_k R_k) + (W - sum_k Y_k) r.
double surrogate_objective(const NetworkState& state, const Eigen::VectorXd& b_next, const Eigen::VectorXd& R, double r,
                           double W);

struct DriftBound {
    double phi = 0.0;     // exact drift minus W r
    double phi_bar = 0.0; // linear upper bound
};

/// Exact drift-plus-penalty of one transition and its linear upper bound with
/// constants b_max^2/2 and r_max^2/2 per sensor.
DriftBound exact_drift_and_bound(const NetworkState& state, const NetworkState& next, double r, const Eigen::VectorXd& R,
                                 const Eigen::VectorXd& b_next, const SystemConfig& config, double r_max);

/// Whether phi <= phi_bar up to rounding relative to the magnitudes involved.
bool bound_holds(const DriftBound& d, const NetworkState& state, const NetworkState& next);

} // namespace cfwpt
