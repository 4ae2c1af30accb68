// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cfwpt/errors.hpp"

namespace cfwpt {

NetworkState NetworkState::initial(const SystemConfig& config)
{
    NetworkState s;
    s.b = Eigen::VectorXd::Constant(config.K, config.b_0);
    s.X = Eigen::VectorXd::Zero(config.K);
    s.Y = Eigen::VectorXd::Zero(config.K);
    return s;
}

Eigen::VectorXi SlotPolicy::theta(int K) const
{
    Eigen::VectorXi th = Eigen::VectorXi::Zero(K);
    for (int k : active)
        th(k) = 1;
    return th;
}

void check_policy(const NetworkState& state, const SlotPolicy& policy, const Eigen::MatrixXd& gamma,
                  const SystemConfig& config, double r_max)
{
    const int K = state.size();
    if (policy.delta != 0 && policy.delta != 1)
        throw ContractError("policy: delta must be 0 or 1");
    if (static_cast<int>(policy.active.size()) != config.K_a)
        throw ContractError("policy: active set must have K_a sensors");
    const Eigen::VectorXi th = policy.theta(K);
    if (th.sum() != config.K_a)
        throw ContractError("policy: active set repeats a sensor");
    if (policy.r < 0.0 || policy.r > r_max)
        throw ContractError("policy: r outside [0, r_max]");
    if (policy.delta == 1) {
        if ((policy.eta.array() < 0.0).any())
            throw ContractError("policy: negative downlink coefficient");
        for (int l = 0; l < policy.eta.rows(); ++l) {
            double used = 0.0;
            for (int k : policy.active)
                used += policy.eta(l, k) * gamma(l, k);
            if (used > 1.0 + 1e-9)
                throw ContractError("policy: AP " + std::to_string(l) + " exceeds its power budget");
        }
    } else {
        const double c = config.uplink_slot_energy();
        for (int k : policy.active) {
            const double x = policy.xi(k);
            if (x < 0.0 || x > 1.0)
                throw ContractError("policy: xi outside [0, 1]");
            if (c * x > state.b(k) * (1.0 + 1e-12))
                throw ContractError("policy: sensor " + std::to_string(k) + " spends more than its battery");
        }
    }
}

Eigen::VectorXd consumption(const SlotPolicy& policy, const SystemConfig& config, int K)
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(K);
    if (policy.delta == 1)
        return c;
    for (int k : policy.active)
        c(k) = config.uplink_slot_energy() * policy.xi(k);
    return c;
}

Eigen::VectorXd update_battery(const NetworkState& state, const SlotPolicy& policy, const Eigen::VectorXd& energy,
                               const SystemConfig& config)
{
    const int K = state.size();
    Eigen::VectorXd next = state.b;
    if (policy.delta == 1) {
        for (int k = 0; k < K; ++k)
            next(k) = std::min(state.b(k) + energy(k), config.b_max);
        return next;
    }
    const Eigen::VectorXd spent = consumption(policy, config, K);
    for (int k = 0; k < K; ++k) {
        if (spent(k) > state.b(k) * (1.0 + 1e-12))
            throw ContractError("update_battery: sensor " + std::to_string(k) + " spends more than its battery");
        next(k) = std::clamp(state.b(k) - spent(k), 0.0, config.b_max);
    }
    return next;
}

double update_queue_X(double X, double b_next, double b_0)
{
    return std::max(0.0, X + b_0 - b_next);
}

double update_queue_Y(double Y, double r, double R)
{
    return std::max(0.0, Y + r - R);
}

NetworkState advance(const NetworkState& state, const Eigen::VectorXd& b_next, double r, const Eigen::VectorXd& R,
                     const SystemConfig& config)
{
    NetworkState next;
    next.b = b_next;
    next.X.resize(state.size());
    next.Y.resize(state.size());
    for (int k = 0; k < state.size(); ++k) {
        next.X(k) = update_queue_X(state.X(k), b_next(k), config.b_0);
        next.Y(k) = update_queue_Y(state.Y(k), r, R(k));
    }
    next.t = state.t + 1;
    return next;
}

double surrogate_objective(const NetworkState& state, const Eigen::VectorXd& b_next, const Eigen::VectorXd& R, double r,
                           double W)
{
    return state.X.dot(b_next) + state.Y.dot(R) + (W - state.Y.sum()) * r;
}

DriftBound exact_drift_and_bound(const NetworkState& state, const NetworkState& next, double r, const Eigen::VectorXd& R,
                                 const Eigen::VectorXd& b_next, const SystemConfig& config, double r_max)
{
    const double C0 = 0.5 * config.b_max * config.b_max;
    const double C0_bar = 0.5 * r_max * r_max;
    DriftBound d;
    const double L_now = 0.5 * (state.X.squaredNorm() + state.Y.squaredNorm());
    const double L_next = 0.5 * (next.X.squaredNorm() + next.Y.squaredNorm());
    d.phi = (L_next - L_now) - config.W * r;
    double bound = 0.0;
    for (int k = 0; k < state.size(); ++k)
        bound += state.X(k) * (config.b_0 - b_next(k)) + C0 + state.Y(k) * (r - R(k)) + C0_bar;
    d.phi_bar = bound - config.W * r;
    return d;
}

bool bound_holds(const DriftBound& d, const NetworkState& state, const NetworkState& next)
{
    const double scale = std::max({1.0, std::fabs(d.phi), std::fabs(d.phi_bar), state.X.squaredNorm(),
                                   state.Y.squaredNorm(), next.X.squaredNorm(), next.Y.squaredNorm()});
    return d.phi <= d.phi_bar + 1e-12 * scale;
}

} // namespace cfwpt
