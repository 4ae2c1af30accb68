// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cfwpt/config.hpp"
#include "cfwpt/netmodel.hpp"
#include "cfwpt/sinr.hpp"

// Large-system limits of the pilot-dependent quantities. Everything here is a
// deterministic function of the fading map and the active set.

namespace cfwpt {

struct FixedPointResult {
    Eigen::VectorXd varsigma; // one entry per interfering sensor
    double Z = 1.0;           // limit of tr(Z^{-1}) / tau
    int iterations = 0;
    double residual = 0.0;
};

/// Solves varsigma_j = E_p beta_j Z, Z = 1 / (1 + (1/tau) sum_i E_p beta_i / (1 + varsigma_i))
/// for the sensors `betas_other` that share the pilot space with the sensor of
/// interest. Starts from varsigma = 1 unless `init` is given. Throws
/// SolverError (with the final residual) if the iteration does not converge.
FixedPointResult fixed_point(const Eigen::VectorXd& betas_other, double E_p, int tau, const SolverKnobs& knobs = {},
                             const std::optional<Eigen::VectorXd>& init = std::nullopt);

/// Limit of tr(Z^{-2}) / tau for the same interferers, from a converged fixed
/// point. Throws SolverError if the linear system is singular.
double trace_tilde(const FixedPointResult& fp, const Eigen::VectorXd& betas_other, double E_p, int tau);

/// E_p beta^2 Z / (1 + E_p beta Z).
double bar_gamma(double beta, double Z, double E_p);

/// (1-alpha) Delta zeta delta theta rho_d N^2 (sum_l sqrt(eta_l) gamma_l)^2 for
/// one sensor; `eta` and `gamma` are its L-vectors.
double bar_energy(const Eigen::VectorXd& eta, const Eigen::VectorXd& gamma, const SystemConfig& config, int delta,
                  int theta = 1);

/// Closed-form per-slot quantities for one active set. Per-(l, k) matrices are
/// L x K_a with columns ordered as `active`.
struct DetEquivSet {
    std::vector<int> active;
    Eigen::MatrixXd Z_cal;
    Eigen::MatrixXd Z_tilde;
    Eigen::MatrixXd bar_gamma;
    Eigen::MatrixXd varrho;
    Eigen::MatrixXd vartheta;
    /// barD, barU, barN and barI in the shared SINR layout.
    SinrTerms terms;

    int size() const { return static_cast<int>(active.size()); }
    /// bar_gamma scattered into an L x K matrix (zero for inactive sensors).
    Eigen::MatrixXd gamma_full(int K) const;
};

/// Throws DomainError for an empty or out-of-range active set; solver errors
/// propagate.
DetEquivSet bar_rate_terms(const FadingMap& fading, const std::vector<int>& active, const SystemConfig& config);

/// Closed-form rates [bits/s/Hz]; `xi` has length K, the result has length K.
Eigen::VectorXd bar_rate(const DetEquivSet& det, const Eigen::VectorXd& xi, int K, double alpha, int delta);

/// Closed-form harvested energy [J] of every sensor for the L x K coefficients `eta`.
Eigen::VectorXd bar_energies(const DetEquivSet& det, const Eigen::MatrixXd& eta, const SystemConfig& config,
                             int delta);

/// Rate cap with full power, perfect estimates and no interference, maximised over sensors.
double r_max(const FadingMap& fading, const SystemConfig& config);

} // namespace cfwpt
