// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

#include "cfwpt/config.hpp"
#include "cfwpt/netmodel.hpp"
#include "cfwpt/rng.hpp"
#include "cfwpt/sinr.hpp"

// Finite pilot-length ground truth: random pilots, small-scale fading draws,
// LMMSE estimation and the Monte Carlo estimators the closed forms are
// checked against.
//
// Received pilots are whitened by 1/sigma, so the per-AP pilot Gram matrix is
// Z_l = I + sum_j E_p beta_lj psi_j psi_j^H and every quantity below is in
// channel units.

namespace cfwpt {

/// tau x K pilot matrix with i.i.d. CN(0, 1/tau) entries.
struct PilotSet {
    Eigen::MatrixXcd psi;
};

PilotSet draw_pilots(const SystemConfig& config, Rng& rng);

struct EstimationResult {
    std::vector<int> active;
    /// Per AP, tau x K_a; column i is a_{l, active[i]}.
    std::vector<Eigen::MatrixXcd> a;
    /// L x K mean-square estimate E_p beta^2 psi^H Z^{-1} psi; zero for inactive sensors.
    Eigen::MatrixXd gamma_emp;
};

/// Throws DomainError if `active` has the wrong size or repeats a sensor and
/// SolverError if a Cholesky factorisation of Z_l fails.
EstimationResult lmmse_estimate(const PilotSet& pilots, const FadingMap& fading, const std::vector<int>& active,
                                const SystemConfig& config);

/// Small-scale fading of the active sensors: per AP an N x K_a matrix of CN(0,1).
struct ChannelDraw {
    std::vector<Eigen::MatrixXcd> h;
};

ChannelDraw draw_channel(const SystemConfig& config, int num_active, Rng& rng);

/// Per AP, N x K_a LMMSE estimates ghat = a^H y of the true channels
/// g = sqrt(beta) h, from pilots received with fresh whitened noise drawn from `rng`.
std::vector<Eigen::MatrixXcd> channel_estimates(const EstimationResult& est, const PilotSet& pilots,
                                                const FadingMap& fading, const ChannelDraw& channel,
                                                const SystemConfig& config, Rng& rng);

struct HarvestEstimate {
    Eigen::VectorXd mean;        // K, full conditional harvested energy averaged over draws [J]
    Eigen::VectorXd stddev;      // K, spread across draws [J]
    Eigen::VectorXd lower_bound; // K, the coherent-gain term evaluated with gamma_emp [J]
};

/// Harvested energy per slot. For each channel draw the expectation over
/// data symbols and receiver noise is taken in closed form; the draws
/// themselves are averaged. `eta` is L x K. Throws ContractError if eta is
/// negative or the per-AP budget sum_k eta gamma_emp <= 1 is exceeded.
HarvestEstimate empirical_harvested_energy(const EstimationResult& est, const PilotSet& pilots,
                                           const FadingMap& fading, const Eigen::MatrixXd& eta,
                                           const SystemConfig& config, int delta, Rng& rng, int n_channel_draws);

/// Lower-bound energy (1-alpha) Delta zeta rho_d N^2 (sum_l sqrt(eta) gamma)^2
/// for every active sensor, with gamma taken from `gamma` (L x K).
Eigen::VectorXd coherent_energy(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& eta,
                                const std::vector<int>& active, const SystemConfig& config, int delta);

/// SINR coefficients for the realised pilots.
SinrTerms empirical_sinr_terms(const EstimationResult& est, const PilotSet& pilots, const FadingMap& fading,
                               const SystemConfig& config);

/// Per-sensor rates [bits/s/Hz] from realised SINR terms; xi has length K.
Eigen::VectorXd rate_from_terms(const SinrTerms& terms, const Eigen::VectorXd& xi, int K, double alpha, int delta);

/// Coefficient I_{k,j} addressed by sensor index; throws DomainError if either
/// sensor is not active.
double interference_term(const SinrTerms& terms, int k, int j);

} // namespace cfwpt
