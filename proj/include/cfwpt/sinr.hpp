// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

namespace cfwpt {

/// Coefficients of the matched-filter SINR
///   Gamma_k = D_k xi_k / (U_k xi_k + sum_{j != k} I_{k,j} xi_j + N_k)
/// for the sensors of one active set. Vectors are indexed by position in
/// `active`; I is K_a x K_a with a zero diagonal.
struct SinrTerms {
    std::vector<int> active;
    Eigen::VectorXd D;
    Eigen::VectorXd U;
    Eigen::VectorXd N;
    Eigen::MatrixXd I;

    int size() const { return static_cast<int>(active.size()); }
};

/// SINR of each active sensor for the per-active-sensor power vector `xi_active`.
Eigen::VectorXd sinr(const SinrTerms& terms, const Eigen::VectorXd& xi_active);

/// R_k = (1-alpha)(1-delta) log2(1 + Gamma_k) for active sensors, 0 otherwise.
/// `xi` has one entry per sensor (length K); the result has length K.
Eigen::VectorXd rates_from_terms(const SinrTerms& terms, const Eigen::VectorXd& xi, int K, double alpha, int delta);

/// Gathers the entries of a K-vector at the active positions.
Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& active);
/// Scatters a K_a-vector into a zero K-vector.
Eigen::VectorXd scatter(const Eigen::VectorXd& part, const std::vector<int>& active, int K);

} // namespace cfwpt
