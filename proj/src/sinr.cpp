// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/sinr.hpp"

#include <cmath>

#include "cfwpt/errors.hpp"

namespace cfwpt {

Eigen::VectorXd sinr(const SinrTerms& terms, const Eigen::VectorXd& xi_active)
{
    const int n = terms.size();
    if (xi_active.size() != n)
        throw DomainError("sinr: power vector does not match the active set");
    Eigen::VectorXd gamma(n);
    const Eigen::VectorXd interference = terms.I * xi_active;
    for (int k = 0; k < n; ++k) {
        const double num = terms.D(k) * xi_active(k);
        const double den = terms.U(k) * xi_active(k) + interference(k) + terms.N(k);
        gamma(k) = num > 0.0 ? num / den : 0.0;
    }
    return gamma;
}

Eigen::VectorXd rates_from_terms(const SinrTerms& terms, const Eigen::VectorXd& xi, int K, double alpha, int delta)
{
    Eigen::VectorXd rates = Eigen::VectorXd::Zero(K);
    if (delta == 1)
        return rates;
    const Eigen::VectorXd g = sinr(terms, gather(xi, terms.active));
    for (int i = 0; i < terms.size(); ++i)
        rates(terms.active[i]) = (1.0 - alpha) * std::log2(1.0 + g(i));
    return rates;
}

Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& active)
{
    Eigen::VectorXd part(static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i)
        part(static_cast<Eigen::Index>(i)) = full(active[i]);
    return part;
}

Eigen::VectorXd scatter(const Eigen::VectorXd& part, const std::vector<int>& active, int K)
{
    Eigen::VectorXd full = Eigen::VectorXd::Zero(K);
    for (std::size_t i = 0; i < active.size(); ++i)
        full(active[i]) = part(static_cast<Eigen::Index>(i));
    return full;
}

} // namespace cfwpt
