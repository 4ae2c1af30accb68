// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/detequiv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "cfwpt/errors.hpp"

namespace cfwpt {

namespace {

double z_of(const Eigen::VectorXd& c, const Eigen::VectorXd& s, int tau)
{
    double acc = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        acc += c(i) / (1.0 + s(i));
    return 1.0 / (1.0 + acc / tau);
}

} // namespace

FixedPointResult fixed_point(const Eigen::VectorXd& betas_other, double E_p, int tau, const SolverKnobs& knobs,
                             const std::optional<Eigen::VectorXd>& init)
{
    if (tau < 1)
        throw DomainError("fixed_point: tau must be at least 1");
    if ((betas_other.array() <= 0.0).any() || !(E_p > 0.0))
        throw DomainError("fixed_point: large-scale coefficients and E_p must be positive");
    FixedPointResult out;
    const Eigen::Index n = betas_other.size();
    if (n == 0)
        return out;

    const Eigen::VectorXd c = E_p * betas_other;
    Eigen::VectorXd s = init ? *init : Eigen::VectorXd::Ones(n);
    if (s.size() != n)
        throw DomainError("fixed_point: initial point has the wrong size");

    double step = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= knobs.fixed_point_max_iter; ++it) {
        const Eigen::VectorXd next = c * z_of(c, s, tau);
        const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
        const double res = (next - s).cwiseAbs().maxCoeff() / scale;
        out.iterations = it;
        out.residual = res;
        if (res < knobs.fixed_point_tol) {
            out.varsigma = next;
            out.Z = z_of(c, next, tau);
            return out;
        }
        if (res >= prev)
            step *= 0.5;
        prev = res;
        s += step * (next - s);
    }
    throw SolverError("fixed_point: no convergence after " + std::to_string(knobs.fixed_point_max_iter) +
                      " iterations, residual " + std::to_string(out.residual));
}

double trace_tilde(const FixedPointResult& fp, const Eigen::VectorXd& betas_other, double E_p, int tau)
{
    const Eigen::Index n = betas_other.size();
    if (n == 0)
        return 1.0;
    if (fp.varsigma.size() != n)
        throw DomainError("trace_tilde: fixed point does not match the interferers");
    const Eigen::VectorXd c = E_p * betas_other;
    const double Z2 = fp.Z * fp.Z;
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w(i) = c(i) / ((1.0 + fp.varsigma(i)) * (1.0 + fp.varsigma(i)));
    // (I - J) s_hat = Z^2 c with J_ji = Z^2 c_j w_i / tau.
    const Eigen::MatrixXd J = (Z2 / tau) * c * w.transpose();
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - J;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw SolverError("trace_tilde: I - J is singular");
    const Eigen::VectorXd s_hat = lu.solve(Z2 * c);
    return Z2 * (1.0 + w.dot(s_hat) / tau);
}

double bar_gamma(double beta, double Z, double E_p)
{
    const double x = E_p * beta * Z;
    return beta * x / (1.0 + x);
}

double bar_energy(const Eigen::VectorXd& eta, const Eigen::VectorXd& gamma, const SystemConfig& config, int delta,
                  int theta)
{
    if ((eta.array() < 0.0).any())
        throw DomainError("bar_energy: eta must be non-negative");
    if (delta == 0 || theta == 0)
        return 0.0;
    const double amp = eta.cwiseSqrt().dot(gamma);
    return (1.0 - config.alpha()) * config.Delta * config.zeta * config.rho_d * config.N * config.N * amp * amp;
}

Eigen::MatrixXd DetEquivSet::gamma_full(int K) const
{
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(bar_gamma.rows(), K);
    for (int i = 0; i < size(); ++i)
        g.col(active[i]) = bar_gamma.col(i);
    return g;
}

DetEquivSet bar_rate_terms(const FadingMap& fading, const std::vector<int>& active, const SystemConfig& config)
{
    const int L = fading.num_aps();
    const int K = fading.num_sensors();
    const int Ka = static_cast<int>(active.size());
    if (Ka == 0)
        throw DomainError("bar_rate_terms: empty active set");
    for (int k : active)
        if (k < 0 || k >= K)
            throw DomainError("bar_rate_terms: sensor index out of range");

    const double Ep = config.E_p();
    const double rho_u = config.rho_u;
    DetEquivSet det;
    det.active = active;
    det.Z_cal.resize(L, Ka);
    det.Z_tilde.resize(L, Ka);
    det.bar_gamma.resize(L, Ka);
    det.varrho.resize(L, Ka);
    det.vartheta.resize(L, Ka);

    Eigen::VectorXd others(Ka - 1);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < Ka; ++k) {
            for (int j = 0, p = 0; j < Ka; ++j)
                if (j != k)
                    others(p++) = fading.beta(l, active[j]);
            const FixedPointResult fp = fixed_point(others, Ep, config.tau, config.solver);
            const double Zt = trace_tilde(fp, others, Ep, config.tau);
            const double beta = fading.beta(l, active[k]);
            const double denom = 1.0 + Ep * beta * fp.Z;
            det.Z_cal(l, k) = fp.Z;
            det.Z_tilde(l, k) = Zt;
            det.bar_gamma(l, k) = bar_gamma(beta, fp.Z, Ep);
            det.varrho(l, k) = Ep * beta * beta * Zt / (denom * denom);
            det.vartheta(l, k) = Ep * beta * beta * fp.Z * fp.Z / (denom * denom);
        }
    }

    SinrTerms& t = det.terms;
    t.active = active;
    t.D.resize(Ka);
    t.U.resize(Ka);
    t.N.resize(Ka);
    t.I = Eigen::MatrixXd::Zero(Ka, Ka);
    const double sigma2 = config.noise_power();
    for (int k = 0; k < Ka; ++k) {
        double gsum = 0.0;
        double gb = 0.0;
        for (int l = 0; l < L; ++l) {
            gsum += det.bar_gamma(l, k);
            gb += det.bar_gamma(l, k) * fading.beta(l, active[k]);
        }
        t.D(k) = config.N * rho_u * gsum * gsum;
        t.U(k) = rho_u * gb;
        t.N(k) = sigma2 * gsum;
        for (int j = 0; j < Ka; ++j) {
            if (j == k)
                continue;
            double acc = 0.0;
            for (int l = 0; l < L; ++l) {
                const double bj = fading.beta(l, active[j]);
                acc += bj * det.varrho(l, k) + Ep * bj * fading.beta(l, active[k]) * det.vartheta(l, k);
            }
            t.I(k, j) = rho_u * acc;
        }
    }
    return det;
}

Eigen::VectorXd bar_rate(const DetEquivSet& det, const Eigen::VectorXd& xi, int K, double alpha, int delta)
{
    return rates_from_terms(det.terms, xi, K, alpha, delta);
}

Eigen::VectorXd bar_energies(const DetEquivSet& det, const Eigen::MatrixXd& eta, const SystemConfig& config,
                             int delta)
{
    const int K = static_cast<int>(eta.cols());
    Eigen::VectorXd e = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < det.size(); ++i) {
        const int k = det.active[i];
        e(k) = bar_energy(eta.col(k), det.bar_gamma.col(i), config, delta, 1);
    }
    return e;
}

double r_max(const FadingMap& fading, const SystemConfig& config)
{
    const double scale = config.N * config.rho_u / config.noise_power();
    const double best = fading.beta.colwise().sum().maxCoeff();
    return (1.0 - config.alpha()) * std::log2(1.0 + scale * best);
}

} // namespace cfwpt
