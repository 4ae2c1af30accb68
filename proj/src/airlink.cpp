// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/airlink.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Cholesky>

#include "cfwpt/errors.hpp"

namespace cfwpt {

namespace {

void check_active(const std::vector<int>& active, int K)
{
    std::vector<int> sorted = active;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DomainError("active set repeats a sensor");
    for (int k : active)
        if (k < 0 || k >= K)
            throw DomainError("active sensor index out of range");
}

Eigen::MatrixXcd active_columns(const Eigen::MatrixXcd& psi, const std::vector<int>& active)
{
    Eigen::MatrixXcd out(psi.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = psi.col(active[i]);
    return out;
}

} // namespace

PilotSet draw_pilots(const SystemConfig& config, Rng& rng)
{
    if (config.tau < 1)
        throw DomainError("draw_pilots: tau must be at least 1");
    PilotSet p;
    p.psi.resize(config.tau, config.K);
    const double var = 1.0 / config.tau;
    for (int k = 0; k < config.K; ++k)
        for (int t = 0; t < config.tau; ++t)
            p.psi(t, k) = rng.complex_normal(var);
    return p;
}

EstimationResult lmmse_estimate(const PilotSet& pilots, const FadingMap& fading, const std::vector<int>& active,
                                const SystemConfig& config)
{
    const int L = fading.num_aps();
    const int K = fading.num_sensors();
    if (static_cast<int>(active.size()) != config.K_a)
        throw DomainError("lmmse_estimate: active set must have K_a sensors");
    check_active(active, K);
    const int tau = static_cast<int>(pilots.psi.rows());
    const double Ep = config.E_p();
    const Eigen::MatrixXcd psiA = active_columns(pilots.psi, active);
    const int Ka = static_cast<int>(active.size());

    EstimationResult est;
    est.active = active;
    est.a.resize(L);
    est.gamma_emp = Eigen::MatrixXd::Zero(L, K);

    for (int l = 0; l < L; ++l) {
        Eigen::VectorXd weights(Ka);
        for (int i = 0; i < Ka; ++i)
            weights(i) = Ep * fading.beta(l, active[i]);
        Eigen::MatrixXcd Z = Eigen::MatrixXcd::Identity(tau, tau);
        Z.noalias() += psiA * weights.asDiagonal() * psiA.adjoint();
        Eigen::LLT<Eigen::MatrixXcd> llt(Z);
        if (llt.info() != Eigen::Success)
            throw SolverError("lmmse_estimate: Cholesky of Z_l failed at AP " + std::to_string(l));
        const Eigen::MatrixXcd Zinv_psi = llt.solve(psiA);
        Eigen::MatrixXcd& a = est.a[l];
        a.resize(tau, Ka);
        for (int i = 0; i < Ka; ++i) {
            const double beta = fading.beta(l, active[i]);
            a.col(i) = std::sqrt(Ep) * beta * Zinv_psi.col(i);
            const double quad = psiA.col(i).dot(Zinv_psi.col(i)).real();
            est.gamma_emp(l, active[i]) = Ep * beta * beta * quad;
        }
    }
    return est;
}

ChannelDraw draw_channel(const SystemConfig& config, int num_active, Rng& rng)
{
    ChannelDraw draw;
    draw.h.resize(config.L);
    for (auto& h : draw.h) {
        h.resize(config.N, num_active);
        for (int k = 0; k < num_active; ++k)
            for (int n = 0; n < config.N; ++n)
                h(n, k) = rng.complex_normal(1.0);
    }
    return draw;
}

std::vector<Eigen::MatrixXcd> channel_estimates(const EstimationResult& est, const PilotSet& pilots,
                                                const FadingMap& fading, const ChannelDraw& channel,
                                                const SystemConfig& config, Rng& rng)
{
    const int L = fading.num_aps();
    const int Ka = static_cast<int>(est.active.size());
    const int tau = static_cast<int>(pilots.psi.rows());
    const double sqrtEp = std::sqrt(config.E_p());
    const Eigen::MatrixXcd psiA = active_columns(pilots.psi, est.active);

    std::vector<Eigen::MatrixXcd> ghat(L);
    for (int l = 0; l < L; ++l) {
        // Y is tau x N: column n holds the whitened pilots received on antenna n.
        Eigen::MatrixXcd g(config.N, Ka);
        for (int i = 0; i < Ka; ++i)
            g.col(i) = std::sqrt(fading.beta(l, est.active[i])) * channel.h[l].col(i);
        Eigen::MatrixXcd Y = sqrtEp * psiA * g.transpose();
        for (int n = 0; n < config.N; ++n)
            for (int t = 0; t < tau; ++t)
                Y(t, n) += rng.complex_normal(1.0);
        // ghat(n, i) = a_i^H y_n
        ghat[l] = (est.a[l].adjoint() * Y).transpose();
    }
    return ghat;
}

Eigen::VectorXd coherent_energy(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& eta,
                                const std::vector<int>& active, const SystemConfig& config, int delta)
{
    const int K = static_cast<int>(gamma.cols());
    Eigen::VectorXd e = Eigen::VectorXd::Zero(K);
    if (delta == 0)
        return e;
    const double pre = (1.0 - config.alpha()) * config.Delta * config.zeta * config.rho_d * config.N * config.N;
    for (int k : active) {
        double s = 0.0;
        for (int l = 0; l < gamma.rows(); ++l)
            s += std::sqrt(eta(l, k)) * gamma(l, k);
        e(k) = pre * s * s;
    }
    return e;
}

HarvestEstimate empirical_harvested_energy(const EstimationResult& est, const PilotSet& pilots,
                                           const FadingMap& fading, const Eigen::MatrixXd& eta,
                                           const SystemConfig& config, int delta, Rng& rng, int n_channel_draws)
{
    const int L = fading.num_aps();
    const int K = fading.num_sensors();
    const int Ka = static_cast<int>(est.active.size());
    if (eta.rows() != L || eta.cols() != K)
        throw ContractError("empirical_harvested_energy: eta must be L x K");
    if ((eta.array() < 0.0).any())
        throw ContractError("empirical_harvested_energy: eta must be non-negative");
    for (int l = 0; l < L; ++l) {
        double used = 0.0;
        for (int k : est.active)
            used += eta(l, k) * est.gamma_emp(l, k);
        if (used > 1.0 + 1e-9)
            throw ContractError("empirical_harvested_energy: AP power budget exceeded at AP " + std::to_string(l));
    }

    HarvestEstimate out;
    out.mean = Eigen::VectorXd::Zero(K);
    out.stddev = Eigen::VectorXd::Zero(K);
    out.lower_bound = coherent_energy(est.gamma_emp, eta, est.active, config, delta);
    if (delta == 0 || n_channel_draws <= 0)
        return out;

    const double pre = (1.0 - config.alpha()) * config.Delta * config.zeta;
    const double sigma2 = config.noise_power();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(Ka);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(Ka);

    for (int draw = 0; draw < n_channel_draws; ++draw) {
        const ChannelDraw ch = draw_channel(config, Ka, rng);
        const auto ghat = channel_estimates(est, pilots, fading, ch, config, rng);
        // M(j, k) = sum_l sqrt(eta_lj) ghat_lj^H g_lk: amplitude of beam j at sensor k.
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(Ka, Ka);
        for (int l = 0; l < L; ++l) {
            Eigen::MatrixXcd g(config.N, Ka);
            Eigen::VectorXd w(Ka);
            for (int i = 0; i < Ka; ++i) {
                g.col(i) = std::sqrt(fading.beta(l, est.active[i])) * ch.h[l].col(i);
                w(i) = std::sqrt(eta(l, est.active[i]));
            }
            M.noalias() += w.asDiagonal() * (ghat[l].adjoint() * g);
        }
        for (int k = 0; k < Ka; ++k) {
            const double e = pre * (config.rho_d * M.col(k).squaredNorm() + sigma2);
            sum(k) += e;
            sumsq(k) += e * e;
        }
    }
    for (int i = 0; i < Ka; ++i) {
        const double m = sum(i) / n_channel_draws;
        const double var = n_channel_draws > 1 ? std::max(0.0, (sumsq(i) - n_channel_draws * m * m) / (n_channel_draws - 1)) : 0.0;
        out.mean(est.active[i]) = m;
        out.stddev(est.active[i]) = std::sqrt(var);
    }
    return out;
}

SinrTerms empirical_sinr_terms(const EstimationResult& est, const PilotSet& pilots, const FadingMap& fading,
                               const SystemConfig& config)
{
    const int L = fading.num_aps();
    const int Ka = static_cast<int>(est.active.size());
    const double Ep = config.E_p();
    const double rho_u = config.rho_u;
    const double sigma2 = config.noise_power();
    const Eigen::MatrixXcd psiA = active_columns(pilots.psi, est.active);

    SinrTerms t;
    t.active = est.active;
    t.D = Eigen::VectorXd::Zero(Ka);
    t.U = Eigen::VectorXd::Zero(Ka);
    t.N = Eigen::VectorXd::Zero(Ka);
    t.I = Eigen::MatrixXd::Zero(Ka, Ka);

    Eigen::VectorXd gamma_sum = Eigen::VectorXd::Zero(Ka);
    // coherent(j, k) accumulates sum_l beta_lj psi_j^H a_lk
    Eigen::MatrixXcd coherent = Eigen::MatrixXcd::Zero(Ka, Ka);
    Eigen::MatrixXd incoherent = Eigen::MatrixXd::Zero(Ka, Ka);

    for (int l = 0; l < L; ++l) {
        const Eigen::MatrixXcd P = psiA.adjoint() * est.a[l]; // P(i, k) = psi_i^H a_lk
        Eigen::VectorXd beta_l(Ka);
        for (int i = 0; i < Ka; ++i)
            beta_l(i) = fading.beta(l, est.active[i]);
        const Eigen::VectorXd anorm = est.a[l].colwise().squaredNorm().transpose();
        // s(k) = sum_i beta_li |psi_i^H a_lk|^2
        const Eigen::VectorXd s = (beta_l.asDiagonal() * P.cwiseAbs2()).colwise().sum().transpose();
        for (int k = 0; k < Ka; ++k) {
            const double g = est.gamma_emp(l, est.active[k]);
            gamma_sum(k) += g;
            t.U(k) += rho_u * g * beta_l(k);
            for (int j = 0; j < Ka; ++j) {
                coherent(j, k) += beta_l(j) * P(j, k);
                incoherent(k, j) += beta_l(j) * anorm(k) + Ep * beta_l(j) * s(k);
            }
        }
    }
    for (int k = 0; k < Ka; ++k) {
        t.D(k) = rho_u * config.N * gamma_sum(k) * gamma_sum(k);
        t.N(k) = sigma2 * gamma_sum(k);
        for (int j = 0; j < Ka; ++j) {
            if (j == k)
                continue;
            t.I(k, j) = rho_u * incoherent(k, j) + rho_u * Ep * config.N * std::norm(coherent(j, k));
        }
    }
    return t;
}

Eigen::VectorXd rate_from_terms(const SinrTerms& terms, const Eigen::VectorXd& xi, int K, double alpha, int delta)
{
    return rates_from_terms(terms, xi, K, alpha, delta);
}

double interference_term(const SinrTerms& terms, int k, int j)
{
    auto pos = [&](int sensor) {
        const auto it = std::find(terms.active.begin(), terms.active.end(), sensor);
        if (it == terms.active.end())
            throw DomainError("interference_term: sensor " + std::to_string(sensor) + " is not active");
        return static_cast<int>(it - terms.active.begin());
    };
    return terms.I(pos(k), pos(j));
}

} // namespace cfwpt
