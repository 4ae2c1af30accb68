// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfwpt/errors.hpp"

namespace cfwpt {

double optimal_r(const Eigen::VectorXd& Y, double W, double r_max)
{
    return Y.sum() <= W ? r_max : 0.0;
}

std::vector<int> select_active(const NetworkState& state, int mode, int K_a)
{
    const Eigen::VectorXd& key = mode == 1 ? state.X : state.Y;
    const int K = static_cast<int>(key.size());
    if (K_a < 0 || K_a > K)
        throw DomainError("select_active: K_a outside [0, K]");
    std::vector<int> idx(K);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return key(a) > key(b); });
    idx.resize(K_a);
    std::sort(idx.begin(), idx.end());
    return idx;
}

int select_mode(double q_harvest, double q_transmit)
{
    return q_harvest >= q_transmit ? 1 : 0;
}

// ---------------------------------------------------------------- downlink

double downlink_objective(const Eigen::MatrixXd& mu, const Eigen::VectorXd& weights)
{
    const Eigen::VectorXd s = mu.colwise().sum().transpose();
    return weights.dot(s.cwiseProduct(s));
}

Eigen::MatrixXd downlink_gradient(const Eigen::MatrixXd& mu, const Eigen::VectorXd& weights)
{
    const Eigen::RowVectorXd s = mu.colwise().sum();
    Eigen::RowVectorXd g = 2.0 * weights.transpose().cwiseProduct(s);
    return g.replicate(mu.rows(), 1);
}

Eigen::VectorXd downlink_linear_step(const Eigen::VectorXd& g, const Eigen::VectorXd& gamma, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi)
{
    const Eigen::Index n = g.size();
    const double gscale = g.cwiseAbs().maxCoeff();
    if (!(gscale > 0.0))
        return lo;
    auto at = [&](double lambda) {
        Eigen::VectorXd m(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double free = g(k) > 0.0 ? (g(k) / gscale) * gamma(k) / (2.0 * lambda) : 0.0;
            m(k) = std::clamp(free, lo(k), hi(k));
        }
        return m;
    };
    auto load = [&](const Eigen::VectorXd& m) { return m.cwiseProduct(m).cwiseQuotient(gamma).sum(); };

    Eigen::VectorXd top(n);
    for (Eigen::Index k = 0; k < n; ++k)
        top(k) = g(k) > 0.0 ? hi(k) : lo(k);
    if (load(top) <= 1.0)
        return top;

    double lam_hi = 1.0;
    while (load(at(lam_hi)) > 1.0 && lam_hi < 1e300)
        lam_hi *= 2.0;
    double lam_lo = lam_hi;
    while (load(at(lam_lo)) <= 1.0 && lam_lo > 1e-300)
        lam_lo *= 0.5;
    for (int it = 0; it < 100; ++it) {
        const double mid = std::sqrt(lam_lo * lam_hi);
        if (load(at(mid)) > 1.0)
            lam_lo = mid;
        else
            lam_hi = mid;
        if (lam_hi - lam_lo <= 1e-15 * lam_hi)
            break;
    }
    return at(lam_hi);
}

Eigen::MatrixXd downlink_scp(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& weights, Eigen::MatrixXd mu,
                             const SolverKnobs& knobs, int* iterations, std::vector<double>* path)
{
    const Eigen::Index L = gamma.rows();
    const double rho0 = knobs.scp_radius_fraction * gamma.cwiseSqrt().maxCoeff();
    double rho = rho0;
    double f = downlink_objective(mu, weights);
    if (path)
        path->assign(1, f);
    int it = 0;
    while (it < knobs.scp_max_iter) {
        ++it;
        const Eigen::MatrixXd grad = downlink_gradient(mu, weights);
        if (!(grad.cwiseAbs().maxCoeff() > 0.0))
            break;
        Eigen::MatrixXd cand(mu.rows(), mu.cols());
        for (Eigen::Index l = 0; l < L; ++l) {
            const Eigen::VectorXd m = mu.row(l).transpose();
            const Eigen::VectorXd lo = (m.array() - rho).max(0.0).matrix();
            const Eigen::VectorXd hi = (m.array() + rho).matrix();
            cand.row(l) = downlink_linear_step(grad.row(l).transpose(), gamma.row(l).transpose(), lo, hi).transpose();
        }
        const double f_new = downlink_objective(cand, weights);
        if (f_new > f) {
            const double rel = (f_new - f) / std::fabs(f_new);
            mu = cand;
            f = f_new;
            if (path)
                path->push_back(f);
            rho = std::min(rho * knobs.scp_expand, rho0);
            if (rel < knobs.scp_rel_tol)
                break;
        } else {
            rho *= knobs.scp_shrink;
            if (rho < knobs.scp_min_radius)
                break;
        }
    }
    if (iterations)
        *iterations = it;
    return mu;
}

DownlinkSolution solve_downlink(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config)
{
    const int Ka = det.size();
    if (Ka == 0)
        throw DomainError("solve_downlink: empty active set");
    const int K = state.size();
    const Eigen::MatrixXd& gamma = det.bar_gamma;
    const Eigen::Index L = gamma.rows();
    const double c = (1.0 - config.alpha()) * config.Delta * config.zeta * config.rho_d * config.N * config.N;
    Eigen::VectorXd weights(Ka);
    for (int i = 0; i < Ka; ++i)
        weights(i) = c * state.X(det.active[i]);

    std::vector<Eigen::MatrixXd> starts;
    starts.push_back((gamma / Ka).cwiseSqrt());
    for (int i = 0; i < Ka; ++i) {
        if (!(weights(i) > 0.0))
            continue;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(L, Ka);
        m.col(i) = gamma.col(i).cwiseSqrt();
        starts.push_back(m);
    }

    DownlinkSolution best;
    double best_f = -1.0;
    for (const auto& start : starts) {
        int its = 0;
        std::vector<double> path;
        Eigen::MatrixXd mu = downlink_scp(gamma, weights, start, config.solver, &its, &path);
        const double f = downlink_objective(mu, weights);
        best.iterations += its;
        if (f > best_f) {
            best_f = f;
            best.mu = mu;
            best.objective_path = std::move(path);
        }
    }

    // Snap the per-AP budget to exact feasibility.
    for (Eigen::Index l = 0; l < L; ++l) {
        const double load = best.mu.row(l).cwiseProduct(best.mu.row(l)).cwiseQuotient(gamma.row(l)).sum();
        if (load > 1.0)
            best.mu.row(l) /= std::sqrt(load);
    }

    best.eta = Eigen::MatrixXd::Zero(L, K);
    best.energy = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < Ka; ++i) {
        const int k = det.active[i];
        for (Eigen::Index l = 0; l < L; ++l) {
            const double m = best.mu(l, i);
            best.eta(l, k) = m * m / (gamma(l, i) * gamma(l, i));
        }
        const double amp = best.mu.col(i).sum();
        best.energy(k) = c * amp * amp;
    }
    double q = 0.0;
    for (int k = 0; k < K; ++k)
        q += state.X(k) * std::min(state.b(k) + best.energy(k), config.b_max);
    best.objective = q;
    return best;
}

// ------------------------------------------------------------------ uplink

Eigen::VectorXd uplink_power_cap(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config)
{
    const double c = config.uplink_slot_energy();
    Eigen::VectorXd u(det.size());
    for (int i = 0; i < det.size(); ++i)
        u(i) = std::clamp(state.b(det.active[i]) / c, 0.0, 1.0);
    return u;
}

double uplink_net_utility(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config,
                          const Eigen::VectorXd& xi)
{
    const int K = state.size();
    const Eigen::VectorXd R = bar_rate(det, xi, K, config.alpha(), 0);
    double v = 0.0;
    for (int k : det.active)
        v += state.Y(k) * R(k) - state.X(k) * config.uplink_slot_energy() * xi(k);
    return v;
}

namespace {

// Rate part (chi >= 0) or full net utility (chi < 0), over the active positions.
double slice_value(const SinrTerms& t, const Eigen::VectorXd& w_log2, const Eigen::VectorXd& a, const Eigen::VectorXd& x,
                   bool penalised)
{
    const Eigen::VectorXd g = sinr(t, x);
    double v = 0.0;
    for (int i = 0; i < t.size(); ++i) {
        v += w_log2(i) * std::log2(1.0 + g(i));
        if (penalised)
            v -= a(i) * x(i);
    }
    return v;
}

} // namespace

UplinkSolution uplink_fp(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config, double chi)
{
    const int Ka = det.size();
    if (Ka == 0)
        throw DomainError("uplink_fp: empty active set");
    const int K = state.size();
    const SinrTerms& t = det.terms;
    const bool penalised = chi < 0.0;
    const double alpha = config.alpha();
    const Eigen::VectorXd u = uplink_power_cap(state, det, config);
    Eigen::VectorXd a(Ka), wrate(Ka);
    for (int i = 0; i < Ka; ++i) {
        const int k = det.active[i];
        a(i) = state.X(k) * config.uplink_slot_energy();
        wrate(i) = (1.0 - alpha) * state.Y(k);
    }
    // Natural-log weights for the transform.
    const Eigen::VectorXd w = wrate / std::log(2.0);

    Eigen::VectorXd x = u;
    if (!penalised) {
        const double spend = a.dot(u);
        if (spend > chi)
            x = spend > 0.0 ? Eigen::VectorXd(u * (chi / spend)) : u;
    }

    UplinkSolution sol;
    double val = slice_value(t, wrate, a, x, penalised);
    sol.objective_path.push_back(val);
    Eigen::VectorXd omega = sinr(t, x);

    for (int alt = 1; alt <= config.solver.fp_max_alternations; ++alt) {
        sol.alternations = alt;
        omega = sinr(t, x);
        const Eigen::VectorXd interf = t.I * x;
        Eigen::VectorXd y(Ka), wy(Ka);
        for (int i = 0; i < Ka; ++i) {
            const double A = t.D(i) * x(i);
            const double total = A + t.U(i) * x(i) + interf(i) + t.N(i);
            y(i) = std::sqrt(A) / total;
            wy(i) = w(i) * (1.0 + omega(i)) * y(i) * y(i);
        }
        Eigen::VectorXd p(Ka), q(Ka);
        for (int k = 0; k < Ka; ++k) {
            p(k) = 2.0 * w(k) * (1.0 + omega(k)) * y(k) * std::sqrt(t.D(k));
            q(k) = wy(k) * (t.D(k) + t.U(k));
            for (int i = 0; i < Ka; ++i)
                if (i != k)
                    q(k) += wy(i) * t.I(i, k);
        }
        auto argmax = [&](double nu) {
            Eigen::VectorXd z(Ka);
            for (int k = 0; k < Ka; ++k) {
                const double lin = q(k) + (penalised ? a(k) : 0.0) + nu * a(k);
                if (!(p(k) > 0.0))
                    z(k) = 0.0;
                else if (!(lin > 0.0))
                    z(k) = u(k);
                else {
                    const double s = p(k) / (2.0 * lin);
                    z(k) = std::min(s * s, u(k));
                }
            }
            return z;
        };
        Eigen::VectorXd next = argmax(0.0);
        if (!penalised && a.dot(next) > chi) {
            double hi = 1.0;
            while (a.dot(argmax(hi)) > chi && hi < 1e300)
                hi *= 2.0;
            double lo = 0.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (a.dot(argmax(mid)) > chi)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo <= 1e-14 * hi)
                    break;
            }
            next = argmax(hi);
        }
        const double next_val = slice_value(t, wrate, a, next, penalised);
        if (!std::isfinite(next_val))
            throw SolverError("uplink_fp: objective is not finite");
        const double change = std::fabs(next_val - val) / std::max(std::fabs(next_val), 1e-300);
        if (next_val >= val) {
            x = next;
            val = next_val;
        }
        sol.objective_path.push_back(val);
        if (change < config.solver.fp_rel_tol)
            break;
    }

    sol.xi = scatter(x, det.active, K);
    sol.omega = sinr(t, x);
    sol.rates = bar_rate(det, sol.xi, K, alpha, 0);
    sol.chi_star = chi;
    sol.objective = uplink_net_utility(state, det, config, sol.xi);
    return sol;
}

UplinkSolution solve_uplink(const NetworkState& state, const DetEquivSet& det, const SystemConfig& config)
{
    const int Ka = det.size();
    if (Ka == 0)
        throw DomainError("solve_uplink: empty active set");
    const SolverKnobs& kn = config.solver;

    UplinkSolution best = uplink_fp(state, det, config, -1.0);
    auto consider = [&](UplinkSolution&& s) {
        if (s.objective > best.objective)
            best = std::move(s);
    };

    const Eigen::VectorXd u = uplink_power_cap(state, det, config);
    double chi_max = 0.0;
    for (int i = 0; i < Ka; ++i)
        chi_max += state.X(det.active[i]) * config.uplink_slot_energy() * u(i);

    if (chi_max > 0.0 && kn.chi_grid_points > 0) {
        const int G = kn.chi_grid_points;
        std::vector<double> grid(G);
        std::vector<double> value(G);
        int g_best = 0;
        for (int g = 0; g < G; ++g) {
            grid[g] = G == 1 ? chi_max : chi_max * std::pow(10.0, -3.0 * (G - 1 - g) / (G - 1));
            UplinkSolution s = uplink_fp(state, det, config, grid[g]);
            value[g] = s.objective;
            if (value[g] > value[g_best])
                g_best = g;
            consider(std::move(s));
        }
        // Golden-section pass between the neighbours of the best grid point.
        double lo = g_best > 0 ? grid[g_best - 1] : 0.0;
        double hi = g_best + 1 < G ? grid[g_best + 1] : chi_max;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double c1 = hi - phi * (hi - lo);
        double c2 = lo + phi * (hi - lo);
        UplinkSolution s1 = uplink_fp(state, det, config, c1);
        UplinkSolution s2 = uplink_fp(state, det, config, c2);
        for (int it = 0; it < kn.chi_golden_iterations; ++it) {
            if (s1.objective >= s2.objective) {
                hi = c2;
                c2 = c1;
                s2 = s1;
                c1 = hi - phi * (hi - lo);
                s1 = uplink_fp(state, det, config, c1);
            } else {
                lo = c1;
                c1 = c2;
                s1 = s2;
                c2 = lo + phi * (hi - lo);
                s2 = uplink_fp(state, det, config, c2);
            }
        }
        consider(std::move(s1));
        consider(std::move(s2));
    }

    if (!std::isfinite(best.objective))
        throw SolverError("solve_uplink: objective is not finite");
    // Report the full surrogate sum_k X_k b_next_k + Y_k R_k.
    double base = 0.0;
    for (int k = 0; k < state.size(); ++k)
        base += state.X(k) * state.b(k);
    best.objective += base;
    return best;
}

} // namespace cfwpt
