// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "cfwpt/errors.hpp"
#include "cfwpt/solvers.hpp"

using namespace cfwpt;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

NetworkState make_state(const Eigen::VectorXd& b, const Eigen::VectorXd& X, const Eigen::VectorXd& Y)
{
    NetworkState s;
    s.b = b;
    s.X = X;
    s.Y = Y;
    return s;
}

DetEquivSet downlink_det(const Eigen::MatrixXd& gamma)
{
    DetEquivSet d;
    for (int i = 0; i < gamma.cols(); ++i)
        d.active.push_back(i);
    d.bar_gamma = gamma;
    return d;
}

DetEquivSet uplink_det(const Eigen::VectorXd& D, const Eigen::VectorXd& U, const Eigen::VectorXd& N,
                       const Eigen::MatrixXd& I)
{
    DetEquivSet d;
    for (int i = 0; i < D.size(); ++i)
        d.active.push_back(i);
    d.terms.active = d.active;
    d.terms.D = D;
    d.terms.U = U;
    d.terms.N = N;
    d.terms.I = I;
    return d;
}

double energy_weight(const SystemConfig& c)
{
    return (1.0 - c.alpha()) * c.Delta * c.zeta * c.rho_d * c.N * c.N;
}

// Exhaustive search over the boundary of each AP's power ellipse; the
// objective grows in every coordinate, so the optimum lies there.
double downlink_grid_oracle(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& w, int steps)
{
    const int L = static_cast<int>(gamma.rows());
    REQUIRE(gamma.cols() == 2);
    REQUIRE(L <= 2);
    double best = 0.0;
    Eigen::MatrixXd mu(L, 2);
    const int outer = L == 2 ? steps : 0;
    for (int a = 0; a <= steps; ++a) {
        const double ta = kHalfPi * a / steps;
        mu(0, 0) = std::sqrt(gamma(0, 0)) * std::cos(ta);
        mu(0, 1) = std::sqrt(gamma(0, 1)) * std::sin(ta);
        for (int b = 0; b <= outer; ++b) {
            if (L == 2) {
                const double tb = kHalfPi * b / steps;
                mu(1, 0) = std::sqrt(gamma(1, 0)) * std::cos(tb);
                mu(1, 1) = std::sqrt(gamma(1, 1)) * std::sin(tb);
            }
            best = std::max(best, downlink_objective(mu, w));
        }
    }
    return best;
}

double uplink_grid_oracle(const NetworkState& s, const DetEquivSet& det, const SystemConfig& c, double step)
{
    const Eigen::VectorXd u = uplink_power_cap(s, det, c);
    double best = -1e300;
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(s.size());
    const int n0 = static_cast<int>(std::round(u(0) / step));
    const int n1 = static_cast<int>(std::round(u(1) / step));
    for (int i = 0; i <= n0; ++i)
        for (int j = 0; j <= n1; ++j) {
            xi(0) = std::min(u(0), i * step);
            xi(1) = std::min(u(1), j * step);
            best = std::max(best, uplink_net_utility(s, det, c, xi));
        }
    return best;
}

} // namespace

TEST_SUITE("solvers")
{
    TEST_CASE("auxiliary rate")
    {
        CHECK(optimal_r(Eigen::Vector2d(2, 3), 10, 4.5) == 4.5);
        CHECK(optimal_r(Eigen::Vector2d(7, 8), 10, 4.5) == 0.0);
        CHECK(optimal_r(Eigen::Vector2d(4, 6), 10, 4.5) == 4.5);
    }

    TEST_CASE("active set selection")
    {
        NetworkState s = make_state(Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 3, 2), Eigen::Vector3d(5, 4, 4));
        CHECK(select_active(s, 1, 2) == std::vector<int>{1, 2});
        CHECK(select_active(s, 0, 2) == std::vector<int>{0, 1});
        s.X.setConstant(7.0);
        CHECK(select_active(s, 1, 2) == std::vector<int>{0, 1});
        CHECK(select_active(s, 1, 3) == std::vector<int>{0, 1, 2});
        CHECK_THROWS_AS(select_active(s, 1, 4), DomainError);
    }

    TEST_CASE("mode selection")
    {
        CHECK(select_mode(3.2, 3.1) == 1);
        CHECK(select_mode(3.0, 3.0) == 1);
        CHECK(select_mode(0.0, 0.1) == 0);
    }

    TEST_CASE("downlink: lone sensor takes full power")
    {
        const SystemConfig c;
        Eigen::MatrixXd g(1, 1);
        g << 3e-8;
        const NetworkState s = make_state(Eigen::VectorXd::Constant(1, 0.005), Eigen::VectorXd::Ones(1),
                                          Eigen::VectorXd::Zero(1));
        const DownlinkSolution sol = solve_downlink(s, downlink_det(g), c);
        CHECK(sol.mu(0, 0) == doctest::Approx(std::sqrt(3e-8)).epsilon(1e-9));
        CHECK(sol.eta(0, 0) == doctest::Approx(1.0 / 3e-8).epsilon(1e-9));
        const double E = energy_weight(c) * 3e-8;
        CHECK(sol.energy(0) == doctest::Approx(E).epsilon(1e-9));
        CHECK(sol.objective == doctest::Approx(std::min(0.005 + E, c.b_max)));

        Eigen::MatrixXd gl(4, 1);
        gl << 1e-8, 4e-9, 2e-7, 7e-10;
        const DownlinkSolution multi = solve_downlink(s, downlink_det(gl), c);
        for (int l = 0; l < 4; ++l)
            CHECK(multi.mu(l, 0) == doctest::Approx(std::sqrt(gl(l, 0))).epsilon(1e-9));
        CHECK_THROWS_AS(solve_downlink(s, downlink_det(Eigen::MatrixXd(1, 0)), c), DomainError);
    }

    TEST_CASE("downlink: one AP serves the heavier queue only")
    {
        const SystemConfig c;
        Eigen::MatrixXd g(1, 2);
        g << 1e-8, 1e-8;
        const NetworkState s = make_state(Eigen::Vector2d::Constant(0.01), Eigen::Vector2d(1.0, 2.0),
                                          Eigen::Vector2d::Zero());
        const DownlinkSolution sol = solve_downlink(s, downlink_det(g), c);
        CHECK(sol.mu(0, 1) == doctest::Approx(1e-4).epsilon(1e-6));
        CHECK(sol.mu(0, 0) < 1e-9);
        const Eigen::VectorXd w = energy_weight(c) * Eigen::Vector2d(1.0, 2.0);
        const double oracle = downlink_grid_oracle(g, w, 1571);
        CHECK(downlink_objective(sol.mu, w) >= oracle * (1.0 - 1e-2));
    }

    TEST_CASE("downlink matches exhaustive search on small instances")
    {
        const SystemConfig c;
        Rng rng(19);
        for (int inst = 0; inst < 12; ++inst) {
            const int L = 1 + inst % 2;
            Eigen::MatrixXd g(L, 2);
            for (int l = 0; l < L; ++l)
                for (int k = 0; k < 2; ++k)
                    g(l, k) = std::pow(10.0, rng.uniform(-9.0, -7.0));
            const Eigen::Vector2d X(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0));
            const NetworkState s = make_state(Eigen::Vector2d::Constant(0.01), X, Eigen::Vector2d::Zero());
            const DownlinkSolution sol = solve_downlink(s, downlink_det(g), c);
            const Eigen::VectorXd w = energy_weight(c) * X;
            // Normalise so the objective is O(1) and 1e-2 is meaningful.
            const double scale = 1.0 / (w.maxCoeff() * g.sum());
            const double oracle = downlink_grid_oracle(g, w, L == 2 ? 1000 : 20000) * scale;
            const double got = downlink_objective(sol.mu, w) * scale;
            CHECK(got >= oracle - 1e-2);
            CHECK(got <= oracle + 1e-2);
            for (int l = 0; l < L; ++l)
                CHECK(sol.mu.row(l).cwiseProduct(sol.mu.row(l)).cwiseQuotient(g.row(l)).sum() <= 1.0 + 1e-9);
        }
    }

    TEST_CASE("downlink gradient against central differences")
    {
        Rng rng(8);
        Eigen::MatrixXd mu(3, 4);
        for (int i = 0; i < mu.size(); ++i)
            mu(i) = rng.uniform(0.1, 1.0);
        const Eigen::Vector4d w(1.0, 0.5, 2.0, 0.25);
        const Eigen::MatrixXd G = downlink_gradient(mu, w);
        const double h = 1e-6;
        for (int i = 0; i < mu.size(); ++i) {
            Eigen::MatrixXd up = mu;
            Eigen::MatrixXd dn = mu;
            up(i) += h;
            dn(i) -= h;
            const double fd = (downlink_objective(up, w) - downlink_objective(dn, w)) / (2 * h);
            CHECK(G(i) == doctest::Approx(fd).epsilon(1e-4));
        }
        // The linearisation is exact at its anchor and below f elsewhere.
        const double f0 = downlink_objective(mu, w);
        for (int t = 0; t < 50; ++t) {
            Eigen::MatrixXd m2 = mu;
            for (int i = 0; i < m2.size(); ++i)
                m2(i) += rng.uniform(-0.05, 0.05);
            const double lin = f0 + (G.array() * (m2 - mu).array()).sum();
            CHECK(downlink_objective(m2, w) >= lin - 1e-12);
        }
    }

    TEST_CASE("SCP objective path is non-decreasing and iterates are feasible")
    {
        const SystemConfig c;
        Rng rng(4);
        Eigen::MatrixXd g(6, 5);
        for (int i = 0; i < g.size(); ++i)
            g(i) = std::pow(10.0, rng.uniform(-9.0, -7.0));
        Eigen::VectorXd w(5);
        for (int k = 0; k < 5; ++k)
            w(k) = rng.uniform(0.0, 3.0);
        std::vector<double> path;
        int its = 0;
        const Eigen::MatrixXd mu = downlink_scp(g, w, (g / 5.0).cwiseSqrt(), c.solver, &its, &path);
        REQUIRE(path.size() >= 2);
        for (std::size_t i = 1; i < path.size(); ++i)
            CHECK(path[i] >= path[i - 1] * (1.0 - 1e-9));
        CHECK(path.front() < path.back());
        for (int l = 0; l < 6; ++l) {
            CHECK((mu.row(l).array() >= 0.0).all());
            CHECK(mu.row(l).cwiseProduct(mu.row(l)).cwiseQuotient(g.row(l)).sum() <= 1.0 + 1e-9);
        }
    }

    TEST_CASE("per-AP linear step")
    {
        const Eigen::Vector3d g(1.0, 2.0, 0.0);
        const Eigen::Vector3d gamma(1.0, 1.0, 1.0);
        const Eigen::Vector3d lo = Eigen::Vector3d::Zero();
        const Eigen::Vector3d hi = Eigen::Vector3d::Constant(10.0);
        const Eigen::VectorXd m = downlink_linear_step(g, gamma, lo, hi);
        // Maximiser of g.m on the unit ball is g/|g|.
        CHECK(m(0) == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-9));
        CHECK(m(1) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-9));
        CHECK(m(2) == 0.0);
        const Eigen::VectorXd boxed = downlink_linear_step(g, gamma, lo, Eigen::Vector3d::Constant(0.1));
        CHECK(boxed(0) == 0.1);
        CHECK(boxed(1) == 0.1);
    }

    TEST_CASE("uplink: lone sensor extremes")
    {
        const SystemConfig c;
        const DetEquivSet det = uplink_det(Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Constant(1, 0.1),
                                           Eigen::VectorXd::Constant(1, 0.2), Eigen::MatrixXd::Zero(1, 1));
        const double half = 0.5 * c.uplink_slot_energy();
        const NetworkState rate_only = make_state(Eigen::VectorXd::Constant(1, half), Eigen::VectorXd::Zero(1),
                                                  Eigen::VectorXd::Constant(1, 3.0));
        const UplinkSolution a = solve_uplink(rate_only, det, c);
        CHECK(a.xi(0) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(a.rates(0) > 0.0);

        const NetworkState power_only = make_state(Eigen::VectorXd::Constant(1, 0.01), Eigen::VectorXd::Constant(1, 4.0),
                                                   Eigen::VectorXd::Zero(1));
        const UplinkSolution b = solve_uplink(power_only, det, c);
        CHECK(b.xi(0) == 0.0);
        CHECK(b.objective == doctest::Approx(4.0 * 0.01));
        CHECK_THROWS_AS(solve_uplink(power_only, DetEquivSet{}, c), DomainError);
    }

    TEST_CASE("uplink matches exhaustive search with strong cross-interference")
    {
        const SystemConfig c;
        Rng rng(23);
        for (int inst = 0; inst < 8; ++inst) {
            Eigen::Vector2d D(rng.uniform(5, 50), rng.uniform(5, 50));
            Eigen::Vector2d U(rng.uniform(0.1, 1), rng.uniform(0.1, 1));
            Eigen::Vector2d N(rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5));
            Eigen::Matrix2d I;
            I << 0.0, rng.uniform(2, 20), rng.uniform(2, 20), 0.0;
            const DetEquivSet det = uplink_det(D, U, N, I);
            const double slot = c.uplink_slot_energy();
            const Eigen::Vector2d b(rng.uniform(0.3, 1.2) * slot, rng.uniform(0.3, 1.2) * slot);
            const Eigen::Vector2d X(rng.uniform(0, 3) / slot, rng.uniform(0, 3) / slot);
            const Eigen::Vector2d Y(rng.uniform(0.5, 5), rng.uniform(0.5, 5));
            const NetworkState s = make_state(b, X, Y);
            const UplinkSolution sol = solve_uplink(s, det, c);
            const double got = uplink_net_utility(s, det, c, sol.xi);
            const double oracle = uplink_grid_oracle(s, det, c, 1e-3);
            CHECK(got >= oracle - 1e-2);
            const Eigen::VectorXd u = uplink_power_cap(s, det, c);
            for (int k = 0; k < 2; ++k) {
                CHECK(sol.xi(k) >= 0.0);
                CHECK(sol.xi(k) <= u(k));
            }
            CHECK(sol.objective == doctest::Approx(got + X.dot(b)).epsilon(1e-12));
        }
    }

    TEST_CASE("uplink alternations are monotone and omega is the SINR")
    {
        SystemConfig c;
        Rng rng(41);
        const int n = 6;
        Eigen::VectorXd D(n), U(n), N(n);
        Eigen::MatrixXd I = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k) {
            D(k) = rng.uniform(10, 100);
            U(k) = rng.uniform(0.1, 1);
            N(k) = rng.uniform(0.01, 0.1);
            for (int j = 0; j < n; ++j)
                if (j != k)
                    I(k, j) = rng.uniform(0.5, 5);
        }
        const DetEquivSet det = uplink_det(D, U, N, I);
        Eigen::VectorXd b(n), X(n), Y(n);
        for (int k = 0; k < n; ++k) {
            b(k) = rng.uniform(0.2, 1.5) * c.uplink_slot_energy();
            X(k) = rng.uniform(0, 2) / c.uplink_slot_energy();
            Y(k) = rng.uniform(0.5, 5);
        }
        const NetworkState s = make_state(b, X, Y);
        for (double chi : {-1.0, 0.5, 2.0}) {
            const UplinkSolution sol = uplink_fp(s, det, c, chi);
            for (std::size_t i = 1; i < sol.objective_path.size(); ++i)
                CHECK(sol.objective_path[i] >= sol.objective_path[i - 1] - 1e-9 * std::fabs(sol.objective_path[i - 1]));
            const Eigen::VectorXd gamma = sinr(det.terms, gather(sol.xi, det.active));
            CHECK((sol.omega - gamma).cwiseAbs().maxCoeff() < 1e-6);
            if (chi >= 0.0)
                CHECK(X.dot(sol.xi) * c.uplink_slot_energy() <= chi * (1.0 + 1e-9));
        }
    }
}
