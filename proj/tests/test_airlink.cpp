// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "doctest.h"

#include "cfwpt/airlink.hpp"
#include "cfwpt/detequiv.hpp"
#include "cfwpt/errors.hpp"

using namespace cfwpt;

namespace {

SystemConfig tiny(int L, int K, int K_a, int tau)
{
    SystemConfig c;
    c.L = L;
    c.K = K;
    c.K_a = K_a;
    c.tau = tau;
    return c;
}

FadingMap constant_map(int L, int K, double beta)
{
    FadingMap m;
    m.beta = Eigen::MatrixXd::Constant(L, K, beta);
    return m;
}

PilotSet unit_pilots(int tau, int K)
{
    PilotSet p;
    p.psi = Eigen::MatrixXcd::Zero(tau, K);
    for (int k = 0; k < K; ++k)
        p.psi(k % tau, k) = 1.0;
    return p;
}

} // namespace

TEST_SUITE("airlink")
{
    TEST_CASE("pilots have unit expected column norm")
    {
        SystemConfig c = SystemConfig::table_one();
        double sum = 0.0;
        double ss = 0.0;
        const int draws = 500;
        for (int d = 0; d < draws; ++d) {
            Rng rng = Rng::stream(9, Stream::Pilots, d);
            const PilotSet p = draw_pilots(c, rng);
            REQUIRE(p.psi.rows() == 60);
            REQUIRE(p.psi.cols() == 200);
            const double m = p.psi.colwise().squaredNorm().mean();
            sum += m;
            ss += m * m;
        }
        const double mean = sum / draws;
        const double se = std::sqrt((ss / draws - mean * mean) / draws);
        CHECK(std::fabs(mean - 1.0) < 3.0 * se + 1e-12);

        SystemConfig one = tiny(1, 3, 1, 1);
        Rng r1(4);
        CHECK(draw_pilots(one, r1).psi.rows() == 1);
        Rng a(5);
        Rng b(5);
        CHECK(draw_pilots(c, a).psi == draw_pilots(c, b).psi);
    }

    TEST_CASE("single sensor on a unit pilot")
    {
        SystemConfig c = tiny(1, 1, 1, 4);
        const double beta = 1.0 / c.E_p();
        const FadingMap m = constant_map(1, 1, beta);
        const EstimationResult est = lmmse_estimate(unit_pilots(4, 1), m, {0}, c);
        CHECK(est.gamma_emp(0, 0) == doctest::Approx(beta / 2.0).epsilon(1e-12));
    }

    TEST_CASE("orthogonal pilots decouple")
    {
        SystemConfig c = tiny(1, 2, 2, 4);
        FadingMap m;
        m.beta.resize(1, 2);
        m.beta << 3.0 / c.E_p(), 0.5 / c.E_p();
        const EstimationResult est = lmmse_estimate(unit_pilots(4, 2), m, {0, 1}, c);
        for (int k = 0; k < 2; ++k) {
            const double x = c.E_p() * m.beta(0, k);
            CHECK(est.gamma_emp(0, k) == doctest::Approx(x * m.beta(0, k) / (1.0 + x)).epsilon(1e-12));
        }
    }

    TEST_CASE("estimation preconditions")
    {
        SystemConfig c = tiny(1, 3, 2, 4);
        const FadingMap m = constant_map(1, 3, 1e-9);
        const PilotSet p = unit_pilots(4, 3);
        CHECK_THROWS_AS(lmmse_estimate(p, m, {0}, c), DomainError);
        CHECK_THROWS_AS(lmmse_estimate(p, m, {1, 1}, c), DomainError);
        CHECK_THROWS_AS(lmmse_estimate(p, m, {0, 5}, c), DomainError);
    }

    TEST_CASE("estimate energy below channel energy and Z above identity")
    {
        const SystemConfig c;
        const FadingMap m = make_fading_map(c);
        std::vector<int> act{0, 3, 7, 11, 19, 23, 31, 39};
        Rng rng(21);
        const PilotSet p = draw_pilots(c, rng);
        const EstimationResult est = lmmse_estimate(p, m, act, c);
        for (int l = 0; l < c.L; ++l)
            for (int k : act) {
                CHECK(est.gamma_emp(l, k) > 0.0);
                CHECK(est.gamma_emp(l, k) < m.beta(l, k));
            }
        for (int l = 0; l < 3; ++l) {
            Eigen::MatrixXcd Z = Eigen::MatrixXcd::Identity(c.tau, c.tau);
            for (int k : act)
                Z += c.E_p() * m.beta(l, k) * p.psi.col(k) * p.psi.col(k).adjoint();
            CHECK((Z - Z.adjoint()).norm() < 1e-9 * Z.norm());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Z);
            CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-9);
        }
    }

    TEST_CASE("mean empirical gamma matches the closed form")
    {
        const SystemConfig c;
        const FadingMap m = make_fading_map(c);
        std::vector<int> act{2, 5, 9, 14, 20, 26, 33, 38};
        const DetEquivSet det = bar_rate_terms(m, act, c);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(c.L, c.K);
        const int draws = 500;
        for (int d = 0; d < draws; ++d) {
            Rng rng = Rng::stream(3, Stream::MonteCarlo, d);
            sum += lmmse_estimate(draw_pilots(c, rng), m, act, c).gamma_emp;
        }
        double worst = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int l = 0; l < c.L; ++l)
                worst = std::max(worst, std::fabs(sum(l, act[i]) / draws / det.bar_gamma(l, i) - 1.0));
        CHECK(worst < 0.03);
    }

    TEST_CASE("channel estimates are uncorrelated across APs")
    {
        SystemConfig c = tiny(4, 4, 2, 8);
        c.N = 1;
        const FadingMap m = make_fading_map(c);
        const std::vector<int> act{0, 1};
        const int draws = 10000;
        std::complex<double> sum = 0.0;
        double ss = 0.0;
        for (int d = 0; d < draws; ++d) {
            Rng rng = Rng::stream(17, Stream::MonteCarlo, d);
            const PilotSet p = draw_pilots(c, rng);
            const EstimationResult est = lmmse_estimate(p, m, act, c);
            const ChannelDraw ch = draw_channel(c, 2, rng);
            const auto g = channel_estimates(est, p, m, ch, c, rng);
            // Normalise so every AP contributes unit variance.
            const std::complex<double> v = g[0](0, 0) * std::conj(g[1](0, 0)) /
                                           std::sqrt(est.gamma_emp(0, 0) * est.gamma_emp(1, 0));
            sum += v;
            ss += std::norm(v);
        }
        const std::complex<double> mean = sum / static_cast<double>(draws);
        const double se = std::sqrt(ss / draws / draws);
        CHECK(std::abs(mean.real()) < 3.0 * se);
        CHECK(std::abs(mean.imag()) < 3.0 * se);
    }

    TEST_CASE("channel estimates have mean square gamma")
    {
        SystemConfig c = tiny(1, 2, 2, 4);
        c.N = 8;
        FadingMap m;
        m.beta.resize(1, 2);
        m.beta << 2.0 / c.E_p(), 1.0 / c.E_p();
        Rng prng(2);
        const PilotSet p = draw_pilots(c, prng);
        const EstimationResult est = lmmse_estimate(p, m, {0, 1}, c);
        double acc = 0.0;
        const int draws = 4000;
        for (int d = 0; d < draws; ++d) {
            Rng rng = Rng::stream(8, Stream::SmallScale, d);
            const ChannelDraw ch = draw_channel(c, 2, rng);
            acc += channel_estimates(est, p, m, ch, c, rng)[0].col(0).squaredNorm();
        }
        CHECK(acc / draws / c.N == doctest::Approx(est.gamma_emp(0, 0)).epsilon(0.03));
    }

    TEST_CASE("activating another sensor lowers gamma")
    {
        SystemConfig small = tiny(4, 6, 3, 8);
        SystemConfig big = small;
        big.K_a = 4;
        const FadingMap m = make_fading_map(small);
        const std::vector<int> a{0, 1, 2};
        const std::vector<int> b{0, 1, 2, 3};
        Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(4, 6);
        const int draws = 200;
        for (int d = 0; d < draws; ++d) {
            Rng rng = Rng::stream(6, Stream::Pilots, d);
            const PilotSet p = draw_pilots(small, rng);
            diff += lmmse_estimate(p, m, b, big).gamma_emp - lmmse_estimate(p, m, a, small).gamma_emp;
        }
        for (int l = 0; l < 4; ++l)
            for (int k : a)
                CHECK(diff(l, k) < 0.0);
    }

    TEST_CASE("harvested energy")
    {
        SystemConfig c = tiny(1, 1, 1, 60);
        c.N = 10;
        c.T_c = 200;
        Eigen::MatrixXd gamma(1, 1);
        gamma << 0.5;
        Eigen::MatrixXd eta(1, 1);
        eta << 0.01;
        CHECK(coherent_energy(gamma, eta, {0}, c, 1)(0) == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(coherent_energy(gamma, eta, {0}, c, 0)(0) == 0.0);
    }

    TEST_CASE("full energy of a lone sensor against its Gaussian moments")
    {
        SystemConfig c = tiny(1, 1, 1, 8);
        c.N = 4;
        const FadingMap m = constant_map(1, 1, 2.0 / c.E_p());
        Rng prng(31);
        const PilotSet p = draw_pilots(c, prng);
        const EstimationResult est = lmmse_estimate(p, m, {0}, c);
        const double g = est.gamma_emp(0, 0);
        const double beta = m.beta(0, 0);
        Eigen::MatrixXd eta(1, 1);
        eta << 1.0 / g;
        Rng rng(32);
        const int draws = 20000;
        const HarvestEstimate h = empirical_harvested_energy(est, p, m, eta, c, 1, rng, draws);
        const double pre = (1.0 - c.alpha()) * c.Delta * c.zeta;
        const double expect = pre * (c.rho_d / g * (c.N * c.N * g * g + c.N * g * beta) + c.noise_power());
        CHECK(h.mean(0) == doctest::Approx(expect).epsilon(3.0 * h.stddev(0) / std::sqrt(draws) / expect + 1e-3));
        CHECK(h.mean(0) >= h.lower_bound(0));

        HarvestEstimate off = empirical_harvested_energy(est, p, m, eta, c, 0, rng, 10);
        CHECK(off.mean(0) == 0.0);
        CHECK(off.lower_bound(0) == 0.0);
    }

    TEST_CASE("full energy dominates the lower bound")
    {
        const SystemConfig c;
        const FadingMap m = make_fading_map(c);
        const std::vector<int> act{1, 4, 8, 15, 16, 23, 30, 36};
        for (int inst = 0; inst < 3; ++inst) {
            Rng rng = Rng::stream(40, Stream::MonteCarlo, inst);
            const PilotSet p = draw_pilots(c, rng);
            const EstimationResult est = lmmse_estimate(p, m, act, c);
            Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(c.L, c.K);
            for (int l = 0; l < c.L; ++l)
                for (int k : act)
                    eta(l, k) = 1.0 / (c.K_a * est.gamma_emp(l, k));
            const HarvestEstimate h = empirical_harvested_energy(est, p, m, eta, c, 1, rng, 100);
            for (int k : act)
                CHECK(h.mean(k) >= 0.99 * h.lower_bound(k));
        }
    }

    TEST_CASE("power budget is enforced")
    {
        SystemConfig c = tiny(1, 2, 2, 4);
        const FadingMap m = constant_map(1, 2, 1.0 / c.E_p());
        const PilotSet p = unit_pilots(4, 2);
        const EstimationResult est = lmmse_estimate(p, m, {0, 1}, c);
        Rng rng(1);
        Eigen::MatrixXd eta = Eigen::MatrixXd::Constant(1, 2, 1.0 / est.gamma_emp(0, 0));
        CHECK_THROWS_AS(empirical_harvested_energy(est, p, m, eta, c, 1, rng, 1), ContractError);
        eta(0, 0) = -1.0;
        eta(0, 1) = 0.0;
        CHECK_THROWS_AS(empirical_harvested_energy(est, p, m, eta, c, 1, rng, 1), ContractError);
    }

    TEST_CASE("SINR terms")
    {
        const SystemConfig c;
        const FadingMap m = make_fading_map(c);
        const std::vector<int> act{0, 5, 10, 15, 20, 25, 30, 35};
        Rng rng(77);
        const PilotSet p = draw_pilots(c, rng);
        const EstimationResult est = lmmse_estimate(p, m, act, c);
        const SinrTerms t = empirical_sinr_terms(est, p, m, c);
        CHECK((t.D.array() > 0.0).all());
        CHECK((t.U.array() > 0.0).all());
        CHECK((t.N.array() > 0.0).all());
        for (int k = 0; k < 8; ++k)
            for (int j = 0; j < 8; ++j)
                CHECK((j == k ? t.I(k, j) == 0.0 : t.I(k, j) > 0.0));
        CHECK(interference_term(t, 5, 10) == t.I(1, 2));
        CHECK_THROWS_AS(interference_term(t, 1, 5), DomainError);

        // First plus third interference terms collapse to rho_u sum_l beta_lj gamma_lk.
        for (int k = 0; k < 8; ++k) {
            double coherent = 0.0;
            std::complex<double> acc = 0.0;
            for (int l = 0; l < c.L; ++l)
                acc += m.beta(l, act[1]) * p.psi.col(act[1]).dot(est.a[l].col(k));
            coherent = c.rho_u * c.E_p() * c.N * std::norm(acc);
            if (k == 1)
                continue;
            double direct = 0.0;
            for (int l = 0; l < c.L; ++l)
                direct += m.beta(l, act[1]) * est.gamma_emp(l, act[k]);
            CHECK(t.I(k, 1) - coherent == doctest::Approx(c.rho_u * direct).epsilon(1e-9));
        }
    }

    TEST_CASE("single sensor has no cross terms")
    {
        SystemConfig c = tiny(4, 3, 1, 8);
        const FadingMap m = make_fading_map(c);
        Rng rng(3);
        const PilotSet p = draw_pilots(c, rng);
        const EstimationResult est = lmmse_estimate(p, m, {2}, c);
        const SinrTerms t = empirical_sinr_terms(est, p, m, c);
        REQUIRE(t.size() == 1);
        CHECK(t.I(0, 0) == 0.0);
        Eigen::VectorXd xi = Eigen::VectorXd::Zero(3);
        xi(2) = 0.5;
        const double g = t.D(0) * 0.5 / (t.U(0) * 0.5 + t.N(0));
        CHECK(rate_from_terms(t, xi, 3, c.alpha(), 0)(2) == doctest::Approx((1 - c.alpha()) * std::log2(1 + g)));
    }

    TEST_CASE("rate arithmetic")
    {
        SinrTerms t;
        t.active = {0};
        t.D = Eigen::VectorXd::Constant(1, 99.0);
        t.U = Eigen::VectorXd::Constant(1, 0.5);
        t.N = Eigen::VectorXd::Constant(1, 0.5);
        t.I = Eigen::MatrixXd::Zero(1, 1);
        Eigen::VectorXd xi = Eigen::VectorXd::Ones(2);
        const Eigen::VectorXd r = rate_from_terms(t, xi, 2, 0.3, 0);
        CHECK(r(0) == doctest::Approx(0.7 * std::log2(100.0)));
        CHECK(r(0) == doctest::Approx(4.651).epsilon(1e-3));
        CHECK(r(1) == 0.0);
        CHECK(rate_from_terms(t, xi, 2, 0.3, 1).isZero());
        xi(0) = 0.0;
        CHECK(rate_from_terms(t, xi, 2, 0.3, 0)(0) == 0.0);
    }
}
