// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cfwpt/simctl.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <thread>

#include "cfwpt/airlink.hpp"
#include "cfwpt/detequiv.hpp"
#include "cfwpt/errors.hpp"
#include "cfwpt/ledger.hpp"
#include "cfwpt/solvers.hpp"

namespace cfwpt {

namespace {

/// Closed forms are a pure function of the active set, and the schedulers
/// revisit the same sets often.
class DetCache {
public:
    DetCache(const FadingMap& fading, const SystemConfig& config) : fading_(fading), config_(config) {}

    std::shared_ptr<const DetEquivSet> get(const std::vector<int>& active)
    {
        auto it = cache_.find(active);
        if (it != cache_.end())
            return it->second;
        if (cache_.size() >= kCapacity)
            cache_.clear();
        auto det = std::make_shared<const DetEquivSet>(bar_rate_terms(fading_, active, config_));
        cache_.emplace(active, det);
        return det;
    }

private:
    static constexpr std::size_t kCapacity = 4096;
    const FadingMap& fading_;
    const SystemConfig& config_;
    std::map<std::vector<int>, std::shared_ptr<const DetEquivSet>> cache_;
};

template <class F>
auto with_slot_context(int t, F&& body)
{
    const std::string where = "slot " + std::to_string(t) + ": ";
    try {
        return body();
    } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
    } catch (const DomainError& e) {
        throw DomainError(where + e.what());
    } catch (const SolverError& e) {
        throw SolverError(where + e.what());
    } catch (const ContractError& e) {
        throw ContractError(where + e.what());
    }
}

/// K_a sensors with the largest (or smallest) key; ties to the smaller index.
std::vector<int> rank_by(const Eigen::VectorXd& key, int K_a, bool largest)
{
    std::vector<int> idx(key.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return largest ? key(a) > key(b) : key(a) < key(b); });
    idx.resize(K_a);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Eigen::MatrixXd uniform_eta(const Eigen::MatrixXd& gamma, const std::vector<int>& active, int K)
{
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(gamma.rows(), K);
    const double share = 1.0 / static_cast<double>(active.size());
    for (int k : active)
        for (Eigen::Index l = 0; l < gamma.rows(); ++l)
            eta(l, k) = share / gamma(l, k);
    return eta;
}

/// Harvested energy and rates credited for a decision under finite-tau
/// accounting: one pilot and channel realisation for the slot.
struct FiniteTau {
    const FadingMap& fading;
    const SystemConfig& config;

    Eigen::VectorXd energy(const SlotPolicy& p, int t) const
    {
        Rng rng = Rng::stream(config.seed, Stream::Pilots, static_cast<std::uint64_t>(t));
        const PilotSet pilots = draw_pilots(config, rng);
        const EstimationResult est = lmmse_estimate(pilots, fading, p.active, config);
        Eigen::MatrixXd eta = p.eta;
        for (Eigen::Index l = 0; l < eta.rows(); ++l) {
            double used = 0.0;
            for (int k : p.active)
                used += eta(l, k) * est.gamma_emp(l, k);
            if (used > 1.0)
                eta.row(l) /= used;
        }
        return coherent_energy(est.gamma_emp, eta, p.active, config, 1);
    }

    Eigen::VectorXd rates(const SlotPolicy& p, int t) const
    {
        Rng rng = Rng::stream(config.seed, Stream::Pilots, static_cast<std::uint64_t>(t));
        const PilotSet pilots = draw_pilots(config, rng);
        const EstimationResult est = lmmse_estimate(pilots, fading, p.active, config);
        const SinrTerms terms = empirical_sinr_terms(est, pilots, fading, config);
        return rate_from_terms(terms, p.xi, config.K, config.alpha(), 0);
    }
};

/// Applies a decision to the state and fills the bookkeeping part of the record.
NetworkState apply_slot(const NetworkState& state, const SlotPolicy& policy, const Eigen::VectorXd& energy,
                        const Eigen::VectorXd& R, const Eigen::MatrixXd& gamma, const SystemConfig& config,
                        double rmax, SlotRecord& rec)
{
    check_policy(state, policy, gamma, config, rmax);
    const Eigen::VectorXd b_next = update_battery(state, policy, energy, config);
    NetworkState next = advance(state, b_next, policy.r, R, config);
    const DriftBound d = exact_drift_and_bound(state, next, policy.r, R, b_next, config, rmax);
    rec.t = state.t;
    rec.delta = policy.delta;
    rec.active = policy.active;
    rec.r = policy.r;
    rec.R = R;
    rec.b = next.b;
    rec.X = next.X;
    rec.Y = next.Y;
    rec.phi = d.phi;
    rec.phi_bar = d.phi_bar;
    rec.bound_ok = bound_holds(d, state, next);
    return next;
}

double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

} // namespace

RunResult run_lyapunov(const SystemConfig& config, const std::optional<FadingMap>& fading_in)
{
    config.validate();
    const FadingMap fading = fading_in ? *fading_in : make_fading_map(config);
    const int K = config.K;
    const double rmax = r_max(fading, config);
    DetCache cache(fading, config);
    const FiniteTau finite{fading, config};

    RunResult out;
    out.records.reserve(config.T_max);
    NetworkState state = NetworkState::initial(config);
    for (int t = 0; t < config.T_max; ++t) {
        const auto start = std::chrono::steady_clock::now();
        SlotRecord rec;
        state = with_slot_context(t, [&] {
            const double r = optimal_r(state.Y, config.W, rmax);
            const auto det_h_ptr = cache.get(select_active(state, 1, config.K_a));
            const DetEquivSet& det_h = *det_h_ptr;
            const DownlinkSolution dl = solve_downlink(state, det_h, config);
            const auto det_t_ptr = cache.get(select_active(state, 0, config.K_a));
            const DetEquivSet& det_t = *det_t_ptr;
            const UplinkSolution ul = solve_uplink(state, det_t, config);
            rec.q_harvest = dl.objective;
            rec.q_transmit = ul.objective;

            SlotPolicy policy;
            policy.delta = select_mode(dl.objective, ul.objective);
            policy.r = r;
            Eigen::VectorXd energy = Eigen::VectorXd::Zero(K);
            Eigen::VectorXd R = Eigen::VectorXd::Zero(K);
            const DetEquivSet& det = policy.delta == 1 ? det_h : det_t;
            policy.active = det.active;
            if (policy.delta == 1) {
                policy.eta = dl.eta;
                policy.xi = Eigen::VectorXd::Zero(K);
                energy = config.finite_tau_accounting ? finite.energy(policy, t) : dl.energy;
            } else {
                policy.eta = Eigen::MatrixXd::Zero(fading.num_aps(), K);
                policy.xi = ul.xi;
                R = config.finite_tau_accounting ? finite.rates(policy, t) : ul.rates;
            }
            return apply_slot(state, policy, energy, R, det.gamma_full(K), config, rmax, rec);
        });
        rec.wall_ms = elapsed_ms(start);
        out.records.push_back(std::move(rec));
    }
    out.summary = compute_metrics(out.records, config);
    out.summary.r_max = rmax;
    return out;
}

RunResult run_greedy(const SystemConfig& config, const std::optional<FadingMap>& fading_in)
{
    config.validate();
    const FadingMap fading = fading_in ? *fading_in : make_fading_map(config);
    const int K = config.K;
    const double rmax = r_max(fading, config);
    const double full_slot = config.uplink_slot_energy();
    DetCache cache(fading, config);
    const FiniteTau finite{fading, config};

    RunResult out;
    out.records.reserve(config.T_max);
    NetworkState state = NetworkState::initial(config);
    int mode = 0;
    for (int t = 0; t < config.T_max; ++t) {
        const auto start = std::chrono::steady_clock::now();
        mode = greedy_next_mode(mode, state.b, config);

        SlotRecord rec;
        state = with_slot_context(t, [&] {
            SlotPolicy policy;
            policy.delta = mode;
            policy.r = optimal_r(state.Y, config.W, rmax);
            policy.active = rank_by(state.b, config.K_a, mode == 0);
            const auto det_ptr = cache.get(policy.active);
            const DetEquivSet& det = *det_ptr;
            Eigen::VectorXd energy = Eigen::VectorXd::Zero(K);
            Eigen::VectorXd R = Eigen::VectorXd::Zero(K);
            policy.xi = Eigen::VectorXd::Zero(K);
            policy.eta = Eigen::MatrixXd::Zero(fading.num_aps(), K);
            if (mode == 1) {
                policy.eta = uniform_eta(det.gamma_full(K), policy.active, K);
                energy = config.finite_tau_accounting ? finite.energy(policy, t) : bar_energies(det, policy.eta, config, 1);
            } else {
                for (int k : policy.active)
                    policy.xi(k) = std::min(1.0, state.b(k) / full_slot);
                R = config.finite_tau_accounting ? finite.rates(policy, t) : bar_rate(det, policy.xi, K, config.alpha(), 0);
            }
            return apply_slot(state, policy, energy, R, det.gamma_full(K), config, rmax, rec);
        });
        rec.wall_ms = elapsed_ms(start);
        out.records.push_back(std::move(rec));
    }
    out.summary = compute_metrics(out.records, config);
    out.summary.r_max = rmax;
    return out;
}

int greedy_next_mode(int mode, const Eigen::VectorXd& b, const SystemConfig& config)
{
    if (mode == 0 && (b.array() < config.uplink_slot_energy()).any())
        return 1;
    if (mode == 1 && (b.array() >= config.b_0).all())
        return 0;
    return mode;
}

RunSummary compute_metrics(const std::vector<SlotRecord>& records, const SystemConfig& config)
{
    if (records.empty())
        throw DomainError("compute_metrics: no slots recorded");
    const int T = static_cast<int>(records.size());
    const Eigen::Index K = records.front().R.size();
    RunSummary s;
    s.seed = config.seed;
    s.config = config;
    s.min_avg_rate.reserve(T);
    s.sigma_hat.reserve(T);
    s.X_bar.reserve(T);
    s.Y_bar.reserve(T);

    Eigen::VectorXd cum = Eigen::VectorXd::Zero(K);
    double cum_X = 0.0;
    double cum_Y = 0.0;
    s.min_battery = records.front().b.minCoeff();
    for (int t = 0; t < T; ++t) {
        const SlotRecord& rec = records[t];
        cum += rec.R;
        const Eigen::VectorXd avg = cum / (t + 1.0);
        s.min_avg_rate.push_back(avg.minCoeff());
        const double mean = avg.mean();
        s.sigma_hat.push_back(std::sqrt((avg.array() - mean).square().sum() / static_cast<double>(K)));
        // Queues at the start of slot t: zero initially, then the previous update.
        if (t > 0) {
            cum_X += records[t - 1].X.sum();
            cum_Y += records[t - 1].Y.sum();
        }
        s.X_bar.push_back(cum_X / (t + 1.0));
        s.Y_bar.push_back(cum_Y / (t + 1.0));
        s.min_battery = std::min(s.min_battery, rec.b.minCoeff());
        if (rec.delta == 1)
            ++s.harvest_slots;
        else
            ++s.transmit_slots;
        if (!rec.bound_ok)
            ++s.bound_violations;
    }
    s.avg_rate = cum / static_cast<double>(T);
    s.avg_battery = Eigen::VectorXd::Zero(K);
    const int half = T / 2;
    for (int t = half; t < T; ++t)
        s.avg_battery += records[t].b;
    s.avg_battery /= static_cast<double>(T - half);
    return s;
}

// ------------------------------------------------------------ validation

namespace {

struct TrialOutcome {
    Eigen::MatrixXd gamma; // L x K
    Eigen::VectorXd energy_lb;
    Eigen::VectorXd energy_full;
    Eigen::VectorXd rate;
};

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};

template <class Get>
Moments moments(const std::vector<TrialOutcome>& trials, Get get)
{
    double sum = 0.0;
    for (const auto& tr : trials)
        sum += get(tr);
    const double n = static_cast<double>(trials.size());
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& tr : trials)
        ss += (get(tr) - mean) * (get(tr) - mean);
    return {mean, trials.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

std::vector<int> random_schedule(const SystemConfig& config, std::uint64_t index)
{
    Rng rng = Rng::stream(config.seed, Stream::Schedule, index);
    std::vector<int> idx(config.K);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates with our own draws keeps the result library-independent.
    for (int i = 0; i < config.K_a; ++i) {
        const int j = i + static_cast<int>(rng.uniform(0.0, 1.0) * (config.K - i));
        std::swap(idx[i], idx[std::min(j, config.K - 1)]);
    }
    idx.resize(config.K_a);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace

ValidationReport validate_asymptotics(const SystemConfig& config, const FadingMap& fading, int n_trials,
                                      const std::vector<int>& ka_values, int energy_draws)
{
    if (n_trials < 1)
        throw DomainError("validate_asymptotics: need at least one trial");
    const int K = config.K;
    const int L = fading.num_aps();
    ValidationReport rep;
    rep.active = random_schedule(config, 0);
    const DetEquivSet det = bar_rate_terms(fading, rep.active, config);
    const Eigen::MatrixXd eta_cf = uniform_eta(det.gamma_full(K), rep.active, K);
    const Eigen::VectorXd E_cf = bar_energies(det, eta_cf, config, 1);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(K);
    const Eigen::VectorXd R_cf = bar_rate(det, ones, K, config.alpha(), 0);

    std::vector<TrialOutcome> trials(n_trials);
    auto run_trial = [&](int t) {
        Rng rng = Rng::stream(config.seed, Stream::MonteCarlo, static_cast<std::uint64_t>(t));
        const PilotSet pilots = draw_pilots(config, rng);
        const EstimationResult est = lmmse_estimate(pilots, fading, rep.active, config);
        const Eigen::MatrixXd eta = uniform_eta(est.gamma_emp, rep.active, K);
        const HarvestEstimate h = empirical_harvested_energy(est, pilots, fading, eta, config, 1, rng, energy_draws);
        const SinrTerms terms = empirical_sinr_terms(est, pilots, fading, config);
        TrialOutcome& o = trials[t];
        o.gamma = est.gamma_emp;
        o.energy_lb = h.lower_bound;
        o.energy_full = h.mean;
        o.rate = rate_from_terms(terms, ones, K, config.alpha(), 0);
    };

    const int workers = std::max(1, std::min(n_trials, config.threads > 0 ? config.threads
                                                                            : static_cast<int>(std::thread::hardware_concurrency())));
    if (workers == 1) {
        for (int t = 0; t < n_trials; ++t)
            run_trial(t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int t = next++; t < n_trials && !failed; t = next++) {
                    try {
                        run_trial(t);
                    } catch (...) {
                        if (!failed.exchange(true))
                            failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool)
            th.join();
        if (failure)
            std::rethrow_exception(failure);
    }

    for (int i = 0; i < det.size(); ++i) {
        const int k = rep.active[i];
        for (int l = 0; l < L; ++l) {
            const Moments m = moments(trials, [&](const TrialOutcome& o) { return o.gamma(l, k); });
            rep.gamma.push_back({l, k, det.bar_gamma(l, i), m.mean, m.stddev, n_trials});
        }
        const Moments e = moments(trials, [&](const TrialOutcome& o) { return o.energy_lb(k); });
        rep.energy.push_back({-1, k, E_cf(k), e.mean, e.stddev, n_trials});
        const Moments ef = moments(trials, [&](const TrialOutcome& o) { return o.energy_full(k); });
        rep.energy_full.push_back({-1, k, E_cf(k), ef.mean, ef.stddev, n_trials});
        const Moments r = moments(trials, [&](const TrialOutcome& o) { return o.rate(k); });
        rep.rate.push_back({-1, k, R_cf(k), r.mean, r.stddev, n_trials});
    }

    const int schedules = std::min(n_trials, 50);
    for (int ka : ka_values) {
        SystemConfig c = config;
        c.K_a = ka;
        c.validate();
        double e_sum = 0.0;
        double r_sum = 0.0;
        for (int s = 0; s < schedules; ++s) {
            const std::vector<int> act = random_schedule(c, 1000u * static_cast<std::uint64_t>(ka) + s);
            const DetEquivSet d = bar_rate_terms(fading, act, c);
            const Eigen::VectorXd e = bar_energies(d, uniform_eta(d.gamma_full(K), act, K), c, 1);
            const Eigen::VectorXd r = bar_rate(d, ones, K, c.alpha(), 0);
            for (int k : act) {
                e_sum += e(k);
                r_sum += r(k);
            }
        }
        const double n = static_cast<double>(schedules) * ka;
        rep.ka_sweep.push_back({ka, e_sum / n, r_sum / n, schedules});
    }
    return rep;
}

// --------------------------------------------------------------- writers

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_slots_csv(const std::vector<SlotRecord>& records, std::ostream& out)
{
    const Eigen::Index K = records.empty() ? 0 : records.front().R.size();
    out << "t,delta,active,r,q_harvest,q_transmit,phi,phi_bar,bound_ok";
    for (const char* name : {"R", "b", "X", "Y"})
        for (Eigen::Index k = 0; k < K; ++k)
            out << ',' << name << '_' << k;
    out << '\n';
    for (const SlotRecord& rec : records) {
        out << rec.t << ',' << rec.delta << ',';
        for (std::size_t i = 0; i < rec.active.size(); ++i)
            out << (i ? ";" : "") << rec.active[i];
        out << ',' << fmt17(rec.r) << ',' << fmt17(rec.q_harvest) << ',' << fmt17(rec.q_transmit) << ','
            << fmt17(rec.phi) << ',' << fmt17(rec.phi_bar) << ',' << (rec.bound_ok ? 1 : 0);
        for (const Eigen::VectorXd* v : {&rec.R, &rec.b, &rec.X, &rec.Y})
            for (Eigen::Index k = 0; k < K; ++k)
                out << ',' << fmt17((*v)(k));
        out << '\n';
    }
}

namespace {

void json_array(std::ostream& out, const std::vector<double>& v)
{
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i)
        out << (i ? "," : "") << fmt17(v[i]);
    out << ']';
}

void json_array(std::ostream& out, const Eigen::VectorXd& v)
{
    json_array(out, std::vector<double>(v.data(), v.data() + v.size()));
}

} // namespace

void write_summary_json(const RunSummary& s, std::ostream& out)
{
    auto last = [](const std::vector<double>& v) { return v.empty() ? 0.0 : v.back(); };
    out << "{\n";
    out << "  \"seed\": " << s.seed << ",\n";
    out << "  \"slots\": " << s.min_avg_rate.size() << ",\n";
    out << "  \"harvest_slots\": " << s.harvest_slots << ",\n";
    out << "  \"transmit_slots\": " << s.transmit_slots << ",\n";
    out << "  \"bound_violations\": " << s.bound_violations << ",\n";
    out << "  \"r_max\": " << fmt17(s.r_max) << ",\n";
    out << "  \"min_battery\": " << fmt17(s.min_battery) << ",\n";
    out << "  \"final_min_avg_rate\": " << fmt17(last(s.min_avg_rate)) << ",\n";
    out << "  \"final_sigma_hat\": " << fmt17(last(s.sigma_hat)) << ",\n";
    out << "  \"final_X_bar\": " << fmt17(last(s.X_bar)) << ",\n";
    out << "  \"final_Y_bar\": " << fmt17(last(s.Y_bar)) << ",\n";
    out << "  \"min_avg_rate\": ";
    json_array(out, s.min_avg_rate);
    out << ",\n  \"sigma_hat\": ";
    json_array(out, s.sigma_hat);
    out << ",\n  \"X_bar\": ";
    json_array(out, s.X_bar);
    out << ",\n  \"Y_bar\": ";
    json_array(out, s.Y_bar);
    out << ",\n  \"avg_rate\": ";
    json_array(out, s.avg_rate);
    out << ",\n  \"avg_battery_second_half\": ";
    json_array(out, s.avg_battery);
    for (const auto& [key, value] : config_entries(s.config))
        out << ",\n  \"config_" << key << "\": \"" << value << '"';
    out << "\n}\n";
}

void write_validation_csv(const std::vector<ValidationRow>& rows, bool with_ap, std::ostream& out)
{
    out << (with_ap ? "l," : "") << "k,closed_form,mc_mean,mc_std,n_trials\n";
    for (const auto& r : rows) {
        if (with_ap)
            out << r.l << ',';
        out << r.k << ',' << fmt17(r.closed_form) << ',' << fmt17(r.mc_mean) << ',' << fmt17(r.mc_std) << ','
            << r.n_trials << '\n';
    }
}

void write_ka_sweep_csv(const std::vector<KaSweepRow>& rows, std::ostream& out)
{
    out << "K_a,mean_energy,mean_rate,n_schedules\n";
    for (const auto& r : rows)
        out << r.K_a << ',' << fmt17(r.mean_energy) << ',' << fmt17(r.mean_rate) << ',' << r.n_schedules << '\n';
}

} // namespace cfwpt
