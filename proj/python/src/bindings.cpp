// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfwpt/config.hpp"
#include "cfwpt/detequiv.hpp"
#include "cfwpt/errors.hpp"
#include "cfwpt/netmodel.hpp"
#include "cfwpt/simctl.hpp"

namespace py = pybind11;
using namespace cfwpt;

namespace {

SystemConfig config_from(const py::dict& overrides, bool table_one)
{
    SystemConfig c = table_one ? SystemConfig::table_one() : SystemConfig::desk();
    for (const auto& [key, value] : overrides)
        set_config_value(c, py::str(key), py::str(value));
    c.validate();
    return c;
}

py::dict run_to_dict(const RunResult& run)
{
    const auto& recs = run.records;
    const Eigen::Index T = static_cast<Eigen::Index>(recs.size());
    const Eigen::Index K = T ? recs.front().b.size() : 0;
    Eigen::MatrixXd b(T, K), X(T, K), Y(T, K), R(T, K);
    Eigen::VectorXi delta(T);
    Eigen::VectorXd r(T), phi(T), phi_bar(T);
    std::vector<std::vector<int>> active;
    for (Eigen::Index t = 0; t < T; ++t) {
        const SlotRecord& s = recs[t];
        b.row(t) = s.b.transpose();
        X.row(t) = s.X.transpose();
        Y.row(t) = s.Y.transpose();
        R.row(t) = s.R.transpose();
        delta(t) = s.delta;
        r(t) = s.r;
        phi(t) = s.phi;
        phi_bar(t) = s.phi_bar;
        active.push_back(s.active);
    }
    const RunSummary& m = run.summary;
    py::dict summary;
    summary["min_avg_rate"] = m.min_avg_rate;
    summary["sigma_hat"] = m.sigma_hat;
    summary["X_bar"] = m.X_bar;
    summary["Y_bar"] = m.Y_bar;
    summary["avg_rate"] = m.avg_rate;
    summary["avg_battery"] = m.avg_battery;
    summary["min_battery"] = m.min_battery;
    summary["harvest_slots"] = m.harvest_slots;
    summary["transmit_slots"] = m.transmit_slots;
    summary["bound_violations"] = m.bound_violations;
    summary["r_max"] = m.r_max;

    py::dict out;
    out["b"] = b;
    out["X"] = X;
    out["Y"] = Y;
    out["R"] = R;
    out["delta"] = delta;
    out["r"] = r;
    out["phi"] = phi;
    out["phi_bar"] = phi_bar;
    out["active"] = active;
    out["summary"] = summary;
    std::ostringstream csv;
    write_slots_csv(recs, csv);
    out["slots_csv"] = csv.str();
    return out;
}

py::list rows_to_list(const std::vector<ValidationRow>& rows)
{
    py::list out;
    for (const auto& r : rows)
        out.append(py::dict(py::arg("l") = r.l, py::arg("k") = r.k, py::arg("closed_form") = r.closed_form,
                            py::arg("mc_mean") = r.mc_mean, py::arg("mc_std") = r.mc_std,
                            py::arg("n_trials") = r.n_trials));
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Scheduler simulator for wirelessly powered cell-free IoT networks";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);

    m.def(
        "config",
        [](const py::dict& overrides, bool table_one) {
            py::dict out;
            for (const auto& [k, v] : config_entries(config_from(overrides, table_one)))
                out[py::str(k)] = v;
            return out;
        },
        py::arg("overrides") = py::dict(), py::arg("table_one") = false,
        "Validated settings as strings, desk defaults plus `overrides`.");

    m.def(
        "fading_map", [](const py::dict& overrides) { return make_fading_map(config_from(overrides, false)).beta; },
        py::arg("overrides") = py::dict(), "L x K large-scale gains for the configured seed.");

    m.def(
        "simulate",
        [](const py::dict& overrides, bool greedy) {
            const SystemConfig c = config_from(overrides, false);
            RunResult run;
            {
                py::gil_scoped_release release;
                run = greedy ? run_greedy(c) : run_lyapunov(c);
            }
            return run_to_dict(run);
        },
        py::arg("overrides") = py::dict(), py::arg("greedy") = false);

    m.def(
        "validate",
        [](const py::dict& overrides, int trials, const std::vector<int>& ka_values) {
            const SystemConfig c = config_from(overrides, false);
            ValidationReport rep;
            {
                py::gil_scoped_release release;
                rep = validate_asymptotics(c, make_fading_map(c), trials, ka_values);
            }
            py::list sweep;
            for (const auto& s : rep.ka_sweep)
                sweep.append(py::dict(py::arg("K_a") = s.K_a, py::arg("mean_energy") = s.mean_energy,
                                      py::arg("mean_rate") = s.mean_rate, py::arg("n_schedules") = s.n_schedules));
            py::dict out;
            out["active"] = rep.active;
            out["gamma"] = rows_to_list(rep.gamma);
            out["energy"] = rows_to_list(rep.energy);
            out["energy_full"] = rows_to_list(rep.energy_full);
            out["rate"] = rows_to_list(rep.rate);
            out["ka_sweep"] = sweep;
            return out;
        },
        py::arg("overrides") = py::dict(), py::arg("trials") = 100, py::arg("ka_values") = std::vector<int>{});

    m.def(
        "fixed_point",
        [](const Eigen::VectorXd& betas, double E_p, int tau) {
            const FixedPointResult fp = fixed_point(betas, E_p, tau);
            return py::dict(py::arg("varsigma") = fp.varsigma, py::arg("Z") = fp.Z,
                            py::arg("Z_tilde") = trace_tilde(fp, betas, E_p, tau),
                            py::arg("iterations") = fp.iterations, py::arg("residual") = fp.residual);
        },
        py::arg("betas"), py::arg("E_p"), py::arg("tau"));

    m.def("bar_gamma", &bar_gamma, py::arg("beta"), py::arg("Z"), py::arg("E_p"));
}
