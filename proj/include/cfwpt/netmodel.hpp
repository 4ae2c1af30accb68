// Copyright 2026 The cfwpt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cfwpt/config.hpp"
#include "cfwpt/rng.hpp"

namespace cfwpt {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// AP grid on the ceiling and sensor drop inside the square hall.
struct Topology {
    std::vector<Point3> ap_positions;
    std::vector<Point3> sensor_positions;
    double side = 0.0;
};

/// L x K linear-scale large-scale fading coefficients.
struct FadingMap {
    Eigen::MatrixXd beta;
    std::uint64_t generated_seed = 0;

    int num_aps() const { return static_cast<int>(beta.rows()); }
    int num_sensors() const { return static_cast<int>(beta.cols()); }
};

/// APs at the centres of a sqrt(L) x sqrt(L) grid of cells, sensors uniform
/// in the square. Throws ConfigError when L is not a perfect square.
Topology build_topology(const SystemConfig& config, Rng& rng);

/// 3-D distance with the horizontal displacement wrapped around the hall
/// (shorter arm per axis); the height difference is never wrapped.
double wrap_distance(const Point3& p, const Point3& q, double side);

/// Hata-COST231 constant term L0 [dB] for carrier f [MHz] and the two heights.
double path_loss_constant_db(const SystemConfig& config);

/// Three-slope path loss [dB] (a negative number) at distance d [m].
/// Distances enter the logarithms in kilometres, as in the COST231 model
/// the breakpoints d0/d1 are quoted for. Throws DomainError for d <= 0.
double path_loss_db(double d, const SystemConfig& config);

/// beta[l][k] = 10^((PL + sigma_sh z)/10), z ~ N(0,1) i.i.d.
FadingMap draw_fading_map(const Topology& topology, const SystemConfig& config, Rng& rng);

/// Placement and shadowing from the dedicated streams of `config.seed`.
FadingMap make_fading_map(const SystemConfig& config);

/// sigma^2 = B k_B T_0 kappa with a 9 dB noise figure. Throws DomainError for B <= 0.
double noise_power(const SystemConfig& config);

/// CSV with header `l,k,beta`, one row per entry, 17 significant digits.
void write_fading_csv(const FadingMap& map, std::ostream& out);
void write_fading_csv(const FadingMap& map, const std::string& path);
FadingMap read_fading_csv(std::istream& in);
FadingMap read_fading_csv(const std::string& path);

} // namespace cfwpt
