#pragma once

#include <vector>

#include "unravel/ensemble.hpp"
#include "unravel/jump.hpp"
#include "unravel/params.hpp"

namespace unravel {

// EPR-steering functional S = mean_D[f1] + mean_H[f2] with
// f1(rho) = (tr sx rho)^2 and f2(rho) = (tr sy rho)^2 + (tr sz rho)^2,
// the direct-detection ensemble conditioned at efficiency eta (vacuum) and
// the heterodyne ensemble at unit efficiency. The ensembles are generated
// with the drive phase chosen so the direct-detection Rabi circle lies in
// the x-z plane (phi = pi/2), matching the axis split of the inequality.

struct SteeringCurve {
    std::vector<double> t_grid;
    std::vector<double> S;
    std::vector<double> f1_mean;
    std::vector<double> f2_mean;
    std::vector<double> stderr_S;
    std::vector<double> envelope; // running max of S over one Rabi period
    std::uint64_t n_direct = 0;
    std::uint64_t n_het = 0;
};

double f1_value(const BlochVector& b); // (tr sx rho)^2
double f2_value(const BlochVector& b); // (tr sy rho)^2 + (tr sz rho)^2

/// Pure reduction over two pre-generated ensembles sharing t_grid.
SteeringCurve steering_value(const std::vector<TrajectoryRecord>& direct_ensemble,
                             const std::vector<TrajectoryRecord>& het_ensemble,
                             double rabi_period);

/// Generates both ensembles (mixed-jump direct at p.efficiency, heterodyne at
/// unit efficiency) and reduces them; deterministic in (seed, n_threads).
SteeringCurve run_steering(const SystemParams& p, const std::vector<double>& t_grid,
                           int n_threads);

} // namespace unravel
