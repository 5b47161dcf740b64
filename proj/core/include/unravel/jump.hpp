#pragma once

#include <limits>
#include <vector>

#include "unravel/nojump.hpp"
#include "unravel/params.hpp"
#include "unravel/rng.hpp"
#include "unravel/states.hpp"

namespace unravel {

/// Detected-emission timestamps of one trajectory, dimensionless gamma*t.
struct ClickRecord {
    std::vector<double> click_times; // strictly increasing, within [0, t_max]
    double t_max = 0.0;
};

struct TrajectoryRecord {
    std::vector<double> t_grid;
    std::vector<BlochVector> bloch;
    ClickRecord clicks;
    std::vector<double> purity; // Tr(rho_c^2) diagnostics, == 1 for pure schemes
};

/// Uniform sample grid 0, dt, 2dt, ..., covering [0, t_max].
std::vector<double> make_grid(double t_max, double dt);

/// Inverse-CDF draw from the waiting-time distribution: solves p0(tau) = u by
/// bracketing + bisection with a Newton polish (1e-10 absolute in tau).
/// Returns +inf when the atom can never emit (undriven ground state).
double sample_waiting_time(const NoJumpPropagator& prop, RngStream& rng);
double sample_waiting_time(const SystemParams& p, RngStream& rng);

/// Ideal direct photodetection (eta=1, nbar=0) from the ground state: exact
/// waiting-time placement, closed-form no-jump evolution between clicks.
TrajectoryRecord simulate_pure_jump(const SystemParams& p, const std::vector<double>& t_grid,
                                    RngStream& rng);

/// Click times only, for long photon-counting runs (no grid sampling).
ClickRecord simulate_clicks(const SystemParams& p, double t_int, RngStream& rng);

/// Direct detection with eta < 1 and/or nbar > 0: density-matrix propagation
/// under l' between detected collapses, per-step detected-jump probability
/// p_c = eta gamma (nbar+1) Tr[rho s+ s-] dt (must stay < 0.1).
TrajectoryRecord simulate_mixed_jump(const SystemParams& p, const std::vector<double>& t_grid,
                                     RngStream& rng);

} // namespace unravel
