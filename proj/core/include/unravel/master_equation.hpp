#pragma once

#include <array>
#include <vector>

#include "unravel/params.hpp"
#include "unravel/states.hpp"

namespace unravel {

// The unconditional dynamics is linear on the 4-vector (n, x, y, z) with
// n = Tr(rho); keeping n explicit homogenizes the affine Bloch equations and
// also covers the norm-decreasing conditional generator l' = L - eta*J used
// for imperfect direct detection.
struct BlochMatrix {
    std::array<std::array<double, 4>, 4> a{};

    std::array<double, 4> apply(const std::array<double, 4>& v) const {
        std::array<double, 4> r{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r[i] += a[i][j] * v[j];
        return r;
    }
};

/// GKSL generator in Bloch form. Rates gamma(nbar+1) down, gamma*nbar up.
BlochMatrix liouvillian(const SystemParams& p);

/// Conditional no-detected-click generator l' = L - eta * J_detected, where
/// J_detected rho = gamma (nbar+1) sigma- rho sigma+.
BlochMatrix conditional_liouvillian(const SystemParams& p);

/// One-step RK4 transfer matrix exp-like approximation for a constant generator.
BlochMatrix rk4_step_matrix(const BlochMatrix& gen, double h);

/// Solves the master equation on t_grid (strictly increasing, starting at 0).
std::vector<MixedState> propagate_me(const SystemParams& p, const MixedState& rho0,
                                     const std::vector<double>& t_grid);

/// Same solve, returning only Bloch vectors (cheap path used by the oracles).
std::vector<BlochVector> propagate_me_bloch(const SystemParams& p, const MixedState& rho0,
                                            const std::vector<double>& t_grid);

/// Steady state of the (possibly thermal, detuned) master equation.
BlochVector steady_state_bloch(const SystemParams& p);

/// Closed-form average inversion from the ground state, resonant vacuum case:
/// S_z [1 + Y^2 e^{-3 gamma t/4} (cosh(dt) + (3 gamma /4)/d sinh(dt))] with
/// d = (gamma/4) sqrt(1 - 8 Y^2) taken in complex arithmetic.
double analytic_inversion(const SystemParams& p, double t);

/// g2(tau) = p_up(tau | reset to ground) / p_up(steady state), detuning included.
std::vector<double> g2_analytic(const SystemParams& p, const std::vector<double>& tau_grid);

} // namespace unravel
