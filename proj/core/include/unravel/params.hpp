#pragma once

#include <cstdint>
#include <stdexcept>

namespace unravel {

/// Thrown when a parameter set violates its invariants.
struct param_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an integrator / root finder / fitter fails numerically.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All rates are expressed in units of the spontaneous decay rate gamma,
// all times are the dimensionless gamma*t. gamma itself is kept as a field
// so formulas read like the physics, but it is pinned to 1.
struct SystemParams {
    double omega = 0.0;        // half Rabi frequency (Omega_R = 2*omega)
    double gamma = 1.0;        // spontaneous decay rate, == 1 in internal units
    double detuning = 0.0;     // drive minus atom frequency, units of gamma
    double efficiency = 1.0;   // detector efficiency eta in [0,1]
    double nbar = 0.0;         // thermal occupation of the bath
    double lo_phase = 0.0;     // homodyne local-oscillator phase theta
    double het_detuning = 0.0; // omega_LO - omega_A for the rotating-LO variant
    double drive_phase = 0.0;  // phase of the drive: H = omega (e^{i phi} s+ + h.c.)
    double dt = 1e-3;          // integration step, units of 1/gamma
    double t_max = 6.0;        // horizon, units of 1/gamma
    std::uint64_t n_traj = 1;
    std::uint64_t seed = 0;

    // Y = 2 sqrt(2) omega / gamma is always recomputed, never stored.
    double drive_strength() const;
    static SystemParams from_drive_strength(double Y);

    // mu = sqrt(omega^2 - gamma^2/16), real branch; may be imaginary for
    // weak drive, in which case callers use the complex helpers in nojump.h.
    double rabi_halfwidth_sq() const { return omega * omega - gamma * gamma / 16.0; }

    /// Validates all invariants, throws param_error naming the offender.
    void validate() const;
};

inline double steady_state_inversion(const SystemParams& p) {
    // S_z = -(4 Delta^2 + gamma^2) / (4 Delta^2 + gamma^2 + 8 omega^2); equals
    // -1/(1+Y^2) on resonance.
    const double d2 = 4.0 * p.detuning * p.detuning + p.gamma * p.gamma;
    return -d2 / (d2 + 8.0 * p.omega * p.omega);
}

inline double steady_state_excited_population(const SystemParams& p) {
    return 0.5 * (1.0 + steady_state_inversion(p));
}

} // namespace unravel
