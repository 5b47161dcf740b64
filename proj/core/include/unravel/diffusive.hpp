#pragma once

#include <vector>

#include "unravel/jump.hpp"
#include "unravel/params.hpp"
#include "unravel/rng.hpp"
#include "unravel/states.hpp"

namespace unravel {

enum class DiffusiveMode {
    Homodyne,          // fixed local-oscillator phase theta
    Heterodyne,        // pre-averaged quantum-state-diffusion form
    HeterodyneRotating // explicit theta(t) = -(w_LO - w_A) t, for cross-checks
};

struct DiffusiveConfig {
    DiffusiveMode mode = DiffusiveMode::Heterodyne;
    double theta = 0.0;      // homodyne LO phase
    double efficiency = 1.0; // homodyne split-noise variant; statistics match eta=1

    void validate(const SystemParams& p) const;
};

/// One Euler-Maruyama step of the homodyne stochastic Schroedinger equation:
/// unnormalized drift -iH - (gamma/2) s+ s-, measurement term
/// (sqrt(gamma) <e^{i th} s+ + e^{-i th} s-> dt + dW) e^{-i th} sqrt(gamma) s-,
/// then renormalization. dW ~ N(0, dt).
PureState step_homodyne(const PureState& s, const SystemParams& p, double theta, double dt,
                        double dW);

/// One Euler-Maruyama step of the quantum-state-diffusion (heterodyne) form
/// with complex noise dW = dWx + i dWy, dWx/dWy ~ N(0, dt) independent.
PureState step_heterodyne(const PureState& s, const SystemParams& p, double dt, double dWx,
                          double dWy);

TrajectoryRecord simulate_diffusive(const SystemParams& p, const DiffusiveConfig& cfg,
                                    const std::vector<double>& t_grid, RngStream& rng);

} // namespace unravel
