#pragma once

#include "unravel/params.hpp"
#include "unravel/states.hpp"

namespace unravel {

// Between photodetections the (unnormalized) state follows
// d|psi>/dt = -i H_eff |psi>,  H_eff = -(Delta/2) sz + W(e^{i phi}s+ + h.c.)
//                                      - i (gamma/2) s+ s-,
// solved in closed form as a 2x2 exponential. Valid for the ideal vacuum
// case (eta = 1, nbar = 0); any detuning and drive phase are allowed.
class NoJumpPropagator {
  public:
    explicit NoJumpPropagator(const SystemParams& p);

    /// Unnormalized state exp(-i H_eff t)|down>.
    PureState from_ground(double t) const;

    /// Survival probability p0(t) = || exp(-i H_eff t)|down> ||^2.
    double survival(double t) const;

    /// d p0/dt = -gamma |<up|psi(t)>|^2  (used by the Newton polish).
    double survival_derivative(double t) const;

  private:
    double gamma_;
    cplx theta_;       // tr(A)/2 with A = -i H_eff
    cplx q_;           // sqrt((trA/2)^2 - det A)
    cplx b00_, b01_, b10_, b11_; // B = A - theta I
};

/// Closed-form waiting-time density between consecutive clicks (resonant
/// vacuum case): w(tau) = e^{-gamma tau/2} (gamma W^2/mu^2) sin^2(mu tau),
/// evaluated in complex arithmetic so weak drive (mu imaginary) and the
/// degenerate W = gamma/4 point are covered.
double waiting_time_density(const SystemParams& p, double tau);

/// Closed-form null-measurement probability p0(t) for the same case.
double null_probability(const SystemParams& p, double t);

} // namespace unravel
