#pragma once

#include <vector>

#include "unravel/params.hpp"
#include "unravel/states.hpp"

namespace unravel {

// Semi-analytic engine for ideal direct detection. The expansion of the
// conditional state over jump histories reduces every nonlinear average to
// O_m(t) = [Tr(O e^{l t}|down><down|)]^m / p0^{m-1}(t) convolved against the
// jump-occurrence (renewal) density h = w + w*h.

/// O_m kernel; errors when p0^{m-1} underflows, reporting the usable range.
double om_kernel(const SystemParams& p, double t, Observable obs, int m);

/// Closed-form [Tr(sigma_z e^{l t}|down><down|)]^2 for the resonant case,
/// used to cross-check the matrix-exponential route.
double om2_sigma_z_closed_form(const SystemParams& p, double t);

/// Renewal density h on a uniform grid of spacing h_step with n+1 samples,
/// solving the discrete Volterra equation by trapezoidal quadrature.
std::vector<double> renewal_density(const SystemParams& p, double h_step, std::size_t n);

/// Ensemble average of <O>^m on the uniform grid (spacing <= 1e-3, <= 0.02/W).
std::vector<double> renewal_average(const SystemParams& p, Observable obs, int m,
                                    const std::vector<double>& t_grid);

/// Strong-drive asymptote for Var(sigma_z), grouped main form. Requires Y >= 5;
/// accuracy is O(gamma^2/W^2), intended for Y >= 10.
double asymptotic_var_strong(const SystemParams& p, double t);

/// Algebraically equal regrouping (separate -sin(2Wt) terms); kept as a
/// consistency target for tests.
double asymptotic_var_strong_alt(const SystemParams& p, double t);

/// Weak-drive limit: 0 with error bound O((W/gamma)^2). Requires W <= 0.1 gamma.
double asymptotic_var_weak(const SystemParams& p, double t, double* error_bound = nullptr);

} // namespace unravel
