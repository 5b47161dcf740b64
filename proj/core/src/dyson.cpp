#include "unravel/dyson.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "unravel/nojump.hpp"

namespace unravel {

namespace {

double unnormalized_expectation(const PureState& s, Observable obs) {
    switch (obs) {
        case Observable::SigmaX: return 2.0 * std::real(std::conj(s.up) * s.down);
        case Observable::SigmaY: return 2.0 * std::imag(std::conj(s.up) * s.down);
        case Observable::SigmaZ: return std::norm(s.up) - std::norm(s.down);
        case Observable::ExcitedPop: return std::norm(s.up);
        default: throw param_error("unsupported observable for the O_m kernel");
    }
}

void check_uniform(const std::vector<double>& grid, const SystemParams& p) {
    if (grid.size() < 2) throw param_error("renewal grid needs at least two samples");
    const double h = grid[1] - grid[0];
    if (grid.front() != 0.0) throw param_error("renewal grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9)
            throw param_error("renewal grid must be uniform");
    if (h > 1e-3 + 1e-15 || (p.omega > 0.0 && h > 0.02 / p.omega + 1e-15))
        throw param_error("renewal grid too coarse: need h <= 1e-3 and h <= 0.02/omega");
}

} // namespace

double om_kernel(const SystemParams& p, double t, Observable obs, int m) {
    if (m < 1) throw param_error("O_m kernel needs m >= 1");
    if (p.efficiency != 1.0 || p.nbar != 0.0)
        throw param_error("O_m kernel is defined for ideal direct detection");
    const NoJumpPropagator prop(p);
    const PureState s = prop.from_ground(t);
    const double num = std::pow(unnormalized_expectation(s, obs), m);
    if (m == 1) return num;
    const double p0 = std::norm(s.up) + std::norm(s.down);
    const double denom = std::pow(p0, m - 1);
    if (denom < 1e-280)
        throw numerical_error(
            "p0^{m-1} underflow at gamma*t = " + std::to_string(t) +
            "; usable range is roughly t < " + std::to_string(560.0 * 2.0 / (p.gamma * (m - 1))));
    return num / denom;
}

double om2_sigma_z_closed_form(const SystemParams& p, double t) {
    if (p.detuning != 0.0) throw param_error("closed form requires Delta = 0");
    const double g = p.gamma;
    const cplx mu = 0.5 * std::sqrt(cplx(4.0 * p.omega * p.omega - 0.25 * g * g));
    const cplx mu2 = mu * mu;
    const cplx val = 0.5 + g * g / (32.0 * mu2) +
                     0.5 * (1.0 - g * g / (16.0 * mu2)) * std::cos(4.0 * mu * t) +
                     (g / (4.0 * mu)) * std::sin(4.0 * mu * t);
    return std::exp(-g * t) * std::real(val);
}

std::vector<double> renewal_density(const SystemParams& p, double h_step, std::size_t n) {
    if (p.detuning != 0.0) throw param_error("renewal engine requires Delta = 0");
    const NoJumpPropagator prop(p);
    std::vector<double> w(n + 1);
    for (std::size_t k = 0; k <= n; ++k) w[k] = -prop.survival_derivative(k * h_step);

    // h = w + w*h, trapezoid; w(0) = 0 so the update is explicit.
    std::vector<double> h(n + 1);
    h[0] = w[0];
    for (std::size_t k = 1; k <= n; ++k) {
        double conv = 0.5 * w[k] * h[0]; // j = 0 edge; j = k edge vanishes with w[0] = 0
        for (std::size_t j = 1; j < k; ++j) conv += w[k - j] * h[j];
        h[k] = w[k] + h_step * conv;
    }
    return h;
}

std::vector<double> renewal_average(const SystemParams& p, Observable obs, int m,
                                    const std::vector<double>& t_grid) {
    check_uniform(t_grid, p);
    const double h_step = t_grid[1] - t_grid[0];
    const std::size_t n = t_grid.size() - 1;
    const auto h = renewal_density(p, h_step, n);

    std::vector<double> om(n + 1);
    for (std::size_t k = 0; k <= n; ++k) om[k] = om_kernel(p, k * h_step, obs, m);

    std::vector<double> out(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        double conv = 0.0;
        if (k > 0) {
            conv = 0.5 * (om[k] * h[0] + om[0] * h[k]);
            for (std::size_t j = 1; j < k; ++j) conv += om[k - j] * h[j];
        }
        out[k] = om[k] + h_step * conv;
    }
    return out;
}

double asymptotic_var_strong(const SystemParams& p, double t) {
    const double Y = p.drive_strength();
    if (Y < 5.0) throw param_error("strong-drive asymptote requires Y >= 5");
    const double g = p.gamma, W = p.omega;
    const double e = std::exp(-0.5 * g * t);
    const double r = g / (8.0 * W);
    return 0.5 * (1.0 + e * std::cos(4.0 * W * t) +
                  r * e * (4.0 * std::sin(4.0 * W * t) - std::sin(6.0 * W * t) -
                           3.0 * std::sin(2.0 * W * t)));
}

double asymptotic_var_strong_alt(const SystemParams& p, double t) {
    const double Y = p.drive_strength();
    if (Y < 5.0) throw param_error("strong-drive asymptote requires Y >= 5");
    const double g = p.gamma, W = p.omega;
    const double e = std::exp(-0.5 * g * t);
    return 0.5 * (1.0 + e * std::cos(4.0 * W * t) +
                  (g / (8.0 * W)) * e *
                      (4.0 * std::sin(4.0 * W * t) - std::sin(6.0 * W * t) - std::sin(2.0 * W * t)) -
                  (g / (4.0 * W)) * e * std::sin(2.0 * W * t));
}

double asymptotic_var_weak(const SystemParams& p, double t, double* error_bound) {
    (void)t;
    if (p.omega > 0.1 * p.gamma) throw param_error("weak-drive asymptote requires omega <= 0.1 gamma");
    if (error_bound) {
        const double r = p.omega / p.gamma;
        *error_bound = r * r;
    }
    return 0.0;
}

} // namespace unravel
