#include "unravel/nojump.hpp"

#include <cmath>
#include <complex>

namespace unravel {

namespace {

// sinh(q t)/q with the q -> 0 limit handled by series.
cplx sinhc_over(cplx q, double t) {
    const cplx u = q * t;
    if (std::abs(u) < 1e-6) {
        const cplx u2 = u * u;
        return t * (1.0 + u2 / 6.0 * (1.0 + u2 / 20.0));
    }
    return std::sinh(u) / q;
}

} // namespace

NoJumpPropagator::NoJumpPropagator(const SystemParams& p) : gamma_(p.gamma) {
    if (p.nbar != 0.0) throw param_error("no-jump propagator requires nbar = 0");
    const cplx i(0.0, 1.0);
    const cplx a00 = i * 0.5 * p.detuning - 0.5 * p.gamma;
    const cplx a01 = -i * p.omega * std::exp(i * p.drive_phase);
    const cplx a10 = -i * p.omega * std::exp(-i * p.drive_phase);
    const cplx a11 = -i * 0.5 * p.detuning;
    theta_ = 0.5 * (a00 + a11);
    b00_ = a00 - theta_;
    b01_ = a01;
    b10_ = a10;
    b11_ = a11 - theta_;
    // q^2 = -det(B) for traceless B
    q_ = std::sqrt(b00_ * b00_ + b01_ * b10_);
}

PureState NoJumpPropagator::from_ground(double t) const {
    PureState s;
    if (std::abs(q_) * t > 30.0) {
        // eigen-split form, safe against cosh overflow at long times:
        // exp(At)v = 1/2 e^{(th+q)t}[v + Bv/q] + 1/2 e^{(th-q)t}[v - Bv/q]
        const cplx ep = 0.5 * std::exp((theta_ + q_) * t);
        const cplx em = 0.5 * std::exp((theta_ - q_) * t);
        const cplx bu = b01_ / q_; // (B v)/q for v = (0,1)
        const cplx bd = b11_ / q_;
        s.up = ep * bu - em * bu;
        s.down = ep * (1.0 + bd) + em * (1.0 - bd);
        return s;
    }
    // exp(At) = e^{theta t} [cosh(qt) I + sinh(qt)/q B] applied to (0,1)
    const cplx e = std::exp(theta_ * t);
    const cplx ch = std::cosh(q_ * t);
    const cplx sh = sinhc_over(q_, t);
    s.up = e * (sh * b01_);
    s.down = e * (ch + sh * b11_);
    return s;
}

double NoJumpPropagator::survival(double t) const {
    const PureState s = from_ground(t);
    return std::norm(s.up) + std::norm(s.down);
}

double NoJumpPropagator::survival_derivative(double t) const {
    const PureState s = from_ground(t);
    return -gamma_ * std::norm(s.up);
}

double waiting_time_density(const SystemParams& p, double tau) {
    if (p.detuning != 0.0) throw param_error("waiting_time_density requires Delta = 0");
    const double g = p.gamma;
    const double mu2 = p.omega * p.omega - g * g / 16.0;
    if (mu2 < 0.0 && std::sqrt(-mu2) * tau > 200.0) {
        // weak drive, long time: fold the envelope into sinh to avoid overflow,
        // e^{-g tau/4} sinh(m tau)/m = (e^{(m-g/4)tau} - e^{-(m+g/4)tau})/(2m)
        const double m = std::sqrt(-mu2);
        const double s = (std::exp((m - 0.25 * g) * tau) - std::exp(-(m + 0.25 * g) * tau)) /
                         (2.0 * m);
        return g * p.omega * p.omega * s * s;
    }
    const cplx mu = 0.5 * std::sqrt(cplx(4.0 * p.omega * p.omega - 0.25 * g * g));
    // sin(mu tau)/mu, series near the degenerate point mu = 0
    cplx s;
    const cplx u = mu * tau;
    if (std::abs(u) < 1e-6) {
        s = tau * (1.0 - u * u / 6.0);
    } else {
        s = std::sin(u) / mu;
    }
    return std::exp(-0.5 * g * tau) * g * p.omega * p.omega * std::norm(s);
}

double null_probability(const SystemParams& p, double t) {
    if (p.detuning != 0.0) throw param_error("null_probability requires Delta = 0");
    const double g = p.gamma;
    const double mu2c = p.omega * p.omega - g * g / 16.0;
    if (mu2c < 0.0 && std::sqrt(-mu2c) * t > 100.0) {
        // stable split: e^{-gt/2}[1 - (g^2/16 m^2)(1 - cosh 2mt) + (g/4m) sinh 2mt]
        const double m = std::sqrt(-mu2c);
        const double ep = std::exp((2.0 * m - 0.5 * g) * t);
        const double em = std::exp(-(2.0 * m + 0.5 * g) * t);
        const double e0 = std::exp(-0.5 * g * t);
        return e0 * (1.0 - g * g / (16.0 * m * m)) +
               0.5 * (ep + em) * (g * g / (16.0 * m * m)) + (g / (8.0 * m)) * (ep - em);
    }
    const cplx mu = 0.5 * std::sqrt(cplx(4.0 * p.omega * p.omega - 0.25 * g * g));
    const cplx u = 2.0 * mu * t;
    cplx one_minus_cos_over_mu2, sin_over_mu;
    if (std::abs(u) < 1e-6) {
        // (1-cos u)/mu^2 = 2 t^2 (1 - u^2/12), sin(u)/mu = 2 t (1 - u^2/6)
        one_minus_cos_over_mu2 = 2.0 * t * t * (1.0 - u * u / 12.0);
        sin_over_mu = 2.0 * t * (1.0 - u * u / 6.0);
    } else {
        one_minus_cos_over_mu2 = (1.0 - std::cos(u)) / (mu * mu);
        sin_over_mu = std::sin(u) / mu;
    }
    // p0 = e^{-gt/2}[W^2/mu^2 - (g^2/16 mu^2) cos(2 mu t) + (g/4 mu) sin(2 mu t)]
    //    = e^{-gt/2}[1 + (g^2/16)(1-cos)/mu^2 + (g/4) sin/mu]
    const cplx val =
        1.0 + (g * g / 16.0) * one_minus_cos_over_mu2 + 0.25 * g * sin_over_mu;
    return std::exp(-0.5 * g * t) * std::real(val);
}

} // namespace unravel
