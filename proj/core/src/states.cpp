#include "unravel/states.hpp"

#include <cmath>

namespace unravel {

void PureState::normalize() {
    const double n = std::sqrt(norm_sq());
    if (n < 1e-12) throw numerical_error("state norm collapsed below 1e-12");
    up /= n;
    down /= n;
}

MixedState MixedState::ground() {
    MixedState m;
    m.rho[1][1] = 1.0;
    return m;
}

MixedState MixedState::excited() {
    MixedState m;
    m.rho[0][0] = 1.0;
    return m;
}

MixedState MixedState::maximally_mixed() {
    MixedState m;
    m.rho[0][0] = 0.5;
    m.rho[1][1] = 0.5;
    return m;
}

MixedState MixedState::from_pure(const PureState& psi) {
    MixedState m;
    m.rho[0][0] = psi.up * std::conj(psi.up);
    m.rho[0][1] = psi.up * std::conj(psi.down);
    m.rho[1][0] = psi.down * std::conj(psi.up);
    m.rho[1][1] = psi.down * std::conj(psi.down);
    return m;
}

MixedState MixedState::from_bloch(const BlochVector& b, double trace) {
    // rho = (trace*I + x sx + y sy + z sz)/2
    MixedState m;
    m.rho[0][0] = 0.5 * (trace + b.z);
    m.rho[1][1] = 0.5 * (trace - b.z);
    m.rho[0][1] = 0.5 * cplx(b.x, b.y);
    m.rho[1][0] = 0.5 * cplx(b.x, -b.y);
    return m;
}

void MixedState::rescale(double f) {
    for (auto& row : rho)
        for (auto& e : row) e *= f;
}

double MixedState::purity() const {
    // Tr(rho^2) for 2x2
    cplx s = rho[0][0] * rho[0][0] + rho[1][1] * rho[1][1] +
             rho[0][1] * rho[1][0] + rho[1][0] * rho[0][1];
    return std::real(s);
}

double MixedState::hermiticity_defect() const {
    double d = std::abs(rho[0][1] - std::conj(rho[1][0]));
    d = std::max(d, std::abs(std::imag(rho[0][0])));
    d = std::max(d, std::abs(std::imag(rho[1][1])));
    return d;
}

double MixedState::min_eigenvalue() const {
    const double a = std::real(rho[0][0]);
    const double d = std::real(rho[1][1]);
    const double off = std::abs(rho[0][1]);
    const double mean = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + off * off);
    return mean - rad;
}

void MixedState::require_valid(double tol) const {
    if (hermiticity_defect() > tol) throw param_error("density matrix is not Hermitian");
    if (std::abs(trace_re() - 1.0) > tol) throw param_error("density matrix trace != 1");
    if (min_eigenvalue() < -tol) throw param_error("density matrix is not positive semidefinite");
}

namespace {

template <typename S>
cplx expect_impl(const S& s, Observable o) {
    switch (o) {
        case Observable::SigmaX: return s.sigma_x();
        case Observable::SigmaY: return s.sigma_y();
        case Observable::SigmaZ: return s.sigma_z();
        case Observable::ExcitedPop: return s.excited_pop();
        case Observable::SigmaMinus: return s.sigma_minus();
    }
    throw param_error("unknown observable");
}

} // namespace

double expectation(const PureState& psi, Observable o) {
    return std::real(expect_impl(psi, o));
}

double expectation(const MixedState& rho, Observable o) {
    return std::real(expect_impl(rho, o));
}

cplx expectation_complex(const PureState& psi, Observable o) { return expect_impl(psi, o); }
cplx expectation_complex(const MixedState& rho, Observable o) { return expect_impl(rho, o); }

} // namespace unravel
