#include "unravel/master_equation.hpp"

#include <cmath>
#include <complex>

namespace unravel {

namespace {

// Convention: sigma_- = (sx + i sy)/2, so (sx, sy, sz) is a left-handed
// triple and the unitary part reads d r/dt = -2 a x r for H = a.sigma with
// a = (W cos phi, W sin phi, -Delta/2).
void add_unitary(BlochMatrix& m, const SystemParams& p) {
    const double ax = p.omega * std::cos(p.drive_phase);
    const double ay = p.omega * std::sin(p.drive_phase);
    const double az = -0.5 * p.detuning;
    m.a[1][3] += -2.0 * ay;
    m.a[1][2] += 2.0 * az;
    m.a[2][1] += -2.0 * az;
    m.a[2][3] += 2.0 * ax;
    m.a[3][2] += -2.0 * ax;
    m.a[3][1] += 2.0 * ay;
}

void add_decay(BlochMatrix& m, const SystemParams& p) {
    const double gdown = p.gamma * (p.nbar + 1.0);
    const double gup = p.gamma * p.nbar;
    const double gt = gdown + gup;
    m.a[1][1] += -0.5 * gt;
    m.a[2][2] += -0.5 * gt;
    m.a[3][3] += -gt;
    m.a[3][0] += -(gdown - gup); // feeds off the trace component
}

} // namespace

BlochMatrix liouvillian(const SystemParams& p) {
    BlochMatrix m;
    add_unitary(m, p);
    add_decay(m, p);
    return m;
}

BlochMatrix conditional_liouvillian(const SystemParams& p) {
    BlochMatrix m = liouvillian(p);
    // J_det rho = gamma (nbar+1) sigma- rho sigma+ maps (n,x,y,z) to
    // gamma(nbar+1) * ((n+z)/2, 0, 0, -(n+z)/2)
    const double r = p.efficiency * p.gamma * (p.nbar + 1.0) * 0.5;
    m.a[0][0] -= r;
    m.a[0][3] -= r;
    m.a[3][0] += r;
    m.a[3][3] += r;
    return m;
}

BlochMatrix rk4_step_matrix(const BlochMatrix& gen, double h) {
    // For a constant linear generator, classic RK4 is the degree-4 Taylor
    // polynomial of exp(h A); precompute it once and apply per step.
    BlochMatrix acc;
    BlochMatrix power;
    for (int i = 0; i < 4; ++i) {
        acc.a[i][i] = 1.0;
        power.a[i][i] = 1.0;
    }
    double fact = 1.0;
    for (int k = 1; k <= 4; ++k) {
        BlochMatrix next;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int l = 0; l < 4; ++l) s += power.a[i][l] * gen.a[l][j];
                next.a[i][j] = s * h;
            }
        power = next;
        fact *= k;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) acc.a[i][j] += power.a[i][j] / fact;
    }
    return acc;
}

namespace {

std::vector<std::array<double, 4>> integrate_grid(const BlochMatrix& gen, const SystemParams& p,
                                                  std::array<double, 4> v,
                                                  const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw param_error("time grid must not be empty");
    if (t_grid.front() != 0.0) throw param_error("time grid must start at 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw param_error("time grid must be strictly increasing");

    const double h_target = std::min(1e-3, p.omega > 0.0 ? 0.05 / p.omega : 1e-3);
    std::vector<std::array<double, 4>> out;
    out.reserve(t_grid.size());
    out.push_back(v);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double span = t_grid[i] - t_grid[i - 1];
        const int nsub = std::max(1, static_cast<int>(std::ceil(span / h_target)));
        const BlochMatrix step = rk4_step_matrix(gen, span / nsub);
        for (int s = 0; s < nsub; ++s) v = step.apply(v);
        out.push_back(v);
    }
    return out;
}

} // namespace

std::vector<MixedState> propagate_me(const SystemParams& p, const MixedState& rho0,
                                     const std::vector<double>& t_grid) {
    p.validate();
    rho0.require_valid();
    const BlochVector b0 = rho0.bloch();
    const auto raw = integrate_grid(liouvillian(p), p, {rho0.trace_re(), b0.x, b0.y, b0.z}, t_grid);
    std::vector<MixedState> out;
    out.reserve(raw.size());
    for (const auto& v : raw) out.push_back(MixedState::from_bloch({v[1], v[2], v[3]}, v[0]));
    return out;
}

std::vector<BlochVector> propagate_me_bloch(const SystemParams& p, const MixedState& rho0,
                                            const std::vector<double>& t_grid) {
    const BlochVector b0 = rho0.bloch();
    const auto raw = integrate_grid(liouvillian(p), p, {rho0.trace_re(), b0.x, b0.y, b0.z}, t_grid);
    std::vector<BlochVector> out;
    out.reserve(raw.size());
    for (const auto& v : raw) out.push_back({v[1], v[2], v[3]});
    return out;
}

BlochVector steady_state_bloch(const SystemParams& p) {
    // Solve A3 r = -c where A3 is the 3x3 Bloch block and c the trace column.
    const BlochMatrix m = liouvillian(p);
    double a[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a[i][j] = m.a[i + 1][j + 1];
        a[i][3] = -m.a[i + 1][0];
    }
    for (int col = 0; col < 3; ++col) { // Gaussian elimination, partial pivot
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        for (int j = 0; j < 4; ++j) std::swap(a[piv][j], a[col][j]);
        if (std::abs(a[col][col]) < 1e-14) throw numerical_error("singular Bloch steady-state system");
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int j = col; j < 4; ++j) a[r][j] -= f * a[col][j];
        }
    }
    return {a[0][3] / a[0][0], a[1][3] / a[1][1], a[2][3] / a[2][2]};
}

double analytic_inversion(const SystemParams& p, double t) {
    const double Y = p.drive_strength();
    const double Sz = -1.0 / (1.0 + Y * Y);
    const std::complex<double> delta =
        0.25 * p.gamma * std::sqrt(std::complex<double>(1.0 - 8.0 * Y * Y, 0.0));
    const double a = 0.75 * p.gamma;
    std::complex<double> osc;
    if (std::abs(delta) * t < 1e-8) {
        // cosh(dt) + a/d sinh(dt) -> 1 + a t for d -> 0
        osc = 1.0 + a * t + 0.5 * delta * delta * t * t * (1.0 + a * t / 3.0);
    } else {
        osc = std::cosh(delta * t) + (a / delta) * std::sinh(delta * t);
    }
    const std::complex<double> val = Sz * (1.0 + Y * Y * std::exp(-a * t) * osc);
    return std::real(val);
}

std::vector<double> g2_analytic(const SystemParams& p, const std::vector<double>& tau_grid) {
    const BlochVector ss = steady_state_bloch(p);
    const double pup_ss = 0.5 * (1.0 + ss.z);
    if (pup_ss <= 0.0)
        throw param_error("g2 undefined: steady-state excited population is zero (no drive)");
    const auto curve = propagate_me_bloch(p, MixedState::ground(), tau_grid);
    std::vector<double> g2;
    g2.reserve(curve.size());
    for (const auto& b : curve) g2.push_back(0.5 * (1.0 + b.z) / pup_ss);
    return g2;
}

} // namespace unravel
