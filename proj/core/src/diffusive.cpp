#include "unravel/diffusive.hpp"

#include <cmath>
#include <complex>

namespace unravel {

void DiffusiveConfig::validate(const SystemParams& p) const {
    if (p.dt > 1e-3 + 1e-15) throw param_error("diffusive dt must be <= 1e-3");
    if (p.omega > 0.0 && p.dt > 0.02 / p.omega + 1e-15)
        throw param_error("diffusive dt must be <= 0.02/omega");
    if (mode == DiffusiveMode::HeterodyneRotating) {
        const double w = std::abs(p.het_detuning);
        if (w == 0.0) throw param_error("rotating heterodyne requires het_detuning != 0");
        if (p.dt > 0.125 / w)
            throw param_error("rotating heterodyne requires dt <= 0.125/|w_LO - w_A|");
    }
    if (efficiency < 0.0 || efficiency > 1.0) throw param_error("efficiency must lie in [0,1]");
}

namespace {

inline void apply_hamiltonian(const SystemParams& p, const PureState& s, cplx& hu, cplx& hd) {
    // H = -(Delta/2) sz + W (e^{i phi} s+ + e^{-i phi} s-)
    const cplx drive = p.omega * std::exp(cplx(0.0, p.drive_phase));
    hu = -0.5 * p.detuning * s.up + drive * s.down;
    hd = 0.5 * p.detuning * s.down + std::conj(drive) * s.up;
}

} // namespace

PureState step_homodyne(const PureState& s, const SystemParams& p, double theta, double dt,
                        double dW) {
    const cplx i(0.0, 1.0);
    const double sg = std::sqrt(p.gamma);
    cplx hu, hd;
    apply_hamiltonian(p, s, hu, hd);

    // measured quadrature <e^{i th} s+ + e^{-i th} s-> of the normalized state
    const cplx eth = std::exp(-i * theta);
    const double quad = 2.0 * std::real(eth * s.sigma_minus());
    const cplx kick = sg * quad * dt + dW;

    PureState out;
    out.up = s.up + dt * (-i * hu - 0.5 * p.gamma * s.up);
    out.down = s.down + dt * (-i * hd) + kick * eth * sg * s.up; // s-|psi> lands on |down>
    out.normalize();
    return out;
}

PureState step_heterodyne(const PureState& s, const SystemParams& p, double dt, double dWx,
                          double dWy) {
    const cplx i(0.0, 1.0);
    const double g = p.gamma;
    cplx hu, hd;
    apply_hamiltonian(p, s, hu, hd);

    const cplx l = std::sqrt(g) * s.sigma_minus(); // <L>, L = sqrt(gamma) s-
    const cplx lbar = std::conj(l);
    const double l2 = std::norm(l);

    // drift -iH + <L*>L - 1/2 L*L - 1/2|<L>|^2, noise (L - <L>)/sqrt(2) dW;
    // regrouped as (-iH - 1/2 L*L + 1/2|<L>|^2) dt + (<L*>dt + dW')(L - <L>)
    const cplx dW = cplx(dWx, dWy) / std::sqrt(2.0);
    const cplx kick = lbar * dt + dW;
    PureState out;
    out.up = s.up + dt * (-i * hu - 0.5 * g * s.up + 0.5 * l2 * s.up) - kick * l * s.up;
    out.down = s.down + dt * (-i * hd + 0.5 * l2 * s.down) +
               kick * (std::sqrt(g) * s.up - l * s.down);
    out.normalize();
    return out;
}

TrajectoryRecord simulate_diffusive(const SystemParams& p, const DiffusiveConfig& cfg,
                                    const std::vector<double>& t_grid, RngStream& rng) {
    p.validate();
    cfg.validate(p);
    if (t_grid.empty()) throw param_error("empty sample grid");

    TrajectoryRecord rec;
    rec.t_grid = t_grid;
    rec.clicks.t_max = t_grid.back();
    rec.bloch.reserve(t_grid.size());
    rec.purity.assign(t_grid.size(), 1.0);

    PureState s = PureState::ground();
    rec.bloch.push_back(s.bloch());
    const double se = std::sqrt(cfg.efficiency);
    const double sr = std::sqrt(1.0 - cfg.efficiency);
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double span = t_grid[k] - t_grid[k - 1];
        const int nsub = std::max(1, static_cast<int>(std::ceil(span / p.dt - 1e-9)));
        const double h = span / nsub;
        for (int j = 0; j < nsub; ++j) {
            const double t = t_grid[k - 1] + j * h;
            switch (cfg.mode) {
                case DiffusiveMode::Homodyne: {
                    double dW = rng.gaussian(h);
                    if (cfg.efficiency < 1.0) // recorded + unrecorded noise shares
                        dW = se * dW + sr * rng.gaussian(h);
                    s = step_homodyne(s, p, cfg.theta, h, dW);
                    break;
                }
                case DiffusiveMode::Heterodyne:
                    s = step_heterodyne(s, p, h, rng.gaussian(h), rng.gaussian(h));
                    break;
                case DiffusiveMode::HeterodyneRotating:
                    s = step_homodyne(s, p, -p.het_detuning * t, h, rng.gaussian(h));
                    break;
            }
        }
        rec.bloch.push_back(s.bloch());
    }
    return rec;
}

} // namespace unravel
