#include "unravel/jump.hpp"

#include <cmath>

#include "unravel/master_equation.hpp"

namespace unravel {

std::vector<double> make_grid(double t_max, double dt) {
    if (!(dt > 0.0)) throw param_error("grid dt must be > 0");
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 0.5));
    g.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g.push_back(i * dt);
    return g;
}

double sample_waiting_time(const NoJumpPropagator& prop, RngStream& rng) {
    const double u = rng.uniform();
    // p0 is the survival function: monotone nonincreasing from 1 to 0.
    double lo = 0.0, hi = 1.0;
    constexpr double t_cap = 1e9;
    while (prop.survival(hi) > u) {
        lo = hi;
        hi *= 2.0;
        if (hi > t_cap) return std::numeric_limits<double>::infinity(); // dark atom
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        (prop.survival(mid) > u ? lo : hi) = mid;
        if (hi - lo < 1e-12) break;
    }
    double tau = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) { // Newton polish on p0(tau) - u
        const double d = prop.survival_derivative(tau);
        if (d == 0.0) break;
        const double step = (prop.survival(tau) - u) / d;
        const double next = tau - step;
        if (next < lo || next > hi) break;
        tau = next;
    }
    if (!(prop.survival(tau) > -1.0)) // NaN guard: signals a p0 evaluation bug
        throw numerical_error("waiting-time root find failed to converge");
    return tau;
}

double sample_waiting_time(const SystemParams& p, RngStream& rng) {
    if (p.efficiency != 1.0 || p.nbar != 0.0)
        throw param_error("exact waiting-time sampling requires eta = 1, nbar = 0");
    return sample_waiting_time(NoJumpPropagator(p), rng);
}

TrajectoryRecord simulate_pure_jump(const SystemParams& p, const std::vector<double>& t_grid,
                                    RngStream& rng) {
    if (p.efficiency != 1.0 || p.nbar != 0.0)
        throw param_error("simulate_pure_jump requires eta = 1, nbar = 0");
    if (t_grid.empty()) throw param_error("empty sample grid");

    const NoJumpPropagator prop(p);
    TrajectoryRecord rec;
    rec.t_grid = t_grid;
    rec.bloch.reserve(t_grid.size());
    rec.purity.assign(t_grid.size(), 1.0);
    rec.clicks.t_max = t_grid.back();

    double t_reset = 0.0;
    double wait = sample_waiting_time(prop, rng);
    for (double t : t_grid) {
        while (t_reset + wait <= t) {
            t_reset += wait;
            rec.clicks.click_times.push_back(t_reset);
            wait = sample_waiting_time(prop, rng);
        }
        PureState s = prop.from_ground(t - t_reset);
        s.normalize();
        rec.bloch.push_back(s.bloch());
    }
    return rec;
}

ClickRecord simulate_clicks(const SystemParams& p, double t_int, RngStream& rng) {
    if (p.efficiency != 1.0 || p.nbar != 0.0)
        throw param_error("simulate_clicks requires eta = 1, nbar = 0");
    const NoJumpPropagator prop(p);
    ClickRecord rec;
    rec.t_max = t_int;
    double t = sample_waiting_time(prop, rng);
    while (t <= t_int) {
        rec.click_times.push_back(t);
        t += sample_waiting_time(prop, rng);
    }
    return rec;
}

TrajectoryRecord simulate_mixed_jump(const SystemParams& p, const std::vector<double>& t_grid,
                                     RngStream& rng) {
    if (t_grid.size() < 2) throw param_error("mixed-jump simulation needs at least two grid times");
    const double grid_dt = t_grid[1] - t_grid[0];
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (std::abs(t_grid[i] - t_grid[i - 1] - grid_dt) > 1e-9)
            throw param_error("mixed-jump simulation requires a uniform sample grid");
    const double dt_want = std::min({p.dt, 1e-3, p.omega > 0.0 ? 0.02 / p.omega : 1.0});
    const int nsub = std::max(1, static_cast<int>(std::ceil(grid_dt / dt_want)));
    const double h = grid_dt / nsub;

    const double detect_rate = p.efficiency * p.gamma * (p.nbar + 1.0);
    const BlochMatrix step = rk4_step_matrix(conditional_liouvillian(p), h);

    TrajectoryRecord rec;
    rec.t_grid = t_grid;
    rec.bloch.reserve(t_grid.size());
    rec.purity.reserve(t_grid.size());
    rec.clicks.t_max = t_grid.back();

    std::array<double, 4> v{1.0, 0.0, 0.0, -1.0}; // (trace, x, y, z), ground state
    auto sample = [&]() {
        rec.bloch.push_back({v[1], v[2], v[3]});
        rec.purity.push_back(0.5 * (1.0 + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]));
    };
    sample();
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
        const double t0 = t_grid[i - 1];
        for (int s = 0; s < nsub; ++s) {
            const double p_up = 0.5 * (v[0] + v[3]);
            const double p_c = detect_rate * p_up * h;
            if (p_c >= 0.1)
                throw param_error("jump probability per step >= 0.1: decrease dt");
            if (rng.uniform() < p_c) {
                // detected collapse: rho -> s- rho s+ / tr, i.e. the ground state
                v = {1.0, 0.0, 0.0, -1.0};
                rec.clicks.click_times.push_back(t0 + (s + 1) * h);
            } else {
                v = step.apply(v);
                const double n = v[0];
                for (auto& c : v) c /= n;
            }
        }
        sample();
    }
    return rec;
}

} // namespace unravel
