#include "unravel/steering.hpp"

#include <cmath>

#include "unravel/diffusive.hpp"

namespace unravel {

double f1_value(const BlochVector& b) { return b.x * b.x; }
double f2_value(const BlochVector& b) { return b.y * b.y + b.z * b.z; }

namespace {

void add_envelope(SteeringCurve& c, double rabi_period) {
    const std::size_t n = c.t_grid.size();
    c.envelope.resize(n);
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (c.t_grid[i] - c.t_grid[lo] > rabi_period) ++lo;
        double m = c.S[lo];
        for (std::size_t j = lo + 1; j <= i; ++j) m = std::max(m, c.S[j]);
        c.envelope[i] = m;
    }
}

SteeringCurve reduce(const std::vector<double>& grid,
                     const std::vector<std::vector<double>>& f1_sums,
                     const std::vector<std::vector<double>>& f2_sums, std::uint64_t n1,
                     std::uint64_t n2, double rabi_period) {
    SteeringCurve c;
    c.t_grid = grid;
    c.n_direct = n1;
    c.n_het = n2;
    const std::size_t nt = grid.size();
    c.S.resize(nt);
    c.f1_mean.resize(nt);
    c.f2_mean.resize(nt);
    c.stderr_S.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const double m1 = f1_sums[0][t] / static_cast<double>(n1);
        const double m2 = f2_sums[0][t] / static_cast<double>(n2);
        const double v1 = std::max(0.0, f1_sums[1][t] / static_cast<double>(n1) - m1 * m1);
        const double v2 = std::max(0.0, f2_sums[1][t] / static_cast<double>(n2) - m2 * m2);
        c.f1_mean[t] = m1;
        c.f2_mean[t] = m2;
        c.S[t] = m1 + m2;
        c.stderr_S[t] = std::sqrt(v1 / static_cast<double>(n1) + v2 / static_cast<double>(n2));
    }
    add_envelope(c, rabi_period);
    return c;
}

} // namespace

SteeringCurve steering_value(const std::vector<TrajectoryRecord>& direct_ensemble,
                             const std::vector<TrajectoryRecord>& het_ensemble,
                             double rabi_period) {
    if (direct_ensemble.size() < 2 || het_ensemble.size() < 2)
        throw param_error("steering needs at least two trajectories per ensemble");
    const auto& grid = direct_ensemble.front().t_grid;
    for (const auto* ens : {&direct_ensemble, &het_ensemble})
        for (const auto& r : *ens)
            if (r.t_grid != grid) throw param_error("steering ensembles must share the grid");

    EnsembleAccumulator a1(grid.size(), direct_ensemble.size(), 2);
    EnsembleAccumulator a2(grid.size(), het_ensemble.size(), 2);
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < direct_ensemble.size(); ++i) {
        for (std::size_t t = 0; t < grid.size(); ++t)
            vals[t] = f1_value(direct_ensemble[i].bloch[t]);
        a1.add(i, vals);
    }
    for (std::size_t i = 0; i < het_ensemble.size(); ++i) {
        for (std::size_t t = 0; t < grid.size(); ++t) vals[t] = f2_value(het_ensemble[i].bloch[t]);
        a2.add(i, vals);
    }
    return reduce(grid, a1.reduced_sums(), a2.reduced_sums(), direct_ensemble.size(),
                  het_ensemble.size(), rabi_period);
}

SteeringCurve run_steering(const SystemParams& p, const std::vector<double>& t_grid,
                           int n_threads) {
    p.validate();
    if (p.nbar != 0.0) throw param_error("steering is defined for a vacuum bath");
    SystemParams common = p;
    common.drive_phase = M_PI / 2.0; // Rabi rotation in the x-z plane

    SystemParams direct = common; // detection efficiency as requested
    SystemParams het = common;
    het.efficiency = 1.0; // heterodyne arm is ideal by definition

    const auto f1_sums = run_parallel_ensemble(
        p.n_traj, p.seed, n_threads, t_grid.size(), 1, 2,
        [&](std::uint64_t, RngStream& rng, std::vector<std::vector<double>>& out) {
            const auto rec = simulate_mixed_jump(direct, t_grid, rng);
            for (std::size_t t = 0; t < t_grid.size(); ++t) out[0][t] = f1_value(rec.bloch[t]);
        });
    DiffusiveConfig cfg;
    cfg.mode = DiffusiveMode::Heterodyne;
    const auto f2_sums = run_parallel_ensemble(
        p.n_traj, p.seed + 0x9E3779B97F4A7C15ull, n_threads, t_grid.size(), 1, 2,
        [&](std::uint64_t, RngStream& rng, std::vector<std::vector<double>>& out) {
            const auto rec = simulate_diffusive(het, cfg, t_grid, rng);
            for (std::size_t t = 0; t < t_grid.size(); ++t) out[0][t] = f2_value(rec.bloch[t]);
        });

    const double rabi_period = p.omega > 0.0 ? M_PI / p.omega : t_grid.back();
    return reduce(t_grid, f1_sums[0], f2_sums[0], p.n_traj, p.n_traj, rabi_period);
}

} // namespace unravel
