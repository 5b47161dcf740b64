#include "unravel/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <thread>

namespace unravel {

EnsembleAccumulator::EnsembleAccumulator(std::size_t n_times, std::uint64_t n_traj, int max_power)
    : n_times_(n_times), n_traj_(n_traj), max_power_(max_power) {
    if (max_power < 1) throw param_error("max_power must be >= 1");
    const std::uint64_t n_blocks = (n_traj + kBlock - 1) / kBlock;
    sums_.assign(n_blocks, std::vector<std::vector<double>>(
                               max_power, std::vector<double>(n_times, 0.0)));
}

void EnsembleAccumulator::add(std::uint64_t traj_index, const std::vector<double>& values) {
    if (values.size() != n_times_) throw param_error("trajectory sample count mismatch");
    auto& block = sums_[traj_index / kBlock];
    for (std::size_t t = 0; t < n_times_; ++t) {
        double p = values[t];
        block[0][t] += p;
        for (int k = 1; k < max_power_; ++k) {
            p *= values[t];
            block[k][t] += p;
        }
    }
}

std::vector<std::vector<double>> EnsembleAccumulator::reduced_sums() const {
    // fixed pairwise tree over block index
    std::vector<std::vector<std::vector<double>>> level = sums_;
    while (level.size() > 1) {
        std::vector<std::vector<std::vector<double>>> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            auto merged = level[i];
            for (int k = 0; k < max_power_; ++k)
                for (std::size_t t = 0; t < n_times_; ++t) merged[k][t] += level[i + 1][k][t];
            next.push_back(std::move(merged));
        }
        if (level.size() % 2 == 1) next.push_back(level.back());
        level = std::move(next);
    }
    if (level.empty()) return std::vector<std::vector<double>>(max_power_, std::vector<double>(n_times_, 0.0));
    return level.front();
}

EnsembleCurve finalize_curve(const std::vector<double>& t_grid,
                             const std::vector<std::vector<double>>& sums, std::uint64_t n) {
    if (n < 2) throw param_error("ensemble statistics need n_traj >= 2");
    if (sums.size() < 4) throw param_error("finalize_curve needs power sums up to 4");
    const std::size_t nt = t_grid.size();
    EnsembleCurve c;
    c.t_grid = t_grid;
    c.n_traj = n;
    c.mean.resize(nt);
    c.qtav.resize(nt);
    c.stderr_mean.resize(nt);
    c.stderr_qtav.resize(nt);
    const double dn = static_cast<double>(n);
    for (std::size_t t = 0; t < nt; ++t) {
        const double m = sums[0][t] / dn;
        const double r2 = sums[1][t] / dn;
        const double r3 = sums[2][t] / dn;
        const double r4 = sums[3][t] / dn;
        const double m2 = r2 - m * m; // population variance (1/N convention)
        const double m4 = r4 - 4.0 * m * r3 + 6.0 * m * m * r2 - 3.0 * m * m * m * m;
        c.mean[t] = m;
        c.qtav[t] = m2;
        c.stderr_mean[t] = std::sqrt(std::max(0.0, m2) / dn);
        c.stderr_qtav[t] = std::sqrt(std::max(0.0, m4 - m2 * m2) / dn);
    }
    return c;
}

namespace {

std::vector<double> extract(const TrajectoryRecord& rec, Observable obs) {
    std::vector<double> v;
    v.reserve(rec.bloch.size());
    for (const auto& b : rec.bloch) {
        switch (obs) {
            case Observable::SigmaX: v.push_back(b.x); break;
            case Observable::SigmaY: v.push_back(b.y); break;
            case Observable::SigmaZ: v.push_back(b.z); break;
            case Observable::ExcitedPop: v.push_back(0.5 * (1.0 + b.z)); break;
            default: throw param_error("qtav supports real single-time observables only");
        }
    }
    return v;
}

void check_shared_grid(const std::vector<TrajectoryRecord>& trajectories) {
    if (trajectories.size() < 2) throw param_error("ensemble statistics need n_traj >= 2");
    const auto& g0 = trajectories.front().t_grid;
    for (const auto& r : trajectories) {
        if (r.t_grid.size() != g0.size()) throw param_error("trajectory grids differ");
        for (std::size_t i = 0; i < g0.size(); ++i)
            if (r.t_grid[i] != g0[i]) throw param_error("trajectory grids differ");
    }
}

} // namespace

EnsembleCurve qtav(const std::vector<TrajectoryRecord>& trajectories, Observable obs) {
    check_shared_grid(trajectories);
    const auto& grid = trajectories.front().t_grid;
    EnsembleAccumulator acc(grid.size(), trajectories.size(), 4);
    for (std::size_t i = 0; i < trajectories.size(); ++i) acc.add(i, extract(trajectories[i], obs));
    return finalize_curve(grid, acc.reduced_sums(), trajectories.size());
}

EnsembleCurve power_average(const std::vector<TrajectoryRecord>& trajectories, Observable obs,
                            int m) {
    if (m < 1) throw param_error("power m must be a positive integer");
    check_shared_grid(trajectories);
    const auto& grid = trajectories.front().t_grid;
    const int maxp = std::max(4, m);
    EnsembleAccumulator acc(grid.size(), trajectories.size(), maxp);
    for (std::size_t i = 0; i < trajectories.size(); ++i) acc.add(i, extract(trajectories[i], obs));
    const auto sums = acc.reduced_sums();
    EnsembleCurve c = finalize_curve(grid, sums, trajectories.size());
    std::vector<double> pm(grid.size());
    for (std::size_t t = 0; t < grid.size(); ++t)
        pm[t] = sums[m - 1][t] / static_cast<double>(trajectories.size());
    c.m_moments.emplace_back(m, std::move(pm));
    return c;
}

double dominant_frequency(const EnsembleCurve& curve, double window_lo, double window_hi) {
    std::vector<double> y;
    std::vector<double> ts;
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
        const double t = curve.t_grid[i];
        if (t >= window_lo - 1e-12 && t <= window_hi + 1e-12) {
            ts.push_back(t);
            y.push_back(curve.qtav[i]);
        }
    }
    const std::size_t n = y.size();
    if (n < 16) throw param_error("frequency window holds too few samples");
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : y) v -= mean;

    const double T = ts.back() - ts.front();
    std::size_t best_k = 0;
    double best_mag = -1.0;
    for (std::size_t k = 1; k <= n / 2; ++k) { // plain DFT; n is a few hundred
        std::complex<double> s(0.0, 0.0);
        const double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j)
            s += y[j] * std::exp(std::complex<double>(0.0, -w * static_cast<double>(j)));
        const double mag = std::abs(s);
        if (mag > best_mag) {
            best_mag = mag;
            best_k = k;
        }
    }
    if (best_k < 4)
        throw param_error("frequency window shorter than four periods of the dominant peak");
    return 2.0 * M_PI * static_cast<double>(best_k) / T;
}

std::vector<std::vector<std::vector<double>>> run_parallel_ensemble(
    std::uint64_t n_traj, std::uint64_t seed, int n_threads, std::size_t n_times, int n_channels,
    int max_power,
    const std::function<void(std::uint64_t, RngStream&, std::vector<std::vector<double>>&)>& traj) {
    if (n_threads < 1) n_threads = 1;
    std::vector<EnsembleAccumulator> accs;
    accs.reserve(n_channels);
    for (int c = 0; c < n_channels; ++c) accs.emplace_back(n_times, n_traj, max_power);

    const std::uint64_t n_blocks = (n_traj + EnsembleAccumulator::kBlock - 1) / EnsembleAccumulator::kBlock;
    std::atomic<std::uint64_t> next_block{0};
    auto worker = [&]() {
        std::vector<std::vector<double>> out(n_channels, std::vector<double>(n_times));
        for (;;) {
            const std::uint64_t b = next_block.fetch_add(1);
            if (b >= n_blocks) return;
            const std::uint64_t lo = b * EnsembleAccumulator::kBlock;
            const std::uint64_t hi = std::min(n_traj, lo + EnsembleAccumulator::kBlock);
            for (std::uint64_t i = lo; i < hi; ++i) { // in-block order is fixed
                RngStream rng(seed, i);
                traj(i, rng, out);
                for (int c = 0; c < n_channels; ++c) accs[c].add(i, out[c]);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<std::vector<std::vector<double>>> out;
    out.reserve(n_channels);
    for (auto& a : accs) out.push_back(a.reduced_sums());
    return out;
}

} // namespace unravel
