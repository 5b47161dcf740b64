#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "unravel/jump.hpp"
#include "unravel/params.hpp"
#include "unravel/states.hpp"

namespace unravel {

struct EnsembleCurve {
    std::vector<double> t_grid;
    std::vector<double> mean;
    std::vector<double> qtav; // population variance across trajectories
    std::vector<double> stderr_mean;
    std::vector<double> stderr_qtav;                     // fourth-moment formula
    std::vector<std::pair<int, std::vector<double>>> m_moments; // optional <O>^m averages
    std::uint64_t n_traj = 0;
};

// Power sums of per-trajectory values, accumulated per block of consecutive
// trajectory indices and merged in a fixed pairwise tree, so the result is
// bit-identical no matter how trajectories are distributed over threads.
class EnsembleAccumulator {
  public:
    static constexpr std::uint64_t kBlock = 256;

    EnsembleAccumulator(std::size_t n_times, std::uint64_t n_traj, int max_power = 4);

    /// Values of one trajectory (one scalar per grid time), by global index.
    /// Within a block, calls must arrive in increasing index order.
    void add(std::uint64_t traj_index, const std::vector<double>& values);

    /// Pairwise-tree merge over blocks; sum of v^p at each time, p = 1..max_power.
    std::vector<std::vector<double>> reduced_sums() const;

    std::uint64_t n_traj() const { return n_traj_; }
    int max_power() const { return max_power_; }
    std::size_t n_times() const { return n_times_; }

  private:
    std::size_t n_times_;
    std::uint64_t n_traj_;
    int max_power_;
    // sums_[block][power-1][time]
    std::vector<std::vector<std::vector<double>>> sums_;
};

/// Finalizes mean/qtav/stderr curves from power sums (needs max_power >= 4).
EnsembleCurve finalize_curve(const std::vector<double>& t_grid,
                             const std::vector<std::vector<double>>& sums, std::uint64_t n);

/// Per-time ensemble mean and variance of <observable> across trajectories.
EnsembleCurve qtav(const std::vector<TrajectoryRecord>& trajectories, Observable obs);

/// Per-time ensemble mean of <observable>^m (the m=1,2 identities hold exactly).
EnsembleCurve power_average(const std::vector<TrajectoryRecord>& trajectories, Observable obs,
                            int m);

/// Angular frequency of the dominant discrete-Fourier peak of the de-trended
/// qtav signal inside [window_lo, window_hi]. The window must hold at least
/// four oscillation periods of the reported peak.
double dominant_frequency(const EnsembleCurve& curve, double window_lo, double window_hi);

/// Runs n_traj independent trajectories on n_threads with per-trajectory
/// Philox streams; traj(index, rng) returns one scalar per grid time for each
/// requested observable channel; result is one reduced sum table per channel.
std::vector<std::vector<std::vector<double>>> run_parallel_ensemble(
    std::uint64_t n_traj, std::uint64_t seed, int n_threads, std::size_t n_times, int n_channels,
    int max_power,
    const std::function<void(std::uint64_t, RngStream&, std::vector<std::vector<double>>&)>& traj);

} // namespace unravel
