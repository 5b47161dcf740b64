#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "unravel/params.hpp"
#include "unravel/rng.hpp"

namespace unravel {

enum class TimeUnit { GammaT, Seconds };

struct TimestampSeries {
    int detector_id = 0;
    std::vector<double> times; // sorted arrival times within [0, t_int]
    double t_int = 0.0;
    TimeUnit unit = TimeUnit::GammaT;
    double gamma_hz = 1.0;   // conversion when unit == Seconds
    double r_sca_det = 0.0;  // optional metadata
    double r_dark = 0.0;

    /// Rescales a seconds-tagged series into dimensionless gamma*t.
    TimestampSeries to_gamma_t() const;
    double rate() const { return times.empty() ? 0.0 : times.size() / t_int; }
};

struct G2Estimate {
    std::vector<double> tau;    // bin centers
    std::vector<double> g2;
    std::vector<double> err;    // Poisson counting error per bin
    double bin_width = 0.0;
};

/// Folded cross-correlogram of arrival-time differences, normalized by the
/// uncorrelated expectation 2 r_a r_b dt (T - tau). Self-pairs are skipped
/// when both arguments are the same series.
G2Estimate estimate_g2(const TimestampSeries& a, const TimestampSeries& b, double bin_width,
                       double tau_max);

/// Imperfection-corrected fit model:
/// [A(tau) g2(tau; W, Delta) + 2/S + 1/S^2] / [1 + 2/S + 1/S^2], A = a + b e^{-c tau}.
struct G2ModelParams {
    double omega = 1.0;
    double detuning = 0.0;
    double env_a = 1.0;
    double env_b = 0.0;
    double env_c = 1.0;
    double snr_det = 10.0;
};

std::vector<double> g2_model(const std::vector<double>& tau, const G2ModelParams& q);

struct FitResult {
    G2ModelParams params;
    std::array<double, 6> stderrs{}; // finite-difference covariance diagonal
    double chi2 = 0.0;
    int n_evals = 0;
    bool converged = false;
};

/// Weighted least squares via Nelder-Mead with restarts; deterministic.
FitResult fit_g2(const G2Estimate& est, const G2ModelParams& guess);

/// SNR = sqrt(eta^2 g2 R_sca,det t_int)
double snr_model(double eta, double g2_value, double r_sca_det, double t_int);

/// Ratio mean/std of the g2 estimate over tau in [lo, hi] (steady-state window).
double measure_snr(const G2Estimate& est, double tau_lo, double tau_hi);

/// Detection thinning + 50/50 beam splitting of an emission record into two
/// detector streams; each click is kept with probability eta.
std::pair<TimestampSeries, TimestampSeries> thin_and_split(const std::vector<double>& clicks,
                                                           double t_int, double eta,
                                                           RngStream& rng);

/// Adds an independent homogeneous Poisson dark-count process of given rate.
void add_dark_counts(TimestampSeries& s, double rate, RngStream& rng);

/// Generic Nelder-Mead minimizer (used by the g2 fit; exposed for tests).
struct SimplexResult {
    std::vector<double> x;
    double fval = 0.0;
    int n_evals = 0;
    bool converged = false;
};
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, std::vector<double> step, double ftol,
                          int max_evals, int restarts);

} // namespace unravel
