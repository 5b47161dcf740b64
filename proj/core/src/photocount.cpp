#include "unravel/photocount.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "unravel/master_equation.hpp"

namespace unravel {

TimestampSeries TimestampSeries::to_gamma_t() const {
    if (unit == TimeUnit::GammaT) return *this;
    if (!(gamma_hz > 0.0)) throw param_error("seconds-tagged series needs gamma_hz > 0");
    TimestampSeries out = *this;
    out.unit = TimeUnit::GammaT;
    out.t_int = t_int * gamma_hz;
    for (auto& t : out.times) t *= gamma_hz;
    out.r_sca_det = r_sca_det / gamma_hz;
    out.r_dark = r_dark / gamma_hz;
    return out;
}

G2Estimate estimate_g2(const TimestampSeries& a_in, const TimestampSeries& b_in, double bin_width,
                       double tau_max) {
    const TimestampSeries a = a_in.to_gamma_t();
    const TimestampSeries b = b_in.to_gamma_t();
    if (a.times.empty() || b.times.empty()) throw param_error("empty timestamp series");
    if (!(bin_width > 0.0) || !(tau_max > bin_width)) throw param_error("bad g2 binning");
    const bool same = (&a_in == &b_in);
    const double T = std::min(a.t_int, b.t_int);
    if (T <= tau_max) throw param_error("integration window shorter than tau_max");

    const std::size_t nbins = static_cast<std::size_t>(std::floor(tau_max / bin_width));
    std::vector<std::uint64_t> counts(nbins, 0);

    // two-pointer sweep over the sorted series
    std::size_t lo = 0;
    for (const double t : a.times) {
        while (lo < b.times.size() && b.times[lo] < t - tau_max) ++lo;
        for (std::size_t j = lo; j < b.times.size() && b.times[j] <= t + tau_max; ++j) {
            const double d = std::abs(b.times[j] - t);
            if (same && d == 0.0) continue; // self-pairs
            const auto k = static_cast<std::size_t>(d / bin_width);
            if (k < nbins) ++counts[k];
        }
    }

    const double ra = a.times.size() / T;
    const double rb = b.times.size() / T;
    G2Estimate est;
    est.bin_width = bin_width;
    est.tau.resize(nbins);
    est.g2.resize(nbins);
    est.err.resize(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        const double tau_c = (k + 0.5) * bin_width;
        const double denom = 2.0 * ra * rb * bin_width * (T - tau_c);
        est.tau[k] = tau_c;
        est.g2[k] = counts[k] / denom;
        est.err[k] = std::sqrt(std::max<double>(counts[k], 1.0)) / denom;
    }
    return est;
}

std::vector<double> g2_model(const std::vector<double>& tau, const G2ModelParams& q) {
    SystemParams p;
    p.omega = q.omega;
    p.detuning = q.detuning;
    std::vector<double> grid;
    grid.reserve(tau.size() + 1);
    grid.push_back(0.0);
    for (double t : tau) grid.push_back(t);
    const auto base = g2_analytic(p, grid);

    const double s = q.snr_det;
    const double bg = 2.0 / s + 1.0 / (s * s);
    std::vector<double> out(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const double A = q.env_a + q.env_b * std::exp(-q.env_c * tau[i]);
        out[i] = (A * base[i + 1] + bg) / (1.0 + bg);
    }
    return out;
}

double snr_model(double eta, double g2_value, double r_sca_det, double t_int) {
    if (eta < 0.0 || g2_value < 0.0 || r_sca_det < 0.0 || t_int < 0.0)
        throw param_error("snr_model arguments must be nonnegative");
    return std::sqrt(eta * eta * g2_value * r_sca_det * t_int);
}

double measure_snr(const G2Estimate& est, double tau_lo, double tau_hi) {
    std::vector<double> v;
    for (std::size_t i = 0; i < est.tau.size(); ++i)
        if (est.tau[i] >= tau_lo && est.tau[i] <= tau_hi) v.push_back(est.g2[i]);
    if (v.size() < 3) throw param_error("SNR window holds fewer than 3 bins");
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= (v.size() - 1);
    if (s2 <= 0.0) throw numerical_error("SNR window has zero variance");
    return m / std::sqrt(s2);
}

std::pair<TimestampSeries, TimestampSeries> thin_and_split(const std::vector<double>& clicks,
                                                           double t_int, double eta,
                                                           RngStream& rng) {
    if (eta < 0.0 || eta > 1.0) throw param_error("thinning efficiency must lie in [0,1]");
    TimestampSeries a, b;
    a.detector_id = 1;
    b.detector_id = 2;
    a.t_int = b.t_int = t_int;
    for (const double t : clicks) {
        if (rng.uniform() >= eta) continue;
        (rng.uniform() < 0.5 ? a : b).times.push_back(t);
    }
    return {a, b};
}

void add_dark_counts(TimestampSeries& s, double rate, RngStream& rng) {
    if (rate < 0.0) throw param_error("dark rate must be >= 0");
    if (rate == 0.0) return;
    double t = rng.exponential() / rate;
    while (t < s.t_int) {
        s.times.push_back(t);
        t += rng.exponential() / rate;
    }
    std::sort(s.times.begin(), s.times.end());
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, std::vector<double> step, double ftol,
                          int max_evals, int restarts) {
    const std::size_t n = x0.size();
    SimplexResult res;
    res.x = x0;
    res.fval = f(x0);
    res.n_evals = 1;

    for (int attempt = 0; attempt <= restarts; ++attempt) {
        std::vector<std::vector<double>> sx(n + 1, res.x);
        std::vector<double> sf(n + 1);
        for (std::size_t i = 0; i < n; ++i) sx[i + 1][i] += step[i];
        for (std::size_t i = 0; i <= n; ++i) {
            sf[i] = f(sx[i]);
            ++res.n_evals;
        }

        while (res.n_evals < max_evals) {
            // order
            std::vector<std::size_t> ord(n + 1);
            for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
            std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return sf[a] < sf[b]; });
            const std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];
            if (std::abs(sf[worst] - sf[best]) <=
                ftol * (std::abs(sf[best]) + std::abs(sf[worst]) + 1e-300)) {
                res.converged = true;
                break;
            }
            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == worst) continue;
                for (std::size_t d = 0; d < n; ++d) centroid[d] += sx[i][d];
            }
            for (double& c : centroid) c /= static_cast<double>(n);

            auto blend = [&](double coef) {
                std::vector<double> p(n);
                for (std::size_t d = 0; d < n; ++d)
                    p[d] = centroid[d] + coef * (sx[worst][d] - centroid[d]);
                return p;
            };
            const auto refl = blend(-1.0);
            const double f_refl = f(refl);
            ++res.n_evals;
            if (f_refl < sf[best]) {
                const auto expd = blend(-2.0);
                const double f_expd = f(expd);
                ++res.n_evals;
                if (f_expd < f_refl) {
                    sx[worst] = expd;
                    sf[worst] = f_expd;
                } else {
                    sx[worst] = refl;
                    sf[worst] = f_refl;
                }
            } else if (f_refl < sf[second]) {
                sx[worst] = refl;
                sf[worst] = f_refl;
            } else {
                const auto contr = blend(f_refl < sf[worst] ? -0.5 : 0.5);
                const double f_contr = f(contr);
                ++res.n_evals;
                if (f_contr < std::min(sf[worst], f_refl)) {
                    sx[worst] = contr;
                    sf[worst] = f_contr;
                } else { // shrink toward best
                    for (std::size_t i = 0; i <= n; ++i) {
                        if (i == best) continue;
                        for (std::size_t d = 0; d < n; ++d)
                            sx[i][d] = sx[best][d] + 0.5 * (sx[i][d] - sx[best][d]);
                        sf[i] = f(sx[i]);
                        ++res.n_evals;
                    }
                }
            }
        }
        std::size_t ib = 0;
        for (std::size_t i = 1; i <= n; ++i)
            if (sf[i] < sf[ib]) ib = i;
        if (sf[ib] < res.fval) {
            res.fval = sf[ib];
            res.x = sx[ib];
        }
        for (double& s : step) s *= 0.25; // tighter simplex for the next restart
    }
    return res;
}

namespace {

double chi2_of(const G2Estimate& est, const G2ModelParams& q) {
    const auto model = g2_model(est.tau, q);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < est.tau.size(); ++i) {
        const double w = 1.0 / (est.err[i] * est.err[i]);
        const double d = model[i] - est.g2[i];
        chi2 += w * d * d;
    }
    return chi2;
}

G2ModelParams unpack(const std::vector<double>& x) {
    return {x[0], x[1], x[2], x[3], x[4], x[5]};
}

} // namespace

FitResult fit_g2(const G2Estimate& est, const G2ModelParams& guess) {
    if (est.tau.size() < 48) throw param_error("g2 fit needs >= 8 bins per free parameter");

    auto objective = [&](const std::vector<double>& x) {
        if (x[0] < 1e-4 || x[4] < 0.0 || x[5] < 0.1) return 1e30; // W >= 0, c >= 0, SNR > 0
        return chi2_of(est, unpack(x));
    };
    std::vector<double> x0{guess.omega, guess.detuning, guess.env_a,
                           guess.env_b, guess.env_c,    guess.snr_det};
    std::vector<double> step{0.2 * std::max(0.5, guess.omega),
                             0.2 * std::max(0.5, std::abs(guess.detuning)),
                             0.1,
                             0.1,
                             0.3 * std::max(0.1, guess.env_c),
                             0.2 * guess.snr_det};
    const auto sol = nelder_mead(objective, x0, step, 1e-12, 40000, 4);
    if (!sol.converged && sol.fval >= 1e30)
        throw numerical_error("g2 fit failed to converge; best chi2 " + std::to_string(sol.fval));

    FitResult out;
    out.params = unpack(sol.x);
    out.chi2 = sol.fval;
    out.n_evals = sol.n_evals;
    out.converged = sol.converged;

    // finite-difference J, covariance (J^T W J)^{-1}
    const std::size_t nb = est.tau.size();
    std::vector<std::array<double, 6>> J(nb);
    const auto base = g2_model(est.tau, out.params);
    for (int d = 0; d < 6; ++d) {
        auto xp = sol.x;
        const double h = std::max(1e-6, 1e-6 * std::abs(xp[d]));
        xp[d] += h;
        if (xp[0] < 1e-4) continue;
        const auto up = g2_model(est.tau, unpack(xp));
        for (std::size_t i = 0; i < nb; ++i) J[i][d] = (up[i] - base[i]) / h;
    }
    double a[6][12] = {};
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < nb; ++i)
                s += J[i][r] * J[i][c] / (est.err[i] * est.err[i]);
            a[r][c] = s;
        }
        a[r][6 + r] = 1.0;
    }
    for (int col = 0; col < 6; ++col) { // Gauss-Jordan with partial pivoting
        int piv = col;
        for (int r = col + 1; r < 6; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        for (int j = 0; j < 12; ++j) std::swap(a[piv][j], a[col][j]);
        if (std::abs(a[col][col]) < 1e-300) continue; // singular direction: stderr stays 0
        const double inv = 1.0 / a[col][col];
        for (int j = 0; j < 12; ++j) a[col][j] *= inv;
        for (int r = 0; r < 6; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (int j = 0; j < 12; ++j) a[r][j] -= f * a[col][j];
        }
    }
    for (int d = 0; d < 6; ++d) out.stderrs[d] = std::sqrt(std::max(0.0, a[d][6 + d]));
    return out;
}

} // namespace unravel
