#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "unravel/diffusive.hpp"
#include "unravel/ensemble.hpp"
#include "unravel/jump.hpp"

using namespace unravel;

namespace {

TrajectoryRecord fake_record(const std::vector<double>& grid, const std::vector<double>& z) {
    TrajectoryRecord r;
    r.t_grid = grid;
    for (double v : z) r.bloch.push_back({0.0, 0.0, v});
    r.purity.assign(grid.size(), 1.0);
    return r;
}

} // namespace

TEST_CASE("identical trajectories have zero variance") {
    const auto grid = make_grid(1.0, 0.1);
    std::vector<double> z(grid.size(), 0.3);
    std::vector<TrajectoryRecord> recs(5, fake_record(grid, z));
    const auto c = qtav(recs, Observable::SigmaZ);
    for (double v : c.qtav) CHECK(std::abs(v) < 1e-15);
    for (double v : c.mean) CHECK(v == doctest::Approx(0.3));
}

TEST_CASE("two-trajectory variance stays zero until the histories split") {
    // mirrors the two-realization picture: variance responds to the first jump
    SystemParams p = SystemParams::from_drive_strength(10.0);
    const auto grid = make_grid(6.0, 0.01);
    RngStream r1(77, 0), r2(77, 1);
    std::vector<TrajectoryRecord> recs{simulate_pure_jump(p, grid, r1),
                                       simulate_pure_jump(p, grid, r2)};
    const double first_click =
        std::min(recs[0].clicks.click_times.empty() ? 1e9 : recs[0].clicks.click_times.front(),
                 recs[1].clicks.click_times.empty() ? 1e9 : recs[1].clicks.click_times.front());
    REQUIRE(first_click < 6.0);
    const auto c = qtav(recs, Observable::SigmaZ);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        if (grid[t] < first_click) {
            CHECK(std::abs(c.qtav[t]) < 1e-18);
        }
    }
    // and it becomes nonzero somewhere after
    double peak = 0.0;
    for (double v : c.qtav) peak = std::max(peak, v);
    CHECK(peak > 1e-3);
}

TEST_CASE("power averages: m=1 is the mean, m=2 closes the variance identity") {
    const auto grid = make_grid(1.0, 0.25);
    std::mt19937 gen(4);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<TrajectoryRecord> recs;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> z(grid.size());
        for (auto& v : z) v = dist(gen);
        recs.push_back(fake_record(grid, z));
    }
    const auto c1 = power_average(recs, Observable::SigmaZ, 1);
    const auto c2 = power_average(recs, Observable::SigmaZ, 2);
    const auto cv = qtav(recs, Observable::SigmaZ);
    for (std::size_t t = 0; t < grid.size(); ++t) {
        CHECK(c1.m_moments[0].second[t] == doctest::Approx(c1.mean[t]).epsilon(1e-15));
        const double var_from_moments =
            c2.m_moments[0].second[t] - c1.mean[t] * c1.mean[t];
        CHECK(std::abs(var_from_moments - cv.qtav[t]) < 1e-12);
    }
}

TEST_CASE("qtav invariances: permutation and sign flip") {
    const auto grid = make_grid(1.0, 0.2);
    std::mt19937 gen(9);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<TrajectoryRecord> recs;
    for (int i = 0; i < 33; ++i) {
        std::vector<double> z(grid.size());
        for (auto& v : z) v = dist(gen);
        recs.push_back(fake_record(grid, z));
    }
    const auto base = qtav(recs, Observable::SigmaZ);

    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const auto perm = qtav(shuffled, Observable::SigmaZ);
    for (std::size_t t = 0; t < grid.size(); ++t)
        CHECK(std::abs(base.qtav[t] - perm.qtav[t]) < 1e-12);

    auto flipped = recs;
    for (auto& r : flipped)
        for (auto& b : r.bloch) b.z = -b.z;
    const auto neg = qtav(flipped, Observable::SigmaZ);
    for (std::size_t t = 0; t < grid.size(); ++t)
        CHECK(std::abs(base.qtav[t] - neg.qtav[t]) < 1e-14);
}

TEST_CASE("variance is never negative and bounded for sigma_z") {
    SystemParams p = SystemParams::from_drive_strength(10.0);
    const auto grid = make_grid(4.0, 0.05);
    std::vector<TrajectoryRecord> recs;
    for (int i = 0; i < 200; ++i) {
        RngStream rng(55, static_cast<std::uint64_t>(i));
        recs.push_back(simulate_pure_jump(p, grid, rng));
    }
    const auto c = qtav(recs, Observable::SigmaZ);
    for (double v : c.qtav) {
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("mismatched grids are rejected") {
    const auto g1 = make_grid(1.0, 0.1);
    const auto g2 = make_grid(1.0, 0.2);
    std::vector<TrajectoryRecord> recs{fake_record(g1, std::vector<double>(g1.size(), 0.1)),
                                       fake_record(g2, std::vector<double>(g2.size(), 0.1))};
    CHECK_THROWS_AS(qtav(recs, Observable::SigmaZ), param_error);
}

TEST_CASE("dominant frequency: synthetic sinusoid and guard rails") {
    EnsembleCurve c;
    c.t_grid = make_grid(8.0, 0.01);
    c.qtav.resize(c.t_grid.size());
    for (std::size_t i = 0; i < c.t_grid.size(); ++i) c.qtav[i] = std::sin(5.0 * c.t_grid[i]);
    c.mean.assign(c.t_grid.size(), 0.0);
    const double f = dominant_frequency(c, 0.0, 8.0);
    CHECK(std::abs(f - 5.0) < 2.0 * M_PI / 8.0); // within one bin

    // too-short window: fewer than four periods of the reported peak
    for (std::size_t i = 0; i < c.t_grid.size(); ++i) c.qtav[i] = std::sin(0.9 * c.t_grid[i]);
    CHECK_THROWS_AS(dominant_frequency(c, 0.0, 8.0), param_error);
}

TEST_CASE("parallel reduction is bit-identical across thread counts") {
    SystemParams p = SystemParams::from_drive_strength(10.0);
    const auto grid = make_grid(3.0, 0.05);
    DiffusiveConfig cfg;
    auto traj = [&](std::uint64_t, RngStream& rng, std::vector<std::vector<double>>& out) {
        const auto rec = simulate_diffusive(p, cfg, grid, rng);
        for (std::size_t t = 0; t < grid.size(); ++t) out[0][t] = rec.bloch[t].z;
    };
    const auto s1 = run_parallel_ensemble(700, 42, 1, grid.size(), 1, 4, traj);
    const auto s2 = run_parallel_ensemble(700, 42, 2, grid.size(), 1, 4, traj);
    const auto s4 = run_parallel_ensemble(700, 42, 4, grid.size(), 1, 4, traj);
    for (int k = 0; k < 4; ++k)
        for (std::size_t t = 0; t < grid.size(); ++t) {
            CHECK(s1[0][k][t] == s2[0][k][t]);
            CHECK(s1[0][k][t] == s4[0][k][t]);
        }
}
