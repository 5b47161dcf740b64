// Command-line front end: simulate | oracle | steering | g2.
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "unravel/diffusive.hpp"
#include "unravel/dyson.hpp"
#include "unravel/ensemble.hpp"
#include "unravel/io.hpp"
#include "unravel/jump.hpp"
#include "unravel/master_equation.hpp"
#include "unravel/moments.hpp"
#include "unravel/photocount.hpp"
#include "unravel/steering.hpp"
#include "unravel/version.hpp"

namespace fs = std::filesystem;
using namespace unravel;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

class SectionReader {
  public:
    SectionReader(const Config& cfg, std::string section, std::set<std::string> known)
        : section_(std::move(section)), known_(std::move(known)) {
        const auto it = cfg.find(section_);
        if (it != cfg.end()) kv_ = it->second;
        for (const auto& [k, v] : kv_)
            if (!known_.count(k))
                throw param_error("unknown config key [" + section_ + "] " + k);
    }

    bool has(const std::string& k) const { return kv_.count(k) > 0; }
    std::string str(const std::string& k, const std::string& dflt) const {
        const auto it = kv_.find(k);
        return it == kv_.end() ? dflt : it->second;
    }
    std::string require(const std::string& k) const {
        const auto it = kv_.find(k);
        if (it == kv_.end()) throw param_error("missing config key [" + section_ + "] " + k);
        return it->second;
    }
    double num(const std::string& k, double dflt) const {
        const auto it = kv_.find(k);
        if (it == kv_.end()) return dflt;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw param_error("config key [" + section_ + "] " + k + " is not a number");
        }
    }
    std::uint64_t integer(const std::string& k, std::uint64_t dflt) const {
        const auto it = kv_.find(k);
        if (it == kv_.end()) return dflt;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw param_error("config key [" + section_ + "] " + k + " is not an integer");
        }
    }
    const ConfigSection& raw() const { return kv_; }

  private:
    std::string section_;
    std::set<std::string> known_;
    ConfigSection kv_;
};

Config load_config(const CommonArgs& args) {
    Config cfg;
    if (!args.config_path.empty()) cfg = read_config_file(args.config_path);
    for (const auto& ov : args.overrides) { // --set section.key=value
        const auto dot = ov.find('.');
        const auto eq = ov.find('=');
        if (dot == std::string::npos || eq == std::string::npos || eq < dot)
            throw param_error("override must look like section.key=value: " + ov);
        cfg[ov.substr(0, dot)][ov.substr(dot + 1, eq - dot - 1)] = ov.substr(eq + 1);
    }
    return cfg;
}

SystemParams params_from(const SectionReader& r) {
    SystemParams p;
    if (r.has("Y") && r.has("omega")) throw param_error("give either Y or omega, not both");
    if (r.has("Y")) {
        p = SystemParams::from_drive_strength(r.num("Y", 0.0));
    } else {
        p.omega = r.num("omega", 0.0);
    }
    p.detuning = r.num("detuning", 0.0);
    p.efficiency = r.num("eta", 1.0);
    p.nbar = r.num("nbar", 0.0);
    p.lo_phase = r.num("theta", 0.0);
    p.het_detuning = r.num("het_detuning", 0.0);
    p.dt = r.num("dt", 1e-3);
    p.t_max = r.num("t_max", 6.0);
    p.n_traj = r.integer("n_traj", 1000);
    p.validate();
    return p;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

RunManifest make_manifest(const std::string& command, const CommonArgs& args,
                          const SectionReader& r, std::uint64_t seed, int threads) {
    RunManifest m;
    m.command = command;
    m.version = kVersion;
    m.seed = seed;
    m.threads = threads;
    for (const auto& [k, v] : r.raw()) m.params[k] = v;
    return m;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
    fs::create_directories(args.out_dir);
    return (fs::path(args.out_dir) / name).string();
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const CommonArgs& args) {
    const Config cfg = load_config(args);
    SectionReader r(cfg, "simulate",
                    {"unraveling", "Y", "omega", "detuning", "eta", "nbar", "theta",
                     "het_detuning", "dt", "t_max", "n_traj", "sample_dt", "observable",
                     "write_clicks", "two_detectors", "detect_eta", "dark_rate", "t_int",
                     "seed"});
    SystemParams p = params_from(r);
    const std::uint64_t seed = args.seed_set ? args.seed : r.integer("seed", 1);
    p.seed = seed;
    const int threads = resolve_threads(args.threads);
    const std::string unr = r.require("unraveling");
    const auto t0 = std::chrono::steady_clock::now();

    RunManifest manifest = make_manifest("simulate", args, r, seed, threads);
    manifest.n_traj = p.n_traj;

    if (r.integer("two_detectors", 0) != 0) {
        if (unr != "direct") throw param_error("two_detectors mode needs unraveling = direct");
        const double t_int = r.num("t_int", p.t_max);
        const double detect_eta = r.num("detect_eta", 0.5);
        const double dark = r.num("dark_rate", 0.0);
        RngStream rng(seed, 0);
        const ClickRecord clicks = simulate_clicks(p, t_int, rng);
        auto [sa, sb] = thin_and_split(clicks.click_times, t_int, detect_eta, rng);
        add_dark_counts(sa, dark, rng);
        add_dark_counts(sb, dark, rng);
        sa.r_sca_det = sa.rate();
        sb.r_sca_det = sb.rate();
        sa.r_dark = sb.r_dark = dark;
        write_timestamp_series(out_path(args, "detector_1.txt"), out_path(args, "detector_1.meta"), sa);
        write_timestamp_series(out_path(args, "detector_2.txt"), out_path(args, "detector_2.meta"), sb);
        manifest.add_output(out_path(args, "detector_1.txt"));
        manifest.add_output(out_path(args, "detector_1.meta"));
        manifest.add_output(out_path(args, "detector_2.txt"));
        manifest.add_output(out_path(args, "detector_2.meta"));
        manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest.write(out_path(args, "manifest.txt"));
        return 0;
    }

    const double sample_dt = r.num("sample_dt", 0.01);
    const auto grid = make_grid(p.t_max, sample_dt);
    const std::string obs_name = r.str("observable", "sz");
    Observable obs = Observable::SigmaZ;
    if (obs_name == "sx") obs = Observable::SigmaX;
    else if (obs_name == "sy") obs = Observable::SigmaY;
    else if (obs_name != "sz") throw param_error("observable must be sx, sy or sz");

    const bool write_clicks = r.integer("write_clicks", 0) != 0;
    DiffusiveConfig dcfg;
    dcfg.theta = p.lo_phase;
    enum class Kind { PureJump, MixedJump, Diffusive } kind;
    if (unr == "direct") {
        kind = Kind::PureJump;
    } else if (unr == "direct-imperfect") {
        kind = Kind::MixedJump;
    } else if (unr == "homodyne") {
        kind = Kind::Diffusive;
        dcfg.mode = DiffusiveMode::Homodyne;
    } else if (unr == "heterodyne") {
        kind = Kind::Diffusive;
        dcfg.mode = p.het_detuning != 0.0 ? DiffusiveMode::HeterodyneRotating
                                          : DiffusiveMode::Heterodyne;
    } else {
        throw param_error("unraveling must be direct, direct-imperfect, homodyne or heterodyne");
    }

    std::vector<std::pair<std::uint64_t, ClickRecord>> click_records;
    std::mutex click_mutex;
    auto traj_fn = [&](std::uint64_t idx, RngStream& rng, std::vector<std::vector<double>>& out) {
        TrajectoryRecord rec;
        switch (kind) {
            case Kind::PureJump: rec = simulate_pure_jump(p, grid, rng); break;
            case Kind::MixedJump: rec = simulate_mixed_jump(p, grid, rng); break;
            case Kind::Diffusive: rec = simulate_diffusive(p, dcfg, grid, rng); break;
        }
        for (std::size_t t = 0; t < grid.size(); ++t) {
            const auto& b = rec.bloch[t];
            out[0][t] = (obs == Observable::SigmaZ) ? b.z : (obs == Observable::SigmaX ? b.x : b.y);
        }
        if (write_clicks && kind != Kind::Diffusive) {
            std::lock_guard<std::mutex> lock(click_mutex);
            click_records.emplace_back(idx, std::move(rec.clicks));
        }
    };
    const auto sums = run_parallel_ensemble(p.n_traj, seed, threads, grid.size(), 1, 4, traj_fn);
    const EnsembleCurve curve = finalize_curve(grid, sums[0], p.n_traj);
    const std::string csv = out_path(args, "ensemble.csv");
    write_ensemble_csv(csv, curve, "unraveling " + unr + ", observable " + obs_name +
                                       ", n_traj " + std::to_string(p.n_traj));
    manifest.add_output(csv);

    if (write_clicks && !click_records.empty()) {
        std::sort(click_records.begin(), click_records.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [idx, rec] : click_records) {
            const std::string path = out_path(args, "clicks_" + std::to_string(idx) + ".txt");
            write_click_file(path, rec, seed, idx);
            manifest.add_output(path);
        }
    }
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.write(out_path(args, "manifest.txt"));
    return 0;
}

// ---------------------------------------------------------------- oracle

int cmd_oracle(const CommonArgs& args) {
    const Config cfg = load_config(args);
    SectionReader r(cfg, "oracle",
                    {"engine", "unraveling", "order", "Y", "omega", "detuning", "m", "t_max",
                     "sample_dt", "h", "seed"});
    SystemParams p = params_from(r);
    const std::string engine = r.require("engine");
    const auto t0 = std::chrono::steady_clock::now();
    RunManifest manifest = make_manifest("oracle", args, r, 0, 1);

    if (engine == "moments") {
        const int order = static_cast<int>(r.integer("order", 10));
        const std::string us = r.str("unraveling", "poisson");
        Unraveling unr;
        if (us == "poisson") unr = Unraveling::Poisson;
        else if (us == "wiener") unr = Unraveling::WienerHeterodyne;
        else throw param_error("oracle unraveling must be poisson or wiener");

        const MomentSystem sys = build_system(p, unr, order);
        // degree-1 block must equal the Bloch generator; log the check
        const BlochMatrix bloch = liouvillian(p);
        double block_defect = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                block_defect = std::max(block_defect,
                                        std::abs(sys.generator(i, j) - bloch.a[i][j]));
        manifest.params["degree1_block_defect"] = format_double(block_defect);
        manifest.params["dimension"] = std::to_string(sys.indices.size());
        manifest.params["division_remainder"] = format_double(sys.tables.max_division_remainder);

        const auto grid = make_grid(p.t_max, r.num("sample_dt", 0.01));
        const MomentTrajectory traj = integrate(sys, grid);
        manifest.params["truncation_flagged"] = traj.truncation_flagged ? "1" : "0";
        const EnsembleCurve c = qtav_from_moments(sys, traj, {0.0, 0.0, 0.0, std::sqrt(2.0)});
        const std::string csv = out_path(args, "moments_qtav.csv");
        write_oracle_csv(csv, c.t_grid, c.mean, c.qtav,
                         "moment hierarchy K=" + std::to_string(order) + ", " + us);
        manifest.add_output(csv);

        const auto ev = spectrum(sys);
        const std::string spec_csv = out_path(args, "spectrum.csv");
        write_spectrum_csv(spec_csv, ev, "moment generator spectrum K=" + std::to_string(order));
        manifest.add_output(spec_csv);
    } else if (engine == "dyson") {
        const double h = r.num("h", 1e-3);
        const auto grid = make_grid(p.t_max, h);
        const auto mean = renewal_average(p, Observable::SigmaZ, 1, grid);
        const auto sq = renewal_average(p, Observable::SigmaZ, 2, grid);
        std::vector<double> var(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) var[i] = sq[i] - mean[i] * mean[i];
        const std::string csv = out_path(args, "dyson.csv");
        write_oracle_csv(csv, grid, mean, var, "renewal-convolution route, direct detection");
        manifest.add_output(csv);
    } else if (engine == "asymptotic-strong" || engine == "asymptotic-weak") {
        const auto grid = make_grid(p.t_max, r.num("sample_dt", 0.01));
        std::vector<double> mean(grid.size()), var(grid.size());
        if (engine == "asymptotic-strong" && p.drive_strength() < 10.0)
            std::cerr << "note: strong-drive asymptote is O(gamma^2/W^2); Y < 10 is marginal\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            mean[i] = analytic_inversion(p, grid[i]);
            var[i] = engine == "asymptotic-strong" ? asymptotic_var_strong(p, grid[i])
                                                   : asymptotic_var_weak(p, grid[i]);
        }
        const std::string csv = out_path(args, "asymptote.csv");
        write_oracle_csv(csv, grid, mean, var, engine);
        manifest.add_output(csv);
    } else {
        throw param_error("oracle engine must be moments, dyson, asymptotic-strong or asymptotic-weak");
    }
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.write(out_path(args, "manifest.txt"));
    return 0;
}

// ---------------------------------------------------------------- steering

int cmd_steering(const CommonArgs& args) {
    const Config cfg = load_config(args);
    SectionReader r(cfg, "steering",
                    {"Y", "omega", "detuning", "eta_list", "eta", "nbar", "dt", "t_max", "n_traj",
                     "sample_dt", "seed"});
    SystemParams base = params_from(r);
    const std::uint64_t seed = args.seed_set ? args.seed : r.integer("seed", 1);
    base.seed = seed;
    const int threads = resolve_threads(args.threads);
    const auto grid = make_grid(base.t_max, r.num("sample_dt", 0.01));
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<double> etas;
    {
        std::string list = r.str("eta_list", r.str("eta", "1.0"));
        std::replace(list.begin(), list.end(), ',', ' ');
        std::istringstream ss(list);
        double v;
        while (ss >> v) etas.push_back(v);
    }
    if (etas.empty()) throw param_error("steering needs eta or eta_list");

    RunManifest manifest = make_manifest("steering", args, r, seed, threads);
    manifest.n_traj = base.n_traj;
    for (const double eta : etas) {
        SystemParams p = base;
        p.efficiency = eta;
        const SteeringCurve c = run_steering(p, grid, threads);
        char name[64];
        std::snprintf(name, sizeof(name), "steering_eta%.2f.csv", eta);
        const std::string csv = out_path(args, name);
        write_steering_csv(csv, c, "steering functional, eta=" + format_double(eta));
        manifest.add_output(csv);
    }
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.write(out_path(args, "manifest.txt"));
    return 0;
}

// ---------------------------------------------------------------- g2

int cmd_g2(const CommonArgs& args) {
    const Config cfg = load_config(args);
    SectionReader r(cfg, "g2",
                    {"input_a", "sidecar_a", "input_b", "sidecar_b", "bin_width", "tau_max",
                     "fit", "omega0", "detuning0", "env_a0", "env_b0", "env_c0", "snr0",
                     "snr_window_lo", "snr_window_hi"});
    const auto t0 = std::chrono::steady_clock::now();
    const TimestampSeries a = read_timestamp_series(r.require("input_a"), r.require("sidecar_a"));
    const TimestampSeries b = read_timestamp_series(r.require("input_b"), r.require("sidecar_b"));
    if (a.times.empty() || b.times.empty()) throw param_error("empty timestamp input");

    const double bin_width = r.num("bin_width", 0.05);
    const double tau_max = r.num("tau_max", 50.0);
    const G2Estimate est = estimate_g2(a, b, bin_width, tau_max);

    RunManifest manifest = make_manifest("g2", args, r, 0, 1);
    const std::string csv = out_path(args, "g2.csv");
    write_g2_csv(csv, est, "coincidence estimate, bin_width=" + format_double(bin_width));
    manifest.add_output(csv);

    const double snr = measure_snr(est, r.num("snr_window_lo", 20.0), r.num("snr_window_hi", 50.0));
    manifest.params["measured_snr"] = format_double(snr);

    if (r.integer("fit", 1) != 0) {
        G2ModelParams guess;
        guess.omega = r.num("omega0", 3.0);
        guess.detuning = r.num("detuning0", -3.0);
        guess.env_a = r.num("env_a0", 1.0);
        guess.env_b = r.num("env_b0", 0.0);
        guess.env_c = r.num("env_c0", 1.0);
        guess.snr_det = r.num("snr0", 15.0);
        const FitResult fit = fit_g2(est, guess);
        const std::string report = out_path(args, "fit_report.txt");
        std::ofstream out(report);
        out << "[fit]\n";
        out << "omega = " << format_double(fit.params.omega) << "\n";
        out << "detuning = " << format_double(fit.params.detuning) << "\n";
        out << "env_a = " << format_double(fit.params.env_a) << "\n";
        out << "env_b = " << format_double(fit.params.env_b) << "\n";
        out << "env_c = " << format_double(fit.params.env_c) << "\n";
        out << "snr_det = " << format_double(fit.params.snr_det) << "\n";
        out << "chi2 = " << format_double(fit.chi2) << "\n";
        out << "converged = " << (fit.converged ? 1 : 0) << "\n";
        out << "[stderr]\n";
        const char* names[6] = {"omega", "detuning", "env_a", "env_b", "env_c", "snr_det"};
        for (int i = 0; i < 6; ++i)
            out << names[i] << " = " << format_double(fit.stderrs[i]) << "\n";
        out << "[snr]\n";
        out << "measured = " << format_double(snr) << "\n";
        out.close();
        manifest.add_output(report);
    }
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.write(out_path(args, "manifest.txt"));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-trajectory unraveling toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    for (auto* sub : {app.add_subcommand("simulate", "run a trajectory ensemble"),
                      app.add_subcommand("oracle", "analytic/moment engines"),
                      app.add_subcommand("steering", "EPR-steering functional"),
                      app.add_subcommand("g2", "photon-correlation analysis")}) {
        sub->add_option("--config", args.config_path, "key = value config file");
        sub->add_option("--set", args.overrides, "override section.key=value")->take_all();
        sub->add_option("--out-dir", args.out_dir, "output directory");
        sub->add_option("--seed", args.seed, "master seed")->each([&](const std::string&) {
            args.seed_set = true;
        });
        sub->add_option("--threads", args.threads, "worker threads (0 = all cores)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("simulate")) return cmd_simulate(args);
        if (app.got_subcommand("oracle")) return cmd_oracle(args);
        if (app.got_subcommand("steering")) return cmd_steering(args);
        if (app.got_subcommand("g2")) return cmd_g2(args);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const param_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
