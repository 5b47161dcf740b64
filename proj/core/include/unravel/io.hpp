#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "unravel/ensemble.hpp"
#include "unravel/jump.hpp"
#include "unravel/photocount.hpp"
#include "unravel/steering.hpp"

namespace unravel {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// FNV-1a 64-bit over raw bytes; used for manifest checksums.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);

// --- click records (newline-delimited gamma*t timestamps, 12 significant digits)

void write_click_file(const std::string& path, const ClickRecord& rec, std::uint64_t seed,
                      std::uint64_t traj);
ClickRecord read_click_file(const std::string& path);

// --- CSV curves, '#' comment headers carry units and provenance

void write_ensemble_csv(const std::string& path, const EnsembleCurve& curve,
                        const std::string& provenance);
EnsembleCurve read_ensemble_csv(const std::string& path);

void write_oracle_csv(const std::string& path, const std::vector<double>& t,
                      const std::vector<double>& mean, const std::vector<double>& qtav,
                      const std::string& provenance);

void write_spectrum_csv(const std::string& path, const std::vector<std::complex<double>>& ev,
                        const std::string& provenance);

void write_steering_csv(const std::string& path, const SteeringCurve& curve,
                        const std::string& provenance);

void write_g2_csv(const std::string& path, const G2Estimate& est, const std::string& provenance);

// --- flat key = value configuration with [section] headers

using ConfigSection = std::map<std::string, std::string>;
using Config = std::map<std::string, ConfigSection>;

Config parse_config_text(const std::string& text);
Config read_config_file(const std::string& path);

/// Timestamp-series sidecar: key = value metadata next to a click file.
TimestampSeries read_timestamp_series(const std::string& data_path,
                                      const std::string& sidecar_path);
void write_timestamp_series(const std::string& data_path, const std::string& sidecar_path,
                            const TimestampSeries& s);

// --- run manifest

struct RunManifest {
    std::string command;
    std::string version;
    std::uint64_t seed = 0;
    int threads = 1;
    std::map<std::string, std::string> params;        // fully resolved
    std::vector<std::pair<std::string, std::uint64_t>> outputs; // path, checksum
    double wall_seconds = 0.0;
    std::uint64_t n_traj = 0;

    void add_output(const std::string& path);
    void write(const std::string& path) const;
};

std::string format_double(double v); // 12 significant digits, deterministic

} // namespace unravel
