#include "unravel/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace unravel {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    return fnv1a64(bytes.data(), bytes.size());
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_click_file(const std::string& path, const ClickRecord& rec, std::uint64_t seed,
                      std::uint64_t traj) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << "# gamma_t clicks, seed=" << seed << ", traj=" << traj << "\n";
    for (const double t : rec.click_times) out << format_double(t) << "\n";
}

ClickRecord read_click_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    ClickRecord rec;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        rec.click_times.push_back(std::stod(line));
    }
    if (!rec.click_times.empty()) rec.t_max = rec.click_times.back();
    return rec;
}

namespace {

void write_csv_header(std::ofstream& out, const std::string& provenance,
                      const std::string& columns) {
    out << "# " << provenance << "\n";
    out << "# time unit: gamma*t (dimensionless)\n";
    out << "# " << columns << "\n";
}

} // namespace

void write_ensemble_csv(const std::string& path, const EnsembleCurve& curve,
                        const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    write_csv_header(out, provenance, "columns: t,mean,qtav,stderr_mean,stderr_qtav");
    out << "t,mean,qtav,stderr_mean,stderr_qtav\n";
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
        out << format_double(curve.t_grid[i]) << ',' << format_double(curve.mean[i]) << ','
            << format_double(curve.qtav[i]) << ',' << format_double(curve.stderr_mean[i]) << ','
            << format_double(curve.stderr_qtav[i]) << "\n";
    }
}

EnsembleCurve read_ensemble_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    EnsembleCurve c;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::istringstream ss(line);
        double v[5];
        char comma;
        ss >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >> comma >> v[4];
        if (!ss) throw io_error("malformed CSV row in " + path);
        c.t_grid.push_back(v[0]);
        c.mean.push_back(v[1]);
        c.qtav.push_back(v[2]);
        c.stderr_mean.push_back(v[3]);
        c.stderr_qtav.push_back(v[4]);
    }
    return c;
}

void write_oracle_csv(const std::string& path, const std::vector<double>& t,
                      const std::vector<double>& mean, const std::vector<double>& qtav,
                      const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    write_csv_header(out, provenance, "columns: t,mean,qtav");
    out << "t,mean,qtav\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        out << format_double(t[i]) << ',' << format_double(mean[i]) << ','
            << format_double(qtav[i]) << "\n";
}

void write_spectrum_csv(const std::string& path, const std::vector<std::complex<double>>& ev,
                        const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    write_csv_header(out, provenance, "columns: re,im (units of gamma)");
    out << "re,im\n";
    for (const auto& e : ev)
        out << format_double(e.real()) << ',' << format_double(e.imag()) << "\n";
}

void write_steering_csv(const std::string& path, const SteeringCurve& curve,
                        const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    write_csv_header(out, provenance, "columns: t,S,f1_mean,f2_mean,envelope");
    out << "t,S,f1_mean,f2_mean,envelope\n";
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
        out << format_double(curve.t_grid[i]) << ',' << format_double(curve.S[i]) << ','
            << format_double(curve.f1_mean[i]) << ',' << format_double(curve.f2_mean[i]) << ','
            << format_double(curve.envelope[i]) << "\n";
}

void write_g2_csv(const std::string& path, const G2Estimate& est, const std::string& provenance) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    write_csv_header(out, provenance, "columns: tau,g2,err");
    out << "tau,g2,err\n";
    for (std::size_t i = 0; i < est.tau.size(); ++i)
        out << format_double(est.tau[i]) << ',' << format_double(est.g2[i]) << ','
            << format_double(est.err[i]) << "\n";
}

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

Config parse_config_text(const std::string& text) {
    Config cfg;
    std::string section = "global";
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = strip(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = strip(s.substr(1, s.size() - 2));
            if (section.empty()) throw io_error("empty section name at line " + std::to_string(lineno));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw io_error("expected key = value at line " + std::to_string(lineno) + ": " + s);
        const std::string key = strip(s.substr(0, eq));
        const std::string val = strip(s.substr(eq + 1));
        if (key.empty()) throw io_error("empty key at line " + std::to_string(lineno));
        cfg[section][key] = val;
    }
    return cfg;
}

Config read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

TimestampSeries read_timestamp_series(const std::string& data_path,
                                      const std::string& sidecar_path) {
    TimestampSeries s;
    const ClickRecord rec = read_click_file(data_path);
    s.times = rec.click_times;

    const Config meta = read_config_file(sidecar_path);
    const auto it = meta.find("detector");
    if (it == meta.end()) throw io_error("sidecar missing [detector] section: " + sidecar_path);
    const ConfigSection& d = it->second;
    auto get = [&](const char* key) -> const std::string& {
        const auto kit = d.find(key);
        if (kit == d.end()) throw io_error(std::string("sidecar missing key ") + key);
        return kit->second;
    };
    s.detector_id = std::stoi(get("id"));
    s.t_int = std::stod(get("t_int"));
    const std::string unit = get("unit");
    if (unit == "gamma_t") {
        s.unit = TimeUnit::GammaT;
    } else if (unit == "seconds") {
        s.unit = TimeUnit::Seconds;
        s.gamma_hz = std::stod(get("gamma_hz"));
    } else {
        throw io_error("sidecar unit must be gamma_t or seconds");
    }
    if (d.count("r_sca_det")) s.r_sca_det = std::stod(d.at("r_sca_det"));
    if (d.count("r_dark")) s.r_dark = std::stod(d.at("r_dark"));
    return s;
}

void write_timestamp_series(const std::string& data_path, const std::string& sidecar_path,
                            const TimestampSeries& s) {
    ClickRecord rec;
    rec.click_times = s.times;
    rec.t_max = s.t_int;
    write_click_file(data_path, rec, 0, static_cast<std::uint64_t>(s.detector_id));
    std::ofstream out(sidecar_path);
    if (!out) throw io_error("cannot write " + sidecar_path);
    out << "[detector]\n";
    out << "id = " << s.detector_id << "\n";
    out << "unit = " << (s.unit == TimeUnit::GammaT ? "gamma_t" : "seconds") << "\n";
    if (s.unit == TimeUnit::Seconds) out << "gamma_hz = " << format_double(s.gamma_hz) << "\n";
    out << "t_int = " << format_double(s.t_int) << "\n";
    out << "r_sca_det = " << format_double(s.r_sca_det) << "\n";
    out << "r_dark = " << format_double(s.r_dark) << "\n";
}

void RunManifest::add_output(const std::string& path) {
    outputs.emplace_back(path, fnv1a64_file(path));
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write manifest " + path);
    out << "[run]\n";
    out << "command = " << command << "\n";
    out << "version = " << version << "\n";
    out << "seed = " << seed << "\n";
    out << "threads = " << threads << "\n";
    out << "n_traj = " << n_traj << "\n";
    out << "wall_seconds = " << format_double(wall_seconds) << "\n";
    out << "[params]\n";
    for (const auto& [k, v] : params) out << k << " = " << v << "\n";
    out << "[outputs]\n";
    char buf[32];
    for (const auto& [p, h] : outputs) {
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        out << p << " = fnv1a64:" << buf << "\n";
    }
}

} // namespace unravel
