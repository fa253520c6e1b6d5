#include "ffrelay/config_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ffrelay {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& v, const std::string& key) {
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric value for key '" + key + "': " + v);
    }
}

}  // namespace

LoadedConfig default_config(const std::string& profile) {
    LoadedConfig cfg;
    cfg.sys.bandwidth_w = 10.24e6;
    cfg.sys.center_freq = 0.0;
    cfg.sys.noise_psd_n0 = dbm_per_hz_to_w_per_hz(-145.0);
    cfg.sys.source_budget_p = dbm_to_w(30.0);
    cfg.sys.relay_budget_q = dbm_to_w(30.0);
    cfg.sys.loopback_alpha = 0.5;
    cfg.sys.loopback_tau = 4.0 / cfg.sys.bandwidth_w;
    cfg.sys.seed = 1;
    apply_profile(cfg, profile);
    return cfg;
}

void apply_profile(LoadedConfig& cfg, const std::string& profile) {
    if (profile == "desk") {
        cfg.sys.num_subchannels = 256;
    } else if (profile == "paper") {
        cfg.sys.num_subchannels = 1024;
    } else {
        throw std::invalid_argument("unknown profile: " + profile);
    }
}

LoadedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    LoadedConfig cfg = default_config("desk");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        auto num = [&]() { return parse_double(val, key); };

        if (key == "bandwidth_hz") cfg.sys.bandwidth_w = num();
        else if (key == "center_freq_hz") cfg.sys.center_freq = num();
        else if (key == "num_subchannels") cfg.sys.num_subchannels = static_cast<int>(num());
        else if (key == "noise_psd_dbm_hz") cfg.sys.noise_psd_n0 = dbm_per_hz_to_w_per_hz(num());
        else if (key == "source_power_dbm") cfg.sys.source_budget_p = dbm_to_w(num());
        else if (key == "relay_power_dbm") cfg.sys.relay_budget_q = dbm_to_w(num());
        else if (key == "alpha") cfg.sys.loopback_alpha = num();
        else if (key == "tau_s") cfg.sys.loopback_tau = num();
        else if (key == "seed") cfg.sys.seed = static_cast<std::uint64_t>(num());
        else if (key == "taps_sd") cfg.sys.taps_sd = static_cast<int>(num());
        else if (key == "taps_sr") cfg.sys.taps_sr = static_cast<int>(num());
        else if (key == "taps_rd") cfg.sys.taps_rd = static_cast<int>(num());
        else if (key == "tap_var_db_sd") cfg.sys.tap_var_db_sd = num();
        else if (key == "tap_var_db_sr") cfg.sys.tap_var_db_sr = num();
        else if (key == "tap_var_db_rd") cfg.sys.tap_var_db_rd = num();
        else if (key == "gap_tol") cfg.solver.gap_tol = num();
        else if (key == "max_iter") cfg.solver.max_iter = static_cast<int>(num());
        else if (key == "radius_scale") cfg.solver.radius_scale = num();
        else if (key == "sim_samples") cfg.sim.sim_samples = static_cast<long>(num());
        else if (key == "warmup") cfg.sim.warmup = static_cast<long>(num());
        else if (key == "segment_len") cfg.sim.segment_len = static_cast<int>(num());
        else if (key == "num_segments") cfg.sim.num_segments = static_cast<int>(num());
        else
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
    }
    cfg.sys.validate();
    return cfg;
}

}  // namespace ffrelay
