// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"
#include "units.hpp"

namespace starnoma {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Law of the complex LoS gains h_LoS and g_LoS.
enum class GainLaw : std::uint8_t { rayleigh, unit };

/// Shadowing applied as a fixed dB offset or redrawn per link as a lognormal.
enum class ShadowingMode : std::uint8_t { fixed, lognormal };

/// Full scenario description. Defaults reproduce the simulation table of the
/// reference scenario; powers are stored in watts.
struct SystemConfig {
    int n_tx_antennas = 16;
    int n_tx_rows = 4; // N_ty
    int n_tx_cols = 4; // N_tz
    int n_surface_elements = 16;
    int surface_rows = 4; // M_y
    int surface_cols = 4; // M_z
    int n_users = 6;
    int n_clusters = 3;

    double tx_power_max = dbm_to_watts(30.0);
    double noise_power = dbm_to_watts(-104.0);
    double bandwidth = 10e6;
    double carrier_freq = 28e9;
    double coherence_time = 650e-6;

    Vec3 bs_position{0.0, 0.0, 20.0};
    Vec3 surface_position{45.0, -22.0, 0.0};
    double user_region_radius = 50.0;
    double min_user_distance = 1.0;

    double pathloss_ref_db = 60.0;
    double pathloss_exp_bs_surface = 2.2;
    double pathloss_exp_surface_user = 2.8;
    double shadowing_db = 5.8;

    std::vector<double> qos_min_rates = std::vector<double>(6, 0.1);

    int phase_bits = 3;
    int amplitude_bits = 3;
    std::uint64_t seed = 1;

    GainLaw los_gain = GainLaw::rayleigh;
    bool include_nlos = true;
    ShadowingMode shadowing = ShadowingMode::fixed;

    double convergence_threshold = 0.1; // on |dR|^2, (bps/Hz)^2
    int max_iterations = 30;
    double initial_reflect_share = 0.5;
    double case1_tolerance = 0.05;
    bool enforce_decoding_order = false;
    bool quantize_every_iteration = true;
    bool monotone_guard = true;
    bool discrete_polish = true;
    bool beam_realign = true;

    double wavelength() const { return kSpeedOfLight / carrier_freq; }
    double qos(int user) const { return qos_min_rates.at(static_cast<std::size_t>(user)); }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(out)) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: cannot parse '" + v + "' as a number for key " + key);
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: cannot parse '" + v + "' as an integer for key " + key);
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: cannot parse '" + v + "' as a boolean for key " + key);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ConfigError("config: empty list for key " + key);
    return out;
}

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += fmt(xs[i]);
    }
    return out;
}

inline int squarest_divisor(int n) {
    int best = 1;
    for (int d = 1; d * d <= n; ++d)
        if (n % d == 0) best = d;
    return best;
}

struct KeySpec {
    const char* key;
    const char* doc;
    std::function<void(SystemConfig&, const std::string&)> set;
    std::function<std::string(const SystemConfig&)> get;
};

inline Vec3 parse_vec3(const std::string& key, const std::string& v) {
    const auto xs = parse_list(key, v);
    if (xs.size() != 3) throw ConfigError("config: " + key + " needs three comma-separated values");
    return {xs[0], xs[1], xs[2]};
}

inline std::string fmt_vec3(const Vec3& p) { return fmt(p.x()) + "," + fmt(p.y()) + "," + fmt(p.z()); }

// One entry per documented key; order is the canonical text order.
inline const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"P_max_dBm", "BS transmit power budget [dBm]",
         [](SystemConfig& c, const std::string& v) { c.tx_power_max = dbm_to_watts(parse_double("P_max_dBm", v)); },
         [](const SystemConfig& c) { return fmt(watts_to_dbm(c.tx_power_max)); }},
        {"sigma2_dBm", "noise power [dBm]",
         [](SystemConfig& c, const std::string& v) { c.noise_power = dbm_to_watts(parse_double("sigma2_dBm", v)); },
         [](const SystemConfig& c) { return fmt(watts_to_dbm(c.noise_power)); }},
        {"N_t", "BS antennas",
         [](SystemConfig& c, const std::string& v) { c.n_tx_antennas = static_cast<int>(parse_int("N_t", v)); },
         [](const SystemConfig& c) { return std::to_string(c.n_tx_antennas); }},
        {"N_ty", "BS array rows (y)",
         [](SystemConfig& c, const std::string& v) { c.n_tx_rows = static_cast<int>(parse_int("N_ty", v)); },
         [](const SystemConfig& c) { return std::to_string(c.n_tx_rows); }},
        {"N_tz", "BS array columns (z)",
         [](SystemConfig& c, const std::string& v) { c.n_tx_cols = static_cast<int>(parse_int("N_tz", v)); },
         [](const SystemConfig& c) { return std::to_string(c.n_tx_cols); }},
        {"M", "surface elements",
         [](SystemConfig& c, const std::string& v) { c.n_surface_elements = static_cast<int>(parse_int("M", v)); },
         [](const SystemConfig& c) { return std::to_string(c.n_surface_elements); }},
        {"M_y", "surface rows (y)",
         [](SystemConfig& c, const std::string& v) { c.surface_rows = static_cast<int>(parse_int("M_y", v)); },
         [](const SystemConfig& c) { return std::to_string(c.surface_rows); }},
        {"M_z", "surface columns (z)",
         [](SystemConfig& c, const std::string& v) { c.surface_cols = static_cast<int>(parse_int("M_z", v)); },
         [](const SystemConfig& c) { return std::to_string(c.surface_cols); }},
        {"K", "users (even)",
         [](SystemConfig& c, const std::string& v) { c.n_users = static_cast<int>(parse_int("K", v)); },
         [](const SystemConfig& c) { return std::to_string(c.n_users); }},
        {"C", "clusters (K/2)",
         [](SystemConfig& c, const std::string& v) { c.n_clusters = static_cast<int>(parse_int("C", v)); },
         [](const SystemConfig& c) { return std::to_string(c.n_clusters); }},
        {"PL_do_dB", "path loss at the 1 m reference distance [dB]",
         [](SystemConfig& c, const std::string& v) { c.pathloss_ref_db = parse_double("PL_do_dB", v); },
         [](const SystemConfig& c) { return fmt(c.pathloss_ref_db); }},
        {"eta_BR", "path-loss exponent BS -> surface",
         [](SystemConfig& c, const std::string& v) { c.pathloss_exp_bs_surface = parse_double("eta_BR", v); },
         [](const SystemConfig& c) { return fmt(c.pathloss_exp_bs_surface); }},
        {"eta_RU", "path-loss exponent surface -> user",
         [](SystemConfig& c, const std::string& v) { c.pathloss_exp_surface_user = parse_double("eta_RU", v); },
         [](const SystemConfig& c) { return fmt(c.pathloss_exp_surface_user); }},
        {"zeta_dB", "shadowing [dB]",
         [](SystemConfig& c, const std::string& v) { c.shadowing_db = parse_double("zeta_dB", v); },
         [](const SystemConfig& c) { return fmt(c.shadowing_db); }},
        {"BW_Hz", "bandwidth [Hz]",
         [](SystemConfig& c, const std::string& v) { c.bandwidth = parse_double("BW_Hz", v); },
         [](const SystemConfig& c) { return fmt(c.bandwidth); }},
        {"T_max_s", "channel coherence time [s], informational",
         [](SystemConfig& c, const std::string& v) { c.coherence_time = parse_double("T_max_s", v); },
         [](const SystemConfig& c) { return fmt(c.coherence_time); }},
        {"f_c_Hz", "carrier frequency [Hz]",
         [](SystemConfig& c, const std::string& v) { c.carrier_freq = parse_double("f_c_Hz", v); },
         [](const SystemConfig& c) { return fmt(c.carrier_freq); }},
        {"bs_position", "BS position x,y,z [m]",
         [](SystemConfig& c, const std::string& v) { c.bs_position = parse_vec3("bs_position", v); },
         [](const SystemConfig& c) { return fmt_vec3(c.bs_position); }},
        {"surface_position", "surface position x,y,z [m]",
         [](SystemConfig& c, const std::string& v) { c.surface_position = parse_vec3("surface_position", v); },
         [](const SystemConfig& c) { return fmt_vec3(c.surface_position); }},
        {"region_radius_m", "user disc radius around the surface [m]",
         [](SystemConfig& c, const std::string& v) { c.user_region_radius = parse_double("region_radius_m", v); },
         [](const SystemConfig& c) { return fmt(c.user_region_radius); }},
        {"min_distance_m", "minimum surface-user distance [m]",
         [](SystemConfig& c, const std::string& v) { c.min_user_distance = parse_double("min_distance_m", v); },
         [](const SystemConfig& c) { return fmt(c.min_user_distance); }},
        {"R_min", "per-user QoS rate [bps/Hz]; one value or K comma-separated values",
         [](SystemConfig& c, const std::string& v) { c.qos_min_rates = parse_list("R_min", v); },
         [](const SystemConfig& c) { return fmt_list(c.qos_min_rates); }},
        {"B1", "phase resolution bits",
         [](SystemConfig& c, const std::string& v) { c.phase_bits = static_cast<int>(parse_int("B1", v)); },
         [](const SystemConfig& c) { return std::to_string(c.phase_bits); }},
        {"B2", "amplitude resolution bits",
         [](SystemConfig& c, const std::string& v) { c.amplitude_bits = static_cast<int>(parse_int("B2", v)); },
         [](const SystemConfig& c) { return std::to_string(c.amplitude_bits); }},
        {"seed", "master RNG seed",
         [](SystemConfig& c, const std::string& v) {
             try {
                 std::size_t used = 0;
                 c.seed = std::stoull(v, &used);
                 if (used != v.size()) throw std::invalid_argument(v);
             } catch (const std::exception&) {
                 throw ConfigError("config: cannot parse '" + v + "' as a seed");
             }
         },
         [](const SystemConfig& c) { return std::to_string(c.seed); }},
        {"los_gain", "LoS complex gain law: rayleigh | unit",
         [](SystemConfig& c, const std::string& v) {
             if (v == "rayleigh") c.los_gain = GainLaw::rayleigh;
             else if (v == "unit") c.los_gain = GainLaw::unit;
             else throw ConfigError("config: los_gain must be rayleigh or unit");
         },
         [](const SystemConfig& c) { return std::string(c.los_gain == GainLaw::unit ? "unit" : "rayleigh"); }},
        {"nlos", "include the NLoS components",
         [](SystemConfig& c, const std::string& v) { c.include_nlos = parse_bool("nlos", v); },
         [](const SystemConfig& c) { return std::string(c.include_nlos ? "true" : "false"); }},
        {"shadowing", "fixed | lognormal",
         [](SystemConfig& c, const std::string& v) {
             if (v == "fixed") c.shadowing = ShadowingMode::fixed;
             else if (v == "lognormal") c.shadowing = ShadowingMode::lognormal;
             else throw ConfigError("config: shadowing must be fixed or lognormal");
         },
         [](const SystemConfig& c) { return std::string(c.shadowing == ShadowingMode::fixed ? "fixed" : "lognormal"); }},
        {"xi", "AO convergence threshold on |dR|^2",
         [](SystemConfig& c, const std::string& v) { c.convergence_threshold = parse_double("xi", v); },
         [](const SystemConfig& c) { return fmt(c.convergence_threshold); }},
        {"max_iter", "AO iteration cap",
         [](SystemConfig& c, const std::string& v) { c.max_iterations = static_cast<int>(parse_int("max_iter", v)); },
         [](const SystemConfig& c) { return std::to_string(c.max_iterations); }},
        {"beta0", "initial reflect amplitude share",
         [](SystemConfig& c, const std::string& v) { c.initial_reflect_share = parse_double("beta0", v); },
         [](const SystemConfig& c) { return fmt(c.initial_reflect_share); }},
        {"case1_tol", "relative QoS gap below which the equal-QoS closed form is used",
         [](SystemConfig& c, const std::string& v) { c.case1_tolerance = parse_double("case1_tol", v); },
         [](const SystemConfig& c) { return fmt(c.case1_tolerance); }},
        {"order_constraint", "add |h_j w|^2 >= |h_i w|^2 to the active subproblem",
         [](SystemConfig& c, const std::string& v) { c.enforce_decoding_order = parse_bool("order_constraint", v); },
         [](const SystemConfig& c) { return std::string(c.enforce_decoding_order ? "true" : "false"); }},
        {"quantize_each_iter", "project to the codebooks every AO iteration (else once at the end)",
         [](SystemConfig& c, const std::string& v) { c.quantize_every_iteration = parse_bool("quantize_each_iter", v); },
         [](const SystemConfig& c) { return std::string(c.quantize_every_iteration ? "true" : "false"); }},
        {"monotone_guard", "reject block updates that lower the sum-rate",
         [](SystemConfig& c, const std::string& v) { c.monotone_guard = parse_bool("monotone_guard", v); },
         [](const SystemConfig& c) { return std::string(c.monotone_guard ? "true" : "false"); }},
        {"polish", "coordinate ascent over codebook entries after each projection",
         [](SystemConfig& c, const std::string& v) { c.discrete_polish = parse_bool("polish", v); },
         [](const SystemConfig& c) { return std::string(c.discrete_polish ? "true" : "false"); }},
        {"beam_realign", "codebook polish retries failed moves with the cluster beam re-aligned",
         [](SystemConfig& c, const std::string& v) { c.beam_realign = parse_bool("beam_realign", v); },
         [](const SystemConfig& c) { return std::string(c.beam_realign ? "true" : "false"); }},
    };
    return table;
}

} // namespace detail

/// Checks every invariant; the message names the offending field.
inline void validate(const SystemConfig& c) {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (c.n_users <= 0) fail("K must be positive");
    if (c.n_users % 2 != 0) fail("K must be even");
    if (c.n_clusters != c.n_users / 2) fail("C must equal K/2");
    if (c.n_tx_antennas <= 0) fail("N_t must be positive");
    if (c.n_tx_rows * c.n_tx_cols != c.n_tx_antennas) fail("N_t must equal N_ty*N_tz");
    if (c.n_surface_elements <= 0) fail("M must be positive");
    if (c.surface_rows * c.surface_cols != c.n_surface_elements) fail("M must equal M_y*M_z");
    if (!(c.tx_power_max > 0.0)) fail("P_max must be positive");
    if (!(c.noise_power > 0.0)) fail("sigma2 must be positive");
    if (!(c.carrier_freq > 0.0)) fail("f_c must be positive");
    if (!(c.user_region_radius > 0.0)) fail("region_radius_m must be positive");
    if (!(c.min_user_distance > 0.0)) fail("min_distance_m must be positive");
    if (static_cast<int>(c.qos_min_rates.size()) != c.n_users) fail("R_min must have one entry per user");
    for (double r : c.qos_min_rates)
        if (!(r >= 0.0)) fail("R_min entries must be >= 0");
    if (c.phase_bits < 1 || c.phase_bits > 16) fail("B1 must be in [1, 16]");
    if (c.amplitude_bits < 1 || c.amplitude_bits > 16) fail("B2 must be in [1, 16]");
    if (!(c.convergence_threshold >= 0.0)) fail("xi must be >= 0");
    if (c.max_iterations < 1) fail("max_iter must be >= 1");
    if (!(c.initial_reflect_share >= 0.0 && c.initial_reflect_share <= 1.0)) fail("beta0 must be in [0, 1]");
    if ((c.bs_position - c.surface_position).norm() <= 0.0) fail("bs_position must differ from surface_position");
}

/// Parses "key = value" lines ('#' starts a comment). Omitted keys keep their
/// defaults; C, the array factorizations and a scalar R_min are derived from
/// K, N_t and M when not given explicitly.
inline SystemConfig load_config(std::string_view text) {
    SystemConfig cfg;
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string clean = detail::trim(line);
        if (clean.empty()) continue;
        const auto eq = clean.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not of the form key = value");
        const std::string key = detail::trim(std::string_view(clean).substr(0, eq));
        const std::string value = detail::trim(std::string_view(clean).substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(line_no));
        if (kv.count(key)) throw ConfigError("config: duplicate key " + key);
        kv[key] = value;
    }

    for (const auto& [key, value] : kv) {
        bool known = false;
        for (const auto& spec : detail::key_table()) {
            if (key == spec.key) {
                spec.set(cfg, value);
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("config: unknown key " + key);
    }

    if (kv.count("K") && !kv.count("C") && cfg.n_users % 2 == 0) cfg.n_clusters = cfg.n_users / 2;
    if (kv.count("M") && !kv.count("M_y") && !kv.count("M_z")) {
        cfg.surface_rows = detail::squarest_divisor(cfg.n_surface_elements);
        cfg.surface_cols = cfg.n_surface_elements / cfg.surface_rows;
    } else if (kv.count("M_y") && kv.count("M_z") && !kv.count("M")) {
        cfg.n_surface_elements = cfg.surface_rows * cfg.surface_cols;
    }
    if (kv.count("N_t") && !kv.count("N_ty") && !kv.count("N_tz")) {
        cfg.n_tx_rows = detail::squarest_divisor(cfg.n_tx_antennas);
        cfg.n_tx_cols = cfg.n_tx_antennas / cfg.n_tx_rows;
    } else if (kv.count("N_ty") && kv.count("N_tz") && !kv.count("N_t")) {
        cfg.n_tx_antennas = cfg.n_tx_rows * cfg.n_tx_cols;
    }
    if (cfg.qos_min_rates.size() == 1 && cfg.n_users > 0)
        cfg.qos_min_rates.assign(static_cast<std::size_t>(cfg.n_users), cfg.qos_min_rates.front());
    else if (!kv.count("R_min") && cfg.n_users > 0)
        cfg.qos_min_rates.assign(static_cast<std::size_t>(cfg.n_users), 0.1);

    validate(cfg);
    return cfg;
}

/// Replaces or appends "key = value" lines; other lines are kept verbatim.
inline std::string with_overrides(std::string_view text, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        std::string_view body = line.substr(0, line.find('#'));
        const auto eq = body.find('=');
        bool replaced = false;
        if (eq != std::string_view::npos) {
            const std::string key = detail::trim(body.substr(0, eq));
            for (const auto& [k, v] : kv) replaced = replaced || k == key;
        }
        if (!replaced) {
            out += line;
            out += '\n';
        }
    }
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

/// Canonical text form; load_config(to_text(c)) reproduces c.
inline std::string to_text(const SystemConfig& c) {
    std::string out;
    for (const auto& spec : detail::key_table()) {
        out += spec.key;
        out += " = ";
        out += spec.get(c);
        out += "\n";
    }
    return out;
}

/// Lines of "key  description" for --help output and the README.
inline std::string config_schema() {
    std::string out;
    for (const auto& spec : detail::key_table()) {
        out += "  ";
        out += spec.key;
        out += std::string(spec.key ? 20 - std::min<std::size_t>(19, std::char_traits<char>::length(spec.key)) : 1, ' ');
        out += spec.doc;
        out += "\n";
    }
    return out;
}

/// FNV-1a over the canonical text.
inline std::uint64_t config_hash(const SystemConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_text(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Applies STARNOMA_SEED when set. Kept separate so load_config stays pure.
inline SystemConfig apply_env_overrides(SystemConfig c) {
    if (const char* s = std::getenv("STARNOMA_SEED"); s && *s) {
        try {
            c.seed = std::stoull(s);
        } catch (const std::exception&) {
            throw ConfigError("STARNOMA_SEED is not an unsigned integer");
        }
    }
    return c;
}

inline std::string output_dir_from_env(const std::string& fallback) {
    if (const char* s = std::getenv("STARNOMA_OUT_DIR"); s && *s) return s;
    return fallback;
}

} // namespace starnoma
