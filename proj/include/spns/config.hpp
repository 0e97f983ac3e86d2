#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "spns/experiments.hpp"

namespace spns {

inline constexpr const char* kVersionTag = "spns 1.0.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key = value configuration with [grid], [scheme], [noise], [study],
// and [output] sections. Parsing is strict: unknown keys and malformed
// lines are hard errors, and canonical re-serialization is idempotent.
struct RunConfig {
    // [grid]
    double L = kTwoPi;
    int N = 32;
    double dealias_pad = 1.5;

    // [scheme]
    double nu = 1.0;
    double T = 0.5;
    int M = 64;
    double epsilon = 0.1;
    double eta = 0.4;
    double alpha = 1.5;
    bool couple_eps_to_k = true;
    bool lagged_advection = false;
    double picard_tol = 1e-11;
    int picard_max_iter = 100;
    double divergence_guard = 1e6;
    std::string scheme = "main";  // main | direct | stokes
    std::string u0 = "random";    // random | taylor-green | zero
    uint64_t u0_seed = 1;
    double u0_amplitude = 1.0;

    // [noise]
    int J = 0;  // 0 = auto: min(8, N/4)
    double gamma = 3.0;
    double scale = 1.0;

    // [study]
    std::vector<int> levels = {16, 32, 64, 128};
    int paths = 64;
    int M_ref = 1024;
    uint64_t base_seed = 20240101;
    int threads = 0;
    bool stokes_only = false;
    bool sample_sets = true;
    double exceedance_r = 0.2;
    double exceedance_C = 0.0;  // 0 = empirical median of EM at the coarsest level
    std::string kappa_schedule = "quantile";  // quantile | asymptotic
    double kappa_quantile = 0.9;
    double mu = 0.05;  // asymptotic-schedule parameter for kappa_1, kappa_2

    // [output]
    std::string dir = "out";

    Grid grid() const { return Grid(L, N, dealias_pad); }

    int resolved_J() const { return J > 0 ? J : std::min(8, N / 4); }

    SchemeParams scheme_params() const {
        SchemeParams p;
        p.nu = nu;
        p.M = M;
        p.k = T / M;
        p.epsilon = epsilon;
        p.eta = eta;
        p.alpha = alpha;
        p.couple_eps_to_k = couple_eps_to_k;
        p.lagged_advection = lagged_advection;
        return p;
    }

    SolverOpts solver_opts() const {
        SolverOpts o;
        o.picard_tol = picard_tol;
        o.picard_max_iter = picard_max_iter;
        o.divergence_guard = divergence_guard;
        return o;
    }

    InitialData u0_kind() const {
        if (u0 == "random") return InitialData::RandomSolenoidal;
        if (u0 == "taylor-green") return InitialData::TaylorGreen;
        if (u0 == "zero") return InitialData::Zero;
        throw ConfigError("scheme.u0: expected random, taylor-green, or zero");
    }

    StudyConfig study_config() const {
        StudyConfig s;
        s.grid = grid();
        s.J = resolved_J();
        s.gamma = gamma;
        s.T = T;
        s.nu = nu;
        s.eta = eta;
        s.alpha = alpha;
        s.couple_eps_to_k = couple_eps_to_k;
        s.epsilon = epsilon;
        s.lagged_advection = lagged_advection;
        s.levels = levels;
        s.M_ref = M_ref;
        s.paths = paths;
        s.base_seed = base_seed;
        s.u0_seed = u0_seed;
        s.u0_kind = u0_kind();
        s.u0_amplitude = u0_amplitude;
        s.stokes_only = stokes_only;
        s.sample_sets = sample_sets;
        s.noise_scale = scale;
        s.solver = solver_opts();
        s.threads = threads;
        return s;
    }

    // Range checks with the owning module's bounds; errors carry the key.
    void validate() const {
        if (L <= 0.0) throw ConfigError("grid.L: must be positive");
        if (N < 8 || N % 2 != 0) throw ConfigError("grid.N: must be even and >= 8");
        if (dealias_pad < 1.5) throw ConfigError("grid.dealias_pad: must be >= 1.5");
        if (nu <= 0.0) throw ConfigError("scheme.nu: must be positive");
        if (T <= 0.0) throw ConfigError("scheme.T: must be positive");
        if (M < 1) throw ConfigError("scheme.M: must be >= 1");
        if (!couple_eps_to_k && epsilon <= 0.0)
            throw ConfigError("scheme.epsilon: must be positive");
        if (!(eta > 0.0 && eta < 0.5))
            throw ConfigError("scheme.eta: must lie in the open interval (0, 1/2)");
        if (!(alpha > 1.0)) throw ConfigError("scheme.alpha: must exceed 1");
        if (picard_tol <= 0.0) throw ConfigError("scheme.picard_tol: must be positive");
        if (picard_max_iter < 1) throw ConfigError("scheme.picard_max_iter: must be >= 1");
        if (divergence_guard <= 0.0)
            throw ConfigError("scheme.divergence_guard: must be positive");
        if (scheme != "main" && scheme != "direct" && scheme != "stokes")
            throw ConfigError("scheme.scheme: expected main, direct, or stokes");
        u0_kind();
        if (J < 0) throw ConfigError("noise.J: must be positive (or 0 for auto)");
        if (resolved_J() < 1) throw ConfigError("noise.J: resolved cutoff must be >= 1");
        if (2 * resolved_J() + 1 > N)
            throw ConfigError("noise.J: 2J+1 must not exceed grid.N");
        if (gamma <= 2.0) throw ConfigError("noise.gamma: must exceed 2");
        if (scale < 0.0) throw ConfigError("noise.scale: must be nonnegative");
        if (levels.empty()) throw ConfigError("study.levels: must be nonempty");
        for (int m : levels) {
            if (m < 1) throw ConfigError("study.levels: entries must be >= 1");
            if (M_ref % m != 0) throw ConfigError("study.levels: every entry must divide M_ref");
        }
        if (paths < 1) throw ConfigError("study.paths: must be >= 1");
        if (M_ref < 1) throw ConfigError("study.M_ref: must be >= 1");
        if (threads < 0) throw ConfigError("study.threads: must be nonnegative");
        if (exceedance_r <= 0.0) throw ConfigError("study.exceedance_r: must be positive");
        if (exceedance_C < 0.0) throw ConfigError("study.exceedance_C: must be nonnegative");
        if (kappa_schedule != "quantile" && kappa_schedule != "asymptotic")
            throw ConfigError("study.kappa_schedule: expected quantile or asymptotic");
        if (!(kappa_quantile > 0.0 && kappa_quantile <= 1.0))
            throw ConfigError("study.kappa_quantile: must lie in (0, 1]");
        if (mu <= 0.0) throw ConfigError("study.mu: must be positive");
        if (dir.empty()) throw ConfigError("output.dir: must be nonempty");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
}

inline int parse_int(const std::string& v, const std::string& key) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError(key + ": not an integer: '" + v + "'");
    return out;
}

inline uint64_t parse_u64(const std::string& v, const std::string& key) {
    uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true or false: '" + v + "'");
}

inline std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key + ": empty list entry");
        out.push_back(parse_int(item, key));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Applies one "section.key = value" assignment. Unknown keys are errors.
inline void apply_config_entry(RunConfig& cfg, const std::string& section,
                               const std::string& key, const std::string& value) {
    using namespace detail;
    const std::string full = section + "." + key;
    if (section == "grid") {
        if (key == "L") cfg.L = parse_double(value, full);
        else if (key == "N") cfg.N = parse_int(value, full);
        else if (key == "dealias_pad") cfg.dealias_pad = parse_double(value, full);
        else throw ConfigError("unknown key: " + full);
    } else if (section == "scheme") {
        if (key == "nu") cfg.nu = parse_double(value, full);
        else if (key == "T") cfg.T = parse_double(value, full);
        else if (key == "M") cfg.M = parse_int(value, full);
        else if (key == "epsilon") cfg.epsilon = parse_double(value, full);
        else if (key == "eta") cfg.eta = parse_double(value, full);
        else if (key == "alpha") cfg.alpha = parse_double(value, full);
        else if (key == "couple_eps_to_k") cfg.couple_eps_to_k = parse_bool(value, full);
        else if (key == "lagged_advection") cfg.lagged_advection = parse_bool(value, full);
        else if (key == "picard_tol") cfg.picard_tol = parse_double(value, full);
        else if (key == "picard_max_iter") cfg.picard_max_iter = parse_int(value, full);
        else if (key == "divergence_guard") cfg.divergence_guard = parse_double(value, full);
        else if (key == "scheme") cfg.scheme = value;
        else if (key == "u0") cfg.u0 = value;
        else if (key == "u0_seed") cfg.u0_seed = parse_u64(value, full);
        else if (key == "u0_amplitude") cfg.u0_amplitude = parse_double(value, full);
        else throw ConfigError("unknown key: " + full);
    } else if (section == "noise") {
        if (key == "J") cfg.J = parse_int(value, full);
        else if (key == "gamma") cfg.gamma = parse_double(value, full);
        else if (key == "scale") cfg.scale = parse_double(value, full);
        else throw ConfigError("unknown key: " + full);
    } else if (section == "study") {
        if (key == "levels") cfg.levels = parse_int_list(value, full);
        else if (key == "paths") cfg.paths = parse_int(value, full);
        else if (key == "M_ref") cfg.M_ref = parse_int(value, full);
        else if (key == "base_seed") cfg.base_seed = parse_u64(value, full);
        else if (key == "threads") cfg.threads = parse_int(value, full);
        else if (key == "stokes_only") cfg.stokes_only = parse_bool(value, full);
        else if (key == "sample_sets") cfg.sample_sets = parse_bool(value, full);
        else if (key == "exceedance_r") cfg.exceedance_r = parse_double(value, full);
        else if (key == "exceedance_C") cfg.exceedance_C = parse_double(value, full);
        else if (key == "kappa_schedule") cfg.kappa_schedule = value;
        else if (key == "kappa_quantile") cfg.kappa_quantile = parse_double(value, full);
        else if (key == "mu") cfg.mu = parse_double(value, full);
        else throw ConfigError("unknown key: " + full);
    } else if (section == "output") {
        if (key == "dir") cfg.dir = value;
        else throw ConfigError("unknown key: " + full);
    } else {
        throw ConfigError("unknown section: [" + section + "]");
    }
}

// Parses the documented key = value format. Defaults fill anything omitted;
// the result is validated.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(t.substr(1, t.size() - 2));
            continue;
        }
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        apply_config_entry(cfg, section, key, value);
    }
    cfg.validate();
    return cfg;
}

// Canonical form: fixed section and key order, floats at 17 significant
// digits. parse(canonical(cfg)) == cfg and canonicalization is idempotent.
inline std::string canonical_config(const RunConfig& c) {
    using detail::fmt17;
    std::ostringstream os;
    os << "[grid]\n";
    os << "L = " << fmt17(c.L) << "\n";
    os << "N = " << c.N << "\n";
    os << "dealias_pad = " << fmt17(c.dealias_pad) << "\n";
    os << "\n[scheme]\n";
    os << "nu = " << fmt17(c.nu) << "\n";
    os << "T = " << fmt17(c.T) << "\n";
    os << "M = " << c.M << "\n";
    os << "epsilon = " << fmt17(c.epsilon) << "\n";
    os << "eta = " << fmt17(c.eta) << "\n";
    os << "alpha = " << fmt17(c.alpha) << "\n";
    os << "couple_eps_to_k = " << (c.couple_eps_to_k ? "true" : "false") << "\n";
    os << "lagged_advection = " << (c.lagged_advection ? "true" : "false") << "\n";
    os << "picard_tol = " << fmt17(c.picard_tol) << "\n";
    os << "picard_max_iter = " << c.picard_max_iter << "\n";
    os << "divergence_guard = " << fmt17(c.divergence_guard) << "\n";
    os << "scheme = " << c.scheme << "\n";
    os << "u0 = " << c.u0 << "\n";
    os << "u0_seed = " << c.u0_seed << "\n";
    os << "u0_amplitude = " << fmt17(c.u0_amplitude) << "\n";
    os << "\n[noise]\n";
    os << "J = " << c.J << "\n";
    os << "gamma = " << fmt17(c.gamma) << "\n";
    os << "scale = " << fmt17(c.scale) << "\n";
    os << "\n[study]\n";
    os << "levels = ";
    for (size_t i = 0; i < c.levels.size(); ++i) os << (i ? "," : "") << c.levels[i];
    os << "\n";
    os << "paths = " << c.paths << "\n";
    os << "M_ref = " << c.M_ref << "\n";
    os << "base_seed = " << c.base_seed << "\n";
    os << "threads = " << c.threads << "\n";
    os << "stokes_only = " << (c.stokes_only ? "true" : "false") << "\n";
    os << "sample_sets = " << (c.sample_sets ? "true" : "false") << "\n";
    os << "exceedance_r = " << fmt17(c.exceedance_r) << "\n";
    os << "exceedance_C = " << fmt17(c.exceedance_C) << "\n";
    os << "kappa_schedule = " << c.kappa_schedule << "\n";
    os << "kappa_quantile = " << fmt17(c.kappa_quantile) << "\n";
    os << "mu = " << fmt17(c.mu) << "\n";
    os << "\n[output]\n";
    os << "dir = " << c.dir << "\n";
    return os.str();
}

// FNV-1a over the canonical text; embedded in every output file.
inline uint64_t manifest_hash(const RunConfig& cfg) {
    const std::string text = canonical_config(cfg);
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace spns
