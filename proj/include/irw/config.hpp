#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "irw/kernels.hpp"
#include "irw/schedule.hpp"

namespace irw {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key/value text with one [section] per module. '#' and ';' start
// comments. Top-level keys (before any section) land in the "" section.
class ConfigMap {
public:
    static ConfigMap parse(const std::string& text) {
        ConfigMap cfg;
        cfg.raw_ = text;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto cut = line.find_first_of("#;");
            if (cut != std::string::npos) line = line.substr(0, cut);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            cfg.values_[section + "." + key] = val;
        }
        return cfg;
    }

    static ConfigMap load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }
    std::string required(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required config key: " + key);
        return it->second;
    }
    double num(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        return parse_num(key, it->second);
    }
    std::int64_t integer(const std::string& key, std::int64_t dflt) const {
        double v = num(key, double(dflt));
        return std::int64_t(v);
    }
    bool flag(const std::string& key, bool dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("bad boolean for " + key + ": " + v);
    }
    std::vector<double> list(const std::string& key) const {
        auto it = values_.find(key);
        std::vector<double> out;
        if (it == values_.end()) return out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(parse_num(key, trim(tok)));
        return out;
    }

    const std::string& raw() const { return raw_; }
    void override_value(const std::string& key, const std::string& val) { values_[key] = val; }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }
    static double parse_num(const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (...) {
            throw ConfigError("bad number for " + key + ": " + v);
        }
    }

    std::map<std::string, std::string> values_;
    std::string raw_;
};

// FNV-1a over the raw config text; embedded in every output for replay.
inline std::uint64_t config_hash(const std::string& raw) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : raw) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

enum class ExperimentKind { PhaseSweep, UniformTest, Classify, Excursions, Range, Space };

struct ExperimentConfig {
    ExperimentKind kind;
    std::uint64_t seed = 0;

    // kernel
    std::string kernel_kind = "zero";  // zero | lamperti | loglamperti | constant | orbit | lattice2d
    double c = 0.0, d = 0.0, b = 0.0;
    int x_min = 1;
    Domain domain = Domain::FullLine;
    int orbit_kmax = 32;

    // schedule
    std::string schedule_kind = "constant";
    double alpha = 2.0, a = 0.5;
    std::vector<double> custom_values;

    // grids
    std::vector<double> grid_c, grid_alpha;

    // budgets
    std::int64_t replicas = 100'000;
    std::int64_t step_cap = 1'000'000;
    std::int64_t m_horizon = 10'000;
    std::int64_t j_horizon = 1'000'000;
    std::int64_t n = 10'000;
    std::vector<double> checkpoints;
    int workers = 1;

    // space experiment
    std::string graph = "z1";  // z1 | z2
    double space_alpha = 2.0;

    // tolerances
    double abs_tol = 1e-10;
    double series_width_tol = 5.0;
    double ks_tol = 0.02;

    // output
    std::string out_dir = "out";
    std::string format = "csv";
    bool trace = false;

    std::uint64_t hash = 0;
    std::string raw;
};

inline ExperimentKind parse_experiment_kind(const std::string& s) {
    if (s == "phase-sweep") return ExperimentKind::PhaseSweep;
    if (s == "uniform-test") return ExperimentKind::UniformTest;
    if (s == "classify") return ExperimentKind::Classify;
    if (s == "excursions") return ExperimentKind::Excursions;
    if (s == "range") return ExperimentKind::Range;
    if (s == "space") return ExperimentKind::Space;
    throw ConfigError("unknown experiment kind: " + s);
}

inline ExperimentConfig make_experiment_config(const ConfigMap& cfg) {
    ExperimentConfig ec;
    ec.kind = parse_experiment_kind(cfg.str("experiment.kind", cfg.str(".kind", "classify")));
    // seed is mandatory: reproducibility forbids a wall-clock default
    std::string seed = cfg.has(".seed") ? cfg.required(".seed") : cfg.required("experiment.seed");
    try {
        ec.seed = std::stoull(seed);
    } catch (...) {
        throw ConfigError("bad seed: " + seed);
    }

    ec.kernel_kind = cfg.str("kernel.kind", "zero");
    ec.c = cfg.num("kernel.c", 0.0);
    ec.d = cfg.num("kernel.d", 0.0);
    ec.b = cfg.num("kernel.b", 0.0);
    ec.x_min = int(cfg.integer("kernel.x_min", ec.kernel_kind == "loglamperti" ? 2 : 1));
    std::string dom = cfg.str("kernel.domain", "fullline");
    if (dom == "halfline") ec.domain = Domain::HalfLine;
    else if (dom == "fullline") ec.domain = Domain::FullLine;
    else throw ConfigError("bad kernel.domain: " + dom);
    ec.orbit_kmax = int(cfg.integer("kernel.k_max", 32));

    ec.schedule_kind = cfg.str("schedule.kind", "constant");
    ec.alpha = cfg.num("schedule.alpha", 2.0);
    ec.a = cfg.num("schedule.a", 0.5);
    ec.custom_values = cfg.list("schedule.values");

    ec.grid_c = cfg.list("grid.c");
    ec.grid_alpha = cfg.list("grid.alpha");

    ec.replicas = cfg.integer("budget.replicas", ec.replicas);
    ec.step_cap = cfg.integer("budget.step_cap", ec.step_cap);
    ec.m_horizon = cfg.integer("budget.m_horizon", ec.m_horizon);
    ec.j_horizon = cfg.integer("budget.j_horizon", ec.j_horizon);
    ec.n = cfg.integer("budget.n", ec.n);
    ec.checkpoints = cfg.list("budget.checkpoints");
    ec.workers = int(cfg.integer("budget.workers", 1));

    ec.graph = cfg.str("space.graph", "z1");
    if (ec.graph != "z1" && ec.graph != "z2") throw ConfigError("space.graph must be z1 or z2");
    ec.space_alpha = cfg.num("space.alpha", 2.0);

    ec.abs_tol = cfg.num("tolerances.abs_tol", ec.abs_tol);
    ec.series_width_tol = cfg.num("tolerances.series_width_tol", ec.series_width_tol);
    ec.ks_tol = cfg.num("tolerances.ks_tol", ec.ks_tol);

    ec.out_dir = cfg.str("output.dir", "out");
    ec.format = cfg.str("output.format", "csv");
    if (ec.format != "csv" && ec.format != "json")
        throw ConfigError("output.format must be csv or json");
    ec.trace = cfg.flag("output.trace", false);

    ec.raw = cfg.raw();
    ec.hash = config_hash(ec.raw);

    if (ec.replicas < 1 || ec.step_cap < 1) throw ConfigError("budgets must be positive");
    return ec;
}

inline PassageSchedule make_schedule(const ExperimentConfig& ec) {
    const std::string& k = ec.schedule_kind;
    if (k == "power") return PassageSchedule::power(ec.alpha);
    if (k == "geometric") return PassageSchedule::geometric(ec.a);
    if (k == "factorial") return PassageSchedule::factorial();
    if (k == "zerotail") return PassageSchedule::zero_tail();
    if (k == "constant") return PassageSchedule::constant();
    if (k == "custom") return PassageSchedule::custom(ec.custom_values);
    throw ConfigError("unknown schedule.kind: " + k);
}

inline Drift make_drift(const ExperimentConfig& ec) {
    const std::string& k = ec.kernel_kind;
    if (k == "zero") return Drift::zero();
    if (k == "lamperti") return Drift::lamperti(ec.c, ec.x_min);
    if (k == "loglamperti") return Drift::log_lamperti(ec.d, ec.x_min);
    if (k == "constant") return Drift::constant(ec.b);
    throw ConfigError("kernel kind has no line drift: " + k);
}

inline NearestNeighborKernel make_line_kernel(const ExperimentConfig& ec) {
    return NearestNeighborKernel(ec.domain, make_drift(ec));
}

}  // namespace irw
