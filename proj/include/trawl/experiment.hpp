#pragma once

// Configuration-driven experiment runner: config parsing and hashing, atomic
// artifact writes with a checksum manifest, and one runner per CLI subcommand.
// Requires nlohmann/json and OpenSSL (libcrypto).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "trawl/ensemble_io.hpp"
#include "trawl/error.hpp"
#include "trawl/exponent_oracle.hpp"
#include "trawl/levy_model.hpp"
#include "trawl/pathsim.hpp"
#include "trawl/stats.hpp"
#include "trawl/trawl_kernel.hpp"

namespace trawl::experiment {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "trawlsim 0.1.0";

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_unclassified = 3, exit_accuracy = 4 };

/// Invalid configuration, reported with the offending JSON path.
class ConfigError : public ValidationError {
public:
    ConfigError(const std::string& path, const std::string& what)
        : ValidationError(path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

struct EstimateSettings {
    std::string method = "stability";  // stability | selfsim
    std::optional<double> from;
    std::optional<double> to;
    std::optional<std::pair<double, double>> window;
    std::vector<double> scales = {1.0, 2.0, 4.0};
    double base_time = 1.0;
    std::size_t bootstrap = 200;
};

struct FigureSettings {
    std::vector<std::pair<double, double>> pairs = {{1.8, 0.5}, {1.8, 0.2}, {1.4, 0.3}, {1.9, 0.8}};
    std::size_t n_paths = 4;
    std::size_t n_times = 201;
    std::vector<double> T_grid = {1e2, 1e3, 1e4, 1e5, 1e6};
};

struct ExperimentConfig {
    json document;
    std::string config_hash;
    std::optional<LevyBasisSpec> levy;
    std::optional<TrawlSpec> trawl;
    TimeCombo combo = TimeCombo::single(1.0, 1.0);
    std::vector<double> T_grid = {1e2, 1e3, 1e4};
    double T = 100.0;
    std::optional<double> F_T;
    std::vector<double> times = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::size_t n_paths = 1000;
    std::uint64_t master_seed = 1;
    SeriesBudget budget;
    std::string simulator = "kernel";  // kernel | grid
    XGridOptions grid;
    std::string out_dir = "trawlsim_out";
    std::string format = "csv";
    double quadrature_tol = 1e-7;
    EstimateSettings estimate;
    FigureSettings figures;

    const LevyBasisSpec& require_levy() const {
        if (!levy) throw ConfigError("levy", "required for this command");
        return *levy;
    }
    const TrawlSpec& require_trawl() const {
        if (!trawl) throw ConfigError("trawl", "required for this command");
        return *trawl;
    }
};

namespace detail {

inline void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
}

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline double number(const json& obj, const std::string& path, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    return v.get<double>();
}

inline std::optional<double> opt_number(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    return number(obj, path, key);
}

inline std::uint64_t unsigned_integer(const json& obj, const std::string& path, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError(join(path, key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
}

inline std::vector<double> number_list(const json& obj, const std::string& path, const char* key) {
    const auto& v = obj.at(key);
    const std::string p = join(path, key);
    if (!v.is_array()) throw ConfigError(p, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(p + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

inline std::string string_value(const json& obj, const std::string& path, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
    return v.get<std::string>();
}

template <class Fn>
auto guarded(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

inline LevyBasisSpec parse_levy(const json& j) {
    const std::string path = "levy";
    if (!j.is_object() || !j.contains("kind")) throw ConfigError(path + ".kind", "required");
    const std::string kind = string_value(j, path, "kind");
    if (kind == "stable") {
        allow_keys(j, path, {"kind", "alpha"});
        if (!j.contains("alpha")) throw ConfigError(path + ".alpha", "required");
        const double alpha = number(j, path, "alpha");
        return guarded(path + ".alpha", [&] { return LevyBasisSpec::stable(alpha); });
    }
    if (kind == "poisson_difference") {
        allow_keys(j, path, {"kind", "lambda", "jump"});
        const double lambda = j.contains("lambda") ? number(j, path, "lambda") : 1.0;
        const double jump = j.contains("jump") ? number(j, path, "jump") : 1.0;
        if (!(lambda > 0.0)) throw ConfigError(path + ".lambda", "must be > 0");
        return guarded(path + ".jump", [&] { return LevyBasisSpec::poisson_difference(lambda, jump); });
    }
    if (kind == "density") {
        allow_keys(j, path, {"kind", "table"});
        if (!j.contains("table") || !j["table"].is_array()) throw ConfigError(path + ".table", "expected [[x, h(x)], ...]");
        std::vector<std::pair<double, double>> table;
        for (std::size_t i = 0; i < j["table"].size(); ++i) {
            const auto& row = j["table"][i];
            if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
                throw ConfigError(path + ".table[" + std::to_string(i) + "]", "expected [x, h(x)]");
            table.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
        return guarded(path + ".table", [&] { return LevyBasisSpec::density_table(std::move(table)); });
    }
    throw ConfigError(path + ".kind", "unknown kind '" + kind + "' (stable | poisson_difference | density)");
}

inline TrawlSpec parse_trawl(const json& j) {
    const std::string path = "trawl";
    allow_keys(j, path, {"family", "C", "gamma"});
    if (j.contains("family") && string_value(j, path, "family") != "canonical")
        throw ConfigError(path + ".family", "only 'canonical' trawls are expressible in a config");
    if (!j.contains("gamma")) throw ConfigError(path + ".gamma", "required");
    const double gamma = number(j, path, "gamma");
    const double C = j.contains("C") ? number(j, path, "C") : 1.0;
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError(path + ".gamma", "must lie in (0, 1)");
    if (!(C > 0.0)) throw ConfigError(path + ".C", "must be > 0");
    return TrawlSpec::canonical(gamma, C);
}

inline TimeCombo parse_combo(const json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("combo", "expected a nonempty array of [a, t] pairs");
    std::vector<TimeCombo::Term> terms;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& p = j[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw ConfigError("combo[" + std::to_string(i) + "]", "expected [a, t]");
        terms.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return guarded("combo", [&] { return TimeCombo(std::move(terms)); });
}

}  // namespace detail

/// Parse and validate a config document. `seed_override` replaces master_seed
/// before hashing. The hash ignores output.dir so relocating a run keeps it.
inline ExperimentConfig parse_config(json doc, std::optional<std::uint64_t> seed_override = std::nullopt) {
    using namespace detail;
    if (doc.is_null()) doc = json::object();
    allow_keys(doc, "", {"levy", "trawl", "combo", "T_grid", "T", "F_T", "times", "n_paths", "master_seed", "budget",
                         "simulator", "grid", "output", "tolerance", "estimate", "figures"});
    if (seed_override) doc["master_seed"] = *seed_override;

    ExperimentConfig c;
    if (doc.contains("levy")) c.levy = parse_levy(doc["levy"]);
    if (doc.contains("trawl")) c.trawl = parse_trawl(doc["trawl"]);
    if (doc.contains("combo")) c.combo = parse_combo(doc["combo"]);
    if (doc.contains("T_grid")) {
        c.T_grid = number_list(doc, "", "T_grid");
        if (c.T_grid.empty()) throw ConfigError("T_grid", "must not be empty");
        for (std::size_t i = 0; i < c.T_grid.size(); ++i)
            if (!(c.T_grid[i] >= 1.0)) throw ConfigError("T_grid[" + std::to_string(i) + "]", "must be >= 1");
    }
    if (doc.contains("T")) {
        c.T = number(doc, "", "T");
        if (!(c.T >= 1.0)) throw ConfigError("T", "must be >= 1");
    }
    if (doc.contains("F_T")) {
        c.F_T = number(doc, "", "F_T");
        if (!(*c.F_T > 0.0)) throw ConfigError("F_T", "must be > 0");
    }
    if (doc.contains("times")) {
        c.times = number_list(doc, "", "times");
        guarded("times", [&] { return ::trawl::detail::normalized_times(c.times); });
    }
    if (doc.contains("n_paths")) {
        c.n_paths = unsigned_integer(doc, "", "n_paths");
        if (c.n_paths == 0) throw ConfigError("n_paths", "must be > 0");
    }
    if (doc.contains("master_seed")) c.master_seed = unsigned_integer(doc, "", "master_seed");
    if (doc.contains("budget")) {
        const auto& b = doc["budget"];
        allow_keys(b, "budget", {"n_terms", "n_compensation", "domain_u_cutoff", "max_error_bound"});
        if (b.contains("n_terms")) c.budget.n_terms = unsigned_integer(b, "budget", "n_terms");
        if (b.contains("n_compensation")) c.budget.n_compensation = unsigned_integer(b, "budget", "n_compensation");
        if (b.contains("domain_u_cutoff")) c.budget.domain_u_cutoff = number(b, "budget", "domain_u_cutoff");
        if (b.contains("max_error_bound")) c.budget.max_error_bound = number(b, "budget", "max_error_bound");
        if (c.budget.n_terms == 0) throw ConfigError("budget.n_terms", "must be > 0");
        if (!(c.budget.domain_u_cutoff > 0.0)) throw ConfigError("budget.domain_u_cutoff", "must be > 0");
    }
    if (doc.contains("simulator")) {
        c.simulator = string_value(doc, "", "simulator");
        if (c.simulator != "kernel" && c.simulator != "grid")
            throw ConfigError("simulator", "expected 'kernel' or 'grid'");
    }
    if (doc.contains("grid")) {
        const auto& g = doc["grid"];
        allow_keys(g, "grid", {"cells", "window", "tail_mass_bound"});
        if (g.contains("cells")) c.grid.cells = unsigned_integer(g, "grid", "cells");
        if (g.contains("window")) c.grid.window = number(g, "grid", "window");
        if (g.contains("tail_mass_bound")) c.grid.tail_mass_bound = number(g, "grid", "tail_mass_bound");
        if (c.grid.cells == 0) throw ConfigError("grid.cells", "must be > 0");
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        allow_keys(o, "output", {"dir", "format"});
        if (o.contains("dir")) c.out_dir = string_value(o, "output", "dir");
        if (o.contains("format")) c.format = string_value(o, "output", "format");
        if (c.format != "csv" && c.format != "bin") throw ConfigError("output.format", "expected 'csv' or 'bin'");
    }
    if (doc.contains("tolerance")) {
        const auto& t = doc["tolerance"];
        allow_keys(t, "tolerance", {"quadrature"});
        if (t.contains("quadrature")) c.quadrature_tol = number(t, "tolerance", "quadrature");
        if (!(c.quadrature_tol > 0.0)) throw ConfigError("tolerance.quadrature", "must be > 0");
    }
    if (doc.contains("estimate")) {
        const auto& e = doc["estimate"];
        allow_keys(e, "estimate", {"method", "from", "to", "window", "scales", "base_time", "bootstrap"});
        if (e.contains("method")) c.estimate.method = string_value(e, "estimate", "method");
        if (c.estimate.method != "stability" && c.estimate.method != "selfsim")
            throw ConfigError("estimate.method", "expected 'stability' or 'selfsim'");
        c.estimate.from = opt_number(e, "estimate", "from");
        c.estimate.to = opt_number(e, "estimate", "to");
        if (e.contains("window")) {
            const auto w = number_list(e, "estimate", "window");
            if (w.size() != 2 || !(w[0] > 0.0 && w[1] > w[0]))
                throw ConfigError("estimate.window", "expected [lo, hi] with 0 < lo < hi");
            c.estimate.window = std::make_pair(w[0], w[1]);
        }
        if (e.contains("scales")) c.estimate.scales = number_list(e, "estimate", "scales");
        if (e.contains("base_time")) c.estimate.base_time = number(e, "estimate", "base_time");
        if (e.contains("bootstrap")) c.estimate.bootstrap = unsigned_integer(e, "estimate", "bootstrap");
    }
    if (doc.contains("figures")) {
        const auto& f = doc["figures"];
        allow_keys(f, "figures", {"pairs", "n_paths", "n_times", "T_grid"});
        if (f.contains("pairs")) {
            c.figures.pairs.clear();
            if (!f["pairs"].is_array()) throw ConfigError("figures.pairs", "expected [[alpha, gamma], ...]");
            for (std::size_t i = 0; i < f["pairs"].size(); ++i) {
                const auto& p = f["pairs"][i];
                const std::string path = "figures.pairs[" + std::to_string(i) + "]";
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError(path, "expected [alpha, gamma]");
                const double a = p[0].get<double>();
                const double g = p[1].get<double>();
                if (!(g > 0.0 && g < 1.0 && a > 1.0 + g && a < 2.0))
                    throw ConfigError(path, "needs 0 < gamma < 1 and 1 + gamma < alpha < 2");
                c.figures.pairs.emplace_back(a, g);
            }
        }
        if (f.contains("n_paths")) c.figures.n_paths = unsigned_integer(f, "figures", "n_paths");
        if (f.contains("n_times")) c.figures.n_times = unsigned_integer(f, "figures", "n_times");
        if (f.contains("T_grid")) c.figures.T_grid = number_list(f, "figures", "T_grid");
        if (c.figures.n_paths == 0 || c.figures.n_times < 2) throw ConfigError("figures", "needs n_paths > 0, n_times >= 2");
    }

    c.document = doc;
    json hashed = doc;
    if (hashed.contains("output")) {
        hashed["output"].erase("dir");
        if (hashed["output"].empty()) hashed.erase("output");
    }
    c.config_hash = sha256_hex(hashed.dump());
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    std::optional<std::uint64_t> seed_override = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
    }
    return parse_config(std::move(doc), seed_override);
}

/// One output directory per experiment, written atomically and indexed by a manifest.
class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, bool force) : dir_(std::move(dir)) {
        namespace fs = std::filesystem;
        std::error_code ec;
        if (fs::exists(dir_, ec)) {
            if (!fs::is_directory(dir_, ec)) throw ConfigError(dir_.string(), "output path exists and is not a directory");
            if (!fs::is_empty(dir_, ec) && !force)
                throw ConfigError(dir_.string(), "output directory is not empty; rerun with --force to overwrite");
        } else {
            fs::create_directories(dir_, ec);
            if (ec) throw ConfigError(dir_.string(), "cannot create output directory: " + ec.message());
        }
    }

    const std::filesystem::path& dir() const noexcept { return dir_; }

    void write(const std::string& name, const std::string& bytes) {
        write_atomic(dir_ / name, bytes);
        files_[name] = sha256_hex(bytes);
    }

    void stage(const std::string& name, double seconds) { stages_.emplace_back(name, seconds); }

    void finish(const ExperimentConfig& config) {
        json m;
        m["tool_version"] = kToolVersion;
        m["config_hash"] = config.config_hash;
        m["master_seed"] = config.master_seed;
        json files = json::array();
        for (const auto& [name, sum] : files_) files.push_back({{"path", name}, {"sha256", sum}});
        m["files"] = files;
        json stages = json::array();
        for (const auto& [name, secs] : stages_) stages.push_back({{"stage", name}, {"wall_seconds", secs}});
        m["stages"] = stages;
        m["config"] = config.document;
        write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
    }

    static void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw ConfigError(path.string(), "cannot write file");
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw ConfigError(path.string(), "write failed");
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) throw ConfigError(path.string(), "cannot move file into place: " + ec.message());
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> files_;
    std::vector<std::pair<std::string, double>> stages_;
};

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct RunContext {
    ExperimentConfig config;
    std::optional<std::string> out_dir;  // overrides config.output.dir
    std::optional<std::string> format;   // overrides config.output.format
    bool force = false;
    unsigned threads = 1;
    std::ostream* out = &std::cout;

    std::string directory() const { return out_dir.value_or(config.out_dir); }
    std::string file_format() const { return format.value_or(config.format); }
};

inline json regime_to_json(const RegimeReport& r) {
    json j;
    j["regime"] = regime_name(r.regime);
    j["gamma"] = r.gamma;
    j["norming"] = {{"power", r.norming.power}, {"log_power", r.norming.log_power}};
    j["stability_index"] = r.stability_index;
    j["hurst"] = r.hurst ? json(*r.hurst) : json(nullptr);
    j["alpha_at_infinity"] = r.alpha_at_infinity;
    j["c_psi"] = r.c_psi;
    j["alpha_at_zero"] = r.alpha_at_zero;
    j["c_alpha"] = r.c_alpha;
    j["kappa"] = r.kappa ? json(*r.kappa) : json(nullptr);
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"holds", c.holds}, {"evidence", c.evidence}});
    j["checks"] = checks;
    return j;
}

inline std::string exponent_csv(const ExponentReport& rep) {
    std::string out = "T,F_T,I_T,I_limit,rel_gap,regime,tol_achieved\n";
    const auto gaps = rep.relative_gaps();
    for (std::size_t i = 0; i < rep.T_grid.size(); ++i) {
        out += ::trawl::detail::format_double(rep.T_grid[i]) + "," + ::trawl::detail::format_double(rep.F_values[i]) +
               "," + ::trawl::detail::format_double(rep.I_values[i]) + "," +
               ::trawl::detail::format_double(rep.limit_value) + "," + ::trawl::detail::format_double(gaps[i]) + "," +
               regime_name(rep.norming_regime) + "," + ::trawl::detail::format_double(rep.errors[i]) + "\n";
    }
    return out;
}

inline std::string encode_ensemble(const PathEnsemble& e, const std::string& format) {
    return format == "bin" ? ensemble_to_binary(e) : ensemble_to_csv(e);
}

inline RegimeReport classified_regime(const ExperimentConfig& c) {
    return verify_hypotheses(c.require_levy(), c.require_trawl().gamma());
}

inline int run_classify(const RunContext& ctx) {
    const auto report = classified_regime(ctx.config);
    json j = regime_to_json(report);
    j["config_hash"] = ctx.config.config_hash;
    *ctx.out << j.dump(2) << "\n";
    return report.regime == Regime::unclassified ? exit_unclassified : exit_ok;
}

inline int run_verify(const RunContext& ctx) {
    const auto& c = ctx.config;
    StageTimer timer;
    const auto report = classified_regime(c);
    if (report.regime == Regime::unclassified) {
        *ctx.out << "regime is UNCLASSIFIED; no limit exponent to compare against\n";
        return exit_unclassified;
    }
    const LevyExponent psi(c.require_levy());
    const auto rep = convergence_diagnostic(report, c.combo, c.require_trawl(), psi, c.T_grid, c.quadrature_tol);
    ArtifactWriter w(ctx.directory(), ctx.force);
    w.write("exponent.csv", exponent_csv(rep));
    w.stage("verify-exponent", timer.seconds());
    w.finish(c);
    *ctx.out << "wrote " << (w.dir() / "exponent.csv").string() << "\n";
    return exit_ok;
}

inline double norming_for(const ExperimentConfig& c, const RegimeReport& report) {
    if (c.F_T) return *c.F_T;
    return report.norming(c.T);
}

inline int run_simulate(const RunContext& ctx) {
    const auto& c = ctx.config;
    StageTimer timer;
    const auto& levy = c.require_levy();
    const auto& trawl = c.require_trawl();
    const auto report = classified_regime(c);
    if (report.regime == Regime::unclassified && !c.F_T) {
        *ctx.out << "regime is UNCLASSIFIED; set F_T explicitly to simulate\n";
        return exit_unclassified;
    }
    const double F = norming_for(c, report);
    SimulationOptions opt{c.n_paths, c.master_seed, ctx.threads};
    const std::string fmt = ctx.file_format();
    const std::string ext = fmt == "bin" ? ".bin" : ".csv";

    ArtifactWriter w(ctx.directory(), ctx.force);
    if (c.simulator == "grid") {
        XGridOptions xo = c.grid;
        xo.times = c.times;
        xo.T = c.T;
        xo.F_T = F;
        auto res = simulate_X_grid(trawl, levy, xo, opt);
        res.X.meta.config_hash = c.config_hash;
        res.Y.meta.config_hash = c.config_hash;
        w.write("trawl_process" + ext, encode_ensemble(res.X, fmt));
        w.write("ensemble" + ext, encode_ensemble(res.Y, fmt));
    } else {
        PathEnsemble e = levy.is_stable()
                             ? simulate_stable_YT(c.times, c.T, trawl, levy.stable_alpha(), F, c.budget, opt)
                             : simulate_finite_activity_YT(c.times, c.T, trawl, levy, F, opt);
        e.meta.config_hash = c.config_hash;
        w.write("ensemble" + ext, encode_ensemble(e, fmt));
    }
    w.stage("simulate", timer.seconds());
    w.finish(c);
    *ctx.out << "wrote " << (w.dir() / ("ensemble" + ext)).string() << "\n";
    return exit_ok;
}

inline int run_limit_process(const RunContext& ctx) {
    const auto& c = ctx.config;
    StageTimer timer;
    const auto& levy = c.require_levy();
    if (!levy.is_stable()) throw ConfigError("levy.kind", "the limit process needs a stable basis");
    const double alpha = levy.stable_alpha();
    const double gamma = c.require_trawl().gamma();
    if (!(alpha > 1.0 + gamma)) throw ConfigError("levy.alpha", "the limit process needs 1 + gamma < alpha < 2");
    SimulationOptions opt{c.n_paths, c.master_seed, ctx.threads};
    auto e = simulate_limit_Y(c.times, alpha, gamma, c.budget, opt);
    e.meta.config_hash = c.config_hash;
    const std::string fmt = ctx.file_format();
    const std::string name = std::string("limit") + (fmt == "bin" ? ".bin" : ".csv");
    ArtifactWriter w(ctx.directory(), ctx.force);
    w.write(name, encode_ensemble(e, fmt));
    w.stage("limit-process", timer.seconds());
    w.finish(c);
    *ctx.out << "wrote " << (w.dir() / name).string() << "\n";
    return exit_ok;
}

/// Stability-index fit with a seeded percentile bootstrap over paths on the fixed window.
inline json estimate_stability(const std::vector<double>& sample, const EstimateSettings& s, std::uint64_t seed,
                               unsigned threads) {
    const auto fit = stability_index_fit(sample, s.window);
    const std::pair<double, double> window{fit.theta_lo, fit.theta_hi};
    std::vector<double> boot(s.bootstrap, std::numeric_limits<double>::quiet_NaN());
    parallel_for(s.bootstrap, threads, [&](std::size_t b) {
        Rng rng = stream_rng(seed ^ 0xe57e57e57e57e57eULL, b);
        std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
        std::vector<double> resample(sample.size());
        for (auto& v : resample) v = sample[pick(rng)];
        try {
            boot[b] = stability_index_fit(resample, window).index_hat;
        } catch (const WindowError&) {
        }
    });
    std::vector<double> ok;
    for (double v : boot)
        if (std::isfinite(v)) ok.push_back(v);
    json j;
    j["method"] = "ecf_loglog_stability";
    j["index_hat"] = fit.index_hat;
    j["r_squared"] = fit.r_squared;
    j["window"] = {fit.theta_lo, fit.theta_hi};
    if (ok.size() >= 10) {
        std::sort(ok.begin(), ok.end());
        auto q = [&](double p) { return ok[static_cast<std::size_t>(p * static_cast<double>(ok.size() - 1))]; };
        j["ci_low"] = q(0.025);
        j["ci_high"] = q(0.975);
    } else {
        j["ci_low"] = fit.index_hat - 1.96 * fit.slope_se;
        j["ci_high"] = fit.index_hat + 1.96 * fit.slope_se;
    }
    j["bootstrap_resamples"] = ok.size();
    return j;
}

inline int run_estimate(const RunContext& ctx, const std::filesystem::path& ensemble_path) {
    if (!std::filesystem::exists(ensemble_path)) throw ConfigError(ensemble_path.string(), "ensemble file not found");
    const auto ens = read_ensemble(ensemble_path);
    if (ens.n_times() < 2) throw FormatError("ensemble needs at least two time points");
    const auto& s = ctx.config.estimate;
    json j;
    if (s.method == "selfsim") {
        std::vector<std::vector<double>> samples;
        for (double c : s.scales) samples.push_back(ens.column(ens.time_index(c * s.base_time)));
        const auto fit = selfsim_index_fit(samples, s.scales);
        j["method"] = "ecf_matching_selfsim";
        j["index_hat"] = fit.fit.index_hat;
        j["r_squared"] = fit.fit.r_squared;
        j["ci_low"] = fit.fit.index_hat - 1.96 * fit.fit.slope_se;
        j["ci_high"] = fit.fit.index_hat + 1.96 * fit.fit.slope_se;
        j["window"] = nullptr;
        j["matched_exponents"] = fit.matched_exponents;
    } else {
        const std::size_t from = s.from ? ens.time_index(*s.from) : 0;
        const std::size_t to = s.to ? ens.time_index(*s.to) : ens.n_times() - 1;
        if (to == from) throw ConfigError("estimate", "increment endpoints coincide");
        j = estimate_stability(ens.increments(from, to), s, ens.meta.master_seed, ctx.threads);
    }
    j["ensemble"] = ensemble_path.string();
    j["n_paths"] = ens.n_paths();
    *ctx.out << j.dump(2) << "\n";
    return exit_ok;
}

/// CSV inputs for the plotting scripts: limit-process paths for each (alpha, gamma)
/// pair and exponent diagnostics for a THM2 and a CRITICAL configuration.
inline int run_figures_data(const RunContext& ctx) {
    const auto& c = ctx.config;
    const auto& f = c.figures;
    ArtifactWriter w(ctx.directory(), ctx.force);
    json panels = json::array();
    std::vector<double> times(f.n_times);
    for (std::size_t i = 0; i < f.n_times; ++i) times[i] = static_cast<double>(i) / static_cast<double>(f.n_times - 1);
    for (const auto& [alpha, gamma] : f.pairs) {
        StageTimer timer;
        SimulationOptions opt{f.n_paths, c.master_seed, ctx.threads};
        auto e = simulate_limit_Y(times, alpha, gamma, c.budget, opt);
        e.meta.config_hash = c.config_hash;
        char name[64];
        std::snprintf(name, sizeof name, "limit_alpha%.2f_gamma%.2f.csv", alpha, gamma);
        w.write(name, ensemble_to_csv(e));
        w.stage(name, timer.seconds());
        panels.push_back({{"file", name}, {"alpha", alpha}, {"gamma", gamma}, {"n_paths", f.n_paths}});
    }
    const auto trawl = TrawlSpec::canonical(0.5, 1.0);
    const std::pair<const char*, LevyBasisSpec> cases[] = {{"exponent_THM2.csv", LevyBasisSpec::poisson_difference(1.0)},
                                                           {"exponent_CRITICAL.csv", LevyBasisSpec::stable(1.5)}};
    json convergence = json::array();
    for (const auto& [name, levy] : cases) {
        StageTimer timer;
        const auto report = verify_hypotheses(levy, trawl.gamma());
        const auto rep =
            convergence_diagnostic(report, TimeCombo::single(1.0, 1.0), trawl, LevyExponent(levy), f.T_grid, c.quadrature_tol);
        w.write(name, exponent_csv(rep));
        w.stage(name, timer.seconds());
        convergence.push_back(name);
    }
    json spec{{"panels", panels}, {"convergence", convergence}};
    w.write("figure_spec.json", spec.dump(2) + "\n");
    w.finish(c);
    *ctx.out << "wrote figure inputs to " << w.dir().string() << "\n";
    return exit_ok;
}

}  // namespace trawl::experiment
