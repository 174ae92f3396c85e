#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epf/core/error.hpp"
#include "epf/core/date.hpp"
#include "epf/decomp/mstd.hpp"
#include "epf/decomp/sarima.hpp"
#include "epf/panel/types.hpp"

namespace epf::pipeline {

using json = nlohmann::ordered_json;

enum class CombineMethod { ss, ss_pca, simav, cls, irmse };

inline const char* to_string(CombineMethod m) {
    switch (m) {
        case CombineMethod::ss: return "ss";
        case CombineMethod::ss_pca: return "ss-pca";
        case CombineMethod::simav: return "simav";
        case CombineMethod::cls: return "cls";
        case CombineMethod::irmse: return "irmse";
    }
    return "?";
}

inline CombineMethod parse_method(const std::string& s) {
    if (s == "ss") return CombineMethod::ss;
    if (s == "ss-pca") return CombineMethod::ss_pca;
    if (s == "simav") return CombineMethod::simav;
    if (s == "cls") return CombineMethod::cls;
    if (s == "irmse") return CombineMethod::irmse;
    throw ValidationError("'" + s + "' is not one of ss|ss-pca|simav|cls|irmse");
}

struct RunConfig {
    // data
    std::string prices_path;
    std::string volumes_path;
    std::string features_path;
    std::vector<std::string> external_forecast_paths;

    DateWindow train{};
    DateWindow test{};
    std::uint64_t seed = 1;

    // drivers
    int k_max = 8;
    double alpha = 0.05;
    std::vector<std::string> day_d_features;
    std::vector<int> mstd_periods{7, 365};
    decomp::SarimaGrid sarima_grid{};
    decomp::MstdOptions mstd_options{};

    // pca
    bool pca_standardize = false;
    int l_min = 1;
    int l_max = 0;  // 0: up to the full basis
    int l_step = 1;

    // models
    int varx_p_max = 3;
    int varx_q_max = 3;
    int lookback = 20;

    // ensemble
    CombineMethod method = CombineMethod::ss_pca;
    bool per_hour = false;
    bool clip_simplex = false;
    double selection_threshold = 1e-3;

    // robustness
    bool robustness_enabled = false;
    int robustness_n = 50;
    std::uint64_t robustness_seed = 7;

    json raw;  // parsed document, kept for the manifest
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const json& root) : root_(root) {}

    std::vector<std::string> errors;

    bool has(const json& j, const char* key) { return j.contains(key); }

    template <typename T>
    void read(const json& j, const char* key, T& out, const char* where) {
        if (!j.contains(key)) return;
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception&) {
            errors.push_back(std::string(where) + "." + key + ": wrong type");
        }
    }

    void read_date(const json& j, const char* key, Date& out, const char* where) {
        if (!j.contains(key)) {
            errors.push_back(std::string(where) + "." + key + ": missing");
            return;
        }
        try {
            out = Date::parse(j.at(key).get<std::string>());
        } catch (const std::exception& e) {
            errors.push_back(std::string(where) + "." + key + ": " + e.what());
        }
    }

    const json& root_;
};

}  // namespace detail

// Parses and checks a configuration document, collecting every problem
// instead of stopping at the first.
inline RunConfig parse_config(const json& root, std::vector<std::string>& errors) {
    RunConfig cfg;
    cfg.raw = root;
    detail::ConfigReader r(root);

    if (!root.is_object()) {
        errors.push_back("config: top level must be a JSON object");
        return cfg;
    }

    if (!root.contains("data")) {
        errors.push_back("data: missing section");
    } else {
        const json& d = root.at("data");
        r.read(d, "prices", cfg.prices_path, "data");
        r.read(d, "volumes", cfg.volumes_path, "data");
        r.read(d, "features", cfg.features_path, "data");
        r.read(d, "external_forecasts", cfg.external_forecast_paths, "data");
        if (cfg.prices_path.empty()) r.errors.push_back("data.prices: missing");
        if (cfg.volumes_path.empty()) r.errors.push_back("data.volumes: missing");
        if (cfg.features_path.empty()) r.errors.push_back("data.features: missing");
    }

    std::size_t errors_before_windows = r.errors.size();
    if (!root.contains("windows")) {
        r.errors.push_back("windows: missing section");
    } else {
        const json& w = root.at("windows");
        if (w.contains("train")) {
            r.read_date(w.at("train"), "start", cfg.train.start, "windows.train");
            r.read_date(w.at("train"), "end", cfg.train.end, "windows.train");
        } else
            r.errors.push_back("windows.train: missing");
        if (w.contains("test")) {
            r.read_date(w.at("test"), "start", cfg.test.start, "windows.test");
            r.read_date(w.at("test"), "end", cfg.test.end, "windows.test");
        } else
            r.errors.push_back("windows.test: missing");
    }
    bool windows_ok = r.errors.size() == errors_before_windows;

    r.read(root, "seed", cfg.seed, "config");

    if (root.contains("drivers")) {
        const json& d = root.at("drivers");
        r.read(d, "k_max", cfg.k_max, "drivers");
        r.read(d, "alpha", cfg.alpha, "drivers");
        r.read(d, "day_d_features", cfg.day_d_features, "drivers");
        r.read(d, "mstd_periods", cfg.mstd_periods, "drivers");
        if (d.contains("sarima")) {
            const json& s = d.at("sarima");
            r.read(s, "p_max", cfg.sarima_grid.p_max, "drivers.sarima");
            r.read(s, "q_max", cfg.sarima_grid.q_max, "drivers.sarima");
            r.read(s, "P_max", cfg.sarima_grid.P_max, "drivers.sarima");
            r.read(s, "Q_max", cfg.sarima_grid.Q_max, "drivers.sarima");
            r.read(s, "season", cfg.sarima_grid.s, "drivers.sarima");
        }
    }

    if (root.contains("pca")) {
        const json& p = root.at("pca");
        r.read(p, "standardize", cfg.pca_standardize, "pca");
        r.read(p, "l_min", cfg.l_min, "pca");
        r.read(p, "l_max", cfg.l_max, "pca");
        r.read(p, "l_step", cfg.l_step, "pca");
    }

    if (root.contains("models")) {
        const json& m = root.at("models");
        if (m.contains("varx")) {
            r.read(m.at("varx"), "p_max", cfg.varx_p_max, "models.varx");
            r.read(m.at("varx"), "q_max", cfg.varx_q_max, "models.varx");
        }
        if (m.contains("reduced_linear"))
            r.read(m.at("reduced_linear"), "lookback", cfg.lookback, "models.reduced_linear");
    }

    if (root.contains("ensemble")) {
        const json& e = root.at("ensemble");
        std::string method = to_string(cfg.method), pooling = cfg.per_hour ? "per-hour" : "pooled";
        r.read(e, "method", method, "ensemble");
        r.read(e, "pooling", pooling, "ensemble");
        r.read(e, "clip_simplex", cfg.clip_simplex, "ensemble");
        r.read(e, "selection_threshold", cfg.selection_threshold, "ensemble");
        try {
            cfg.method = parse_method(method);
        } catch (const ValidationError& err) {
            r.errors.push_back(std::string("ensemble.method: ") + err.what());
        }
        if (pooling == "pooled") cfg.per_hour = false;
        else if (pooling == "per-hour") cfg.per_hour = true;
        else r.errors.push_back("ensemble.pooling: '" + pooling + "' is not pooled|per-hour");
    }

    if (root.contains("robustness")) {
        const json& b = root.at("robustness");
        r.read(b, "enabled", cfg.robustness_enabled, "robustness");
        r.read(b, "n", cfg.robustness_n, "robustness");
        r.read(b, "seed", cfg.robustness_seed, "robustness");
    }

    // Semantic checks, skipped where parsing already failed.
    auto path_ok = [&](const std::string& p, const char* key) {
        if (!p.empty() && !std::filesystem::exists(p))
            r.errors.push_back(std::string(key) + ": path '" + p + "' does not exist");
    };
    path_ok(cfg.prices_path, "data.prices");
    path_ok(cfg.volumes_path, "data.volumes");
    path_ok(cfg.features_path, "data.features");
    for (const auto& p : cfg.external_forecast_paths) path_ok(p, "data.external_forecasts");

    if (windows_ok) {
        if (cfg.train.end < cfg.train.start)
            r.errors.push_back("windows.train: end precedes start");
        if (cfg.test.end < cfg.test.start)
            r.errors.push_back("windows.test: end precedes start");
        if (!(cfg.train.end < cfg.test.start))
            r.errors.push_back("windows: train must end before test begins");
    }
    if (cfg.k_max < 1) r.errors.push_back("drivers.k_max: must be at least 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
        r.errors.push_back("drivers.alpha: must lie in (0, 1]");
    for (int p : cfg.mstd_periods)
        if (p < 2) r.errors.push_back("drivers.mstd_periods: periods must be at least 2");
    if (cfg.l_min < 1) r.errors.push_back("pca.l_min: must be at least 1");
    if (cfg.l_max != 0 && cfg.l_max < cfg.l_min)
        r.errors.push_back("pca.l_max: smaller than l_min");
    if (cfg.l_step < 1) r.errors.push_back("pca.l_step: must be at least 1");
    if (cfg.varx_p_max < 0 || cfg.varx_q_max < 0)
        r.errors.push_back("models.varx: negative order bound");
    if (cfg.varx_p_max == 0 && cfg.varx_q_max == 0)
        r.errors.push_back("models.varx: p_max and q_max cannot both be 0");
    if (cfg.lookback < 1) r.errors.push_back("models.reduced_linear.lookback: must be positive");
    if (!(cfg.selection_threshold > 0.0 && cfg.selection_threshold < 1.0))
        r.errors.push_back("ensemble.selection_threshold: must lie in (0, 1)");
    if (cfg.robustness_n < 1) r.errors.push_back("robustness.n: must be at least 1");

    errors = std::move(r.errors);
    return cfg;
}

inline RunConfig validate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config: JSON parse failure in '" + path + "': " + e.what());
    }
    std::vector<std::string> errors;
    RunConfig cfg = parse_config(root, errors);
    if (!errors.empty()) {
        std::string msg = "config '" + path + "' invalid:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ValidationError(msg);
    }
    return cfg;
}

}  // namespace epf::pipeline
