#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epf/core/error.hpp"
#include "epf/core/rng.hpp"

namespace epf::pipeline {

inline constexpr const char* kLibraryVersion = "0.1.0";

inline std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("manifest: cannot open '" + path + "' for hashing");
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

class StageTimer {
public:
    void start(const std::string& stage) {
        current_ = stage;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        if (current_.empty()) return;
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0_)
                      .count();
        timings_.emplace_back(current_, static_cast<double>(ms) / 1000.0);
        current_.clear();
    }
    const std::vector<std::pair<std::string, double>>& timings() const { return timings_; }

private:
    std::string current_;
    std::chrono::steady_clock::time_point t0_;
    std::vector<std::pair<std::string, double>> timings_;
};

// Record of one pipeline run: the config snapshot, content hashes of inputs
// and outputs, seeds and versions. Output hashes are the determinism
// contract; timings are informational only.
struct RunManifest {
    nlohmann::ordered_json config;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> input_hashes;
    std::map<std::string, std::string> output_hashes;
    std::vector<std::pair<std::string, double>> stage_seconds;

    void add_input(const std::string& path) {
        input_hashes[std::filesystem::path(path).filename().string()] = hash_file(path);
    }
    void add_output(const std::string& path, const std::string& root) {
        std::string key = std::filesystem::relative(path, root).generic_string();
        output_hashes[key] = hash_file(path);
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["library_version"] = kLibraryVersion;
        j["seed"] = seed;
        j["config"] = config;
        j["inputs"] = input_hashes;
        j["outputs"] = output_hashes;
        nlohmann::ordered_json t = nlohmann::ordered_json::array();
        for (const auto& [stage, sec] : stage_seconds) {
            nlohmann::ordered_json e;
            e["stage"] = stage;
            e["seconds"] = sec;
            t.push_back(e);
        }
        j["timings"] = t;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("manifest: cannot write '" + path + "'");
        out << to_json().dump(2) << "\n";
    }
};

}  // namespace epf::pipeline
