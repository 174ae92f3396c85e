#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "epf/panel/io.hpp"
#include "epf/pipeline/config.hpp"
#include "epf/pipeline/manifest.hpp"
#include "epf/pipeline/run.hpp"
#include "epf/sim/market.hpp"

using namespace epf;
using namespace epf::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "epf-pipeline-test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// minimal well-formed config document pointing at real files
json base_config(const fs::path& dir) {
    json c;
    c["data"]["prices"] = (dir / "prices.csv").string();
    c["data"]["volumes"] = (dir / "volumes.csv").string();
    c["data"]["features"] = (dir / "features.csv").string();
    c["windows"]["train"]["start"] = "2021-01-01";
    c["windows"]["train"]["end"] = "2022-01-31";
    c["windows"]["test"]["start"] = "2022-02-01";
    c["windows"]["test"]["end"] = "2022-03-01";
    c["seed"] = 11;
    return c;
}

struct MarketFiles {
    fs::path dir;
    sim::SyntheticMarket mkt;
};

MarketFiles write_market(const std::string& name, int n_days = 430) {
    MarketFiles out;
    out.dir = fresh_dir(name);
    sim::MarketOptions opt;
    opt.n_days = n_days;
    opt.seed = 3;
    out.mkt = sim::simulate_market(opt);
    save_hourly_panel(out.mkt.prices, (out.dir / "prices.csv").string());
    save_hourly_panel(out.mkt.volumes, (out.dir / "volumes.csv").string());
    save_features(out.mkt.features, (out.dir / "features.csv").string());
    return out;
}

}  // namespace

TEST_CASE("config fields reach the run configuration", "[pipeline]") {
    auto dir = fresh_dir("config-ok");
    write_text(dir / "prices.csv", "stub");
    write_text(dir / "volumes.csv", "stub");
    write_text(dir / "features.csv", "stub");

    json c = base_config(dir);
    c["drivers"]["k_max"] = 5;
    c["drivers"]["alpha"] = 0.1;
    c["drivers"]["day_d_features"] = {"import_capacity_no"};
    c["drivers"]["sarima"]["p_max"] = 1;
    c["drivers"]["sarima"]["Q_max"] = 0;
    c["pca"]["standardize"] = true;
    c["pca"]["l_max"] = 12;
    c["models"]["varx"]["p_max"] = 2;
    c["models"]["varx"]["q_max"] = 1;
    c["models"]["reduced_linear"]["lookback"] = 15;
    c["ensemble"]["method"] = "cls";
    c["ensemble"]["pooling"] = "per-hour";
    c["ensemble"]["clip_simplex"] = true;
    c["robustness"]["enabled"] = true;
    c["robustness"]["n"] = 9;

    std::vector<std::string> errors;
    RunConfig cfg = parse_config(c, errors);
    CAPTURE(errors);
    CHECK(errors.empty());
    CHECK(cfg.seed == 11);
    CHECK(cfg.train.start == Date::from_ymd(2021, 1, 1));
    CHECK(cfg.test.end == Date::from_ymd(2022, 3, 1));
    CHECK(cfg.k_max == 5);
    CHECK(cfg.alpha == Catch::Approx(0.1));
    CHECK(cfg.day_d_features == std::vector<std::string>{"import_capacity_no"});
    CHECK(cfg.sarima_grid.p_max == 1);
    CHECK(cfg.sarima_grid.Q_max == 0);
    CHECK(cfg.pca_standardize);
    CHECK(cfg.l_max == 12);
    CHECK(cfg.varx_p_max == 2);
    CHECK(cfg.varx_q_max == 1);
    CHECK(cfg.lookback == 15);
    CHECK(cfg.method == CombineMethod::cls);
    CHECK(cfg.per_hour);
    CHECK(cfg.clip_simplex);
    CHECK(cfg.robustness_enabled);
    CHECK(cfg.robustness_n == 9);
    CHECK(cfg.raw == c);
}

TEST_CASE("config problems are collected, not thrown one by one", "[pipeline]") {
    auto dir = fresh_dir("config-bad");
    write_text(dir / "prices.csv", "stub");
    write_text(dir / "volumes.csv", "stub");
    write_text(dir / "features.csv", "stub");

    json c = base_config(dir);
    c["windows"]["train"]["end"] = "2020-06-01";  // precedes start
    c["ensemble"]["method"] = "blend";
    c["drivers"]["alpha"] = 2.0;
    c["pca"]["l_min"] = 5;
    c["pca"]["l_max"] = 2;
    c["models"]["varx"]["p_max"] = 0;
    c["models"]["varx"]["q_max"] = 0;
    c["robustness"]["n"] = 0;
    c["data"]["features"] = (dir / "missing.csv").string();

    std::vector<std::string> errors;
    parse_config(c, errors);
    auto has = [&](const std::string& needle) {
        for (const auto& e : errors)
            if (e.find(needle) != std::string::npos) return true;
        return false;
    };
    CHECK(errors.size() >= 7);
    CHECK(has("windows.train: end precedes start"));
    CHECK(has("'blend' is not one of ss|ss-pca|simav|cls|irmse"));
    CHECK(has("drivers.alpha"));
    CHECK(has("pca.l_max: smaller than l_min"));
    CHECK(has("models.varx: p_max and q_max cannot both be 0"));
    CHECK(has("robustness.n"));
    CHECK(has("does not exist"));
}

TEST_CASE("config files that cannot be parsed fail loudly", "[pipeline]") {
    auto dir = fresh_dir("config-files");
    CHECK_THROWS_AS(validate_config((dir / "absent.json").string()), ValidationError);

    write_text(dir / "broken.json", "{ not json");
    CHECK_THROWS_WITH(validate_config((dir / "broken.json").string()),
                      Catch::Matchers::ContainsSubstring("JSON parse failure"));

    write_text(dir / "empty-object.json", "{}");
    CHECK_THROWS_WITH(validate_config((dir / "empty-object.json").string()),
                      Catch::Matchers::ContainsSubstring("data: missing section"));
}

TEST_CASE("file hashing is content-addressed", "[pipeline]") {
    auto dir = fresh_dir("hashing");
    write_text(dir / "a.txt", "day-ahead");
    write_text(dir / "b.txt", "day-ahead");
    write_text(dir / "c.txt", "day-ahead!");
    auto ha = hash_file((dir / "a.txt").string());
    CHECK(ha.size() == 16);
    CHECK(ha == hash_file((dir / "b.txt").string()));
    CHECK(ha != hash_file((dir / "c.txt").string()));
    CHECK_THROWS_AS(hash_file((dir / "none.txt").string()), DataError);

    RunManifest m;
    m.seed = 4;
    m.add_input((dir / "a.txt").string());
    m.add_output((dir / "c.txt").string(), dir.string());
    json j = m.to_json();
    CHECK(j["library_version"] == kLibraryVersion);
    CHECK(j["seed"] == 4);
    CHECK(j["inputs"]["a.txt"] == ha);
    CHECK(j["outputs"].contains("c.txt"));
}

TEST_CASE("pipeline rejects inconsistent inputs", "[pipeline][slow]") {
    MarketFiles m = write_market("ingest-bad");

    // windows outside the data
    json c = base_config(m.dir);
    c["windows"]["test"]["start"] = "2031-01-01";
    c["windows"]["test"]["end"] = "2031-02-01";
    std::vector<std::string> errors;
    RunConfig cfg = parse_config(c, errors);
    REQUIRE(errors.empty());
    auto out = fresh_dir("ingest-bad-out");
    CHECK_THROWS_WITH(run_pipeline(cfg, out.string()),
                      Catch::Matchers::ContainsSubstring("does not cover"));

    // shorter feature file: dates no longer line up
    sim::MarketOptions opt;
    opt.n_days = 420;
    opt.seed = 3;
    auto short_mkt = sim::simulate_market(opt);
    save_features(short_mkt.features, (m.dir / "features.csv").string());
    json c2 = base_config(m.dir);
    std::vector<std::string> errors2;
    RunConfig cfg2 = parse_config(c2, errors2);
    REQUIRE(errors2.empty());
    CHECK_THROWS_WITH(run_pipeline(cfg2, out.string()),
                      Catch::Matchers::ContainsSubstring("different dates"));
}

TEST_CASE("two runs with one seed byte-match and repairs are reported", "[pipeline][slow]") {
    MarketFiles m = write_market("determinism");

    // plant two clock-change artifacts in the prices file, inside the
    // training window
    {
        std::ifstream in(m.dir / "prices.csv");
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        in.close();
        auto edit = [&](std::size_t row, int field, const std::string& value) {
            std::vector<std::string> cells;
            std::stringstream ss(lines[row]);
            std::string cell;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            cells[static_cast<std::size_t>(field)] = value;
            std::string joined;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) joined += ',';
                joined += cells[i];
            }
            lines[row] = joined;
        };
        edit(50, 3, "");          // missing hour, interpolated
        edit(80, 4, "10|20");     // doubled hour, averaged
        std::ofstream out(m.dir / "prices.csv");
        for (const auto& l : lines) out << l << "\n";
    }

    json c = base_config(m.dir);
    c["drivers"]["sarima"]["p_max"] = 1;
    c["drivers"]["sarima"]["q_max"] = 1;
    c["drivers"]["sarima"]["Q_max"] = 0;
    c["models"]["varx"]["p_max"] = 1;
    c["models"]["varx"]["q_max"] = 1;
    c["pca"]["l_min"] = 1;
    c["pca"]["l_max"] = 3;
    c["pca"]["l_step"] = 2;
    c["ensemble"]["method"] = "ss-pca";
    c["robustness"]["enabled"] = true;
    c["robustness"]["n"] = 2;

    std::vector<std::string> errors;
    RunConfig cfg = parse_config(c, errors);
    CAPTURE(errors);
    REQUIRE(errors.empty());

    auto out1 = fresh_dir("determinism-out1");
    auto out2 = fresh_dir("determinism-out2");
    RunResult r1 = run_pipeline(cfg, out1.string());
    RunResult r2 = run_pipeline(cfg, out2.string());

    // identical inputs and seed: every artifact hashes the same
    CHECK(r1.manifest.output_hashes == r2.manifest.output_hashes);
    CHECK(r1.manifest.input_hashes == r2.manifest.input_hashes);
    CHECK_FALSE(r1.manifest.output_hashes.empty());

    // the repair log survived into the ingest stage
    REQUIRE(r1.repairs.entries.size() >= 2);
    std::string repairs = read_text(out1 / "ingest" / "repairs.csv");
    CHECK(repairs.find("clock-change-interpolate") != std::string::npos);
    CHECK(repairs.find("clock-change-average") != std::string::npos);
    CHECK(repairs.find("10|20") != std::string::npos);

    // reports and artifacts exist
    REQUIRE_FALSE(r1.test_reports.empty());
    CHECK(r1.test_reports.front().model_id == "combined-ss-pca");
    CHECK(r1.combined.l_star.has_value());
    REQUIRE(r1.robustness_summary.has_value());
    CHECK(r1.robustness_summary->n_ok == 2);
    CHECK(fs::exists(out1 / "manifest.json"));
    CHECK(fs::exists(out1 / "combine" / "weights.json"));
    CHECK(fs::exists(out1 / "evaluate" / "report.csv"));
    CHECK(fs::exists(out1 / "robustness" / "table.csv"));
    CHECK(fs::exists(out1 / "robustness" / "datasets.csv"));

    std::vector<std::string> stages;
    for (const auto& [stage, sec] : r1.manifest.stage_seconds) {
        stages.push_back(stage);
        CHECK(sec >= 0.0);
    }
    for (const char* want : {"ingest", "characterize", "drivers", "reduce", "fit", "combine",
                             "evaluate", "robustness"})
        CHECK(std::find(stages.begin(), stages.end(), want) != stages.end());
}
