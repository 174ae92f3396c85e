#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "epf/panel/io.hpp"
#include "epf/panel/transforms.hpp"
#include "epf/panel/types.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace epf;
namespace fs = std::filesystem;

namespace {

std::string temp_dir() {
    auto dir = fs::temp_directory_path() / "epf-panel-test";
    fs::create_directories(dir);
    return dir.string();
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

TEST_CASE("date arithmetic and ISO weeks", "[panel]") {
    Date d = Date::parse("2023-03-26");
    CHECK(d.str() == "2023-03-26");
    CHECK(d + 1 == Date::from_ymd(2023, 3, 27));
    CHECK(d - Date::from_ymd(2023, 3, 1) == 25);
    CHECK_THROWS_AS(Date::parse("2023-13-01"), ValidationError);
    CHECK_THROWS_AS(Date::parse("not-a-date"), ValidationError);

    // 2020 has an ISO week 53; 2021-01-01 falls into it.
    CHECK(Date::from_ymd(2021, 1, 1).iso_week().week == 53);
    CHECK(Date::from_ymd(2021, 1, 4).iso_week().week == 1);
}

TEST_CASE("panel load repairs clock-change rows", "[panel]") {
    std::string dir = temp_dir();
    std::string path = dir + "/prices_dst.csv";
    std::string header = "date";
    for (int h = 0; h < kHours; ++h) header += "," + std::string(h < 10 ? "h0" : "h") + std::to_string(h);
    std::string body = header + "\n";
    // three clean days, then a spring-forward day (empty h02) and a
    // fall-back day (dual cell at h02)
    for (int d = 0; d < 5; ++d) {
        body += "2023-03-2" + std::to_string(4 + d);
        for (int h = 0; h < kHours; ++h) {
            double v = 100.0 + d + h;
            if (d == 3 && h == 2)
                body += ",";
            else if (d == 4 && h == 2)
                body += ",40|60";
            else
                body += "," + std::to_string(v);
        }
        body += "\n";
    }
    write_text(path, body);

    RepairLog log;
    PricePanel p = load_price_panel(path, log);
    REQUIRE(p.days() == 5);
    // interpolated between h01 and h03 of the same day
    CHECK(p.values(3, 2) == Catch::Approx(0.5 * (104.0 + 106.0)));
    // dual cell averaged
    CHECK(p.values(4, 2) == Catch::Approx(50.0));
    REQUIRE(log.entries.size() == 2);
    CHECK(log.entries[0].action == "clock-change-interpolate");
    CHECK(log.entries[1].action == "clock-change-average");
    CHECK(log.entries[1].detail == "40|60");
}

TEST_CASE("panel load fills a missing day from the week before", "[panel]") {
    std::string dir = temp_dir();
    std::string path = dir + "/prices_gap.csv";
    std::string header = "date";
    for (int h = 0; h < kHours; ++h) header += "," + std::string(h < 10 ? "h0" : "h") + std::to_string(h);
    std::string body = header + "\n";
    Date start = Date::from_ymd(2023, 1, 2);
    for (int d = 0; d < 10; ++d) {
        if (d == 8) continue;  // drop one day in the second week
        body += (start + d).str();
        for (int h = 0; h < kHours; ++h) body += "," + std::to_string(10.0 * d + h);
        body += "\n";
    }
    write_text(path, body);

    RepairLog log;
    PricePanel p = load_price_panel(path, log);
    REQUIRE(p.days() == 10);
    CHECK(p.values.row(8) == p.values.row(1));
    REQUIRE(log.entries.size() == 1);
    CHECK(log.entries[0].action == "missing-day-weekly-copy");
    CHECK(log.entries[0].hour == -1);
    CHECK(log.entries[0].detail == (start + 1).str());
}

TEST_CASE("panel load rejects rows it cannot repair", "[panel]") {
    std::string dir = temp_dir();
    std::string header = "date";
    for (int h = 0; h < kHours; ++h) header += "," + std::string(h < 10 ? "h0" : "h") + std::to_string(h);

    std::string two_gaps = dir + "/two_gaps.csv";
    std::string body = header + "\n2023-01-01";
    for (int h = 0; h < kHours; ++h) body += (h == 3 || h == 9) ? "," : ",5.0";
    write_text(two_gaps, body + "\n");
    RepairLog log;
    CHECK_THROWS_AS(load_price_panel(two_gaps, log), DataError);

    std::string dup = dir + "/dup.csv";
    std::string row;
    for (int h = 0; h < kHours; ++h) row += ",1.0";
    write_text(dup, header + "\n2023-01-01" + row + "\n2023-01-01" + row + "\n");
    CHECK_THROWS_AS(load_price_panel(dup, log), DataError);
}

TEST_CASE("hourly panel round-trips through csv", "[panel]") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(35.0, 12.0);
    PricePanel p = builders::make_prices(Date::from_ymd(2022, 5, 1), 30,
                                         [&](int, int) { return gauss(rng); });
    std::string path = temp_dir() + "/roundtrip.csv";
    save_hourly_panel(p, path);
    RepairLog log;
    PricePanel q = load_price_panel(path, log);
    REQUIRE(q.days() == p.days());
    CHECK(log.entries.empty());
    CHECK((q.values - p.values).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(q.dates.front() == p.dates.front());
}

TEST_CASE("feature matrix round-trip and validation", "[panel]") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss;
    FeatureMatrix m = builders::make_features(Date::from_ymd(2022, 1, 1), 40, {"alpha", "beta"},
                                              [&](int, int) { return gauss(rng); });
    std::string path = temp_dir() + "/features.csv";
    save_features(m, path);
    RepairLog log;
    FeatureMatrix r = load_features(path, log);
    REQUIRE(r.names == m.names);
    CHECK((r.values - m.values).cwiseAbs().maxCoeff() < 1e-9);

    FeatureMatrix bad = m;
    bad.names[1] = "alpha";
    CHECK_THROWS_AS(bad.check(), DataError);
}

TEST_CASE("vwap weighs hours by traded volume", "[panel]") {
    Date start = Date::from_ymd(2023, 2, 1);
    PricePanel p = builders::make_prices(start, 3, [](int d, int h) { return d == 1 ? (h < 12 ? 10.0 : 30.0) : 20.0; });
    VolumePanel v = builders::flat_volumes(start, 3);
    // overweight the expensive half of day 1
    v.values.row(1).tail(12).array() = 3000.0;

    DailySeries s = vwap(p, v);
    CHECK(s.name == "vwap");
    CHECK(s.values(0) == Catch::Approx(20.0));
    CHECK(s.values(1) == Catch::Approx((12 * 1000.0 * 10.0 + 12 * 3000.0 * 30.0) / (12000.0 + 36000.0)));

    VolumePanel zero = v;
    zero.values.row(2).setZero();
    CHECK_THROWS_AS(vwap(p, zero), DataError);
}

TEST_CASE("descriptive statistics agree with a two-pass oracle", "[panel]") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> gauss(40.0, 15.0);
    PricePanel p = builders::make_prices(Date::from_ymd(2021, 1, 1), 200,
                                         [&](int, int) { return gauss(rng); });
    auto stats = descriptive_stats(p);
    REQUIRE(stats.size() == static_cast<std::size_t>(kHours));
    for (int h : {0, 11, 23}) {
        Eigen::VectorXd col = p.values.col(h);
        CHECK(stats[static_cast<std::size_t>(h)].mean == Catch::Approx(oracle::mean(col)).epsilon(1e-12));
        CHECK(stats[static_cast<std::size_t>(h)].stddev ==
              Catch::Approx(oracle::sample_std(col)).epsilon(1e-12));
        CHECK(stats[static_cast<std::size_t>(h)].min == Catch::Approx(col.minCoeff()));
        CHECK(stats[static_cast<std::size_t>(h)].max == Catch::Approx(col.maxCoeff()));
    }
}

TEST_CASE("weekly difference aligns dates and values", "[panel]") {
    DailySeries s;
    s.name = "toy";
    s.dates = builders::date_run(Date::from_ymd(2023, 1, 1), 20);
    s.values.resize(20);
    for (int i = 0; i < 20; ++i) s.values(i) = i * i;

    DailySeries d = weekly_difference(s);
    REQUIRE(d.size() == 13);
    CHECK(d.dates.front() == Date::from_ymd(2023, 1, 8));
    for (int i = 0; i < 13; ++i)
        CHECK(d.values(i) == Catch::Approx(s.values(i + 7) - s.values(i)));
}

TEST_CASE("window slicing respects coverage", "[panel]") {
    PricePanel p = builders::make_prices(Date::from_ymd(2023, 1, 1), 31,
                                         [](int d, int h) { return d + 0.1 * h; });
    DateWindow w{Date::from_ymd(2023, 1, 10), Date::from_ymd(2023, 1, 20)};
    PricePanel sub = slice(p, w);
    CHECK(sub.days() == 11);
    CHECK(sub.dates.front() == w.start);
    CHECK(sub.values(0, 0) == Catch::Approx(9.0));

    DateWindow outside{Date::from_ymd(2022, 12, 1), Date::from_ymd(2023, 1, 5)};
    CHECK_THROWS_AS(slice(p, outside), DataError);
    DateWindow backwards{Date::from_ymd(2023, 1, 20), Date::from_ymd(2023, 1, 10)};
    CHECK_THROWS_AS(slice(p, backwards), ValidationError);
}

TEST_CASE("sorted quantiles interpolate", "[panel]") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(detail::quantile_sorted(v, 0.5) == Catch::Approx(2.5));
    CHECK(detail::quantile_sorted(v, 0.25) == Catch::Approx(1.75));
    CHECK(detail::quantile_sorted(v, 0.0) == Catch::Approx(1.0));
    CHECK(detail::quantile_sorted(v, 1.0) == Catch::Approx(4.0));
}
