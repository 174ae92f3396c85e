#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epf/panel/io.hpp"
#include "epf/panel/types.hpp"

namespace epf::models {

// Hourly day-ahead forecasts from one model.
struct ForecastSet {
    std::string model_id;
    std::vector<Date> dates;
    Eigen::MatrixXd values;  // rows align with dates, kHours columns
    bool leakage_warning = false;

    Eigen::Index days() const { return values.rows(); }

    int row_of(Date d) const {
        if (dates.empty() || d < dates.front() || d > dates.back()) return -1;
        return static_cast<int>(d - dates.front());
    }

    void check() const {
        if (model_id.empty()) throw DataError("forecast set: empty model id");
        if (static_cast<Eigen::Index>(dates.size()) != values.rows())
            throw DataError("forecast set '" + model_id + "': dates/rows mismatch");
        if (values.cols() != kHours)
            throw DataError("forecast set '" + model_id + "': expected " + std::to_string(kHours) +
                            " hour columns");
        check_dates_contiguous(dates, model_id.c_str());
        if (!values.allFinite())
            throw DataError("forecast set '" + model_id + "': non-finite forecast");
    }
};

inline ForecastSet slice(const ForecastSet& fs, DateWindow w) {
    w.check();
    int i0 = fs.row_of(w.start), i1 = fs.row_of(w.end);
    if (i0 < 0 || i1 < 0)
        throw DataError("forecast set '" + fs.model_id + "' does not cover " + w.start.str() + ".." +
                        w.end.str());
    ForecastSet out = fs;
    out.dates.assign(fs.dates.begin() + i0, fs.dates.begin() + i1 + 1);
    out.values = fs.values.middleRows(i0, i1 - i0 + 1);
    return out;
}

// Reads forecasts/<model_id>.csv; the id is the file stem. If a training
// window end is supplied, overlapping dates raise the leakage flag: forecasts
// covering the fitting period were produced with access to those outcomes.
inline ForecastSet load_external_forecasts(const std::string& path,
                                           std::optional<Date> train_end = std::nullopt) {
    RepairLog log;
    auto panel = load_hourly_panel<HourlyPanel>(path, log);
    ForecastSet fs;
    fs.model_id = std::filesystem::path(path).stem().string();
    fs.dates = std::move(panel.dates);
    fs.values = std::move(panel.values);
    if (train_end && !fs.dates.empty() && fs.dates.front() <= *train_end) fs.leakage_warning = true;
    fs.check();
    return fs;
}

inline void save_forecasts(const ForecastSet& fs, const std::string& path) {
    HourlyPanel p;
    p.dates = fs.dates;
    p.values = fs.values;
    save_hourly_panel(p, path);
}

// Keeps candidate ids unique within one combination run.
class ForecastRegistry {
public:
    void add(ForecastSet fs) {
        fs.check();
        if (!ids_.insert(fs.model_id).second)
            throw DataError("duplicate forecast model id '" + fs.model_id + "'");
        sets_.push_back(std::move(fs));
    }

    const std::vector<ForecastSet>& sets() const { return sets_; }

private:
    std::set<std::string> ids_;
    std::vector<ForecastSet> sets_;
};

}  // namespace epf::models
