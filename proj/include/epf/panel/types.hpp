#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "epf/core/date.hpp"
#include "epf/core/error.hpp"

namespace epf {

constexpr int kHours = 24;

inline void check_dates_contiguous(const std::vector<Date>& dates, const char* what) {
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (dates[i] - dates[i - 1] != 1)
            throw DataError(std::string(what) + ": dates not contiguous at " + dates[i - 1].str() +
                            " -> " + dates[i].str());
}

// Daily values for a single quantity.
struct DailySeries {
    std::vector<Date> dates;
    Eigen::VectorXd values;
    std::string name;

    Eigen::Index size() const { return values.size(); }

    void check() const {
        if (static_cast<Eigen::Index>(dates.size()) != values.size())
            throw DataError("series '" + name + "': dates/values length mismatch");
        check_dates_contiguous(dates, name.c_str());
        if (!values.allFinite()) throw DataError("series '" + name + "': non-finite value");
    }
};

// One row per day, one column per delivery hour.
struct HourlyPanel {
    std::vector<Date> dates;
    Eigen::MatrixXd values;  // rows align with dates, kHours columns

    Eigen::Index days() const { return values.rows(); }

    int row_of(Date d) const {
        if (dates.empty() || d < dates.front() || d > dates.back()) return -1;
        return static_cast<int>(d - dates.front());
    }

    void check(const char* what) const {
        if (static_cast<Eigen::Index>(dates.size()) != values.rows())
            throw DataError(std::string(what) + ": dates/rows mismatch");
        if (values.cols() != kHours)
            throw DataError(std::string(what) + ": expected " + std::to_string(kHours) + " hour columns");
        check_dates_contiguous(dates, what);
        if (!values.allFinite()) throw DataError(std::string(what) + ": non-finite entry");
    }

    void check() const { check("hourly panel"); }
};

struct PricePanel : HourlyPanel {
    void check() const { HourlyPanel::check("price panel"); }
};

struct VolumePanel : HourlyPanel {
    void check() const {
        HourlyPanel::check("volume panel");
        if ((values.array() < 0.0).any()) throw DataError("volume panel: negative volume");
        for (Eigen::Index i = 0; i < values.rows(); ++i)
            if (values.row(i).maxCoeff() <= 0.0)
                throw DataError("volume panel: day " + dates[static_cast<std::size_t>(i)].str() +
                                " has no positive volume");
    }
};

// Daily exogenous features, one named column each.
struct FeatureMatrix {
    std::vector<Date> dates;
    std::vector<std::string> names;
    Eigen::MatrixXd values;

    Eigen::Index days() const { return values.rows(); }
    Eigen::Index n_features() const { return values.cols(); }

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    int row_of(Date d) const {
        if (dates.empty() || d < dates.front() || d > dates.back()) return -1;
        return static_cast<int>(d - dates.front());
    }

    DailySeries series(int col) const {
        DailySeries s;
        s.dates = dates;
        s.values = values.col(col);
        s.name = names[static_cast<std::size_t>(col)];
        return s;
    }

    void check() const {
        if (static_cast<Eigen::Index>(dates.size()) != values.rows())
            throw DataError("feature matrix: dates/rows mismatch");
        if (static_cast<Eigen::Index>(names.size()) != values.cols())
            throw DataError("feature matrix: names/columns mismatch");
        check_dates_contiguous(dates, "feature matrix");
        std::set<std::string> seen;
        for (const auto& n : names) {
            if (n.empty()) throw DataError("feature matrix: empty column name");
            if (!seen.insert(n).second) throw DataError("feature matrix: duplicate column '" + n + "'");
        }
        if (!values.allFinite()) throw DataError("feature matrix: non-finite entry");
    }
};

struct DateWindow {
    Date start, end;  // inclusive

    bool contains(Date d) const { return d >= start && d <= end; }
    int length() const { return end - start + 1; }

    void check() const {
        if (end < start)
            throw ValidationError("window end " + end.str() + " precedes start " + start.str());
    }
};

template <typename PanelT>
PanelT slice(const PanelT& panel, DateWindow w) {
    w.check();
    int i0 = panel.row_of(w.start), i1 = panel.row_of(w.end);
    if (i0 < 0 || i1 < 0)
        throw DataError("window " + w.start.str() + ".." + w.end.str() + " not covered by data (" +
                        (panel.dates.empty() ? std::string("empty") :
                         panel.dates.front().str() + ".." + panel.dates.back().str()) + ")");
    PanelT out = panel;
    out.dates.assign(panel.dates.begin() + i0, panel.dates.begin() + i1 + 1);
    out.values = panel.values.middleRows(i0, i1 - i0 + 1);
    return out;
}

}  // namespace epf
