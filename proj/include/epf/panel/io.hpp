#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epf/core/csv.hpp"
#include "epf/panel/types.hpp"

namespace epf {

struct RepairEntry {
    Date date;
    int hour;  // -1 for whole-day repairs
    std::string action;
    std::string detail;
};

struct RepairLog {
    std::vector<RepairEntry> entries;

    void add(Date d, int hour, std::string action, std::string detail) {
        entries.push_back({d, hour, std::move(action), std::move(detail)});
    }
};

struct PanelSchema {
    std::string date_column = "date";
    std::string hour_prefix = "h";
};

namespace detail {

inline std::string hour_name(const PanelSchema& s, int h) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d", h);
    return s.hour_prefix + buf;
}

// Handles the clock-change rows: an empty cell is the skipped hour of a
// 23-hour day (filled by linear interpolation), "a|b" is the doubled hour of
// a 25-hour day (averaged).
inline double parse_hour_cell(const std::string& cell, const std::string& path, Date d, int h,
                              std::vector<std::optional<double>>& pending, RepairLog& log) {
    if (cell.empty()) {
        pending[static_cast<std::size_t>(h)] = std::nullopt;
        return 0.0;  // placeholder, resolved after the row is read
    }
    auto bar = cell.find('|');
    double v;
    if (bar != std::string::npos) {
        double a, b;
        if (!csv::parse_double(cell.substr(0, bar), a) || !csv::parse_double(cell.substr(bar + 1), b))
            throw DataError(path + ": bad dual-value cell '" + cell + "' at " + d.str());
        v = 0.5 * (a + b);
        log.add(d, h, "clock-change-average", cell);
    } else if (!csv::parse_double(cell, v)) {
        throw DataError(path + ": unparseable value '" + cell + "' at " + d.str() + " hour " +
                        std::to_string(h));
    }
    pending[static_cast<std::size_t>(h)] = v;
    return v;
}

inline void resolve_missing_hours(std::vector<std::optional<double>>& row, const std::string& path,
                                  Date d, RepairLog& log) {
    int missing = 0;
    for (const auto& c : row) missing += !c.has_value();
    if (missing == 0) return;
    if (missing > 1)
        throw DataError(path + ": " + std::to_string(missing) + " empty cells at " + d.str() +
                        " (only a single clock-change hour is repairable)");
    for (int h = 0; h < kHours; ++h) {
        if (row[static_cast<std::size_t>(h)]) continue;
        double v;
        if (h == 0)
            v = *row[1];
        else if (h == kHours - 1)
            v = *row[kHours - 2];
        else
            v = 0.5 * (*row[static_cast<std::size_t>(h - 1)] + *row[static_cast<std::size_t>(h + 1)]);
        row[static_cast<std::size_t>(h)] = v;
        log.add(d, h, "clock-change-interpolate", "");
    }
}

template <typename PanelT>
PanelT assemble_panel(std::map<Date, Eigen::RowVectorXd>& rows, const std::string& path,
                      RepairLog& log) {
    if (rows.empty()) throw DataError(path + ": no data rows");
    Date first = rows.begin()->first, last = rows.rbegin()->first;
    PanelT panel;
    panel.values.resize(last - first + 1, kHours);
    panel.dates.reserve(static_cast<std::size_t>(last - first + 1));
    for (Date d = first; d <= last; ++d) {
        auto it = rows.find(d);
        if (it == rows.end()) {
            Date src = d - 7;
            if (src < first)
                throw DataError(path + ": missing day " + d.str() +
                                " within the first week; no same-weekday history to copy");
            panel.values.row(d - first) = panel.values.row(src - first);
            log.add(d, -1, "missing-day-weekly-copy", src.str());
        } else {
            panel.values.row(d - first) = it->second;
        }
        panel.dates.push_back(d);
    }
    return panel;
}

}  // namespace detail

template <typename PanelT>
PanelT load_hourly_panel(const std::string& path, RepairLog& log, const PanelSchema& schema = {}) {
    auto table = csv::read_file(path);
    int date_col = table.column(schema.date_column);
    if (date_col < 0) throw DataError(path + ": missing column '" + schema.date_column + "'");
    std::vector<int> hour_cols(kHours);
    for (int h = 0; h < kHours; ++h) {
        hour_cols[static_cast<std::size_t>(h)] = table.column(detail::hour_name(schema, h));
        if (hour_cols[static_cast<std::size_t>(h)] < 0)
            throw DataError(path + ": missing column '" + detail::hour_name(schema, h) + "'");
    }

    std::map<Date, Eigen::RowVectorXd> rows;
    for (const auto& r : table.rows) {
        Date d = Date::parse(r[static_cast<std::size_t>(date_col)]);
        if (rows.count(d)) throw DataError(path + ": duplicate date " + d.str());
        std::vector<std::optional<double>> cells(kHours);
        for (int h = 0; h < kHours; ++h)
            detail::parse_hour_cell(r[static_cast<std::size_t>(hour_cols[static_cast<std::size_t>(h)])],
                                    path, d, h, cells, log);
        detail::resolve_missing_hours(cells, path, d, log);
        Eigen::RowVectorXd row(kHours);
        for (int h = 0; h < kHours; ++h) row(h) = *cells[static_cast<std::size_t>(h)];
        rows[d] = row;
    }
    auto panel = detail::assemble_panel<PanelT>(rows, path, log);
    panel.check();
    return panel;
}

inline PricePanel load_price_panel(const std::string& path, RepairLog& log,
                                   const PanelSchema& schema = {}) {
    return load_hourly_panel<PricePanel>(path, log, schema);
}

inline VolumePanel load_volume_panel(const std::string& path, RepairLog& log,
                                     const PanelSchema& schema = {}) {
    return load_hourly_panel<VolumePanel>(path, log, schema);
}

inline FeatureMatrix load_features(const std::string& path, RepairLog& log,
                                   const std::string& date_column = "date") {
    auto table = csv::read_file(path);
    int date_col = table.column(date_column);
    if (date_col < 0) throw DataError(path + ": missing column '" + date_column + "'");

    FeatureMatrix fm;
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (static_cast<int>(i) != date_col) fm.names.push_back(table.header[i]);

    std::map<Date, Eigen::RowVectorXd> rows;
    for (const auto& r : table.rows) {
        Date d = Date::parse(r[static_cast<std::size_t>(date_col)]);
        if (rows.count(d)) throw DataError(path + ": duplicate date " + d.str());
        Eigen::RowVectorXd row(static_cast<Eigen::Index>(fm.names.size()));
        Eigen::Index j = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (static_cast<int>(i) == date_col) continue;
            double v;
            if (!csv::parse_double(r[i], v))
                throw DataError(path + ": unparseable value '" + r[i] + "' at " + d.str() +
                                " column '" + table.header[i] + "'");
            row(j++) = v;
        }
        rows[d] = row;
    }
    if (rows.empty()) throw DataError(path + ": no data rows");
    Date first = rows.begin()->first, last = rows.rbegin()->first;
    fm.values.resize(last - first + 1, static_cast<Eigen::Index>(fm.names.size()));
    for (Date d = first; d <= last; ++d) {
        auto it = rows.find(d);
        if (it == rows.end()) {
            Date src = d - 7;
            if (src < first)
                throw DataError(path + ": missing day " + d.str() +
                                " within the first week; no same-weekday history to copy");
            fm.values.row(d - first) = fm.values.row(src - first);
            log.add(d, -1, "missing-day-weekly-copy", src.str());
        } else {
            fm.values.row(d - first) = it->second;
        }
        fm.dates.push_back(d);
    }
    fm.check();
    return fm;
}

template <typename PanelT>
void save_hourly_panel(const PanelT& panel, const std::string& path, const PanelSchema& schema = {}) {
    csv::Writer w(path);
    std::vector<std::string> header{schema.date_column};
    for (int h = 0; h < kHours; ++h) header.push_back(detail::hour_name(schema, h));
    w.row(header);
    for (Eigen::Index i = 0; i < panel.days(); ++i) {
        std::vector<std::string> row{panel.dates[static_cast<std::size_t>(i)].str()};
        for (int h = 0; h < kHours; ++h) row.push_back(csv::format_double(panel.values(i, h)));
        w.row(row);
    }
    w.close();
}

inline void save_features(const FeatureMatrix& fm, const std::string& path) {
    csv::Writer w(path);
    std::vector<std::string> header{"date"};
    for (const auto& n : fm.names) header.push_back(n);
    w.row(header);
    for (Eigen::Index i = 0; i < fm.days(); ++i) {
        std::vector<std::string> row{fm.dates[static_cast<std::size_t>(i)].str()};
        for (Eigen::Index j = 0; j < fm.values.cols(); ++j)
            row.push_back(csv::format_double(fm.values(i, j)));
        w.row(row);
    }
    w.close();
}

inline void save_series(const DailySeries& s, const std::string& path) {
    csv::Writer w(path);
    w.row({"date", s.name.empty() ? "value" : s.name});
    for (Eigen::Index i = 0; i < s.size(); ++i)
        w.row({s.dates[static_cast<std::size_t>(i)].str(), csv::format_double(s.values(i))});
    w.close();
}

}  // namespace epf
