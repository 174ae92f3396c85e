#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "epf/panel/types.hpp"

namespace epf {

// Volume-weighted average daily price.
inline DailySeries vwap(const PricePanel& prices, const VolumePanel& volumes) {
    if (prices.dates != volumes.dates) throw DataError("vwap: price/volume dates differ");
    DailySeries out;
    out.dates = prices.dates;
    out.name = "vwap";
    out.values.resize(prices.days());
    for (Eigen::Index i = 0; i < prices.days(); ++i) {
        double v = volumes.values.row(i).sum();
        if (v <= 0.0)
            throw DataError("vwap: zero total volume at " + prices.dates[static_cast<std::size_t>(i)].str());
        out.values(i) = prices.values.row(i).dot(volumes.values.row(i)) / v;
    }
    return out;
}

inline DailySeries daily_mean(const PricePanel& prices, const std::string& name = "daily_mean") {
    DailySeries out;
    out.dates = prices.dates;
    out.name = name;
    out.values = prices.values.rowwise().mean();
    return out;
}

// Lag-k difference along days; first `lag` rows are dropped.
template <typename PanelT>
PanelT weekly_difference(const PanelT& panel, int lag = 7) {
    if (panel.days() <= lag)
        throw DataError("weekly_difference: need more than " + std::to_string(lag) + " days");
    PanelT out = panel;
    out.dates.assign(panel.dates.begin() + lag, panel.dates.end());
    out.values = panel.values.bottomRows(panel.days() - lag) - panel.values.topRows(panel.days() - lag);
    return out;
}

inline DailySeries weekly_difference(const DailySeries& s, int lag = 7) {
    if (s.size() <= lag) throw DataError("weekly_difference: series too short");
    DailySeries out;
    out.dates.assign(s.dates.begin() + lag, s.dates.end());
    out.values = s.values.tail(s.size() - lag) - s.values.head(s.size() - lag);
    out.name = s.name;
    return out;
}

// Inverse of weekly_difference given the dropped leading rows.
template <typename PanelT>
PanelT weekly_reintegrate(const PanelT& diff, const PanelT& head, int lag = 7) {
    if (head.days() != lag) throw DataError("weekly_reintegrate: head must hold exactly the dropped rows");
    if (head.dates.back() + 1 != diff.dates.front())
        throw DataError("weekly_reintegrate: head/diff dates not adjacent");
    PanelT out;
    out.dates = head.dates;
    out.dates.insert(out.dates.end(), diff.dates.begin(), diff.dates.end());
    out.values.resize(lag + diff.days(), diff.values.cols());
    out.values.topRows(lag) = head.values;
    for (Eigen::Index i = 0; i < diff.days(); ++i)
        out.values.row(lag + i) = out.values.row(i) + diff.values.row(i);
    return out;
}

// Removes the grand per-hour profile, then each calendar month's scalar level.
inline PricePanel deseasonalize_hourly_monthly(const PricePanel& prices) {
    if (prices.days() == 0) throw DataError("deseasonalize: empty panel");
    PricePanel out = prices;
    Eigen::RowVectorXd hour_means = prices.values.colwise().mean();
    out.values = prices.values.rowwise() - hour_means;

    std::map<int, std::pair<double, int>> month_acc;  // year*12+month -> (sum, count)
    for (Eigen::Index i = 0; i < out.days(); ++i) {
        auto [y, m, d] = prices.dates[static_cast<std::size_t>(i)].ymd();
        auto& acc = month_acc[y * 12 + m];
        acc.first += out.values.row(i).sum();
        acc.second += kHours;
    }
    for (Eigen::Index i = 0; i < out.days(); ++i) {
        auto [y, m, d] = prices.dates[static_cast<std::size_t>(i)].ymd();
        const auto& acc = month_acc[y * 12 + m];
        out.values.row(i).array() -= acc.first / acc.second;
    }
    return out;
}

struct LaggedCorrelation {
    int lag;
    Eigen::MatrixXd values;                        // (i, j): corr of hour i at d-lag with hour j at d
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> defined;  // false where a column had zero variance
};

inline LaggedCorrelation lagged_correlation(const PricePanel& prices, int lag) {
    if (lag < 0) throw ValidationError("lagged_correlation: negative lag");
    Eigen::Index n = prices.days() - lag;
    if (n < 3) throw DataError("lagged_correlation: too few overlapping days");
    LaggedCorrelation out;
    out.lag = lag;
    out.values.setConstant(kHours, kHours, std::numeric_limits<double>::quiet_NaN());
    out.defined.setConstant(kHours, kHours, true);

    Eigen::MatrixXd past = prices.values.topRows(n);
    Eigen::MatrixXd cur = prices.values.bottomRows(n);
    Eigen::RowVectorXd mp = past.colwise().mean(), mc = cur.colwise().mean();
    past.rowwise() -= mp;
    cur.rowwise() -= mc;
    Eigen::VectorXd sp = past.colwise().squaredNorm(), sc = cur.colwise().squaredNorm();
    for (int i = 0; i < kHours; ++i) {
        for (int j = 0; j < kHours; ++j) {
            if (sp(i) <= 0.0 || sc(j) <= 0.0) {
                out.defined(i, j) = false;
                continue;
            }
            out.values(i, j) = past.col(i).dot(cur.col(j)) / std::sqrt(sp(i) * sc(j));
        }
    }
    return out;
}

struct HourStats {
    double mean, stddev, min, q25, median, q75, max;
};

namespace detail {

// Linear interpolation between order statistics (the usual "type 7" rule).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw DataError("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    double pos = q * (static_cast<double>(sorted.size()) - 1.0);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace detail

inline double sample_std(const Eigen::VectorXd& v) {
    if (v.size() < 2) throw DataError("sample_std: need at least 2 observations");
    double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / (static_cast<double>(v.size()) - 1.0));
}

inline std::vector<HourStats> descriptive_stats(const PricePanel& prices) {
    if (prices.days() < 2) throw DataError("descriptive_stats: need at least 2 days");
    std::vector<HourStats> out(kHours);
    for (int h = 0; h < kHours; ++h) {
        Eigen::VectorXd col = prices.values.col(h);
        std::vector<double> sorted(col.data(), col.data() + col.size());
        std::sort(sorted.begin(), sorted.end());
        out[static_cast<std::size_t>(h)] = {col.mean(),
                                            sample_std(col),
                                            sorted.front(),
                                            detail::quantile_sorted(sorted, 0.25),
                                            detail::quantile_sorted(sorted, 0.50),
                                            detail::quantile_sorted(sorted, 0.75),
                                            sorted.back()};
    }
    return out;
}

}  // namespace epf
