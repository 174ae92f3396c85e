#pragma once

#include <map>
#include <vector>

#include "epf/decomp/loess.hpp"
#include "epf/panel/types.hpp"

namespace epf::decomp {

struct MstdResult {
    DailySeries trend;
    std::map<int, DailySeries> seasonals;  // period -> component
    DailySeries remainder;
    std::vector<int> dropped_periods;      // periods skipped for lack of data
};

struct MstdOptions {
    int seasonal_window_cycles = 11;
    int trend_window = 0;  // 0: next odd integer >= 1.5 * max period
    int iterations = 2;
};

namespace detail {

// One seasonal component: loess over each cycle-subseries, a double moving
// average to strip leaked low-frequency content, then exact centering of each
// aligned cycle block so every complete cycle sums to zero. A subseries
// shorter than the smoothing window would let local fitting chase noise, so
// few-cycle components fall back to the periodic (per-phase mean) seasonal.
inline Eigen::VectorXd extract_seasonal(const Eigen::VectorXd& x, int period, int window_cycles) {
    Eigen::Index n = x.size();
    Eigen::VectorXd smoothed(n);
    for (int phase = 0; phase < period; ++phase) {
        Eigen::Index m = (n - phase + period - 1) / period;
        Eigen::VectorXd sub(m);
        for (Eigen::Index c = 0; c < m; ++c) sub(c) = x(phase + c * period);
        Eigen::VectorXd s;
        if (m < window_cycles)
            s = Eigen::VectorXd::Constant(m, sub.mean());
        else
            s = loess_smooth(sub, window_cycles);
        for (Eigen::Index c = 0; c < m; ++c) smoothed(phase + c * period) = s(c);
    }
    Eigen::VectorXd low = centered_ma(centered_ma(smoothed, period), period);
    Eigen::VectorXd seasonal = smoothed - low;
    for (Eigen::Index start = 0; start < n; start += period) {
        Eigen::Index len = std::min<Eigen::Index>(period, n - start);
        seasonal.segment(start, len).array() -= seasonal.segment(start, len).mean();
    }
    return seasonal;
}

}  // namespace detail

// Additive decomposition into a trend, one seasonal per period, and a
// remainder. Periods are processed in ascending order and refined over a
// second pass; components always sum exactly to the input.
inline MstdResult mstd(const DailySeries& series, std::vector<int> periods, MstdOptions opt = {}) {
    series.check();
    if (periods.empty()) throw ValidationError("mstd: no periods given");
    std::sort(periods.begin(), periods.end());
    for (std::size_t i = 1; i < periods.size(); ++i)
        if (periods[i] == periods[i - 1]) throw ValidationError("mstd: duplicate period");
    if (periods.front() < 2) throw ValidationError("mstd: periods must be at least 2");

    MstdResult res;
    std::vector<int> usable;
    for (int p : periods) {
        if (series.size() >= 2 * p)
            usable.push_back(p);
        else
            res.dropped_periods.push_back(p);
    }
    if (usable.empty())
        throw DataError("mstd: series length " + std::to_string(series.size()) +
                        " is below two cycles of every requested period");

    std::map<int, Eigen::VectorXd> seasonal;
    for (int p : usable) seasonal[p] = Eigen::VectorXd::Zero(series.size());

    Eigen::VectorXd deseason = series.values;
    for (int iter = 0; iter < opt.iterations; ++iter) {
        for (int p : usable) {
            deseason += seasonal[p];
            seasonal[p] = detail::extract_seasonal(deseason, p, opt.seasonal_window_cycles);
            deseason -= seasonal[p];
        }
    }

    int trend_window = opt.trend_window;
    if (trend_window <= 0) {
        trend_window = static_cast<int>(std::ceil(1.5 * usable.back()));
        if (trend_window % 2 == 0) ++trend_window;
    }
    trend_window = std::min<int>(trend_window, static_cast<int>(series.size()));
    Eigen::VectorXd trend = loess_smooth(deseason, trend_window);

    auto mk = [&](const Eigen::VectorXd& v, const std::string& name) {
        DailySeries s;
        s.dates = series.dates;
        s.values = v;
        s.name = name;
        return s;
    };
    res.trend = mk(trend, "trend");
    for (int p : usable) res.seasonals[p] = mk(seasonal[p], "seasonal_" + std::to_string(p));
    res.remainder = mk(deseason - trend, "remainder");
    return res;
}

}  // namespace epf::decomp
