#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "epf/core/error.hpp"
#include "epf/core/rng.hpp"
#include "epf/panel/types.hpp"

namespace epf::robustness {

struct ResampleEntry {
    Date target;
    Date source;
    int source_year = 0;  // ISO week-year of the source day
};

struct ResamplePlan {
    std::vector<ResampleEntry> entries;
    std::uint64_t seed = 0;

    void check() const {
        for (const auto& e : entries) {
            if (e.target.weekday() != e.source.weekday())
                throw NumericalError("resample plan: weekday mismatch at " + e.target.str());
            auto tw = e.target.iso_week();
            auto sw = e.source.iso_week();
            bool same_week = sw.week == tw.week || (tw.week == 53 && sw.week == 52);
            if (!same_week)
                throw NumericalError("resample plan: week mismatch at " + e.target.str());
            if (sw.year >= tw.year)
                throw NumericalError("resample plan: source year not prior at " + e.target.str());
            if (e.source_year != sw.year)
                throw NumericalError("resample plan: recorded source year wrong at " + e.target.str());
        }
    }
};

struct ResampledDataset {
    PricePanel prices;
    FeatureMatrix features;
    ResamplePlan plan;
};

namespace detail {

struct SlotKey {
    int week = 0;
    int weekday = 0;
    auto operator<=>(const SlotKey&) const = default;
};

// Admissible source days per (iso week, weekday), grouped once over history.
inline std::map<SlotKey, std::vector<Date>> slot_pools(const std::vector<Date>& history) {
    std::map<SlotKey, std::vector<Date>> pools;
    for (Date d : history) {
        auto w = d.iso_week();
        pools[{w.week, d.weekday()}].push_back(d);
    }
    return pools;
}

inline std::vector<Date> admissible(const std::map<SlotKey, std::vector<Date>>& pools, Date target) {
    auto tw = target.iso_week();
    auto collect = [&](int week) {
        std::vector<Date> out;
        auto it = pools.find({week, target.weekday()});
        if (it == pools.end()) return out;
        for (Date d : it->second)
            if (d.iso_week().year < tw.year) out.push_back(d);
        return out;
    };
    std::vector<Date> pool = collect(tw.week);
    if (pool.empty() && tw.week == 53) pool = collect(52);
    return pool;
}

}  // namespace detail

// Synthetic datasets built by swapping each evaluation day for a uniformly
// drawn historical day of the same ISO week and weekday from a prior year.
// Price and feature rows travel together, so their coupling is preserved.
// Rows outside the target window stay historical.
inline std::vector<ResampledDataset> resample_synthetic(const PricePanel& prices,
                                                        const FeatureMatrix& x, DateWindow target,
                                                        int n_datasets, std::uint64_t seed) {
    prices.check();
    x.check();
    target.check();
    if (n_datasets < 1) throw ValidationError("resample: need at least one dataset");
    if (prices.dates != x.dates)
        throw DataError("resample: price and feature dates differ");
    if (prices.row_of(target.start) < 0 || prices.row_of(target.end) < 0)
        throw DataError("resample: target window not covered by history");

    auto pools = detail::slot_pools(prices.dates);

    // Fixed slot pools per target day, shared across datasets.
    std::vector<std::vector<Date>> day_pools;
    for (Date d = target.start; d <= target.end; d = d + 1) {
        auto pool = detail::admissible(pools, d);
        if (pool.empty()) {
            auto w = d.iso_week();
            throw DataError("resample: no prior-year candidate for " + d.str() + " (iso week " +
                            std::to_string(w.week) + ", weekday " + std::to_string(d.weekday()) + ")");
        }
        day_pools.push_back(std::move(pool));
    }

    std::vector<ResampledDataset> out;
    out.reserve(static_cast<std::size_t>(n_datasets));
    for (int k = 0; k < n_datasets; ++k) {
        Rng rng(derive_seed(seed, "resample-dataset", static_cast<std::uint64_t>(k)));
        ResampledDataset ds;
        ds.prices = prices;
        ds.features = x;
        ds.plan.seed = seed;
        for (std::size_t i = 0; i < day_pools.size(); ++i) {
            Date t = target.start + static_cast<int>(i);
            const auto& pool = day_pools[i];
            Date s = pool[rng.uniform_int(pool.size())];
            ds.prices.values.row(ds.prices.row_of(t)) = prices.values.row(prices.row_of(s));
            ds.features.values.row(ds.features.row_of(t)) = x.values.row(x.row_of(s));
            ds.plan.entries.push_back({t, s, s.iso_week().year});
        }
        ds.plan.check();
        out.push_back(std::move(ds));
    }
    return out;
}

}  // namespace epf::robustness
