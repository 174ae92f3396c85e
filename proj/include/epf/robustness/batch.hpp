#pragma once

#include <atomic>
#include <functional>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "epf/core/error.hpp"
#include "epf/ensemble/types.hpp"
#include "epf/robustness/resample.hpp"

namespace epf::robustness {

using ensemble::EvalReport;

struct BatchItem {
    std::size_t dataset = 0;
    bool ok = false;
    std::string error;
    std::vector<EvalReport> reports;
};

struct BatchSummary {
    std::vector<std::string> model_ids;
    Eigen::MatrixXd mean_per_hour;   // one row per model
    Eigen::VectorXd mean_average;    // across-dataset mean of the average RMSE
    Eigen::VectorXd std_average;     // across-dataset dispersion of the same
    std::vector<BatchItem> items;
    int n_ok = 0;
};

// Runs the supplied evaluation on every dataset (concurrently; the callback
// must be safe to call from several threads) and averages the reports.
// Failing datasets are recorded and excluded; only a fully failing batch is
// an error.
inline BatchSummary batch_evaluate(
    const std::vector<ResampledDataset>& datasets,
    const std::function<std::vector<EvalReport>(const ResampledDataset&, std::size_t)>& run,
    unsigned n_threads = 0) {
    if (datasets.empty()) throw ValidationError("batch: no datasets");
    if (!run) throw ValidationError("batch: empty callback");
    if (n_threads == 0) {
        n_threads = std::thread::hardware_concurrency();
        if (n_threads == 0) n_threads = 1;
    }

    std::vector<BatchItem> items(datasets.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= datasets.size()) return;
            BatchItem& item = items[i];
            item.dataset = i;
            try {
                item.reports = run(datasets[i], i);
                if (item.reports.empty()) throw DataError("batch: callback returned no reports");
                item.ok = true;
            } catch (const std::exception& e) {
                item.error = e.what();
            }
        }
    };
    std::vector<std::future<void>> futures;
    unsigned spawn = std::min<unsigned>(n_threads, static_cast<unsigned>(datasets.size()));
    for (unsigned t = 1; t < spawn; ++t)
        futures.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : futures) f.get();

    BatchSummary out;
    out.items = std::move(items);
    for (const auto& item : out.items) {
        if (!item.ok) continue;
        if (out.model_ids.empty())
            for (const auto& r : item.reports) out.model_ids.push_back(r.model_id);
        else {
            if (item.reports.size() != out.model_ids.size())
                throw DataError("batch: dataset " + std::to_string(item.dataset) +
                                " reported a different model count");
            for (std::size_t m = 0; m < out.model_ids.size(); ++m)
                if (item.reports[m].model_id != out.model_ids[m])
                    throw DataError("batch: dataset " + std::to_string(item.dataset) +
                                    " reported models in a different order");
        }
        ++out.n_ok;
    }
    if (out.n_ok == 0) {
        std::string first;
        for (const auto& item : out.items)
            if (!item.error.empty()) { first = item.error; break; }
        throw NumericalError("batch: every dataset failed (first error: " + first + ")");
    }

    Eigen::Index k = static_cast<Eigen::Index>(out.model_ids.size());
    out.mean_per_hour = Eigen::MatrixXd::Zero(k, kHours);
    out.mean_average = Eigen::VectorXd::Zero(k);
    out.std_average = Eigen::VectorXd::Zero(k);

    for (const auto& item : out.items) {
        if (!item.ok) continue;
        for (Eigen::Index m = 0; m < k; ++m) {
            out.mean_per_hour.row(m) +=
                item.reports[static_cast<std::size_t>(m)].per_hour_rmse.transpose();
            out.mean_average(m) += item.reports[static_cast<std::size_t>(m)].average;
        }
    }
    out.mean_per_hour /= static_cast<double>(out.n_ok);
    out.mean_average /= static_cast<double>(out.n_ok);

    if (out.n_ok > 1) {
        for (const auto& item : out.items) {
            if (!item.ok) continue;
            for (Eigen::Index m = 0; m < k; ++m) {
                double d = item.reports[static_cast<std::size_t>(m)].average - out.mean_average(m);
                out.std_average(m) += d * d;
            }
        }
        out.std_average = (out.std_average / static_cast<double>(out.n_ok - 1)).cwiseSqrt();
    }
    return out;
}

}  // namespace epf::robustness
