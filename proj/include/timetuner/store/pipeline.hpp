#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "timetuner/core/dataset.hpp"
#include "timetuner/core/representation.hpp"
#include "timetuner/explainer/metrics.hpp"
#include "timetuner/explainer/shapley.hpp"
#include "timetuner/forecaster/training.hpp"
#include "timetuner/stats/stats.hpp"
#include "timetuner/store/persistence.hpp"

namespace timetuner::store {

struct PipelineOptions {
    core::TransformConfig transform;
    forecaster::ModelConfig model;
    std::size_t shap_segments = 12; // time segments for univariate attribution
    std::size_t jobs = 1;
};

struct Progress {
    std::size_t index = 0;
    std::size_t total = 0;
    std::string id;
    std::string status; // "started" | "ok" | "failed"
    std::string message;
    double seconds = 0.0;
};

using ProgressCallback = std::function<void(const Progress&)>;

inline DatasetInfo dataset_info(const core::TimeSeriesDataset& ds) {
    DatasetInfo d;
    d.name = ds.name;
    d.frequency = ds.frequency;
    d.target = ds.target_id;
    for (const auto& v : ds.variables) d.variables.push_back({v.id, v.display_name, v.unit});
    for (const auto& t : ds.timestamps) d.time_labels.push_back(t.label);
    return d;
}

/// Target series seen at the representation's sampling stride.
inline std::vector<double> strided_target(const core::Representation& rep) {
    std::vector<double> out;
    const auto& x = rep.series[rep.target_index];
    for (std::size_t i = 0; i < x.size(); i += rep.skip) out.push_back(x[i]);
    return out;
}

/// Transform -> stats -> train -> predict -> explain for one representation.
/// Errors propagate to the caller, which records them.
inline RepresentationRecord run_representation(const core::Representation& rep, const std::vector<std::string>& ids,
                                               const PipelineOptions& opt) {
    RepresentationRecord r;
    r.id = rep.id;
    r.smoothing = rep.smoothing;
    r.skip = rep.skip;
    const auto& cfg = opt.transform;
    const std::size_t k = rep.series.size();
    const std::size_t dT = cfg.horizon;

    const auto xs = strided_target(rep);
    try {
        r.acf = stats::acf_summary(xs);
    } catch (const Error&) {
        r.acf.reset(); // constant or too short: no periodicity score
    }
    if (xs.size() >= 20) {
        try {
            r.adf = stats::adf_test(xs);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularRegression && e.code() != ErrorCode::SeriesTooShort) throw;
        }
    }

    const auto split = core::prepare_split(rep, cfg);
    r.n_windows = split.all.size();
    r.n_train = split.train_size;
    r.scaler_min = split.scaler.min;
    r.scaler_max = split.scaler.max;

    auto [model, result] =
        forecaster::train(forecaster::init_model(opt.model, cfg.window_length, k), split.train(), split.test(), opt.model);
    r.epoch_losses = result.epoch_losses;
    r.train_rmse_normalized = result.train_rmse;
    r.val_rmse_normalized = result.val_rmse;
    r.model_parameters.assign(model.parameters().begin(), model.parameters().end());

    const std::size_t tgt = rep.target_index;
    const double range = split.scaler.range(tgt);
    const double lo = split.scaler.min[tgt];
    const auto y = forecaster::predict_matrix(model, std::span<const core::SlidingWindow>(split.all));
    r.predictions.shape = {r.n_windows, dT};
    r.predictions.data.resize(r.n_windows * dT);
    double train_sq = 0.0, val_sq = 0.0;
    for (std::size_t i = 0; i < r.n_windows; ++i) {
        const auto& w = rep.windows[i];
        std::vector<double> pred(dT);
        double sq = 0.0;
        for (std::size_t j = 0; j < dT; ++j) {
            pred[j] = y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * range + lo;
            const double d = pred[j] - w.target[j];
            sq += d * d;
        }
        std::copy(pred.begin(), pred.end(), r.predictions.data.begin() + static_cast<std::ptrdiff_t>(i * dT));
        (i < r.n_train ? train_sq : val_sq) += sq;
        WindowRecord rec;
        rec.window = i;
        rec.start = w.start;
        rec.rmse = std::sqrt(sq / static_cast<double>(dT));
        rec.corr = explainer::window_correlation(pred, w.target);
        r.windows.push_back(rec);
    }
    r.train_error = std::sqrt(train_sq / static_cast<double>(r.n_train * dT));
    r.val_error = std::sqrt(val_sq / static_cast<double>((r.n_windows - r.n_train) * dT));

    const auto background = explainer::mean_input(split.train());
    const auto grouping = k > 1 ? explainer::group_by_variable(cfg.window_length, ids)
                                : explainer::group_by_time(cfg.window_length, k, opt.shap_segments);
    explainer::check_feature_count(grouping);
    const explainer::OutputScale scale{range, lo};
    const std::size_t F = grouping.size();
    r.feature_labels = grouping.labels;
    r.attributions.shape = {r.n_windows, F};
    r.attributions.data.resize(r.n_windows * F);
    std::vector<explainer::Attribution> attributions;
    attributions.reserve(r.n_windows);
    for (std::size_t i = 0; i < r.n_windows; ++i) {
        auto a = explainer::shap_values(model, scale, i, split.all[i].input, background, grouping);
        std::copy(a.phi.begin(), a.phi.end(), r.attributions.data.begin() + static_cast<std::ptrdiff_t>(i * F));
        r.windows[i].shap = explainer::window_shap_scalar(a);
        r.shap_base = a.base;
        attributions.push_back(std::move(a));
    }
    if (k > 1) r.importance = explainer::variable_importance(attributions, ids);

    for (const auto& w : r.windows)
        if (!std::isfinite(w.rmse) || !std::isfinite(w.shap) || (w.corr && !std::isfinite(*w.corr)))
            throw Error(ErrorCode::NonFiniteActivation, "non-finite window metric");
    return r;
}

namespace detail {

inline void finish_shared(RunStore& s) {
    std::vector<double> corr, shap, err;
    std::map<std::string, std::pair<double, std::size_t>> imp;
    for (const auto& r : s.representations) {
        if (!r.ok()) continue;
        for (const auto& w : r.windows) {
            if (w.corr) corr.push_back(*w.corr);
            shap.push_back(w.shap);
            err.push_back(w.rmse);
        }
        for (const auto& v : r.importance) {
            imp[v.variable_id].first += v.importance;
            ++imp[v.variable_id].second;
        }
    }
    if (!err.empty()) {
        if (corr.empty()) corr.push_back(0.0); // edges are fixed for correlation
        s.vsup_corr = visprep::build_vsup(corr, err, visprep::ValueMetric::Corr);
        s.vsup_shap = visprep::build_vsup(shap, err, visprep::ValueMetric::Shap);
    }
    s.importance.clear();
    for (const auto& [id, acc] : imp) s.importance.push_back({id, acc.first / static_cast<double>(acc.second)});
    std::sort(s.importance.begin(), s.importance.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.variable_id < b.variable_id;
    });
}

} // namespace detail

/// Runs every representation of the sweep. Per-representation failures are
/// recorded in the store; configuration and dataset errors throw.
inline RunStore build_store(const core::TimeSeriesDataset& ds, PipelineOptions opt,
                            const ProgressCallback& progress = {}) {
    core::validate(ds);
    opt.transform.validate();
    opt.model.horizon = static_cast<int>(opt.transform.horizon);
    opt.model.validate(opt.transform.window_length, ds.variable_count());
    if (opt.shap_segments < 1) throw Error(ErrorCode::InvalidConfig, "shap segments must be >= 1");

    RunStore s;
    s.dataset = dataset_info(ds);
    s.transform = opt.transform;
    s.model = opt.model;
    s.shap_segments = opt.shap_segments;
    const std::size_t target = ds.target_index();
    const auto ids = s.dataset.variable_ids();

    struct Job {
        core::SmoothingSpec spec;
        std::size_t skip;
        const SeriesEntry* series; // null when the smoothing failed
        std::string smoothing_error;
    };
    std::vector<Job> jobs;
    s.series.reserve(opt.transform.smoothing.size());
    for (const auto& spec : opt.transform.smoothing) {
        const SeriesEntry* entry = nullptr;
        std::string err;
        try {
            s.series.push_back({spec, core::smooth_all(ds, spec)});
            entry = &s.series.back();
        } catch (const Error& e) {
            err = e.what();
        }
        for (auto skip : opt.transform.skips) jobs.push_back({spec, skip, entry, err});
    }
    for (std::size_t i = 0; i < jobs.size(); ++i)
        for (std::size_t j = i + 1; j < jobs.size(); ++j)
            if (core::representation_id(jobs[i].spec, jobs[i].skip) == core::representation_id(jobs[j].spec, jobs[j].skip))
                throw Error(ErrorCode::InvalidConfig,
                            "duplicate representation " + core::representation_id(jobs[i].spec, jobs[i].skip));

    s.representations.resize(jobs.size());
    std::mutex mu;
    auto report = [&](const Progress& p) {
        if (!progress) return;
        std::lock_guard lock(mu);
        progress(p);
    };
    auto run_one = [&](std::size_t i) {
        const auto& job = jobs[i];
        const auto id = core::representation_id(job.spec, job.skip);
        report({i, jobs.size(), id, "started", {}, 0.0});
        const auto t0 = std::chrono::steady_clock::now();
        RepresentationRecord r;
        if (!job.series) {
            r.status = "failed";
            r.error = job.smoothing_error;
        } else {
            try {
                const auto rep =
                    core::make_representation(job.series->values, job.spec, job.skip, target, opt.transform);
                r = run_representation(rep, ids, opt);
            } catch (const std::exception& e) {
                r = RepresentationRecord{};
                r.status = "failed";
                r.error = e.what();
            }
        }
        r.id = id;
        r.smoothing = job.spec;
        r.skip = job.skip;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report({i, jobs.size(), id, r.status, r.error, secs});
        s.representations[i] = std::move(r);
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(opt.jobs, jobs.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) run_one(i);
            });
        for (auto& t : pool) t.join();
    }
    detail::finish_shared(s);
    return s;
}

/// Loads the dataset, runs the sweep and writes the store to `out_dir`.
inline RunStore run_pipeline(const std::string& dataset_path, const std::string& target, const PipelineOptions& opt,
                             const fs::path& out_dir, const ProgressCallback& progress = {}) {
    const auto ds = core::load_dataset(dataset_path, target);
    RunStore s = build_store(ds, opt, progress);
    save_store(s, out_dir);
    return s;
}

} // namespace timetuner::store
