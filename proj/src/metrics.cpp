#include "vizsolve/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace vizsolve {
namespace {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mtx;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mtx);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

InstanceRecord run_instance(const Instance& inst, const ProbField& field, Method method,
                            int top_k, double epsilon) {
    if (field.size != inst.solution.size)
        throw std::invalid_argument("probability field does not match instance size");

    SolveOutcome out;
    switch (method) {
        case Method::baseline:
            out = solve_baseline(field);
            break;
        case Method::hybrid1:
            out = solve_hybrid1(to_cost_field(field, epsilon), top_k);
            break;
        case Method::hybrid2:
            out = solve_hybrid2(to_cost_field(field, epsilon), top_k);
            break;
    }

    InstanceRecord rec;
    rec.infeasible = out.infeasible();
    rec.givens_total = static_cast<int>(field.entries.size());
    rec.cells_total = inst.solution.size.cell_count();
    rec.objective = out.objective;
    rec.nogoods_used = out.nogoods_used;
    rec.time_ms = out.stats.wall_time_ms;
    if (out.solution) {
        const Grid& sol = *out.solution;
        for (const auto& [cell, probs] : field.entries)
            if (sol.cells[cell] == inst.solution.cells[cell]) ++rec.givens_correct;
        for (int i = 0; i < rec.cells_total; ++i)
            if (sol.cells[i] == inst.solution.cells[i]) ++rec.cells_correct;
        rec.grid_correct = (sol == inst.solution);
    }
    return rec;
}

void aggregate(MetricsReport& report) {
    std::int64_t givens_correct = 0, givens_total = 0;
    std::int64_t cells_correct = 0, cells_total = 0;
    int grids_correct = 0, failures = 0;
    std::vector<double> times;
    for (const auto& rec : report.records) {
        givens_correct += rec.givens_correct;
        givens_total += rec.givens_total;
        cells_correct += rec.cells_correct;
        cells_total += rec.cells_total;
        if (rec.grid_correct) ++grids_correct;
        if (rec.infeasible) ++failures;
        times.push_back(rec.time_ms);
    }
    const double n = static_cast<double>(report.records.size());
    report.img_accuracy = givens_total ? static_cast<double>(givens_correct) / givens_total : 0.0;
    report.cell_accuracy = cells_total ? static_cast<double>(cells_correct) / cells_total : 0.0;
    report.grid_accuracy = n ? grids_correct / n : 0.0;
    report.failure_rate = n ? failures / n : 0.0;
    if (!times.empty()) {
        double sum = 0.0;
        for (double t : times) sum += t;
        report.mean_time_ms = sum / times.size();
        std::sort(times.begin(), times.end());
        const std::size_t mid = times.size() / 2;
        report.median_time_ms = times.size() % 2 ? times[mid]
                                                 : 0.5 * (times[mid - 1] + times[mid]);
    }
}

}  // namespace

Method method_from_string(const std::string& name) {
    if (name == "baseline") return Method::baseline;
    if (name == "hybrid1") return Method::hybrid1;
    if (name == "hybrid2") return Method::hybrid2;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_to_string(Method m) {
    switch (m) {
        case Method::baseline: return "baseline";
        case Method::hybrid1: return "hybrid1";
        case Method::hybrid2: return "hybrid2";
    }
    return "?";
}

MetricsReport evaluate(const std::vector<Instance>& dataset,
                       const std::vector<ProbField>& fields, Method method, int top_k,
                       const EvalOptions& opts) {
    if (dataset.size() != fields.size())
        throw std::invalid_argument("dataset and field counts differ");
    if (dataset.empty()) throw std::invalid_argument("empty dataset");

    MetricsReport report;
    report.method = method;
    report.top_k = top_k;
    report.records.resize(dataset.size());
    parallel_for(static_cast<int>(dataset.size()), opts.threads, [&](int i) {
        report.records[i] = run_instance(dataset[i], fields[i], method, top_k, opts.epsilon);
        report.records[i].index = i;
    });
    aggregate(report);
    return report;
}

std::vector<double> rank_distribution(const MetricsReport& report,
                                      const std::vector<Instance>& dataset,
                                      const std::vector<ProbField>& fields) {
    const int side = dataset.empty() ? 0 : dataset.front().solution.size.side();
    std::vector<double> hist(side, 0.0);
    std::int64_t total = 0;
    for (const auto& rec : report.records) {
        if (!rec.grid_correct) continue;
        const Instance& inst = dataset[rec.index];
        const ProbField& field = fields[rec.index];
        for (const auto& [cell, probs] : field.entries) {
            const int chosen = inst.solution.cells[cell];
            const double p = probs[chosen - 1];
            int rank = 0;
            for (int d = 1; d <= side; ++d) {
                if (probs[d - 1] > p || (probs[d - 1] == p && d < chosen)) ++rank;
            }
            hist[rank] += 1.0;
            ++total;
        }
    }
    if (total)
        for (double& h : hist) h /= static_cast<double>(total);
    return hist;
}

std::vector<MetricsReport> topk_sweep(const std::vector<Instance>& dataset,
                                      const std::vector<ProbField>& fields, Method method,
                                      const EvalOptions& opts) {
    const int side = dataset.front().solution.size.side();
    std::vector<MetricsReport> out;
    out.reserve(side);
    for (int k = 1; k <= side; ++k) out.push_back(evaluate(dataset, fields, method, k, opts));
    return out;
}

std::vector<StrengthEntry> classifier_strength_sweep(
    const std::vector<Instance>& dataset, const std::vector<double>& accuracy_targets,
    double spread, double corruption, std::uint64_t seed, const EvalOptions& opts) {
    if (dataset.empty()) throw std::invalid_argument("empty dataset");
    const BoxSize size = dataset.front().solution.size;
    std::vector<StrengthEntry> out;
    for (std::size_t t = 0; t < accuracy_targets.size(); ++t) {
        StrengthEntry entry;
        entry.target_accuracy = accuracy_targets[t];
        entry.params = tune_to_accuracy(accuracy_targets[t], size, spread, corruption,
                                        seed + t);
        entry.measured_accuracy = measure_accuracy(size, entry.params);
        std::vector<ProbField> fields;
        fields.reserve(dataset.size());
        for (std::size_t i = 0; i < dataset.size(); ++i)
            fields.push_back(simulate_field(dataset[i].solution, dataset[i].puzzle,
                                            entry.params, i));
        entry.baseline = evaluate(dataset, fields, Method::baseline, 1, opts);
        entry.hybrid1 = evaluate(dataset, fields, Method::hybrid1, size.side(), opts);
        entry.hybrid2 = evaluate(dataset, fields, Method::hybrid2, size.side(), opts);
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<CalibrationEntry> calibration_compare(const LogitField& validation,
                                                  const std::vector<Instance>& dataset,
                                                  const std::vector<ProbField>& fields,
                                                  Method method, const EvalOptions& opts) {
    std::vector<CalibrationEntry> out;

    CalibrationEntry uncal;
    uncal.kind = "uncalibrated";
    uncal.validation_nll =
        nll(validation, ScalingParams::identity(ScalingKind::temperature,
                                                validation.num_classes));
    uncal.per_k = topk_sweep(dataset, fields, method, opts);
    out.push_back(std::move(uncal));

    const std::pair<ScalingKind, const char*> kinds[] = {
        {ScalingKind::temperature, "temperature"},
        {ScalingKind::vector, "vector"},
        {ScalingKind::matrix, "matrix"},
    };
    for (const auto& [kind, name] : kinds) {
        const FitResult fit = fit_scaling(validation, kind);
        CalibrationEntry entry;
        entry.kind = name;
        entry.validation_nll = fit.final_nll;
        std::vector<ProbField> calibrated;
        calibrated.reserve(fields.size());
        for (const auto& f : fields) calibrated.push_back(calibrate_field(f, fit.params));
        entry.per_k = topk_sweep(dataset, calibrated, method, opts);
        out.push_back(std::move(entry));
    }
    return out;
}

namespace {

std::string num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

nlohmann::json report_to_json(const MetricsReport& report, bool include_timing) {
    nlohmann::json j;
    j["method"] = method_to_string(report.method);
    j["top_k"] = report.top_k;
    j["img_accuracy"] = report.img_accuracy;
    j["cell_accuracy"] = report.cell_accuracy;
    j["grid_accuracy"] = report.grid_accuracy;
    j["failure_rate"] = report.failure_rate;
    if (include_timing) {
        j["mean_time_ms"] = report.mean_time_ms;
        j["median_time_ms"] = report.median_time_ms;
    }
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : report.records) {
        nlohmann::json r;
        r["index"] = rec.index;
        r["infeasible"] = rec.infeasible;
        r["grid_correct"] = rec.grid_correct;
        r["givens_total"] = rec.givens_total;
        r["givens_correct"] = rec.givens_correct;
        r["cells_total"] = rec.cells_total;
        r["cells_correct"] = rec.cells_correct;
        r["objective"] = rec.objective ? nlohmann::json(*rec.objective) : nlohmann::json(nullptr);
        r["nogoods"] = rec.nogoods_used;
        if (include_timing) r["time_ms"] = rec.time_ms;
        records.push_back(std::move(r));
    }
    j["instances"] = std::move(records);
    return j;
}

std::string report_to_csv(const MetricsReport& report, bool include_timing) {
    std::string out;
    out += "metric,value\n";
    out += "method," + method_to_string(report.method) + "\n";
    out += "top_k," + std::to_string(report.top_k) + "\n";
    out += "img_accuracy," + num(report.img_accuracy) + "\n";
    out += "cell_accuracy," + num(report.cell_accuracy) + "\n";
    out += "grid_accuracy," + num(report.grid_accuracy) + "\n";
    out += "failure_rate," + num(report.failure_rate) + "\n";
    if (include_timing) {
        out += "mean_time_ms," + num(report.mean_time_ms) + "\n";
        out += "median_time_ms," + num(report.median_time_ms) + "\n";
    }
    out += "\n";
    out += "index,infeasible,grid_correct,givens_total,givens_correct,cells_total,"
           "cells_correct,objective,nogoods";
    if (include_timing) out += ",time_ms";
    out += "\n";
    for (const auto& rec : report.records) {
        out += std::to_string(rec.index);
        out += rec.infeasible ? ",true" : ",false";
        out += rec.grid_correct ? ",true" : ",false";
        out += "," + std::to_string(rec.givens_total);
        out += "," + std::to_string(rec.givens_correct);
        out += "," + std::to_string(rec.cells_total);
        out += "," + std::to_string(rec.cells_correct);
        out += "," + (rec.objective ? num(*rec.objective) : std::string());
        out += "," + std::to_string(rec.nogoods_used);
        if (include_timing) out += "," + num(rec.time_ms);
        out += "\n";
    }
    return out;
}

}  // namespace vizsolve
