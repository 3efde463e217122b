#ifndef VIZSOLVE_METRICS_HPP
#define VIZSOLVE_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vizsolve/calibration.hpp"
#include "vizsolve/io.hpp"
#include "vizsolve/joint.hpp"
#include "vizsolve/simulator.hpp"

namespace vizsolve {

enum class Method { baseline, hybrid1, hybrid2 };

Method method_from_string(const std::string& name);
std::string method_to_string(Method m);

struct InstanceRecord {
    int index = 0;
    bool infeasible = false;
    bool grid_correct = false;
    int givens_total = 0;
    int givens_correct = 0;  // 0 on infeasible instances
    int cells_total = 0;
    int cells_correct = 0;   // 0 on infeasible instances
    std::optional<double> objective;
    int nogoods_used = 0;
    double time_ms = 0.0;
};

struct MetricsReport {
    Method method = Method::baseline;
    int top_k = 0;
    double img_accuracy = 0.0;
    double cell_accuracy = 0.0;
    double grid_accuracy = 0.0;
    double failure_rate = 0.0;
    double mean_time_ms = 0.0;
    double median_time_ms = 0.0;
    std::vector<InstanceRecord> records;
};

struct EvalOptions {
    double epsilon = 1e-12;  // probability clamp for the cost field
    int threads = 0;         // 0 = hardware concurrency
};

// Runs one pipeline over the dataset and aggregates the accuracy metrics.
// Infeasible instances contribute zero correct cells and zero correct
// given labels.
MetricsReport evaluate(const std::vector<Instance>& dataset,
                       const std::vector<ProbField>& fields, Method method, int top_k,
                       const EvalOptions& opts = {});

// Normalized histogram over probability ranks (0 = most probable digit)
// of the digits chosen in correctly solved instances.
std::vector<double> rank_distribution(const MetricsReport& report,
                                      const std::vector<Instance>& dataset,
                                      const std::vector<ProbField>& fields);

std::vector<MetricsReport> topk_sweep(const std::vector<Instance>& dataset,
                                      const std::vector<ProbField>& fields, Method method,
                                      const EvalOptions& opts = {});

struct StrengthEntry {
    double target_accuracy = 0.0;
    double measured_accuracy = 0.0;
    NoiseParams params;
    MetricsReport baseline;
    MetricsReport hybrid1;
    MetricsReport hybrid2;
};

std::vector<StrengthEntry> classifier_strength_sweep(
    const std::vector<Instance>& dataset, const std::vector<double>& accuracy_targets,
    double spread, double corruption, std::uint64_t seed, const EvalOptions& opts = {});

struct CalibrationEntry {
    std::string kind;  // "uncalibrated", "temperature", "vector", "matrix"
    double validation_nll = 0.0;
    std::vector<MetricsReport> per_k;  // top-k sweep with the chosen method
};

std::vector<CalibrationEntry> calibration_compare(const LogitField& validation,
                                                  const std::vector<Instance>& dataset,
                                                  const std::vector<ProbField>& fields,
                                                  Method method,
                                                  const EvalOptions& opts = {});

// Report emission. Timing fields are included only on request so that
// reports are byte-reproducible across runs.
nlohmann::json report_to_json(const MetricsReport& report, bool include_timing = false);
std::string report_to_csv(const MetricsReport& report, bool include_timing = false);

}  // namespace vizsolve

#endif
