#ifndef VIZSOLVE_CALIBRATION_HPP
#define VIZSOLVE_CALIBRATION_HPP

#include <string>
#include <vector>

#include "vizsolve/grid.hpp"

namespace vizsolve {

struct LogitRecord {
    std::string id;
    int label = 0;              // true class, 1..num_classes
    std::vector<double> logits;
};

struct LogitField {
    int num_classes = 0;
    std::vector<LogitRecord> records;
};

enum class ScalingKind { temperature, vector, matrix };

// Post-hoc probability calibration transform: a single temperature T,
// a diagonal scale w with bias b, or a full matrix W with bias b.
struct ScalingParams {
    ScalingKind kind = ScalingKind::temperature;
    double temperature = 1.0;
    std::vector<double> w;               // length C (vector kind)
    std::vector<std::vector<double>> W;  // C x C (matrix kind)
    std::vector<double> b;               // length C (vector and matrix kinds)

    static ScalingParams identity(ScalingKind kind, int num_classes);
};

// Numerically stable softmax (max-shifted).
std::vector<double> softmax(const std::vector<double>& logits);

// softmax of the transformed logits: z/T, w*z + b, or W z + b.
std::vector<double> apply_scaling(const std::vector<double>& logits,
                                  const ScalingParams& params);

// Mean per-record negative log likelihood of the true class after scaling.
double nll(const LogitField& logits, const ScalingParams& params);

// Gradient of nll with respect to the parameters of `params`, flattened in
// the same order as FitOptions documents. Exposed for verification.
std::vector<double> nll_gradient(const LogitField& logits, const ScalingParams& params);

struct FitOptions {
    int max_iterations = 5000;
    double gradient_tolerance = 1e-8;  // infinity norm
};

struct FitResult {
    ScalingParams params;
    double final_nll = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Full-batch gradient descent with backtracking line search from the
// identity transform; the result never has higher validation NLL than
// the identity.
FitResult fit_scaling(const LogitField& validation, ScalingKind kind,
                      const FitOptions& opts = {});

struct ReliabilityBin {
    double mean_predicted = 0.0;
    double accuracy = 0.0;
    int count = 0;
};

// Pools all (class probability, class == label) pairs, sorts by predicted
// probability and splits into `bins` equal-count bins.
std::vector<ReliabilityBin> reliability_curve(
    const std::vector<std::pair<std::vector<double>, int>>& predictions, int bins = 15);

// Recalibrates a probability field by treating log probabilities as
// logits (softmax(log p) = p, so identity params change nothing).
ProbField calibrate_field(const ProbField& field, const ScalingParams& params);

}  // namespace vizsolve

#endif
